#!/usr/bin/env python3
"""Regenerate the desk-scale fixtures under data/fixtures.

Strokes are hand-drawn imitations: densely sampled polylines with a seeded
wobble, so the files are stable across runs.
"""
import json
import math
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "data" / "fixtures"

NODES = [
    ("A", 100, 100, ["q0"]),
    ("B", 430, 100, ["q1"]),
    ("C", 760, 100, []),
    ("D", 760, 280, ["q2"]),
    ("E", 430, 280, []),
    ("F", 100, 280, []),
]
EDGES = [["A", "B"], ["B", "C"], ["C", "D"], ["D", "E"], ["E", "F"], ["F", "A"], ["B", "E"], ["B", "D"]]
POS = {n[0]: (n[1], n[2]) for n in NODES}


def roadmap():
    return {
        "version": 1,
        "image": {"path": "office.png", "width": 860, "height": 370},
        "nodes": [{"id": i, "x": float(x), "y": float(y), "props": p} for i, x, y, p in NODES],
        "edges": EDGES,
        "start": "A",
    }


def stroke(corners, seed, step=3.0, wobble=3.0):
    rng = random.Random(seed)
    phase, freq = rng.uniform(0, 2 * math.pi), rng.uniform(0.008, 0.015)
    pts = []
    for (x0, y0), (x1, y1) in zip(corners, corners[1:]):
        n = max(1, int(math.hypot(x1 - x0, y1 - y0) / step))
        for k in range(n):
            t = k / n
            pts.append((x0 + t * (x1 - x0), y0 + t * (y1 - y0)))
    pts.append(corners[-1])
    # slow hand drift plus sub-pixel jitter
    out = []
    for i, (x, y) in enumerate(pts):
        if 0 < i < len(pts) - 1:
            drift = wobble * math.sin(phase + freq * step * i)
            x += drift + rng.uniform(-0.2, 0.2)
            y += drift * 0.5 + rng.uniform(-0.2, 0.2)
        out.append({"x": round(x, 1), "y": round(y, 1)})
    return out


def canonical(doc):
    # Same layout the library writes: sorted keys, two-space indent.
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def spec(nodes, edges):
    return {
        "nodes": [{"id": i, "x": float(x), "y": float(y), "color": "green", "label": l} for i, x, y, l in nodes],
        "edges": [{"from": a, "to": b, "bo2": bo, "to2": t2, "to1": t1} for a, b, bo, t2, t1 in edges],
        "start": nodes[0][0],
    }


def main():
    exp1 = ROOT / "experiment1"
    exp2 = ROOT / "experiment2"
    exp1.mkdir(parents=True, exist_ok=True)
    exp2.mkdir(parents=True, exist_ok=True)

    for d in (exp1, exp2):
        (d / "roadmap.json").write_text(canonical(roadmap()))

    # (q0 -> X q1) && (q0 && F q2)
    (exp1 / "spec.json").write_text(canonical(spec(
        [("s0", 100, 60, "q0"), ("s1", 430, 60, "q1"), ("s2", 760, 320, "q2")],
        [("s0", "s1", "IMPLIES", "NEXT", "EPSILON"), ("s0", "s2", "AND", "FUTURE", "EPSILON")])))
    # q0 && G F (q1 && F q2)
    (exp2 / "spec.json").write_text(canonical(spec(
        [("s0", 100, 60, "q0"), ("s1", 430, 60, "q1"), ("s2", 760, 320, "q2")],
        [("s0", "s1", "AND", "FUTURE", "EPSILON"), ("s1", "s2", "AND", "FUTURE", "EPSILON"),
         ("s2", "s1", "AND", "FUTURE", "EPSILON")])))

    b, c, d, e = POS["B"], POS["C"], POS["D"], POS["E"]
    s1 = stroke([(b[0] + 4, b[1] - 3), (c[0] - 6, c[1] + 2), (d[0] + 3, d[1] - 4)], seed=1)
    s2 = stroke([(d[0] - 3, d[1] + 4), (e[0] + 5, e[1] - 2), (b[0] - 4, b[1] + 3)], seed=2)
    (exp1 / "sketches.json").write_text(json.dumps({"strokes": [s1], "params": {"d_m": 65, "theta_m": 20}}) + "\n")
    (exp2 / "sketches.json").write_text(json.dumps({"strokes": [s2], "params": {"d_m": 18.5, "theta_m": 20}}) + "\n")


if __name__ == "__main__":
    main()
