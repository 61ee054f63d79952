/**
 * End-to-end planning pipeline shared by the CLI and the HTTP service:
 * sketches -> preferred paths, spec graph -> formula -> automaton ->
 * product -> plan.
 */
#pragma once

#include "eltl/automata.hpp"
#include "eltl/planner.hpp"
#include "eltl/roadmap.hpp"
#include "eltl/sketch_match.hpp"
#include "eltl/spec_graph.hpp"

#include <chrono>
#include <optional>
#include <variant>
#include <vector>

namespace eltl
{
  struct MatchedSketch
  {
    std::vector<Point> raw;
    SketchMatch match;
    double bmp_ms = 0.0;
  };

  using SpecSource = std::variant<std::monostate, SpecGraph, Formula>;

  struct PipelineConfig
  {
    SamplingParams sampling;
    MatchConfig match;
    PlannerConfig planner;
    LegalityTable legality = LegalityTable::defaults();
  };

  namespace detail
  {
    inline double elapsed_ms(std::chrono::steady_clock::time_point t0)
    {
      return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
  }

  inline MatchedSketch match_sketch(const std::vector<Point> &raw, const Roadmap &r, const TransitionSystem &ts,
                                    const SamplingParams &params, const MatchConfig &cfg)
  {
    const auto t0 = std::chrono::steady_clock::now();
    SketchMatch m = match_stroke(raw, r, ts, params, cfg);
    return {raw, std::move(m), detail::elapsed_ms(t0)};
  }

  /// Formula for a session: explicit formula, spec graph, or the default spec derived from sketches.
  inline Formula resolve_formula(const SpecSource &spec, const Roadmap &r, const std::vector<MatchedSketch> &sketches,
                                 const LegalityTable &legality)
  {
    if (const auto *f = std::get_if<Formula>(&spec))
      return *f;
    if (const auto *g = std::get_if<SpecGraph>(&spec))
      return graph_to_formula(*g, legality);
    if (sketches.empty())
      throw Error(ErrorCode::conflict, "no specification and no sketches");
    std::vector<std::pair<NodeId, NodeId>> ends;
    for (const auto &s : sketches)
      ends.emplace_back(s.match.sampled.start_node, s.match.sampled.end_node);
    return graph_to_formula(default_spec_graph(r, ends), legality);
  }

  inline std::vector<PreferredPath> preferred_paths(const std::vector<MatchedSketch> &sketches)
  {
    std::vector<PreferredPath> d;
    for (const auto &s : sketches)
      d.push_back(preferred_path_from_walk(s.match.bmp.walk));
    return d;
  }

  /// Plan for already-matched sketches; fills stats.plan_ms, bmp_ms and cwpd.
  inline Plan plan_with_sketches(const Roadmap &r, const SpecSource &spec, const std::vector<MatchedSketch> &sketches,
                                 const PipelineConfig &cfg = {})
  {
    const TransitionSystem ts = to_transition_system(r);
    const Formula f = resolve_formula(spec, r, sketches, cfg.legality);
    const auto t0 = std::chrono::steady_clock::now();
    const BuchiAutomaton ba = ltl_to_buchi(f);
    const ProductAutomaton pa = build_product(ts, ba);
    Plan plan = extended_planner(pa, ts, preferred_paths(sketches), cfg.planner);
    plan.stats.plan_ms = detail::elapsed_ms(t0);
    for (const auto &s : sketches)
    {
      plan.stats.bmp_ms += s.bmp_ms;
      plan.stats.cwpd.push_back(s.match.bmp.cwpd);
    }
    return plan;
  }
}
