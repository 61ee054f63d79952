/**
 * Sketch to roadmap matching.
 *
 * A user stroke is resampled into a point sequence p0 whose first and last
 * points sit on the nearest roadmap nodes. The best matching path (BMP) is the
 * length-|p0| walk between those nodes minimising the component-wise path
 * distance (CWPD): the sum over i of the distance from p0[i] to the last edge
 * the walk has traversed by step i.
 *
 * Two solvers are provided:
 *   - MatchMode::paper  per-node greedy table, one entry per roadmap node;
 *   - MatchMode::exact  dynamic programme keyed by the last directed edge,
 *                       which is the true minimum over all walks.
 */
#pragma once

#include "eltl/error.hpp"
#include "eltl/geometry.hpp"
#include "eltl/roadmap.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace eltl
{
  struct SampledPath
  {
    std::vector<Point> points;
    NodeId start_node;
    NodeId end_node;
  };

  struct Walk
  {
    std::vector<NodeId> nodes;

    friend bool operator==(const Walk &, const Walk &) = default;
  };

  enum class MatchMode
  {
    paper,
    exact
  };

  struct MatchConfig
  {
    MatchMode mode = MatchMode::paper;
    /// Paper mode only: never step back along the undirected edge last traversed.
    bool forbid_immediate_edge_repeat = true;
    double snap_radius = 50.0;
  };

  struct BmpResult
  {
    Walk walk;
    double cwpd = 0.0;
  };

  inline MatchMode parse_match_mode(const std::string &s)
  {
    if (s == "paper")
      return MatchMode::paper;
    if (s == "exact")
      return MatchMode::exact;
    throw Error(ErrorCode::invalid_input, "unknown match mode '" + s + "'");
  }

  // ------------------------------------------------------- sampled path

  namespace detail
  {
    inline const RoadmapNode &nearest_node(const Roadmap &r, const Point &p)
    {
      const RoadmapNode *best = nullptr;
      double best_d = std::numeric_limits<double>::infinity();
      for (const auto &n : r.nodes)
      {
        const double d = distance(n.pos, p);
        if (d < best_d || (d == best_d && n.id < best->id))
        {
          best = &n;
          best_d = d;
        }
      }
      return *best;
    }
  }

  /// Snap the stroke endpoints to their nearest nodes and resample the interior.
  inline SampledPath build_sampled_path(std::span<const Point> raw, const Roadmap &r,
                                        const SamplingParams &params = {}, const MatchConfig &cfg = {})
  {
    if (raw.empty())
      throw Error(ErrorCode::invalid_input, "empty stroke");
    if (r.nodes.empty())
      throw Error(ErrorCode::conflict, "no nodes");
    if (!(cfg.snap_radius > 0.0))
      throw Error(ErrorCode::invalid_input, "snap_radius must be positive");

    const RoadmapNode &first = detail::nearest_node(r, raw.front());
    const RoadmapNode &last = detail::nearest_node(r, raw.back());
    if (distance(first.pos, raw.front()) > cfg.snap_radius || distance(last.pos, raw.back()) > cfg.snap_radius)
      throw Error(ErrorCode::invalid_input, "unsnappable endpoint");

    SampledPath sp;
    sp.start_node = first.id;
    sp.end_node = last.id;
    sp.points.push_back(first.pos);
    for (const Point &p : sample_stroke(raw, params))
      sp.points.push_back(p);
    sp.points.push_back(last.pos);
    return sp;
  }

  // ---------------------------------------------------------------- CWPD

  namespace detail
  {
    inline Segment segment_of(const TransitionSystem &ts, int tail, int head)
    {
      return {ts.positions[tail < 0 ? head : tail], ts.positions[head]};
    }

    inline std::vector<int> walk_indices(const Walk &w, const TransitionSystem &ts)
    {
      std::vector<int> idx;
      idx.reserve(w.nodes.size());
      for (const auto &id : w.nodes)
        idx.push_back(ts.index_of(id));
      for (std::size_t i = 1; i < idx.size(); ++i)
        if (idx[i] != idx[i - 1] && !ts.has_transition(idx[i - 1], idx[i]))
          throw Error(ErrorCode::invalid_input, "not a walk");
      return idx;
    }

    inline Walk walk_from_indices(std::span<const int> idx, const TransitionSystem &ts)
    {
      Walk w;
      for (int i : idx)
        w.nodes.push_back(ts.ids[i]);
      return w;
    }

    inline void check_sampled_path(const SampledPath &p0, const TransitionSystem &ts)
    {
      if (p0.points.size() < 2)
        throw Error(ErrorCode::invalid_input, "sampled path needs at least 2 points");
      const Point &s = ts.positions[ts.index_of(p0.start_node)];
      const Point &e = ts.positions[ts.index_of(p0.end_node)];
      if (distance(s, p0.points.front()) > 1e-9 || distance(e, p0.points.back()) > 1e-9)
        throw Error(ErrorCode::invalid_input, "sampled path endpoints off their nodes");
    }

    // Subgraph view of a roadmap without requiring a start node.
    inline TransitionSystem graph_view(const Roadmap &r)
    {
      Roadmap copy = r;
      if (!copy.start && !copy.nodes.empty())
        copy.start = copy.nodes.front().id;
      return to_transition_system(copy);
    }
  }

  /// Component-wise path distance; w must have exactly |p0| nodes.
  inline double cwpd(const SampledPath &p0, const Walk &w, const TransitionSystem &ts)
  {
    if (w.nodes.size() != p0.points.size())
      throw Error(ErrorCode::invalid_input, "walk/path length mismatch");
    const auto idx = detail::walk_indices(w, ts);
    double total = 0.0;
    int tail = -1; // previous node differing from the current one
    for (std::size_t i = 0; i < idx.size(); ++i)
    {
      if (i > 0 && idx[i] != idx[i - 1])
        tail = idx[i - 1];
      total += point_segment_distance(p0.points[i], detail::segment_of(ts, tail, idx[i]));
    }
    return total;
  }

  inline double cwpd(const SampledPath &p0, const Walk &w, const Roadmap &r)
  {
    return cwpd(p0, w, detail::graph_view(r));
  }

  // ---------------------------------------------------------------- BMP

  namespace detail
  {
    inline BmpResult find_bmp_paper(const SampledPath &p0, const TransitionSystem &ts, const MatchConfig &cfg)
    {
      constexpr double inf = std::numeric_limits<double>::infinity();
      const int m = ts.size();
      const std::size_t n = p0.points.size();
      const int start = ts.index_of(p0.start_node);
      const int end = ts.index_of(p0.end_node);

      struct Entry
      {
        double cost = inf;
        int tail = -1; // last edge (tail -> node); -1 while still at the start
        int pred = -1;
      };
      std::vector<std::vector<Entry>> table(n, std::vector<Entry>(m));
      table[0][start] = {0.0, -1, start};

      for (std::size_t i = 1; i < n; ++i)
      {
        const Point &p = p0.points[i];
        const auto &prev = table[i - 1];
        auto &cur = table[i];
        // stay branch: extend bmp[i-1][j] by repeating q_j
        for (int j = 0; j < m; ++j)
        {
          if (prev[j].cost == inf)
            continue;
          const double cand = prev[j].cost + point_segment_distance(p, segment_of(ts, prev[j].tail, j));
          if (cand < cur[j].cost)
            cur[j] = {cand, prev[j].tail, j};
        }
        // move branch: extend bmp[i-1][j] by a neighbour q_k
        for (int j = 0; j < m; ++j)
        {
          if (prev[j].cost == inf)
            continue;
          for (const auto &arc : ts.adjacency[j])
          {
            if (cfg.forbid_immediate_edge_repeat && arc.to == prev[j].tail)
              continue;
            const double cand = prev[j].cost + point_segment_distance(p, segment_of(ts, j, arc.to));
            if (cand < cur[arc.to].cost)
              cur[arc.to] = {cand, j, j};
          }
        }
      }

      if (table[n - 1][end].cost == inf)
        throw Error(ErrorCode::infeasible, "no feasible matching path");
      std::vector<int> idx(n);
      idx[n - 1] = end;
      for (std::size_t i = n - 1; i > 0; --i)
        idx[i - 1] = table[i][idx[i]].pred;
      return {walk_from_indices(idx, ts), table[n - 1][end].cost};
    }

    inline BmpResult find_bmp_exact(const SampledPath &p0, const TransitionSystem &ts)
    {
      constexpr double inf = std::numeric_limits<double>::infinity();
      const int m = ts.size();
      const std::size_t n = p0.points.size();
      const int start = ts.index_of(p0.start_node);
      const int end = ts.index_of(p0.end_node);

      // State 0: still at the start node, no edge traversed.
      // State 1 + a: last traversed directed arc a.
      std::vector<int> arc_tail{-1}, arc_head{start};
      std::vector<std::vector<int>> arcs_out(m);
      for (int u = 0; u < m; ++u)
        for (const auto &a : ts.adjacency[u])
        {
          arcs_out[u].push_back(static_cast<int>(arc_tail.size()));
          arc_tail.push_back(u);
          arc_head.push_back(a.to);
        }
      const std::size_t states = arc_tail.size();

      std::vector<double> prev(states, inf), cur(states);
      std::vector<std::vector<int>> pred(n, std::vector<int>(states, -1));
      std::vector<double> best_at(m);
      std::vector<int> best_state(m);
      prev[0] = 0.0;

      for (std::size_t i = 1; i < n; ++i)
      {
        const Point &p = p0.points[i];
        std::fill(cur.begin(), cur.end(), inf);
        std::fill(best_at.begin(), best_at.end(), inf);
        std::fill(best_state.begin(), best_state.end(), -1);
        for (std::size_t s = 0; s < states; ++s)
        {
          if (prev[s] == inf)
            continue;
          const int v = arc_head[s];
          cur[s] = prev[s] + point_segment_distance(p, segment_of(ts, arc_tail[s], v));
          pred[i][s] = static_cast<int>(s);
          if (prev[s] < best_at[v])
          {
            best_at[v] = prev[s];
            best_state[v] = static_cast<int>(s);
          }
        }
        for (int v = 0; v < m; ++v)
        {
          if (best_at[v] == inf)
            continue;
          for (int t : arcs_out[v])
          {
            const double cand = best_at[v] + point_segment_distance(p, segment_of(ts, v, arc_head[t]));
            if (cand < cur[t])
            {
              cur[t] = cand;
              pred[i][t] = best_state[v];
            }
          }
        }
        std::swap(prev, cur);
      }

      int best = -1;
      for (std::size_t s = 0; s < states; ++s)
        if (arc_head[s] == end && prev[s] < inf && (best < 0 || prev[s] < prev[best]))
          best = static_cast<int>(s);
      if (best < 0)
        throw Error(ErrorCode::infeasible, "no feasible matching path");

      std::vector<int> idx(n);
      int s = best;
      for (std::size_t i = n - 1;; --i)
      {
        idx[i] = arc_head[s];
        if (i == 0)
          break;
        s = pred[i][s];
      }
      return {walk_from_indices(idx, ts), prev[best]};
    }
  }

  /**
   * Best matching path between the snapped endpoints of p0.
   *
   * Throws Error(infeasible, "no feasible matching path") when no walk of
   * length |p0| connects the endpoints.
   */
  inline BmpResult find_bmp(const SampledPath &p0, const TransitionSystem &ts, const MatchConfig &cfg = {})
  {
    detail::check_sampled_path(p0, ts);
    return cfg.mode == MatchMode::paper ? detail::find_bmp_paper(p0, ts, cfg)
                                        : detail::find_bmp_exact(p0, ts);
  }

  /**
   * Exhaustive BMP over every length-|p0| walk. Test oracle; refuses instances
   * with more than 1e7 candidate walks. Ties keep the lexicographically
   * smallest node sequence.
   */
  inline BmpResult brute_force_bmp(const SampledPath &p0, const TransitionSystem &ts)
  {
    detail::check_sampled_path(p0, ts);
    const std::size_t n = p0.points.size();
    std::size_t branching = 1;
    for (const auto &adj : ts.adjacency)
      branching = std::max(branching, adj.size() + 1);
    if ((n - 1) * std::log10(static_cast<double>(branching)) > 7.0)
      throw Error(ErrorCode::limit, "oracle limit exceeded");

    const int start = ts.index_of(p0.start_node);
    const int end = ts.index_of(p0.end_node);
    std::vector<int> walk{start}, best_walk;
    double best = std::numeric_limits<double>::infinity();

    // Children are visited in ascending index order, so the first walk found
    // at a given cost is the lexicographically smallest.
    auto dfs = [&](auto &&self, int tail, double cost) -> void
    {
      const std::size_t i = walk.size();
      const int v = walk.back();
      if (i == n)
      {
        if (v == end && cost < best)
        {
          best = cost;
          best_walk = walk;
        }
        return;
      }
      const Point &p = p0.points[i];
      std::vector<std::pair<int, int>> next{{v, tail}}; // (node, tail)
      for (const auto &a : ts.adjacency[v])
        next.emplace_back(a.to, v);
      std::sort(next.begin(), next.end());
      for (const auto &[u, t] : next)
      {
        walk.push_back(u);
        self(self, t, cost + point_segment_distance(p, detail::segment_of(ts, t, u)));
        walk.pop_back();
      }
    };
    dfs(dfs, -1, 0.0);
    if (best_walk.empty())
      throw Error(ErrorCode::infeasible, "no feasible matching path");
    return {detail::walk_from_indices(best_walk, ts), best};
  }

  // ------------------------------------------------- stroke -> BMP helper

  struct SketchMatch
  {
    SampledPath sampled;
    BmpResult bmp;
    SamplingParams params_used;
  };

  /// build_sampled_path + find_bmp, halving d_m up to three times while no
  /// walk of the sampled length exists.
  inline SketchMatch match_stroke(std::span<const Point> raw, const Roadmap &r, const TransitionSystem &ts,
                                  SamplingParams params, const MatchConfig &cfg, int max_halvings = 3)
  {
    for (int attempt = 0;; ++attempt)
    {
      SampledPath sp = build_sampled_path(raw, r, params, cfg);
      try
      {
        BmpResult bmp = find_bmp(sp, ts, cfg);
        return {std::move(sp), std::move(bmp), params};
      }
      catch (const Error &e)
      {
        if (e.code() != ErrorCode::infeasible || attempt >= max_halvings)
          throw;
      }
      params.d_m /= 2.0;
    }
  }

  // ------------------------------------------------------ sketch fixtures

  struct SketchFile
  {
    std::vector<std::vector<Point>> strokes;
    std::optional<SamplingParams> params;
  };

  inline SketchFile sketches_from_json(const nlohmann::json &j)
  {
    detail::reject_unknown_keys(j, {"strokes", "params"}, "sketches");
    SketchFile f;
    const auto strokes = detail::required<nlohmann::json>(j, "strokes", "sketches");
    if (!strokes.is_array())
      throw Error(ErrorCode::parse, "sketches.strokes: expected array");
    for (std::size_t s = 0; s < strokes.size(); ++s)
    {
      if (!strokes[s].is_array())
        throw Error(ErrorCode::parse, "strokes[" + std::to_string(s) + "]: expected array");
      std::vector<Point> stroke;
      for (std::size_t i = 0; i < strokes[s].size(); ++i)
      {
        const auto &pt = strokes[s][i];
        const std::string where = "strokes[" + std::to_string(s) + "][" + std::to_string(i) + "]";
        detail::reject_unknown_keys(pt, {"x", "y"}, where);
        stroke.push_back({detail::required<double>(pt, "x", where), detail::required<double>(pt, "y", where)});
      }
      f.strokes.push_back(std::move(stroke));
    }
    if (j.contains("params"))
    {
      const auto &p = j.at("params");
      detail::reject_unknown_keys(p, {"d_m", "theta_m"}, "params");
      SamplingParams sp;
      if (p.contains("d_m"))
        sp.d_m = detail::required<double>(p, "d_m", "params");
      if (p.contains("theta_m"))
        sp.theta_m = detail::required<double>(p, "theta_m", "params");
      f.params = sp;
    }
    return f;
  }

  inline SketchFile load_sketches(std::string_view bytes)
  {
    return sketches_from_json(detail::parse_document(bytes));
  }

  inline nlohmann::json points_to_json(std::span<const Point> pts)
  {
    nlohmann::json a = nlohmann::json::array();
    for (const auto &p : pts)
      a.push_back({{"x", p.x}, {"y", p.y}});
    return a;
  }
}
