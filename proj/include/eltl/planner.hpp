/**
 * Preference-aware LTL planner.
 *
 * Preferred paths (matched sketches) get priority by dropping the weight of
 * the product transitions that project onto their endpoint pair to an
 * infinitesimal alpha. The cheapest accepting lasso on the biased product is
 * then expanded into roadmap waypoints, substituting a preferred path for a
 * product transition whenever the automaton can stutter through its interior.
 * The specification always wins: the expanded plan is re-checked against the
 * formula before it is returned.
 */
#pragma once

#include "eltl/automata.hpp"
#include "eltl/error.hpp"
#include "eltl/ltl.hpp"
#include "eltl/roadmap.hpp"
#include "eltl/sketch_match.hpp"

#include <json.hpp>

#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace eltl
{
  struct PreferredPath
  {
    NodeId from;
    NodeId to;
    Walk waypoints; ///< from ... to, no consecutive repeats
  };

  /// Preferred path from a BMP walk: consecutive repeats collapse.
  inline PreferredPath preferred_path_from_walk(const Walk &w)
  {
    if (w.nodes.empty())
      throw Error(ErrorCode::invalid_input, "empty walk");
    PreferredPath p;
    for (const auto &id : w.nodes)
      if (p.waypoints.nodes.empty() || p.waypoints.nodes.back() != id)
        p.waypoints.nodes.push_back(id);
    p.from = w.nodes.front();
    p.to = w.nodes.back();
    return p;
  }

  struct PlannerConfig
  {
    /// Weight given to preferred transitions; must stay below
    /// w_min / (|transitions| + 1). Unset means w_min / (2 (|transitions| + 1)).
    std::optional<double> alpha;
  };

  enum class SegmentSource
  {
    preferred,
    fallback
  };

  struct PlanSegment
  {
    NodeId from;
    NodeId to;
    SegmentSource source = SegmentSource::fallback;
    std::vector<NodeId> waypoints; ///< from ... to
    bool in_suffix = false;
  };

  struct PlanStats
  {
    double bmp_ms = 0.0;
    double plan_ms = 0.0;
    std::vector<double> cwpd;
  };

  struct Plan
  {
    std::vector<NodeId> prefix;
    std::vector<NodeId> suffix; ///< cycle repeated after the prefix; empty = stop at the last prefix node
    std::vector<PlanSegment> segments;
    Formula formula = Formula::truth();
    PlanStats stats;
  };

  inline double min_weight(const ProductAutomaton &pa)
  {
    double w = std::numeric_limits<double>::infinity();
    for (const auto &o : pa.out)
      for (const auto &t : o)
        w = std::min(w, t.base_weight);
    return w;
  }

  inline double default_alpha(const ProductAutomaton &pa)
  {
    const double w = min_weight(pa);
    if (!std::isfinite(w))
      return 1.0;
    return w / (2.0 * (static_cast<double>(pa.transition_count()) + 1.0));
  }

  inline double resolve_alpha(const ProductAutomaton &pa, const PlannerConfig &cfg)
  {
    if (!cfg.alpha)
      return default_alpha(pa);
    const double bound = min_weight(pa) / (static_cast<double>(pa.transition_count()) + 1.0);
    if (!(*cfg.alpha > 0.0) || !(*cfg.alpha < bound))
      throw Error(ErrorCode::invalid_input, "alpha must lie in (0, w_min / (|transitions| + 1))");
    return *cfg.alpha;
  }

  /**
   * Set every product transition whose roadmap projection equals a preferred
   * path's endpoint pair to alpha. Pairs with no direct transition are skipped.
   */
  inline ProductAutomaton bias_weights(const ProductAutomaton &pa, const TransitionSystem &ts,
                                       const std::vector<PreferredPath> &d, const PlannerConfig &cfg = {})
  {
    ProductAutomaton out = pa;
    if (d.empty())
      return out;
    const double alpha = resolve_alpha(pa, cfg);
    for (const auto &path : d)
    {
      const int qi = ts.index_of(path.from);
      const int qj = ts.index_of(path.to);
      if (!ts.has_transition(qi, qj))
        continue;
      for (int s = 0; s < out.size(); ++s)
      {
        if (out.states[s].ts != qi)
          continue;
        for (auto &t : out.out[s])
          if (out.states[t.to].ts == qj)
          {
            t.weight = alpha;
            t.biased = true;
          }
      }
    }
    return out;
  }

  /// Restore the weights copied from the transition system.
  inline ProductAutomaton remove_bias(const ProductAutomaton &pa)
  {
    ProductAutomaton out = pa;
    for (auto &o : out.out)
      for (auto &t : o)
      {
        t.weight = t.base_weight;
        t.biased = false;
      }
    return out;
  }

  /**
   * Can the automaton follow pi_d from BA state s_h to s_m? Some run from s_h
   * must read every interior waypoint label and then the final node's label,
   * ending in s_m. A self-loop at s_h on each interior label is the simplest
   * such run.
   */
  inline bool valid_substitution(const PreferredPath &pi_d, int s_h, int s_m, const BuchiAutomaton &ba,
                                 const TransitionSystem &ts)
  {
    const auto &nodes = pi_d.waypoints.nodes;
    if (nodes.size() < 2)
      return false;
    std::vector<char> cur(ba.size(), 0);
    cur[s_h] = 1;
    for (std::size_t i = 1; i < nodes.size(); ++i)
    {
      const std::uint64_t letter = ba.letter_mask(ts.labels[ts.index_of(nodes[i])]);
      std::vector<char> next(ba.size(), 0);
      bool any = false;
      for (int s = 0; s < ba.size(); ++s)
        if (cur[s])
          for (const auto &t : ba.out[s])
            if (t.guard.satisfied_by(letter))
            {
              next[t.to] = 1;
              any = true;
            }
      if (!any)
        return false;
      cur = std::move(next);
    }
    return cur[s_m] != 0;
  }

  inline std::vector<Letter> labels_of(const TransitionSystem &ts, const std::vector<NodeId> &nodes)
  {
    std::vector<Letter> out;
    for (const auto &id : nodes)
      out.push_back(ts.labels[ts.index_of(id)]);
    return out;
  }

  /// Does the plan's label word satisfy its formula? A plan without suffix stays at its last node.
  inline bool plan_satisfies(const Plan &plan, const TransitionSystem &ts)
  {
    if (plan.prefix.empty())
      return false;
    auto prefix = labels_of(ts, plan.prefix);
    std::vector<Letter> cycle;
    if (plan.suffix.empty())
    {
      cycle.push_back(prefix.back());
      prefix.pop_back();
    }
    else
      cycle = labels_of(ts, plan.suffix);
    return eval_lasso(plan.formula, prefix, cycle);
  }

  /// Sum of roadmap weights along prefix and one turn of the suffix.
  inline double plan_weight(const Plan &plan, const TransitionSystem &ts)
  {
    double w = 0.0;
    auto add = [&](const NodeId &a, const NodeId &b)
    { w += *ts.weight(ts.index_of(a), ts.index_of(b)); };
    for (std::size_t i = 1; i < plan.prefix.size(); ++i)
      add(plan.prefix[i - 1], plan.prefix[i]);
    if (!plan.suffix.empty())
    {
      add(plan.prefix.back(), plan.suffix.front());
      for (std::size_t i = 1; i < plan.suffix.size(); ++i)
        add(plan.suffix[i - 1], plan.suffix[i]);
    }
    return w;
  }

  namespace detail
  {
    inline std::vector<NodeId> to_ids(const TransitionSystem &ts, const std::vector<int> &idx)
    {
      std::vector<NodeId> out;
      for (int i : idx)
        out.push_back(ts.ids[i]);
      return out;
    }

    // Expand one product transition into a roadmap segment.
    inline PlanSegment expand_transition(const ProductAutomaton &pa, const TransitionSystem &ts,
                                         const std::vector<PreferredPath> &d, int from, int to,
                                         bool allow_preferred)
    {
      const auto [qh, sh] = pa.states[from];
      const auto [qm, sm] = pa.states[to];
      PlanSegment seg;
      seg.from = ts.ids[qh];
      seg.to = ts.ids[qm];
      if (allow_preferred)
        for (const auto &pd : d)
          if (pd.from == seg.from && pd.to == seg.to && valid_substitution(pd, sh, sm, pa.ba, ts))
          {
            seg.source = SegmentSource::preferred;
            seg.waypoints = pd.waypoints.nodes;
            return seg;
          }
      auto path = ts_shortest_path(ts, qh, qm);
      if (!path)
        throw Error(ErrorCode::infeasible, "no roadmap path " + seg.from + " -> " + seg.to);
      seg.waypoints = to_ids(ts, *path);
      return seg;
    }

    inline Plan expand_lasso(const ProductAutomaton &pa, const TransitionSystem &ts,
                             const std::vector<PreferredPath> &d, const AcceptingLasso &lasso, bool allow_preferred)
    {
      Plan plan;
      plan.formula = pa.ba.formula;
      const int anchor = lasso.prefix.back();
      plan.prefix.push_back(ts.ids[pa.states[lasso.prefix.front()].ts]);
      for (std::size_t k = 1; k < lasso.prefix.size(); ++k)
      {
        auto seg = expand_transition(pa, ts, d, lasso.prefix[k - 1], lasso.prefix[k], allow_preferred);
        plan.prefix.insert(plan.prefix.end(), seg.waypoints.begin() + 1, seg.waypoints.end());
        plan.segments.push_back(std::move(seg));
      }
      int prev = anchor;
      for (int s : lasso.suffix)
      {
        auto seg = expand_transition(pa, ts, d, prev, s, allow_preferred);
        seg.in_suffix = true;
        plan.suffix.insert(plan.suffix.end(), seg.waypoints.begin() + 1, seg.waypoints.end());
        plan.segments.push_back(std::move(seg));
        prev = s;
      }
      return plan;
    }
  }

  struct PlannerResult
  {
    Plan plan;
    AcceptingLasso lasso; ///< on the biased product
  };

  /**
   * Plan on the product `pa` (built from `ts`) with preferred path set `d`.
   *
   * Throws Error(infeasible) when no accepting lasso exists.
   */
  inline PlannerResult extended_planner_run(const ProductAutomaton &pa, const TransitionSystem &ts,
                                            const std::vector<PreferredPath> &d, const PlannerConfig &cfg = {})
  {
    const ProductAutomaton biased = bias_weights(pa, ts, d, cfg);
    AcceptingLasso lasso = plan_lasso(biased);
    Plan plan = detail::expand_lasso(biased, ts, d, lasso, true);
    if (!plan_satisfies(plan, ts))
    {
      // Substitutions preserve the automaton run, so this is not expected;
      // fall back to the plain expansion rather than return a violating plan.
      plan = detail::expand_lasso(biased, ts, d, lasso, false);
      if (!plan_satisfies(plan, ts))
        throw Error(ErrorCode::infeasible, "plan failed the specification audit");
    }
    return {std::move(plan), std::move(lasso)};
  }

  inline Plan extended_planner(const ProductAutomaton &pa, const TransitionSystem &ts,
                               const std::vector<PreferredPath> &d, const PlannerConfig &cfg = {})
  {
    return extended_planner_run(pa, ts, d, cfg).plan;
  }

  // ------------------------------------------------------------ documents

  inline nlohmann::json plan_to_json(const Plan &plan)
  {
    nlohmann::json segs = nlohmann::json::array();
    for (const auto &s : plan.segments)
      segs.push_back({{"from", s.from},
                      {"to", s.to},
                      {"source", s.source == SegmentSource::preferred ? "preferred" : "fallback"},
                      {"waypoints", s.waypoints}});
    return {{"prefix", plan.prefix},
            {"suffix", plan.suffix},
            {"formula", format_formula(plan.formula)},
            {"segments", segs},
            {"stats", {{"bmp_ms", plan.stats.bmp_ms}, {"plan_ms", plan.stats.plan_ms}, {"cwpd", plan.stats.cwpd}}}};
  }

  inline Plan plan_from_json(const nlohmann::json &j)
  {
    using detail::required;
    detail::reject_unknown_keys(j, {"prefix", "suffix", "formula", "segments", "stats"}, "plan");
    Plan p;
    p.prefix = required<std::vector<std::string>>(j, "prefix", "plan");
    p.suffix = required<std::vector<std::string>>(j, "suffix", "plan");
    p.formula = parse_formula(required<std::string>(j, "formula", "plan"));
    std::size_t covered = 0;
    for (const auto &s : required<nlohmann::json>(j, "segments", "plan"))
    {
      PlanSegment seg;
      seg.from = required<std::string>(s, "from", "segment");
      seg.to = required<std::string>(s, "to", "segment");
      seg.source = required<std::string>(s, "source", "segment") == "preferred" ? SegmentSource::preferred
                                                                                 : SegmentSource::fallback;
      seg.waypoints = required<std::vector<std::string>>(s, "waypoints", "segment");
      covered += seg.waypoints.empty() ? 0 : seg.waypoints.size() - 1;
      seg.in_suffix = covered > (p.prefix.empty() ? 0 : p.prefix.size() - 1);
      p.segments.push_back(std::move(seg));
    }
    const auto stats = required<nlohmann::json>(j, "stats", "plan");
    p.stats.bmp_ms = required<double>(stats, "bmp_ms", "stats");
    p.stats.plan_ms = required<double>(stats, "plan_ms", "stats");
    p.stats.cwpd = required<std::vector<double>>(stats, "cwpd", "stats");
    return p;
  }
}
