// Shared fixtures and independent oracles for the unit and acceptance tests.
#pragma once

#include "eltl/automata.hpp"
#include "eltl/planner.hpp"
#include "eltl/roadmap.hpp"
#include "eltl/sketch_match.hpp"
#include "eltl/spec_graph.hpp"

#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace eltl
{
  inline void PrintTo(const Walk &w, std::ostream *os)
  {
    *os << "[";
    for (std::size_t i = 0; i < w.nodes.size(); ++i)
      *os << (i ? "," : "") << w.nodes[i];
    *os << "]";
  }
}

namespace eltl::testing
{
  inline std::string read_file(const std::string &path)
  {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  inline std::string fixture(const std::string &rel)
  {
    return std::string(ELTL_DATA_DIR) + "/fixtures/" + rel;
  }

  struct NodeSpec
  {
    std::string id;
    double x, y;
    PropSet props = {};
  };

  inline Roadmap make_roadmap(const std::vector<NodeSpec> &nodes,
                              const std::vector<std::pair<std::string, std::string>> &edges,
                              std::optional<std::string> start = std::nullopt)
  {
    Roadmap r;
    r.image = {"test.png", 0, 0};
    for (const auto &n : nodes)
      r.nodes.push_back({n.id, {n.x, n.y}, n.props});
    r.edges = edges;
    r.start = start ? start : std::optional<std::string>(nodes.front().id);
    validate_roadmap(r);
    return r;
  }

  /// The six-node office roadmap shared by both experiment fixtures.
  inline Roadmap office_roadmap()
  {
    return load_roadmap(read_file(fixture("experiment1/roadmap.json")));
  }

  // ------------------------------------------------------------ random graphs

  /// Connected planar-ish graph: random points, a random spanning tree over
  /// nearest earlier nodes, then a few extra short edges.
  inline Roadmap random_roadmap(std::mt19937 &rng, int n, double extra_edge_p = 0.3,
                                const std::vector<std::string> &props = {})
  {
    std::uniform_real_distribution<double> coord(0.0, 100.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<NodeSpec> nodes;
    for (int i = 0; i < n; ++i)
    {
      NodeSpec s{"n" + std::to_string(i), coord(rng), coord(rng), {}};
      for (const auto &p : props)
        if (unit(rng) < 0.3)
          s.props.insert(p);
      nodes.push_back(s);
    }
    // Avoid coincident nodes so weights stay positive.
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j)
        if (std::hypot(nodes[i].x - nodes[j].x, nodes[i].y - nodes[j].y) < 1e-3)
          nodes[i].x += 1.0;
    std::vector<std::pair<std::string, std::string>> edges;
    auto has = [&](int a, int b)
    {
      for (const auto &e : edges)
        if ((e.first == nodes[a].id && e.second == nodes[b].id) || (e.first == nodes[b].id && e.second == nodes[a].id))
          return true;
      return false;
    };
    for (int i = 1; i < n; ++i)
    {
      std::uniform_int_distribution<int> pick(0, i - 1);
      edges.emplace_back(nodes[pick(rng)].id, nodes[i].id);
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (!has(i, j) && unit(rng) < extra_edge_p)
          edges.emplace_back(nodes[i].id, nodes[j].id);
    return make_roadmap(nodes, edges);
  }

  /// Random sampled path of length n between two random nodes of `ts`:
  /// endpoints at the node positions, interior points anywhere on the map.
  inline SampledPath random_sampled_path(std::mt19937 &rng, const TransitionSystem &ts, int n)
  {
    std::uniform_int_distribution<int> node(0, ts.size() - 1);
    std::uniform_real_distribution<double> coord(-10.0, 110.0);
    SampledPath p;
    const int a = node(rng), b = node(rng);
    p.start_node = ts.ids[a];
    p.end_node = ts.ids[b];
    p.points.push_back(ts.positions[a]);
    for (int i = 1; i + 1 < n; ++i)
      p.points.push_back({coord(rng), coord(rng)});
    p.points.push_back(ts.positions[b]);
    return p;
  }

  /// Uniform random walk of n nodes (stays allowed) starting at a random node.
  inline Walk random_walk(std::mt19937 &rng, const TransitionSystem &ts, int n)
  {
    std::uniform_int_distribution<int> node(0, ts.size() - 1);
    int cur = node(rng);
    Walk w{{ts.ids[cur]}};
    for (int i = 1; i < n; ++i)
    {
      const auto &adj = ts.adjacency[cur];
      std::uniform_int_distribution<int> pick(0, static_cast<int>(adj.size()));
      const int k = pick(rng);
      if (k < static_cast<int>(adj.size()))
        cur = adj[k].to;
      w.nodes.push_back(ts.ids[cur]);
    }
    return w;
  }

  // ------------------------------------------------------------ CWPD oracle

  /// Component-wise path distance straight from its definition: each sample
  /// is measured against the segment from the last node of w that differs
  /// from w[i] (scanning backwards) to w[i].
  inline double cwpd_by_definition(const std::vector<Point> &p0, const std::vector<NodeId> &w, const Roadmap &r)
  {
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
    {
      const Point head = r.find(w[i])->pos;
      Point tail = head;
      for (std::size_t k = i; k-- > 0;)
        if (w[k] != w[i])
        {
          tail = r.find(w[k])->pos;
          break;
        }
      total += point_segment_distance(p0[i], {tail, head});
    }
    return total;
  }

  // ------------------------------------------------------------ LTL oracles

  /// Word positions of prefix.cycle^w: position j maps into the finite table.
  struct LassoWord
  {
    std::vector<Letter> letters;
    std::size_t loop;

    std::size_t norm(std::size_t j) const
    {
      return j < letters.size() ? j : loop + (j - loop) % (letters.size() - loop);
    }
  };

  /// Direct recursive semantics. From any position all distinct future
  /// positions appear within the next |word| steps, so every temporal search
  /// looks at exactly that window. No fixpoints, no memoisation.
  inline bool naive_holds(const Formula &f, const LassoWord &w, std::size_t i)
  {
    using K = Formula::Kind;
    const std::size_t L = w.letters.size();
    switch (f.kind())
    {
    case K::True:
      return true;
    case K::False:
      return false;
    case K::Atom:
      return w.letters[w.norm(i)].count(f.name()) > 0;
    case K::Not:
      return !naive_holds(f.lhs(), w, i);
    case K::And:
      return naive_holds(f.lhs(), w, i) && naive_holds(f.rhs(), w, i);
    case K::Or:
      return naive_holds(f.lhs(), w, i) || naive_holds(f.rhs(), w, i);
    case K::Implies:
      return !naive_holds(f.lhs(), w, i) || naive_holds(f.rhs(), w, i);
    case K::Next:
      return naive_holds(f.lhs(), w, w.norm(i + 1));
    case K::Future:
      for (std::size_t j = i; j < i + L; ++j)
        if (naive_holds(f.lhs(), w, w.norm(j)))
          return true;
      return false;
    case K::Always:
      for (std::size_t j = i; j < i + L; ++j)
        if (!naive_holds(f.lhs(), w, w.norm(j)))
          return false;
      return true;
    case K::Until:
      for (std::size_t j = i; j < i + L; ++j)
      {
        if (naive_holds(f.rhs(), w, w.norm(j)))
          return true;
        if (!naive_holds(f.lhs(), w, w.norm(j)))
          return false;
      }
      return false;
    }
    return false;
  }

  inline bool naive_eval(const Formula &f, const std::vector<Letter> &prefix, const std::vector<Letter> &cycle)
  {
    LassoWord w{prefix, prefix.size()};
    w.letters.insert(w.letters.end(), cycle.begin(), cycle.end());
    return naive_holds(f, w, 0);
  }

  /// Every formula with at most max_size AST nodes over the given atoms.
  inline std::vector<Formula> enumerate_formulas(const std::vector<std::string> &atoms, std::size_t max_size)
  {
    using K = Formula::Kind;
    std::vector<std::vector<Formula>> by_size(max_size + 1);
    for (const auto &a : atoms)
      by_size[1].push_back(Formula::atom(a));
    for (std::size_t s = 2; s <= max_size; ++s)
    {
      for (K k : {K::Not, K::Next, K::Future, K::Always})
        for (const auto &c : by_size[s - 1])
          by_size[s].push_back(Formula::unary(k, c));
      for (K k : {K::And, K::Or, K::Implies, K::Until})
        for (std::size_t l = 1; l + 1 < s; ++l)
          for (const auto &a : by_size[l])
            for (const auto &b : by_size[s - 1 - l])
              by_size[s].push_back(Formula::binary(k, a, b));
    }
    std::vector<Formula> all;
    for (const auto &v : by_size)
      all.insert(all.end(), v.begin(), v.end());
    return all;
  }

  struct Lasso
  {
    std::vector<Letter> prefix, cycle;
  };

  /// All lassos with non-empty cycle and |prefix| + |cycle| <= max_len over 2^atoms.
  inline std::vector<Lasso> enumerate_lassos(const std::vector<std::string> &atoms, std::size_t max_len)
  {
    std::vector<Letter> letters;
    for (std::size_t m = 0; m < (std::size_t{1} << atoms.size()); ++m)
    {
      Letter l;
      for (std::size_t b = 0; b < atoms.size(); ++b)
        if (m >> b & 1)
          l.insert(atoms[b]);
      letters.push_back(l);
    }
    std::vector<Lasso> out;
    for (std::size_t len = 1; len <= max_len; ++len)
    {
      std::size_t words = 1;
      for (std::size_t i = 0; i < len; ++i)
        words *= letters.size();
      for (std::size_t code = 0; code < words; ++code)
      {
        std::vector<Letter> word;
        for (std::size_t i = 0, c = code; i < len; ++i, c /= letters.size())
          word.push_back(letters[c % letters.size()]);
        for (std::size_t split = 0; split < len; ++split)
          out.push_back({{word.begin(), word.begin() + split}, {word.begin() + split, word.end()}});
      }
    }
    return out;
  }

  inline Formula random_formula(std::mt19937 &rng, const std::vector<std::string> &atoms, int budget)
  {
    using K = Formula::Kind;
    std::uniform_int_distribution<int> coin(0, 99);
    if (budget <= 1 || coin(rng) < 20)
    {
      const int r = coin(rng);
      if (r < 5)
        return Formula::truth();
      if (r < 10)
        return Formula::falsity();
      return Formula::atom(atoms[coin(rng) % atoms.size()]);
    }
    static constexpr K unary[] = {K::Not, K::Next, K::Future, K::Always};
    static constexpr K binary[] = {K::And, K::Or, K::Implies, K::Until};
    if (budget == 2 || coin(rng) < 40)
      return Formula::unary(unary[coin(rng) % 4], random_formula(rng, atoms, budget - 1));
    std::uniform_int_distribution<int> split(1, budget - 2);
    const int l = split(rng);
    return Formula::binary(binary[coin(rng) % 4], random_formula(rng, atoms, l),
                           random_formula(rng, atoms, budget - 1 - l));
  }

  // ------------------------------------------------------------ planner scenarios

  struct PlannerScenario
  {
    Roadmap roadmap;
    Formula formula = Formula::truth();
    std::vector<PreferredPath> preferred;
  };

  inline std::vector<NodeId> path_through(const TransitionSystem &ts, int a, int via, int b)
  {
    auto first = ts_shortest_path(ts, a, via);
    auto second = ts_shortest_path(ts, via, b);
    std::vector<NodeId> out;
    for (int i : *first)
      out.push_back(ts.ids[i]);
    for (std::size_t k = 1; k < second->size(); ++k)
      out.push_back(ts.ids[(*second)[k]]);
    return out;
  }

  /// Random roadmap labelled with q1, q2 and obs, a formula from a fixed
  /// template pool (mostly guarded by G !obs) and preferred paths with
  /// distinct endpoint pairs, some routed through an obs node on purpose.
  inline PlannerScenario random_planner_scenario(std::mt19937 &rng)
  {
    static const std::vector<std::string> templates = {
        "G !obs && F q1",
        "G !obs && F q1 && F q2",
        "G !obs && G F q1 && G F q2",
        "G !obs && F (q1 && F q2)",
        "F q1 && F q2",
        "G F q1",
        "G !obs && (!q2 U q1)",
        "G !obs && X X q1 || F q2",
    };
    std::uniform_int_distribution<int> n_nodes(5, 9);
    PlannerScenario sc;
    sc.roadmap = random_roadmap(rng, n_nodes(rng), 0.35);
    auto &nodes = sc.roadmap.nodes;
    std::uniform_int_distribution<std::size_t> pick(0, nodes.size() - 1);
    // Start node stays unlabelled; the rest get q1/q2/obs at random.
    std::uniform_int_distribution<int> label(0, 5);
    for (std::size_t i = 1; i < nodes.size(); ++i)
    {
      const int l = label(rng);
      if (l == 0 || l == 3)
        nodes[i].props = {"q1"};
      else if (l == 1)
        nodes[i].props = {"q2"};
      else if (l == 2)
        nodes[i].props = {"obs"};
    }
    sc.roadmap.start = nodes.front().id;
    sc.formula = parse_formula(templates[std::uniform_int_distribution<std::size_t>(0, templates.size() - 1)(rng)]);

    const TransitionSystem ts = to_transition_system(sc.roadmap);
    std::set<std::pair<NodeId, NodeId>> used;
    std::vector<int> obs;
    for (int q = 0; q < ts.size(); ++q)
      if (ts.labels[q].count("obs"))
        obs.push_back(q);
    std::uniform_int_distribution<int> node(0, ts.size() - 1);
    const int want = std::uniform_int_distribution<int>(1, 5)(rng);
    for (int tries = 0; tries < 40 && static_cast<int>(sc.preferred.size()) < want; ++tries)
    {
      int a = node(rng), b = node(rng);
      // Favour adjacent pairs so the bias has a transition to act on.
      if (!ts.adjacency[a].empty() && tries % 3 != 2)
        b = ts.adjacency[a][std::uniform_int_distribution<std::size_t>(0, ts.adjacency[a].size() - 1)(rng)].to;
      if (a == b || used.count({ts.ids[a], ts.ids[b]}))
        continue;
      std::vector<NodeId> way;
      if (!obs.empty() && tries % 2 == 0)
      {
        const int via = obs[std::uniform_int_distribution<std::size_t>(0, obs.size() - 1)(rng)];
        if (via == a || via == b)
          continue;
        way = path_through(ts, a, via, b);
      }
      else
      {
        // Detour through a random third node.
        const int via = node(rng);
        if (via == a || via == b)
          continue;
        way = path_through(ts, a, via, b);
      }
      used.insert({ts.ids[a], ts.ids[b]});
      sc.preferred.push_back(preferred_path_from_walk(Walk{way}));
    }
    return sc;
  }

  /// Check the plan against the lasso it was expanded from: each product
  /// transition whose endpoints match a preferred path that passes
  /// valid_substitution must carry that path verbatim (the first such path
  /// when several share endpoints), and every preferred segment must pass the
  /// check. Returns a description of the first violation, empty when none.
  inline std::string priority_violation(const PlannerResult &res, const ProductAutomaton &pa, const TransitionSystem &ts,
                                        const std::vector<PreferredPath> &d)
  {
    std::vector<std::pair<int, int>> moves;
    for (std::size_t k = 1; k < res.lasso.prefix.size(); ++k)
      moves.emplace_back(res.lasso.prefix[k - 1], res.lasso.prefix[k]);
    int prev = res.lasso.prefix.back();
    for (int s : res.lasso.suffix)
    {
      moves.emplace_back(prev, s);
      prev = s;
    }
    if (moves.size() != res.plan.segments.size())
      return "segment count differs from lasso length";
    for (std::size_t k = 0; k < moves.size(); ++k)
    {
      const auto [qh, sh] = pa.states[moves[k].first];
      const auto [qm, sm] = pa.states[moves[k].second];
      const PlanSegment &seg = res.plan.segments[k];
      const PreferredPath *expected = nullptr;
      for (const auto &pd : d)
        if (pd.from == ts.ids[qh] && pd.to == ts.ids[qm] && valid_substitution(pd, sh, sm, pa.ba, ts))
        {
          expected = &pd;
          break;
        }
      if (expected && (seg.source != SegmentSource::preferred || seg.waypoints != expected->waypoints.nodes))
        return "valid preferred path " + seg.from + "->" + seg.to + " not used";
      if (seg.source == SegmentSource::preferred && !expected)
        return "preferred segment " + seg.from + "->" + seg.to + " fails the substitution check";
    }
    return "";
  }

  // ------------------------------------------------------------ spec graphs

  inline SpecGraph experiment1_graph()
  {
    return load_spec_graph(read_file(fixture("experiment1/spec.json")));
  }

  inline SpecGraph experiment2_graph()
  {
    return load_spec_graph(read_file(fixture("experiment2/spec.json")));
  }

  inline const Formula &experiment1_formula()
  {
    static const Formula f = parse_formula("(q0 -> X q1) && (q0 && F q2)");
    return f;
  }

  inline const Formula &experiment2_formula()
  {
    static const Formula f = parse_formula("q0 && G F (q1 && F q2)");
    return f;
  }
}
