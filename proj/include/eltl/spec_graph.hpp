/**
 * Graphical LTL specifications.
 *
 * A spec graph places formula-labelled nodes on the map. Green nodes are to be
 * visited, red nodes avoided. Each edge carries a Boolean operator (bo2), an
 * inner temporal operator (to2) and an outer temporal operator (to1); which
 * triples are allowed comes from a data-driven legality table.
 *
 * Translation to a formula walks the DFS tree from the start node:
 *
 *   node(u)        = label(u), negated when u is red
 *   clause(u -> v) = to1( node(u) bo2 to2(sub(v)) )     (bo2 = eps means AND)
 *                  = to1( node(u) U sub(v) )            when to2 = UNTIL
 *   sub(u)         = node(u) if u has no tree children, otherwise the
 *                    conjunction of its clauses in edge creation order
 *
 * A back-edge into an ancestor u wraps the term built for u's subtree,
 * to2(sub(u)), in G; for the start node the whole formula is wrapped.
 */
#pragma once

#include "eltl/error.hpp"
#include "eltl/geometry.hpp"
#include "eltl/ltl.hpp"
#include "eltl/roadmap.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace eltl
{
  enum class NodeColor
  {
    green,
    red
  };

  enum class BoolOp
  {
    epsilon,
    and_,
    or_,
    implies
  };

  enum class TempOp
  {
    epsilon,
    next,
    until,
    future,
    always
  };

  struct EdgeOps
  {
    BoolOp bo2 = BoolOp::epsilon;
    TempOp to2 = TempOp::epsilon;
    TempOp to1 = TempOp::epsilon;

    friend auto operator<=>(const EdgeOps &, const EdgeOps &) = default;
  };

  struct SpecNode
  {
    std::string id;
    Point pos;
    NodeColor color = NodeColor::green;
    Formula label = Formula::truth();

    friend bool operator==(const SpecNode &, const SpecNode &) = default;
  };

  /// Edge order in the vector is the creation order.
  struct SpecEdge
  {
    std::string from;
    std::string to;
    EdgeOps ops;

    friend bool operator==(const SpecEdge &, const SpecEdge &) = default;
  };

  struct SpecGraph
  {
    std::vector<SpecNode> nodes;
    std::vector<SpecEdge> edges;
    std::optional<std::string> start;

    friend bool operator==(const SpecGraph &, const SpecGraph &) = default;

    const SpecNode *find(const std::string &id) const
    {
      for (const auto &n : nodes)
        if (n.id == id)
          return &n;
      return nullptr;
    }
  };

  // ------------------------------------------------------------- naming

  inline const char *to_string(BoolOp op)
  {
    switch (op)
    {
    case BoolOp::epsilon:
      return "EPSILON";
    case BoolOp::and_:
      return "AND";
    case BoolOp::or_:
      return "OR";
    case BoolOp::implies:
      return "IMPLIES";
    }
    return "";
  }

  inline const char *to_string(TempOp op)
  {
    switch (op)
    {
    case TempOp::epsilon:
      return "EPSILON";
    case TempOp::next:
      return "NEXT";
    case TempOp::until:
      return "UNTIL";
    case TempOp::future:
      return "FUTURE";
    case TempOp::always:
      return "ALWAYS";
    }
    return "";
  }

  inline BoolOp parse_bool_op(const std::string &s)
  {
    for (BoolOp op : {BoolOp::epsilon, BoolOp::and_, BoolOp::or_, BoolOp::implies})
      if (s == to_string(op))
        return op;
    throw Error(ErrorCode::parse, "unknown Boolean operator '" + s + "'");
  }

  inline TempOp parse_temp_op(const std::string &s)
  {
    for (TempOp op : {TempOp::epsilon, TempOp::next, TempOp::until, TempOp::future, TempOp::always})
      if (s == to_string(op))
        return op;
    throw Error(ErrorCode::parse, "unknown temporal operator '" + s + "'");
  }

  // ----------------------------------------------------- legality table

  class LegalityTable
  {
  public:
    LegalityTable() = default;
    explicit LegalityTable(std::set<EdgeOps> allowed) : allowed_(std::move(allowed)) {}

    bool allows(const EdgeOps &ops) const { return allowed_.count(ops) > 0; }
    const std::set<EdgeOps> &allowed() const { return allowed_; }

    /**
     * Every (bo2, to2, to1) with to1 in {eps, FUTURE, ALWAYS}, except that
     * UNTIL already combines both endpoints and therefore takes bo2 = eps.
     */
    static LegalityTable defaults()
    {
      std::set<EdgeOps> s;
      for (BoolOp b : {BoolOp::epsilon, BoolOp::and_, BoolOp::or_, BoolOp::implies})
        for (TempOp t2 : {TempOp::epsilon, TempOp::next, TempOp::until, TempOp::future, TempOp::always})
          for (TempOp t1 : {TempOp::epsilon, TempOp::future, TempOp::always})
            if (t2 != TempOp::until || b == BoolOp::epsilon)
              s.insert({b, t2, t1});
      return LegalityTable(std::move(s));
    }

    nlohmann::json to_json() const
    {
      nlohmann::json rows = nlohmann::json::array();
      for (const auto &ops : allowed_)
        rows.push_back({to_string(ops.bo2), to_string(ops.to2), to_string(ops.to1)});
      return {{"allowed", rows}};
    }

    static LegalityTable from_json(const nlohmann::json &j)
    {
      detail::reject_unknown_keys(j, {"allowed"}, "legality");
      std::set<EdgeOps> s;
      for (const auto &row : detail::required<nlohmann::json>(j, "allowed", "legality"))
      {
        if (!row.is_array() || row.size() != 3)
          throw Error(ErrorCode::parse, "legality.allowed: expected [bo2, to2, to1] rows");
        s.insert({parse_bool_op(row[0].get<std::string>()), parse_temp_op(row[1].get<std::string>()),
                  parse_temp_op(row[2].get<std::string>())});
      }
      return LegalityTable(std::move(s));
    }

  private:
    std::set<EdgeOps> allowed_;
  };

  // --------------------------------------------------------- validation

  inline std::vector<std::string> validate_spec_graph(const SpecGraph &g,
                                                      const LegalityTable &table = LegalityTable::defaults())
  {
    std::vector<std::string> out;
    std::set<std::string> ids;
    for (const auto &n : g.nodes)
      if (!ids.insert(n.id).second)
        out.push_back("duplicate node id " + n.id);
    if (!g.start)
      out.push_back("start node unset");
    else if (!ids.count(*g.start))
      out.push_back("unknown start node");
    for (const auto &e : g.edges)
    {
      if (!ids.count(e.from) || !ids.count(e.to))
      {
        out.push_back("unknown node in edge");
        continue;
      }
      if (e.ops.to1 == TempOp::next || e.ops.to1 == TempOp::until || !table.allows(e.ops))
        out.push_back(std::string("illegal operator combination (") + to_string(e.ops.bo2) + ", " +
                      to_string(e.ops.to2) + ", " + to_string(e.ops.to1) + ") on edge " + e.from + "->" + e.to);
      if (e.ops.to2 == TempOp::until && g.find(e.from)->color == NodeColor::red)
        out.push_back("red node " + e.from + " used as UNTIL source");
    }
    return out;
  }

  // -------------------------------------------------------- translation

  namespace detail
  {
    class SpecTranslator
    {
    public:
      explicit SpecTranslator(const SpecGraph &g) : g_(g) {}

      Formula run()
      {
        const std::string &root = *g_.start;
        // DFS in edge creation order splits edges into tree and back edges.
        classify(root);
        for (const auto &n : g_.nodes)
          if (!visited_.count(n.id))
            throw Error(ErrorCode::unsupported, "node " + n.id + " unreachable from start");
        Formula f = sub(root);
        return wrapped_.count(root) ? ltl::always(f) : f;
      }

    private:
      void classify(const std::string &u)
      {
        visited_.insert(u);
        on_stack_.insert(u);
        for (std::size_t k = 0; k < g_.edges.size(); ++k)
        {
          const SpecEdge &e = g_.edges[k];
          if (e.from != u)
            continue;
          if (!visited_.count(e.to))
          {
            children_[u].push_back(k);
            classify(e.to);
          }
          else if (on_stack_.count(e.to))
          {
            if (!wrapped_.insert(e.to).second)
              throw Error(ErrorCode::unsupported, "unsupported cyclic structure");
          }
          else
            throw Error(ErrorCode::unsupported, "unsupported cyclic structure");
        }
        on_stack_.erase(u);
      }

      Formula node_formula(const std::string &id) const
      {
        const SpecNode &n = *g_.find(id);
        return n.color == NodeColor::green ? n.label : ltl::neg(n.label);
      }

      static Formula apply(TempOp op, const Formula &f)
      {
        switch (op)
        {
        case TempOp::next:
          return ltl::next(f);
        case TempOp::future:
          return ltl::future(f);
        case TempOp::always:
          return ltl::always(f);
        default:
          return f;
        }
      }

      Formula clause(std::size_t k) const
      {
        const SpecEdge &e = g_.edges[k];
        const Formula u = node_formula(e.from);
        const Formula v = sub(e.to);
        Formula inner = Formula::truth();
        if (e.ops.to2 == TempOp::until)
        {
          inner = ltl::until(u, v);
          if (wrapped_.count(e.to))
            inner = ltl::always(inner);
        }
        else
        {
          Formula target = apply(e.ops.to2, v);
          if (wrapped_.count(e.to))
            target = ltl::always(target);
          switch (e.ops.bo2)
          {
          case BoolOp::or_:
            inner = ltl::disj(u, target);
            break;
          case BoolOp::implies:
            inner = ltl::implies(u, target);
            break;
          default:
            inner = ltl::conj(u, target);
            break;
          }
        }
        return apply(e.ops.to1, inner);
      }

      Formula sub(const std::string &u) const
      {
        auto it = children_.find(u);
        if (it == children_.end())
          return node_formula(u);
        std::optional<Formula> acc;
        for (std::size_t k : it->second)
          acc = acc ? ltl::conj(*acc, clause(k)) : clause(k);
        return *acc;
      }

      const SpecGraph &g_;
      std::set<std::string> visited_, on_stack_, wrapped_;
      std::map<std::string, std::vector<std::size_t>> children_;
    };
  }

  inline Formula graph_to_formula(const SpecGraph &g, const LegalityTable &table = LegalityTable::defaults())
  {
    auto violations = validate_spec_graph(g, table);
    if (!violations.empty())
      throw Error(ErrorCode::invalid_input, "invalid spec graph: " + violations.front());
    return detail::SpecTranslator(g).run();
  }

  /// Conjunction of a roadmap node's propositions, used as a spec-node label.
  inline Formula props_formula(const PropSet &props)
  {
    std::optional<Formula> acc;
    for (const auto &p : props)
      acc = acc ? ltl::conj(*acc, ltl::atom(p)) : ltl::atom(p);
    if (!acc)
      throw Error(ErrorCode::conflict, "default spec needs labelled sketch endpoints");
    return *acc;
  }

  /**
   * Default specification for a set of sketches: a green node for the
   * roadmap's start (labelled true when it has no propositions) with one
   * (AND, FUTURE, eps) edge to every distinct labelled sketch start or end.
   * Rooting at the robot's start keeps the formula satisfiable when a sketch
   * begins elsewhere.
   */
  inline SpecGraph default_spec_graph(const Roadmap &r, const std::vector<std::pair<NodeId, NodeId>> &sketch_ends)
  {
    if (sketch_ends.empty())
      throw Error(ErrorCode::conflict, "no sketches to derive a specification from");
    if (!r.start)
      throw Error(ErrorCode::conflict, "roadmap has no start node");
    auto node = [&](const NodeId &id)
    {
      const RoadmapNode *n = r.find(id);
      if (!n)
        throw Error(ErrorCode::not_found, "no such node");
      return n;
    };
    SpecGraph g;
    const RoadmapNode *root = node(*r.start);
    g.nodes.push_back({root->id, root->pos, NodeColor::green,
                       root->props.empty() ? Formula::truth() : props_formula(root->props)});
    g.start = root->id;
    for (const auto &[from, to] : sketch_ends)
      for (const NodeId &id : {from, to})
      {
        const RoadmapNode *n = node(id);
        if (g.find(id) || n->props.empty())
          continue;
        g.nodes.push_back({id, n->pos, NodeColor::green, props_formula(n->props)});
        g.edges.push_back({root->id, id, {BoolOp::and_, TempOp::future, TempOp::epsilon}});
      }
    if (g.edges.empty())
      throw Error(ErrorCode::conflict, "default spec needs labelled sketch endpoints");
    return g;
  }

  // -------------------------------------------------------- persistence

  inline nlohmann::json spec_graph_to_json(const SpecGraph &g)
  {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto &n : g.nodes)
      nodes.push_back({{"id", n.id},
                       {"x", n.pos.x},
                       {"y", n.pos.y},
                       {"color", n.color == NodeColor::green ? "green" : "red"},
                       {"label", format_formula(n.label)}});
    nlohmann::json edges = nlohmann::json::array();
    for (const auto &e : g.edges)
      edges.push_back({{"from", e.from},
                       {"to", e.to},
                       {"bo2", to_string(e.ops.bo2)},
                       {"to2", to_string(e.ops.to2)},
                       {"to1", to_string(e.ops.to1)}});
    nlohmann::json j = {{"nodes", nodes}, {"edges", edges}, {"start", nullptr}};
    if (g.start)
      j["start"] = *g.start;
    return j;
  }

  inline SpecGraph spec_graph_from_json(const nlohmann::json &j)
  {
    using detail::required;
    detail::reject_unknown_keys(j, {"nodes", "edges", "start"}, "spec");
    SpecGraph g;
    const auto nodes = required<nlohmann::json>(j, "nodes", "spec");
    if (!nodes.is_array())
      throw Error(ErrorCode::parse, "spec.nodes: expected array");
    for (std::size_t i = 0; i < nodes.size(); ++i)
    {
      const std::string where = "nodes[" + std::to_string(i) + "]";
      const auto &n = nodes[i];
      detail::reject_unknown_keys(n, {"id", "x", "y", "color", "label"}, where);
      SpecNode node;
      node.id = required<std::string>(n, "id", where);
      node.pos = {required<double>(n, "x", where), required<double>(n, "y", where)};
      const auto color = required<std::string>(n, "color", where);
      if (color != "green" && color != "red")
        throw Error(ErrorCode::parse, where + ".color: expected green or red");
      node.color = color == "green" ? NodeColor::green : NodeColor::red;
      node.label = parse_formula(required<std::string>(n, "label", where));
      g.nodes.push_back(std::move(node));
    }
    const auto edges = required<nlohmann::json>(j, "edges", "spec");
    if (!edges.is_array())
      throw Error(ErrorCode::parse, "spec.edges: expected array");
    for (std::size_t i = 0; i < edges.size(); ++i)
    {
      const std::string where = "edges[" + std::to_string(i) + "]";
      const auto &e = edges[i];
      detail::reject_unknown_keys(e, {"from", "to", "bo2", "to2", "to1"}, where);
      g.edges.push_back({required<std::string>(e, "from", where),
                         required<std::string>(e, "to", where),
                         {parse_bool_op(required<std::string>(e, "bo2", where)),
                          parse_temp_op(required<std::string>(e, "to2", where)),
                          parse_temp_op(required<std::string>(e, "to1", where))}});
    }
    if (!j.contains("start"))
      throw Error(ErrorCode::parse, "spec: missing key 'start'");
    if (!j.at("start").is_null())
      g.start = required<std::string>(j, "start", "spec");
    return g;
  }

  inline std::string save_spec_graph(const SpecGraph &g)
  {
    return spec_graph_to_json(g).dump(2) + "\n";
  }

  inline SpecGraph load_spec_graph(std::string_view bytes)
  {
    return spec_graph_from_json(detail::parse_document(bytes));
  }
}
