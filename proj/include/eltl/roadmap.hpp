/**
 * Editable roadmap and its transition-system view.
 *
 * A roadmap is the user-drawn geometric graph over a map image. Values are
 * immutable snapshots: apply_edit returns a new roadmap. The persisted form is
 * a versioned JSON document (see save_roadmap).
 */
#pragma once

#include "eltl/error.hpp"
#include "eltl/geometry.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

namespace eltl
{
  using NodeId = std::string;
  using PropSet = std::set<std::string>;

  inline constexpr int kRoadmapVersion = 1;

  struct RoadmapNode
  {
    NodeId id;
    Point pos;
    PropSet props;

    friend bool operator==(const RoadmapNode &, const RoadmapNode &) = default;
  };

  struct MapImage
  {
    std::string path;
    int width = 0; ///< 0 disables the bounds check
    int height = 0;

    friend bool operator==(const MapImage &, const MapImage &) = default;
  };

  struct Roadmap
  {
    MapImage image;
    std::vector<RoadmapNode> nodes;
    std::vector<std::pair<NodeId, NodeId>> edges; ///< undirected
    std::optional<NodeId> start;

    friend bool operator==(const Roadmap &, const Roadmap &) = default;

    const RoadmapNode *find(const NodeId &id) const
    {
      for (const auto &n : nodes)
        if (n.id == id)
          return &n;
      return nullptr;
    }

    bool has_edge(const NodeId &a, const NodeId &b) const
    {
      return std::any_of(edges.begin(), edges.end(), [&](const auto &e)
                         { return (e.first == a && e.second == b) || (e.first == b && e.second == a); });
    }
  };

  /// Proposition names share the formula atom syntax: [a-z0-9_]+.
  inline bool is_proposition_name(const std::string &s)
  {
    if (s.empty() || s == "true" || s == "false")
      return false;
    return std::all_of(s.begin(), s.end(), [](char c)
                       { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_'; });
  }

  /// Throws Error if any roadmap invariant is violated.
  inline void validate_roadmap(const Roadmap &r)
  {
    std::set<NodeId> ids;
    for (const auto &n : r.nodes)
    {
      if (n.id.empty())
        throw Error(ErrorCode::invalid_input, "empty node id");
      if (!ids.insert(n.id).second)
        throw Error(ErrorCode::invalid_input, "duplicate node id " + n.id);
      if (!is_finite(n.pos))
        throw Error(ErrorCode::invalid_input, "non-finite position for node " + n.id);
      if (r.image.width > 0 && r.image.height > 0 &&
          (n.pos.x < 0 || n.pos.y < 0 || n.pos.x > r.image.width || n.pos.y > r.image.height))
        throw Error(ErrorCode::invalid_input, "node " + n.id + " outside image bounds");
      for (const auto &p : n.props)
        if (!is_proposition_name(p))
          throw Error(ErrorCode::invalid_input, "invalid proposition name '" + p + "'");
    }
    std::set<std::pair<NodeId, NodeId>> seen;
    for (const auto &[a, b] : r.edges)
    {
      if (!ids.count(a) || !ids.count(b))
        throw Error(ErrorCode::not_found, "unknown node in edge");
      if (a == b)
        throw Error(ErrorCode::invalid_input, "self-edge forbidden");
      if (!seen.insert(std::minmax(a, b)).second)
        throw Error(ErrorCode::conflict, "edge exists");
    }
    if (r.start && !ids.count(*r.start))
      throw Error(ErrorCode::not_found, "no such node");
  }

  // ---------------------------------------------------------------- edits

  namespace edit
  {
    struct AddNode
    {
      Point pos;
      PropSet props;
      std::optional<NodeId> id; ///< generated when absent
    };
    struct MoveNode
    {
      NodeId id;
      Point pos;
    };
    struct RemoveNode
    {
      NodeId id;
    };
    struct AddEdge
    {
      NodeId a, b;
    };
    struct RemoveEdge
    {
      NodeId a, b;
    };
    struct SetProps
    {
      NodeId id;
      PropSet props;
    };
    struct SetStart
    {
      NodeId id;
    };
  }

  using RoadmapEdit = std::variant<edit::AddNode, edit::MoveNode, edit::RemoveNode, edit::AddEdge,
                                   edit::RemoveEdge, edit::SetProps, edit::SetStart>;

  namespace detail
  {
    inline RoadmapNode &node_or_throw(Roadmap &r, const NodeId &id)
    {
      for (auto &n : r.nodes)
        if (n.id == id)
          return n;
      throw Error(ErrorCode::not_found, "no such node");
    }

    inline NodeId fresh_node_id(const Roadmap &r)
    {
      for (std::size_t k = r.nodes.size();; ++k)
      {
        NodeId id = "n" + std::to_string(k);
        if (!r.find(id))
          return id;
      }
    }

    template <class... Ts>
    struct overloaded : Ts...
    {
      using Ts::operator()...;
    };
    template <class... Ts>
    overloaded(Ts...) -> overloaded<Ts...>;
  }

  /// Apply one edit; the input is left untouched.
  inline Roadmap apply_edit(const Roadmap &in, const RoadmapEdit &e)
  {
    Roadmap r = in;
    std::visit(detail::overloaded{
                   [&](const edit::AddNode &a)
                   {
                     NodeId id = a.id ? *a.id : detail::fresh_node_id(r);
                     if (r.find(id))
                       throw Error(ErrorCode::conflict, "node exists");
                     r.nodes.push_back({id, a.pos, a.props});
                   },
                   [&](const edit::MoveNode &m)
                   { detail::node_or_throw(r, m.id).pos = m.pos; },
                   [&](const edit::RemoveNode &m)
                   {
                     detail::node_or_throw(r, m.id);
                     std::erase_if(r.nodes, [&](const RoadmapNode &n)
                                   { return n.id == m.id; });
                     std::erase_if(r.edges, [&](const auto &ed)
                                   { return ed.first == m.id || ed.second == m.id; });
                     if (r.start == m.id)
                       r.start.reset();
                   },
                   [&](const edit::AddEdge &a)
                   {
                     detail::node_or_throw(r, a.a);
                     detail::node_or_throw(r, a.b);
                     if (a.a == a.b)
                       throw Error(ErrorCode::invalid_input, "self-edge forbidden");
                     if (r.has_edge(a.a, a.b))
                       throw Error(ErrorCode::conflict, "edge exists");
                     r.edges.emplace_back(a.a, a.b);
                   },
                   [&](const edit::RemoveEdge &a)
                   {
                     detail::node_or_throw(r, a.a);
                     detail::node_or_throw(r, a.b);
                     if (!r.has_edge(a.a, a.b))
                       throw Error(ErrorCode::not_found, "no such edge");
                     std::erase_if(r.edges, [&](const auto &ed)
                                   { return (ed.first == a.a && ed.second == a.b) ||
                                            (ed.first == a.b && ed.second == a.a); });
                   },
                   [&](const edit::SetProps &s)
                   { detail::node_or_throw(r, s.id).props = s.props; },
                   [&](const edit::SetStart &s)
                   {
                     detail::node_or_throw(r, s.id);
                     r.start = s.id;
                   }},
               e);
    validate_roadmap(r);
    return r;
  }

  // ---------------------------------------------------------- persistence

  namespace detail
  {
    inline void reject_unknown_keys(const nlohmann::json &j, std::initializer_list<const char *> keys,
                                    const std::string &where)
    {
      if (!j.is_object())
        throw Error(ErrorCode::parse, where + ": expected object");
      for (const auto &item : j.items())
        if (std::none_of(keys.begin(), keys.end(), [&](const char *k)
                         { return item.key() == k; }))
          throw Error(ErrorCode::parse, where + ": unknown key '" + item.key() + "'");
    }

    template <class T>
    T required(const nlohmann::json &j, const char *key, const std::string &where)
    {
      if (!j.contains(key))
        throw Error(ErrorCode::parse, where + ": missing key '" + key + "'");
      try
      {
        return j.at(key).get<T>();
      }
      catch (const nlohmann::json::exception &ex)
      {
        throw Error(ErrorCode::parse, where + "." + key + ": " + ex.what());
      }
    }

    inline nlohmann::json parse_document(std::string_view bytes)
    {
      try
      {
        return nlohmann::json::parse(bytes);
      }
      catch (const nlohmann::json::parse_error &ex)
      {
        throw Error(ErrorCode::parse, "parse error at byte " + std::to_string(ex.byte) + ": " + ex.what());
      }
    }
  }

  inline nlohmann::json roadmap_to_json(const Roadmap &r)
  {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto &n : r.nodes)
      nodes.push_back({{"id", n.id}, {"x", n.pos.x}, {"y", n.pos.y}, {"props", n.props}});
    nlohmann::json edges = nlohmann::json::array();
    for (const auto &[a, b] : r.edges)
      edges.push_back({a, b});
    nlohmann::json j = {
        {"version", kRoadmapVersion},
        {"image", {{"path", r.image.path}, {"width", r.image.width}, {"height", r.image.height}}},
        {"nodes", nodes},
        {"edges", edges},
        {"start", nullptr}};
    if (r.start)
      j["start"] = *r.start;
    return j;
  }

  inline Roadmap roadmap_from_json(const nlohmann::json &j)
  {
    using detail::required;
    detail::reject_unknown_keys(j, {"version", "image", "nodes", "edges", "start"}, "roadmap");
    if (required<int>(j, "version", "roadmap") != kRoadmapVersion)
      throw Error(ErrorCode::unsupported, "unsupported version");

    Roadmap r;
    const auto &img = j.contains("image") ? j.at("image") : throw Error(ErrorCode::parse, "roadmap: missing key 'image'");
    detail::reject_unknown_keys(img, {"path", "width", "height"}, "image");
    r.image.path = required<std::string>(img, "path", "image");
    r.image.width = required<int>(img, "width", "image");
    r.image.height = required<int>(img, "height", "image");

    const auto nodes = required<nlohmann::json>(j, "nodes", "roadmap");
    if (!nodes.is_array())
      throw Error(ErrorCode::parse, "roadmap.nodes: expected array");
    for (std::size_t i = 0; i < nodes.size(); ++i)
    {
      const auto &n = nodes[i];
      const std::string where = "nodes[" + std::to_string(i) + "]";
      detail::reject_unknown_keys(n, {"id", "x", "y", "props"}, where);
      RoadmapNode node;
      node.id = required<std::string>(n, "id", where);
      node.pos = {required<double>(n, "x", where), required<double>(n, "y", where)};
      for (const auto &p : required<std::vector<std::string>>(n, "props", where))
        node.props.insert(p);
      r.nodes.push_back(std::move(node));
    }

    const auto edges = required<nlohmann::json>(j, "edges", "roadmap");
    if (!edges.is_array())
      throw Error(ErrorCode::parse, "roadmap.edges: expected array");
    for (std::size_t i = 0; i < edges.size(); ++i)
    {
      const auto &e = edges[i];
      if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
        throw Error(ErrorCode::parse, "edges[" + std::to_string(i) + "]: expected [idA, idB]");
      r.edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }

    if (!j.contains("start"))
      throw Error(ErrorCode::parse, "roadmap: missing key 'start'");
    if (!j.at("start").is_null())
      r.start = required<std::string>(j, "start", "roadmap");

    validate_roadmap(r);
    return r;
  }

  inline std::string save_roadmap(const Roadmap &r)
  {
    validate_roadmap(r);
    return roadmap_to_json(r).dump(2) + "\n";
  }

  inline Roadmap load_roadmap(std::string_view bytes)
  {
    return roadmap_from_json(detail::parse_document(bytes));
  }

  /// Fresh roadmap for a map image that has no stored roadmap yet.
  inline Roadmap empty_roadmap(std::string image_path, int width, int height)
  {
    Roadmap r;
    r.image = {std::move(image_path), width, height};
    return r;
  }

  // ---------------------------------------------------- transition system

  /**
   * Weighted labeled graph derived from a roadmap.
   *
   * States are indexed 0..size()-1 in ascending id order, so "lowest index"
   * and "lowest node id" coincide. Transitions are the symmetric closure of the
   * roadmap edges, weighted by Euclidean length.
   */
  struct TransitionSystem
  {
    struct Arc
    {
      int to;
      double weight;
    };

    std::vector<NodeId> ids;
    std::vector<Point> positions;
    std::vector<PropSet> labels;
    std::vector<std::vector<Arc>> adjacency; ///< sorted by target index
    PropSet alphabet;
    int initial = 0;

    int size() const { return static_cast<int>(ids.size()); }

    int index_of(const NodeId &id) const
    {
      auto it = std::lower_bound(ids.begin(), ids.end(), id);
      if (it == ids.end() || *it != id)
        throw Error(ErrorCode::not_found, "no such node");
      return static_cast<int>(it - ids.begin());
    }

    std::optional<double> weight(int from, int to) const
    {
      for (const auto &a : adjacency[from])
        if (a.to == to)
          return a.weight;
      return std::nullopt;
    }

    bool has_transition(int from, int to) const { return weight(from, to).has_value(); }

    std::size_t transition_count() const
    {
      std::size_t n = 0;
      for (const auto &adj : adjacency)
        n += adj.size();
      return n;
    }
  };

  inline TransitionSystem to_transition_system(const Roadmap &r)
  {
    validate_roadmap(r);
    if (!r.start)
      throw Error(ErrorCode::conflict, "start node unset");

    std::vector<const RoadmapNode *> sorted;
    for (const auto &n : r.nodes)
      sorted.push_back(&n);
    std::sort(sorted.begin(), sorted.end(), [](auto *a, auto *b)
              { return a->id < b->id; });

    TransitionSystem ts;
    for (const auto *n : sorted)
    {
      ts.ids.push_back(n->id);
      ts.positions.push_back(n->pos);
      ts.labels.push_back(n->props);
      ts.alphabet.insert(n->props.begin(), n->props.end());
    }
    ts.adjacency.resize(sorted.size());
    for (const auto &[a, b] : r.edges)
    {
      const int i = ts.index_of(a);
      const int j = ts.index_of(b);
      const double w = distance(ts.positions[i], ts.positions[j]);
      if (!(w > 0.0))
        throw Error(ErrorCode::invalid_input, "zero-length edge " + a + "-" + b);
      ts.adjacency[i].push_back({j, w});
      ts.adjacency[j].push_back({i, w});
    }
    for (auto &adj : ts.adjacency)
      std::sort(adj.begin(), adj.end(), [](const auto &x, const auto &y)
                { return x.to < y.to; });
    ts.initial = ts.index_of(*r.start);
    return ts;
  }

  /**
   * Shortest path between two states of the transition system.
   *
   * Ties on total weight prefer fewer hops, then the lower predecessor index.
   * Returns the state sequence including both endpoints, or nullopt when the
   * target is unreachable.
   */
  inline std::optional<std::vector<int>> ts_shortest_path(const TransitionSystem &ts, int from, int to)
  {
    using Key = std::pair<double, int>; // weight, hops
    const int n = ts.size();
    std::vector<Key> best(n, {std::numeric_limits<double>::infinity(), 0});
    std::vector<int> pred(n, -1);
    std::vector<bool> done(n, false);
    using Item = std::tuple<double, int, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    best[from] = {0.0, 0};
    queue.emplace(0.0, 0, from);
    while (!queue.empty())
    {
      auto [d, h, u] = queue.top();
      queue.pop();
      if (done[u])
        continue;
      done[u] = true;
      if (u == to)
        break;
      for (const auto &a : ts.adjacency[u])
      {
        Key cand{d + a.weight, h + 1};
        if (cand < best[a.to] || (cand == best[a.to] && pred[a.to] > u && !done[a.to]))
        {
          best[a.to] = cand;
          pred[a.to] = u;
          queue.emplace(cand.first, cand.second, a.to);
        }
      }
    }
    if (!done[to])
      return std::nullopt;
    std::vector<int> path{to};
    while (path.back() != from)
      path.push_back(pred[path.back()]);
    std::reverse(path.begin(), path.end());
    return path;
  }
}
