/**
 * Buchi automata, LTL translation, product with a transition system, and
 * shortest accepting runs / lassos.
 *
 * Translation: negation normal form, tableau expansion into a state-labelled
 * generalised Buchi automaton, then counter-based degeneralisation. The
 * result is transition-labelled: a fresh initial state reads the first letter.
 * Guards are cubes (conjunctions of literals) over the formula's atoms.
 */
#pragma once

#include "eltl/error.hpp"
#include "eltl/ltl.hpp"
#include "eltl/roadmap.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace eltl
{
  /// Conjunction of literals; bit i refers to BuchiAutomaton::props[i].
  struct Guard
  {
    std::uint64_t pos = 0;
    std::uint64_t neg = 0;

    bool satisfied_by(std::uint64_t letter) const { return (letter & pos) == pos && (letter & neg) == 0; }
    friend auto operator<=>(const Guard &, const Guard &) = default;

    /// Every letter satisfying `other` also satisfies this guard.
    bool covers(const Guard &other) const { return (pos & ~other.pos) == 0 && (neg & ~other.neg) == 0; }
  };

  namespace detail
  {
    /// Sort by (to, guard) and drop guards covered by another guard to the same target.
    template <class T>
    void normalize_moves(std::vector<T> &moves)
    {
      std::sort(moves.begin(), moves.end(), [](const T &x, const T &y)
                { return std::tie(x.to, x.guard) < std::tie(y.to, y.guard); });
      moves.erase(std::unique(moves.begin(), moves.end(), [](const T &x, const T &y)
                              { return x.to == y.to && x.guard == y.guard; }),
                  moves.end());
      std::vector<T> kept;
      for (const auto &m : moves)
      {
        bool covered = false;
        for (const auto &o : moves)
          if (o.to == m.to && !(o.guard == m.guard) && o.guard.covers(m.guard))
            covered = true;
        if (!covered)
          kept.push_back(m);
      }
      moves = std::move(kept);
    }
  }

  struct BuchiAutomaton
  {
    struct Transition
    {
      Guard guard;
      int to;
    };

    std::vector<std::string> props; ///< guard bit order
    std::vector<std::vector<Transition>> out;
    std::vector<int> initial;
    std::vector<bool> accepting;
    Formula formula = Formula::truth();

    int size() const { return static_cast<int>(out.size()); }

    /// Bit mask of the formula's atoms present in a letter; other names are ignored.
    std::uint64_t letter_mask(const Letter &letter) const
    {
      std::uint64_t m = 0;
      for (std::size_t i = 0; i < props.size(); ++i)
        if (letter.count(props[i]))
          m |= std::uint64_t{1} << i;
      return m;
    }

    bool enabled(int from, int to, std::uint64_t letter) const
    {
      for (const auto &t : out[from])
        if (t.to == to && t.guard.satisfied_by(letter))
          return true;
      return false;
    }

    std::string guard_text(const Guard &g) const
    {
      std::string s;
      for (std::size_t i = 0; i < props.size(); ++i)
      {
        const auto bit = std::uint64_t{1} << i;
        if ((g.pos | g.neg) & bit)
          s += (s.empty() ? "" : " && ") + std::string((g.neg & bit) ? "!" : "") + props[i];
      }
      return s.empty() ? "true" : s;
    }
  };

  // ------------------------------------------------------ acceptance

  namespace detail
  {
    // Does the automaton, started in `starts`, accept letters[0..] where
    // position n-1 is followed by position `loop`? Searches the product of
    // the automaton with the lasso for a reachable non-trivial SCC that holds
    // an accepting state.
    inline bool accepts_masks(const BuchiAutomaton &ba, std::span<const std::uint64_t> letters, std::size_t loop,
                              std::span<const int> starts)
    {
      const int q = ba.size();
      const int n = static_cast<int>(letters.size());
      const int total = n * q;
      auto succ_pos = [&](int k)
      { return k + 1 < n ? k + 1 : static_cast<int>(loop); };

      // Tarjan, iterative.
      std::vector<int> index(total, -1), low(total, 0);
      std::vector<char> on_stack(total, 0);
      std::vector<int> stack;
      struct Frame
      {
        int v;
        std::size_t edge;
      };
      std::vector<Frame> call;
      int counter = 0;

      for (int s0 : starts)
      {
        const int root = s0; // position 0
        if (index[root] >= 0)
          continue;
        call.push_back({root, 0});
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!call.empty())
        {
          Frame &fr = call.back();
          const int v = fr.v;
          const int k = v / q;
          const int s = v % q;
          const auto &outs = ba.out[s];
          bool descended = false;
          while (fr.edge < outs.size())
          {
            const auto &t = outs[fr.edge++];
            if (!t.guard.satisfied_by(letters[k]))
              continue;
            const int w = succ_pos(k) * q + t.to;
            if (index[w] < 0)
            {
              index[w] = low[w] = counter++;
              stack.push_back(w);
              on_stack[w] = 1;
              call.push_back({w, 0});
              descended = true;
              break;
            }
            if (on_stack[w])
              low[v] = std::min(low[v], index[w]);
          }
          if (descended)
            continue;
          if (low[v] == index[v])
          {
            // pop SCC rooted at v
            bool accepting = false;
            std::size_t members = 0;
            int w;
            do
            {
              w = stack.back();
              stack.pop_back();
              on_stack[w] = 0;
              accepting = accepting || ba.accepting[w % q];
              ++members;
            } while (w != v);
            if (accepting)
            {
              bool cyclic = members > 1;
              if (!cyclic)
              {
                const int kk = v / q;
                for (const auto &t : ba.out[v % q])
                  if (t.to == v % q && succ_pos(kk) == kk && t.guard.satisfied_by(letters[kk]))
                    cyclic = true;
              }
              if (cyclic)
                return true;
            }
          }
          call.pop_back();
          if (!call.empty())
          {
            const int parent = call.back().v;
            low[parent] = std::min(low[parent], low[v]);
          }
        }
      }
      return false;
    }
  }

  /// Acceptance of the ultimately periodic word prefix . cycle^omega.
  inline bool accepts_lasso(const BuchiAutomaton &ba, std::span<const Letter> prefix, std::span<const Letter> cycle)
  {
    if (cycle.empty())
      throw Error(ErrorCode::invalid_input, "cycle required");
    std::vector<std::uint64_t> letters;
    for (const auto &l : prefix)
      letters.push_back(ba.letter_mask(l));
    for (const auto &l : cycle)
      letters.push_back(ba.letter_mask(l));
    return detail::accepts_masks(ba, letters, prefix.size(), ba.initial);
  }

  // ------------------------------------------------ LTL -> Buchi automaton

  namespace detail
  {
    // Negation normal form over literals, And, Or, Next, Until, Release.
    class NnfTable
    {
    public:
      enum class K
      {
        True,
        False,
        Lit,
        And,
        Or,
        Next,
        Until,
        Release
      };
      struct Node
      {
        K k;
        int prop; // Lit
        bool neg; // Lit
        int a, b;
      };

      explicit NnfTable(std::vector<std::string> props) : props_(std::move(props)) {}

      int build(const Formula &f, bool negated)
      {
        using FK = Formula::Kind;
        switch (f.kind())
        {
        case FK::True:
          return make(negated ? K::False : K::True);
        case FK::False:
          return make(negated ? K::True : K::False);
        case FK::Atom:
        {
          const int p = static_cast<int>(std::find(props_.begin(), props_.end(), f.name()) - props_.begin());
          return make(K::Lit, p, negated);
        }
        case FK::Not:
          return build(f.lhs(), !negated);
        case FK::And:
          return make(negated ? K::Or : K::And, 0, false, build(f.lhs(), negated), build(f.rhs(), negated));
        case FK::Or:
          return make(negated ? K::And : K::Or, 0, false, build(f.lhs(), negated), build(f.rhs(), negated));
        case FK::Implies:
          // a -> b == !a || b
          return make(negated ? K::And : K::Or, 0, false, build(f.lhs(), !negated), build(f.rhs(), negated));
        case FK::Next:
          return make(K::Next, 0, false, build(f.lhs(), negated));
        case FK::Future:
          // F a == true U a ; !F a == false R !a
          return negated ? make(K::Release, 0, false, make(K::False), build(f.lhs(), true))
                         : make(K::Until, 0, false, make(K::True), build(f.lhs(), false));
        case FK::Always:
          return negated ? make(K::Until, 0, false, make(K::True), build(f.lhs(), true))
                         : make(K::Release, 0, false, make(K::False), build(f.lhs(), false));
        case FK::Until:
          return negated ? make(K::Release, 0, false, build(f.lhs(), true), build(f.rhs(), true))
                         : make(K::Until, 0, false, build(f.lhs(), false), build(f.rhs(), false));
        }
        return make(K::True);
      }

      const Node &operator[](int id) const { return nodes_[id]; }
      std::size_t size() const { return nodes_.size(); }

      std::optional<int> find_literal(int prop, bool neg) const
      {
        auto it = intern_.find({K::Lit, prop, neg, -1, -1});
        if (it == intern_.end())
          return std::nullopt;
        return it->second;
      }

    private:
      int make(K k, int prop = 0, bool neg = false, int a = -1, int b = -1)
      {
        if (k != K::Lit)
        {
          prop = 0;
          neg = false;
        }
        auto key = std::make_tuple(k, prop, neg, a, b);
        auto it = intern_.find(key);
        if (it != intern_.end())
          return it->second;
        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back({k, prop, neg, a, b});
        intern_.emplace(key, id);
        return id;
      }

      std::vector<std::string> props_;
      std::vector<Node> nodes_;
      std::map<std::tuple<K, int, bool, int, int>, int> intern_;
    };

    struct TableauNode
    {
      std::set<int> incoming; // -1 denotes the initial marker
      std::set<int> fresh;    // still to be processed
      std::set<int> old;
      std::set<int> next;
    };

    inline std::vector<TableauNode> expand_tableau(const NnfTable &t, int root)
    {
      using K = NnfTable::K;
      std::vector<TableauNode> done;
      std::vector<TableauNode> work;
      work.push_back({{-1}, {root}, {}, {}});

      while (!work.empty())
      {
        TableauNode node = std::move(work.back());
        work.pop_back();

        if (node.fresh.empty())
        {
          auto it = std::find_if(done.begin(), done.end(), [&](const TableauNode &d)
                                 { return d.old == node.old && d.next == node.next; });
          if (it != done.end())
          {
            it->incoming.insert(node.incoming.begin(), node.incoming.end());
            continue;
          }
          const int id = static_cast<int>(done.size());
          done.push_back(node);
          work.push_back({{id}, node.next, {}, {}});
          continue;
        }

        const int eta = *node.fresh.begin();
        node.fresh.erase(node.fresh.begin());
        if (node.old.count(eta))
        {
          work.push_back(std::move(node));
          continue;
        }
        const auto &n = t[eta];
        auto add_fresh = [](TableauNode &nd, int f)
        {
          if (!nd.old.count(f))
            nd.fresh.insert(f);
        };
        switch (n.k)
        {
        case K::True:
          node.old.insert(eta);
          work.push_back(std::move(node));
          break;
        case K::False:
          break;
        case K::Lit:
        {
          auto comp = t.find_literal(n.prop, !n.neg);
          if (comp && node.old.count(*comp))
            break;
          node.old.insert(eta);
          work.push_back(std::move(node));
          break;
        }
        case K::And:
          add_fresh(node, n.a);
          add_fresh(node, n.b);
          node.old.insert(eta);
          work.push_back(std::move(node));
          break;
        case K::Next:
          node.old.insert(eta);
          node.next.insert(n.a);
          work.push_back(std::move(node));
          break;
        case K::Or:
        case K::Until:
        case K::Release:
        {
          TableauNode first = node, second = std::move(node);
          first.old.insert(eta);
          second.old.insert(eta);
          if (n.k == K::Or)
          {
            add_fresh(first, n.a);
            add_fresh(second, n.b);
          }
          else if (n.k == K::Until)
          {
            add_fresh(first, n.a);
            first.next.insert(eta);
            add_fresh(second, n.b);
          }
          else
          {
            add_fresh(first, n.b);
            first.next.insert(eta);
            add_fresh(second, n.a);
            add_fresh(second, n.b);
          }
          // second is processed after first
          work.push_back(std::move(second));
          work.push_back(std::move(first));
          break;
        }
        }
      }
      return done;
    }
  }

  namespace detail
  {
    /**
     * Merge bisimilar states: equal acceptance and the same guarded moves into
     * the same classes. The tableau splits states by the literals that led
     * into them; merging them restores stutter self-loops on the survivors.
     * Class numbering follows the lowest member, so state 0 stays initial.
     */
    inline BuchiAutomaton quotient_bisimilar(const BuchiAutomaton &ba)
    {
      const std::size_t n = ba.size();
      std::vector<int> cls(n);
      for (std::size_t i = 0; i < n; ++i)
        cls[i] = ba.accepting[i] ? 1 : 0;
      std::size_t classes = 0;
      while (true)
      {
        using Sig = std::pair<int, std::vector<std::tuple<std::uint64_t, std::uint64_t, int>>>;
        std::map<Sig, int> ids;
        std::vector<int> next(n);
        for (std::size_t i = 0; i < n; ++i)
        {
          Sig sig{cls[i], {}};
          std::vector<BuchiAutomaton::Transition> moves;
          for (const auto &t : ba.out[i])
            moves.push_back({t.guard, cls[t.to]});
          normalize_moves(moves);
          for (const auto &t : moves)
            sig.second.emplace_back(t.guard.pos, t.guard.neg, t.to);
          next[i] = ids.try_emplace(std::move(sig), static_cast<int>(ids.size())).first->second;
        }
        cls = std::move(next);
        if (ids.size() == classes)
          break;
        classes = ids.size();
      }

      BuchiAutomaton q;
      q.props = ba.props;
      q.formula = ba.formula;
      q.out.resize(classes);
      q.accepting.assign(classes, false);
      std::vector<bool> done(classes, false);
      for (std::size_t i = 0; i < n; ++i)
      {
        const int c = cls[i];
        if (done[c])
          continue;
        done[c] = true;
        q.accepting[c] = ba.accepting[i];
        for (const auto &t : ba.out[i])
          q.out[c].push_back({t.guard, cls[t.to]});
        normalize_moves(q.out[c]);
      }
      q.initial = {cls[0]};
      return q;
    }
  }


  inline BuchiAutomaton ltl_to_buchi(const Formula &f)
  {
    using K = detail::NnfTable::K;
    std::set<std::string> atoms;
    f.collect_atoms(atoms);
    if (atoms.size() > 64)
      throw Error(ErrorCode::limit, "more than 64 propositions in formula");

    BuchiAutomaton ba;
    ba.formula = f;
    ba.props.assign(atoms.begin(), atoms.end());

    detail::NnfTable table(ba.props);
    const int root = table.build(f, false);
    const auto nodes = detail::expand_tableau(table, root);

    std::vector<int> untils;
    for (std::size_t id = 0; id < table.size(); ++id)
      if (table[static_cast<int>(id)].k == K::Until)
        untils.push_back(static_cast<int>(id));
    const int sets = std::max<int>(1, static_cast<int>(untils.size()));

    auto in_set = [&](const detail::TableauNode &n, int c)
    {
      if (untils.empty())
        return true;
      const int u = untils[c];
      return !n.old.count(u) || n.old.count(table[u].b) > 0;
    };

    std::vector<Guard> label(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
      for (int id : nodes[i].old)
        if (table[id].k == K::Lit)
          (table[id].neg ? label[i].neg : label[i].pos) |= std::uint64_t{1} << table[id].prop;

    // Degeneralised state (node, counter) gets raw id 1 + node*sets + counter;
    // raw id 0 is the fresh initial state.
    const int raw_count = 1 + static_cast<int>(nodes.size()) * sets;
    std::vector<std::vector<BuchiAutomaton::Transition>> raw_out(raw_count);
    auto raw_id = [&](std::size_t node, int c)
    { return 1 + static_cast<int>(node) * sets + c; };
    for (std::size_t j = 0; j < nodes.size(); ++j)
      for (int src : nodes[j].incoming)
      {
        if (src < 0)
        {
          raw_out[0].push_back({label[j], raw_id(j, 0)});
          continue;
        }
        for (int c = 0; c < sets; ++c)
        {
          const int c2 = in_set(nodes[src], c) ? (c + 1) % sets : c;
          raw_out[raw_id(src, c)].push_back({label[j], raw_id(j, c2)});
        }
      }

    // Keep states reachable from the initial state, numbered in BFS order.
    std::vector<int> renum(raw_count, -1);
    std::vector<int> order{0};
    renum[0] = 0;
    for (std::size_t i = 0; i < order.size(); ++i)
      for (const auto &t : raw_out[order[i]])
        if (renum[t.to] < 0)
        {
          renum[t.to] = static_cast<int>(order.size());
          order.push_back(t.to);
        }

    ba.out.resize(order.size());
    ba.accepting.assign(order.size(), false);
    for (std::size_t i = 0; i < order.size(); ++i)
    {
      const int r = order[i];
      for (const auto &t : raw_out[r])
        ba.out[i].push_back({t.guard, renum[t.to]});
      detail::normalize_moves(ba.out[i]);
      if (r > 0)
      {
        const std::size_t node = static_cast<std::size_t>((r - 1) / sets);
        const int c = (r - 1) % sets;
        ba.accepting[i] = c == 0 && in_set(nodes[node], 0);
      }
    }
    ba.initial = {0};
    return detail::quotient_bisimilar(ba);
  }

  // ----------------------------------------------------- product automaton

  /// Path cost with infinitesimal part: biased transitions count in `eps`
  /// instead of `real`, so any number of them is cheaper than one real weight.
  struct PathCost
  {
    double real = 0.0;
    int eps = 0;

    friend auto operator<=>(const PathCost &, const PathCost &) = default;
    friend PathCost operator+(PathCost a, const PathCost &b) { return {a.real + b.real, a.eps + b.eps}; }
  };

  struct ProductAutomaton
  {
    struct State
    {
      int ts;
      int ba;
      friend auto operator<=>(const State &, const State &) = default;
    };
    struct Transition
    {
      int to;
      double weight;      ///< current weight (alpha when biased)
      double base_weight; ///< weight copied from the transition system
      bool biased = false;

      PathCost cost() const { return biased ? PathCost{0.0, 1} : PathCost{weight, 0}; }
    };

    std::vector<State> states; ///< sorted by (ts, ba)
    std::vector<std::vector<Transition>> out;
    std::vector<int> initial;
    std::vector<bool> accepting;
    BuchiAutomaton ba;
    std::vector<std::uint64_t> ts_letters; ///< h(q) as guard masks, per TS state

    int size() const { return static_cast<int>(states.size()); }

    std::size_t transition_count() const
    {
      std::size_t n = 0;
      for (const auto &o : out)
        n += o.size();
      return n;
    }

    std::optional<int> find(int ts_state, int ba_state) const
    {
      auto it = std::lower_bound(states.begin(), states.end(), State{ts_state, ba_state});
      if (it == states.end() || !(*it == State{ts_state, ba_state}))
        return std::nullopt;
      return static_cast<int>(it - states.begin());
    }

    const Transition *transition(int from, int to) const
    {
      for (const auto &t : out[from])
        if (t.to == to)
          return &t;
      return nullptr;
    }
  };

  /**
   * Product TS x BA. A product move (q,s) -> (q',s') needs a TS transition
   * q -> q' and a BA transition s -> s' whose guard holds on h(q'). Initial
   * states pair q_init with the BA states reached by reading h(q_init) from
   * an initial BA state.
   */
  inline ProductAutomaton build_product(const TransitionSystem &ts, const BuchiAutomaton &ba, bool prune = true)
  {
    const int nq = ts.size();
    const int ns = ba.size();
    ProductAutomaton full;
    full.ba = ba;
    for (int q = 0; q < nq; ++q)
      full.ts_letters.push_back(ba.letter_mask(ts.labels[q]));
    for (int q = 0; q < nq; ++q)
      for (int s = 0; s < ns; ++s)
      {
        full.states.push_back({q, s});
        full.accepting.push_back(ba.accepting[s]);
      }
    full.out.resize(full.states.size());
    for (int q = 0; q < nq; ++q)
      for (int s = 0; s < ns; ++s)
      {
        auto &outs = full.out[q * ns + s];
        for (const auto &arc : ts.adjacency[q])
          for (const auto &t : ba.out[s])
            if (t.guard.satisfied_by(full.ts_letters[arc.to]))
              outs.push_back({arc.to * ns + t.to, arc.weight, arc.weight, false});
        std::sort(outs.begin(), outs.end(), [](const auto &a, const auto &b)
                  { return a.to < b.to; });
        outs.erase(std::unique(outs.begin(), outs.end(), [](const auto &a, const auto &b)
                               { return a.to == b.to; }),
                   outs.end());
      }
    std::set<int> init;
    for (int s0 : ba.initial)
      for (const auto &t : ba.out[s0])
        if (t.guard.satisfied_by(full.ts_letters[ts.initial]))
          init.insert(ts.initial * ns + t.to);
    full.initial.assign(init.begin(), init.end());
    if (!prune)
      return full;

    std::vector<bool> reach(full.states.size(), false);
    std::vector<int> frontier(full.initial.begin(), full.initial.end());
    for (int i : frontier)
      reach[i] = true;
    while (!frontier.empty())
    {
      const int u = frontier.back();
      frontier.pop_back();
      for (const auto &t : full.out[u])
        if (!reach[t.to])
        {
          reach[t.to] = true;
          frontier.push_back(t.to);
        }
    }
    std::vector<int> renum(full.states.size(), -1);
    ProductAutomaton pa;
    pa.ba = ba;
    pa.ts_letters = full.ts_letters;
    for (std::size_t i = 0; i < full.states.size(); ++i)
      if (reach[i])
      {
        renum[i] = pa.size();
        pa.states.push_back(full.states[i]);
        pa.accepting.push_back(full.accepting[i]);
      }
    pa.out.resize(pa.states.size());
    for (std::size_t i = 0; i < full.states.size(); ++i)
      if (reach[i])
        for (auto t : full.out[i])
        {
          t.to = renum[t.to];
          pa.out[renum[i]].push_back(t);
        }
    for (int i : full.initial)
      pa.initial.push_back(renum[i]);
    return pa;
  }

  // ------------------------------------------------------ shortest paths

  namespace detail
  {
    struct SearchResult
    {
      std::vector<std::optional<PathCost>> dist;
      std::vector<int> pred;
    };

    // Dijkstra from several sources with given start costs. Ties on cost keep
    // the lower predecessor id.
    inline SearchResult product_dijkstra(const ProductAutomaton &pa, const std::vector<std::pair<int, PathCost>> &sources)
    {
      SearchResult r;
      r.dist.assign(pa.size(), std::nullopt);
      r.pred.assign(pa.size(), -1);
      std::vector<bool> done(pa.size(), false);
      using Item = std::tuple<PathCost, int>;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
      for (const auto &[s, c] : sources)
        if (!r.dist[s] || c < *r.dist[s])
        {
          r.dist[s] = c;
          queue.emplace(c, s);
        }
      while (!queue.empty())
      {
        auto [d, u] = queue.top();
        queue.pop();
        if (done[u] || d != *r.dist[u])
          continue;
        done[u] = true;
        for (const auto &t : pa.out[u])
        {
          if (done[t.to])
            continue;
          const PathCost cand = d + t.cost();
          if (!r.dist[t.to] || cand < *r.dist[t.to] || (cand == *r.dist[t.to] && u < r.pred[t.to]))
          {
            const bool improved = !r.dist[t.to] || cand < *r.dist[t.to];
            r.dist[t.to] = cand;
            r.pred[t.to] = u;
            if (improved)
              queue.emplace(cand, t.to);
          }
        }
      }
      return r;
    }

    inline std::vector<int> trace(const SearchResult &r, int target)
    {
      std::vector<int> path{target};
      while (r.pred[path.back()] >= 0)
        path.push_back(r.pred[path.back()]);
      std::reverse(path.begin(), path.end());
      return path;
    }

    inline std::vector<std::pair<int, PathCost>> initial_sources(const ProductAutomaton &pa)
    {
      std::vector<std::pair<int, PathCost>> src;
      for (int s : pa.initial)
        src.emplace_back(s, PathCost{});
      return src;
    }
  }

  inline PathCost path_cost(const ProductAutomaton &pa, std::span<const int> path)
  {
    PathCost c;
    for (std::size_t i = 1; i < path.size(); ++i)
    {
      const auto *t = pa.transition(path[i - 1], path[i]);
      if (!t)
        throw Error(ErrorCode::invalid_input, "not a product path");
      c = c + t->cost();
    }
    return c;
  }

  /// Weight sum using the current weight table (alpha on biased transitions).
  inline double path_weight(const ProductAutomaton &pa, std::span<const int> path)
  {
    double w = 0.0;
    for (std::size_t i = 1; i < path.size(); ++i)
      w += pa.transition(path[i - 1], path[i])->weight;
    return w;
  }

  /// Minimum-cost path from an initial to an accepting product state.
  inline std::vector<int> shortest_accepting_run(const ProductAutomaton &pa)
  {
    const auto r = detail::product_dijkstra(pa, detail::initial_sources(pa));
    int best = -1;
    for (int s = 0; s < pa.size(); ++s)
      if (pa.accepting[s] && r.dist[s] && (best < 0 || *r.dist[s] < *r.dist[best]))
        best = s;
    if (best < 0)
      throw Error(ErrorCode::infeasible, "specification unsatisfiable on this roadmap");
    return detail::trace(r, best);
  }

  struct AcceptingLasso
  {
    std::vector<int> prefix; ///< from an initial state to the anchor
    std::vector<int> suffix; ///< cycle after the anchor, ending at it; empty = stay at the anchor
    PathCost cost;
  };

  /// True when the BA, in state s, accepts h(q)^omega, i.e. staying at q forever.
  inline bool stutter_accepting(const ProductAutomaton &pa, int state)
  {
    const auto [q, s] = pa.states[state];
    const std::uint64_t letter = pa.ts_letters[q];
    const int start[] = {s};
    return detail::accepts_masks(pa.ba, std::span<const std::uint64_t>(&letter, 1), 0, start);
  }

  /**
   * Cheapest accepting lasso. For each reachable state f the candidate cost
   * is prefix(f) + cycle(f), where cycle(f) is the cheapest positive-length
   * cycle through an accepting f, or zero when staying at f's roadmap node is
   * accepting (the finite plan, empty suffix). Ties keep the lower state id
   * and prefer staying.
   */
  inline AcceptingLasso plan_lasso(const ProductAutomaton &pa)
  {
    const auto from_init = detail::product_dijkstra(pa, detail::initial_sources(pa));
    std::optional<AcceptingLasso> best;
    for (int f = 0; f < pa.size(); ++f)
    {
      if (!from_init.dist[f])
        continue;
      const PathCost prefix_cost = *from_init.dist[f];
      if (best && best->cost < prefix_cost)
        continue;
      if (stutter_accepting(pa, f))
      {
        if (!best || prefix_cost < best->cost)
          best = AcceptingLasso{detail::trace(from_init, f), {}, prefix_cost};
        continue;
      }
      if (!pa.accepting[f])
        continue;
      std::vector<std::pair<int, PathCost>> src;
      for (const auto &t : pa.out[f])
        src.emplace_back(t.to, t.cost());
      const auto around = detail::product_dijkstra(pa, src);
      if (!around.dist[f])
        continue;
      const PathCost total = prefix_cost + *around.dist[f];
      if (!best || total < best->cost)
      {
        std::vector<int> cycle = detail::trace(around, f); // starts at a successor of f
        best = AcceptingLasso{detail::trace(from_init, f), std::move(cycle), total};
      }
    }
    if (!best)
      throw Error(ErrorCode::infeasible, "specification unsatisfiable on this roadmap");
    return *best;
  }

  // ---------------------------------------------------------- debug export

  inline std::string to_dot(const BuchiAutomaton &ba)
  {
    std::ostringstream os;
    os << "digraph buchi {\n  rankdir=LR;\n";
    for (int s = 0; s < ba.size(); ++s)
      os << "  s" << s << " [shape=" << (ba.accepting[s] ? "doublecircle" : "circle") << "];\n";
    for (int s : ba.initial)
      os << "  init" << s << " [shape=point];\n  init" << s << " -> s" << s << ";\n";
    for (int s = 0; s < ba.size(); ++s)
      for (const auto &t : ba.out[s])
        os << "  s" << s << " -> s" << t.to << " [label=\"" << ba.guard_text(t.guard) << "\"];\n";
    os << "}\n";
    return os.str();
  }

  inline std::string to_dot(const ProductAutomaton &pa, const TransitionSystem &ts)
  {
    std::ostringstream os;
    os << "digraph product {\n";
    for (int i = 0; i < pa.size(); ++i)
      os << "  p" << i << " [label=\"" << ts.ids[pa.states[i].ts] << ",s" << pa.states[i].ba << "\" shape="
         << (pa.accepting[i] ? "doublecircle" : "circle") << "];\n";
    for (int i : pa.initial)
      os << "  init" << i << " [shape=point];\n  init" << i << " -> p" << i << ";\n";
    for (int i = 0; i < pa.size(); ++i)
      for (const auto &t : pa.out[i])
        os << "  p" << i << " -> p" << t.to << " [label=\"" << t.weight << (t.biased ? "*" : "") << "\"];\n";
    os << "}\n";
    return os.str();
  }
}
