/**
 * LTL formulas: representation, parsing, printing and lasso semantics.
 *
 * Surface syntax (tightest binding first):
 *   atoms [a-z0-9_]+, true, false, ( ... )
 *   unary   ! X F G
 *   U       right associative
 *   &&      left associative
 *   ||      left associative
 *   ->      right associative
 */
#pragma once

#include "eltl/error.hpp"

#include <cctype>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eltl
{
  using Letter = std::set<std::string>;

  class Formula
  {
  public:
    enum class Kind
    {
      True,
      False,
      Atom,
      Not,
      And,
      Or,
      Implies,
      Next,
      Future,
      Always,
      Until
    };

    static Formula truth() { return Formula(Kind::True, {}, {}, {}); }
    static Formula falsity() { return Formula(Kind::False, {}, {}, {}); }
    static Formula atom(std::string name) { return Formula(Kind::Atom, std::move(name), {}, {}); }
    static Formula unary(Kind k, const Formula &a) { return Formula(k, {}, a.node_, {}); }
    static Formula binary(Kind k, const Formula &a, const Formula &b) { return Formula(k, {}, a.node_, b.node_); }

    Kind kind() const { return node_->kind; }
    const std::string &name() const { return node_->name; }
    Formula lhs() const { return Formula(node_->lhs); }
    Formula rhs() const { return Formula(node_->rhs); }

    bool is_unary() const
    {
      const Kind k = kind();
      return k == Kind::Not || k == Kind::Next || k == Kind::Future || k == Kind::Always;
    }
    bool is_binary() const
    {
      const Kind k = kind();
      return k == Kind::And || k == Kind::Or || k == Kind::Implies || k == Kind::Until;
    }

    /// Number of AST nodes.
    std::size_t size() const
    {
      if (is_unary())
        return 1 + lhs().size();
      if (is_binary())
        return 1 + lhs().size() + rhs().size();
      return 1;
    }

    void collect_atoms(std::set<std::string> &out) const
    {
      if (kind() == Kind::Atom)
        out.insert(name());
      if (is_unary() || is_binary())
        lhs().collect_atoms(out);
      if (is_binary())
        rhs().collect_atoms(out);
    }

    friend bool operator==(const Formula &a, const Formula &b)
    {
      if (a.node_ == b.node_)
        return true;
      if (a.kind() != b.kind() || a.name() != b.name())
        return false;
      if (a.is_unary())
        return a.lhs() == b.lhs();
      if (a.is_binary())
        return a.lhs() == b.lhs() && a.rhs() == b.rhs();
      return true;
    }

  private:
    struct Node
    {
      Kind kind;
      std::string name;
      std::shared_ptr<const Node> lhs, rhs;
    };

    explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    Formula(Kind k, std::string name, std::shared_ptr<const Node> l, std::shared_ptr<const Node> r)
        : node_(std::make_shared<const Node>(Node{k, std::move(name), std::move(l), std::move(r)})) {}

    std::shared_ptr<const Node> node_;
  };

  // Builders used throughout the code base and tests.
  namespace ltl
  {
    inline Formula atom(std::string n) { return Formula::atom(std::move(n)); }
    inline Formula neg(const Formula &a) { return Formula::unary(Formula::Kind::Not, a); }
    inline Formula next(const Formula &a) { return Formula::unary(Formula::Kind::Next, a); }
    inline Formula future(const Formula &a) { return Formula::unary(Formula::Kind::Future, a); }
    inline Formula always(const Formula &a) { return Formula::unary(Formula::Kind::Always, a); }
    inline Formula conj(const Formula &a, const Formula &b) { return Formula::binary(Formula::Kind::And, a, b); }
    inline Formula disj(const Formula &a, const Formula &b) { return Formula::binary(Formula::Kind::Or, a, b); }
    inline Formula implies(const Formula &a, const Formula &b) { return Formula::binary(Formula::Kind::Implies, a, b); }
    inline Formula until(const Formula &a, const Formula &b) { return Formula::binary(Formula::Kind::Until, a, b); }
  }

  // -------------------------------------------------------------- parser

  namespace detail
  {
    class FormulaParser
    {
    public:
      explicit FormulaParser(std::string_view text) : text_(text) {}

      Formula parse()
      {
        Formula f = parse_implies();
        skip_ws();
        if (pos_ != text_.size())
          fail("unexpected trailing input");
        return f;
      }

    private:
      [[noreturn]] void fail(const std::string &what) const
      {
        throw Error(ErrorCode::parse, "syntax error at byte " + std::to_string(pos_) + ": " + what);
      }

      void skip_ws()
      {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
          ++pos_;
      }

      bool accept(std::string_view tok)
      {
        skip_ws();
        if (text_.substr(pos_, tok.size()) == tok)
        {
          pos_ += tok.size();
          return true;
        }
        return false;
      }

      static bool ident_char(char c)
      {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
      }

      Formula parse_implies()
      {
        Formula lhs = parse_or();
        if (accept("->"))
          return ltl::implies(lhs, parse_implies());
        return lhs;
      }

      Formula parse_or()
      {
        Formula lhs = parse_and();
        while (accept("||"))
          lhs = ltl::disj(lhs, parse_and());
        return lhs;
      }

      Formula parse_and()
      {
        Formula lhs = parse_until();
        while (accept("&&"))
          lhs = ltl::conj(lhs, parse_until());
        return lhs;
      }

      Formula parse_until()
      {
        Formula lhs = parse_unary();
        if (accept("U"))
          return ltl::until(lhs, parse_until());
        return lhs;
      }

      Formula parse_unary()
      {
        skip_ws();
        if (accept("!"))
          return ltl::neg(parse_unary());
        if (accept("X"))
          return ltl::next(parse_unary());
        if (accept("F"))
          return ltl::future(parse_unary());
        if (accept("G"))
          return ltl::always(parse_unary());
        return parse_primary();
      }

      Formula parse_primary()
      {
        skip_ws();
        if (pos_ >= text_.size())
          fail("unexpected end of input");
        if (accept("("))
        {
          Formula f = parse_implies();
          if (!accept(")"))
            fail("expected ')'");
          return f;
        }
        const std::size_t begin = pos_;
        while (pos_ < text_.size() && ident_char(text_[pos_]))
          ++pos_;
        if (begin == pos_)
          fail(std::string("unexpected character '") + text_[pos_] + "'");
        std::string name(text_.substr(begin, pos_ - begin));
        if (name == "true")
          return Formula::truth();
        if (name == "false")
          return Formula::falsity();
        return ltl::atom(std::move(name));
      }

      std::string_view text_;
      std::size_t pos_ = 0;
    };
  }

  inline Formula parse_formula(std::string_view text)
  {
    return detail::FormulaParser(text).parse();
  }

  /// Fully parenthesised canonical text; parse_formula inverts it.
  inline std::string format_formula(const Formula &f)
  {
    using K = Formula::Kind;
    switch (f.kind())
    {
    case K::True:
      return "true";
    case K::False:
      return "false";
    case K::Atom:
      return f.name();
    case K::Not:
      return "(! " + format_formula(f.lhs()) + ")";
    case K::Next:
      return "(X " + format_formula(f.lhs()) + ")";
    case K::Future:
      return "(F " + format_formula(f.lhs()) + ")";
    case K::Always:
      return "(G " + format_formula(f.lhs()) + ")";
    case K::And:
      return "(" + format_formula(f.lhs()) + " && " + format_formula(f.rhs()) + ")";
    case K::Or:
      return "(" + format_formula(f.lhs()) + " || " + format_formula(f.rhs()) + ")";
    case K::Implies:
      return "(" + format_formula(f.lhs()) + " -> " + format_formula(f.rhs()) + ")";
    case K::Until:
      return "(" + format_formula(f.lhs()) + " U " + format_formula(f.rhs()) + ")";
    }
    return {};
  }

  // ------------------------------------------------------ lasso semantics

  namespace detail
  {
    // Truth vector of f over positions 0..L-1 of prefix.cycle^omega, where
    // position L-1 is followed by position |prefix|.
    inline std::vector<bool> eval_positions(const Formula &f, std::span<const Letter> word, std::size_t loop)
    {
      using K = Formula::Kind;
      const std::size_t n = word.size();
      auto succ = [&](std::size_t k)
      { return k + 1 < n ? k + 1 : loop; };
      std::vector<bool> out(n);
      switch (f.kind())
      {
      case K::True:
        out.assign(n, true);
        break;
      case K::False:
        out.assign(n, false);
        break;
      case K::Atom:
        for (std::size_t k = 0; k < n; ++k)
          out[k] = word[k].count(f.name()) > 0;
        break;
      case K::Not:
      {
        auto a = eval_positions(f.lhs(), word, loop);
        for (std::size_t k = 0; k < n; ++k)
          out[k] = !a[k];
        break;
      }
      case K::And:
      case K::Or:
      case K::Implies:
      {
        auto a = eval_positions(f.lhs(), word, loop);
        auto b = eval_positions(f.rhs(), word, loop);
        for (std::size_t k = 0; k < n; ++k)
          out[k] = f.kind() == K::And ? (a[k] && b[k]) : f.kind() == K::Or ? (a[k] || b[k])
                                                                            : (!a[k] || b[k]);
        break;
      }
      case K::Next:
      {
        auto a = eval_positions(f.lhs(), word, loop);
        for (std::size_t k = 0; k < n; ++k)
          out[k] = a[succ(k)];
        break;
      }
      case K::Future:
      case K::Until:
      {
        // least fixpoint of  out = b || (a && out o succ)
        std::vector<bool> a = f.kind() == K::Until ? eval_positions(f.lhs(), word, loop) : std::vector<bool>(n, true);
        auto b = eval_positions(f.kind() == K::Until ? f.rhs() : f.lhs(), word, loop);
        out.assign(n, false);
        for (bool changed = true; changed;)
        {
          changed = false;
          for (std::size_t k = n; k-- > 0;)
          {
            const bool v = b[k] || (a[k] && out[succ(k)]);
            if (v != out[k])
            {
              out[k] = v;
              changed = true;
            }
          }
        }
        break;
      }
      case K::Always:
      {
        // greatest fixpoint of  out = a && out o succ
        auto a = eval_positions(f.lhs(), word, loop);
        out.assign(n, true);
        for (bool changed = true; changed;)
        {
          changed = false;
          for (std::size_t k = n; k-- > 0;)
          {
            const bool v = a[k] && out[succ(k)];
            if (v != out[k])
            {
              out[k] = v;
              changed = true;
            }
          }
        }
        break;
      }
      }
      return out;
    }
  }

  /// Truth of f on the infinite word prefix . cycle^omega.
  inline bool eval_lasso(const Formula &f, std::span<const Letter> prefix, std::span<const Letter> cycle)
  {
    if (cycle.empty())
      throw Error(ErrorCode::invalid_input, "cycle required");
    std::vector<Letter> word(prefix.begin(), prefix.end());
    word.insert(word.end(), cycle.begin(), cycle.end());
    return detail::eval_positions(f, word, prefix.size())[0];
  }
}
