#pragma once

#include <algorithm>
#include <cctype>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace stlerode {

enum class NodeKind { True, Predicate, Not, And, Or, Until, Eventually, Globally };

struct FormulaNode;
using Formula = std::shared_ptr<const FormulaNode>;

struct FormulaNode {
  NodeKind kind;
  std::string name;      // Predicate only
  bool negated = false;  // Predicate only; set by to_nnf, means complement region
  Formula left, right;   // unary ops use left
  int t1 = 0, t2 = 0;    // temporal interval in steps, t1 <= t2

  static Formula truth() {
    auto n = std::make_shared<FormulaNode>();
    n->kind = NodeKind::True;
    return n;
  }
  static Formula predicate(std::string name, bool negated = false) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = NodeKind::Predicate;
    n->name = std::move(name);
    n->negated = negated;
    return n;
  }
  static Formula negation(Formula f) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = NodeKind::Not;
    n->left = std::move(f);
    return n;
  }
  static Formula conj(Formula a, Formula b) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = NodeKind::And;
    n->left = std::move(a);
    n->right = std::move(b);
    return n;
  }
  static Formula disj(Formula a, Formula b) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = NodeKind::Or;
    n->left = std::move(a);
    n->right = std::move(b);
    return n;
  }
  static Formula until(Formula a, Formula b, int t1, int t2) {
    check_interval(t1, t2);
    auto n = std::make_shared<FormulaNode>();
    n->kind = NodeKind::Until;
    n->left = std::move(a);
    n->right = std::move(b);
    n->t1 = t1;
    n->t2 = t2;
    return n;
  }
  static Formula eventually(Formula f, int t1, int t2) {
    check_interval(t1, t2);
    auto n = std::make_shared<FormulaNode>();
    n->kind = NodeKind::Eventually;
    n->left = std::move(f);
    n->t1 = t1;
    n->t2 = t2;
    return n;
  }
  static Formula globally(Formula f, int t1, int t2) {
    check_interval(t1, t2);
    auto n = std::make_shared<FormulaNode>();
    n->kind = NodeKind::Globally;
    n->left = std::move(f);
    n->t1 = t1;
    n->t2 = t2;
    return n;
  }

 private:
  static void check_interval(int t1, int t2) {
    if (t1 < 0 || t2 < t1) {
      throw std::invalid_argument("temporal interval requires 0 <= t1 <= t2, got [" +
                                  std::to_string(t1) + "," + std::to_string(t2) + "]");
    }
  }
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t pos)
      : std::runtime_error(msg + " at position " + std::to_string(pos)), position(pos) {}
  std::size_t position;
};

// Grammar, loosest to tightest binding:
//   or    := and ('|' and)*
//   and   := until ('&' until)*
//   until := unary ('U' '[' int ',' int ']' until)?     right-associative
//   unary := '!' unary | 'G' '[' int ',' int ']' unary
//          | 'F' '[' int ',' int ']' unary | atom
//   atom  := 'TRUE' | ident | '(' or ')'
class FormulaParser {
 public:
  explicit FormulaParser(std::string text) : text_(std::move(text)) {}

  Formula parse() {
    Formula f = parse_or();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
    return f;
  }

 private:
  Formula parse_or() {
    Formula f = parse_and();
    while (peek() == '|') {
      ++pos_;
      f = FormulaNode::disj(f, parse_and());
    }
    return f;
  }

  Formula parse_and() {
    Formula f = parse_until();
    while (peek() == '&') {
      ++pos_;
      f = FormulaNode::conj(f, parse_until());
    }
    return f;
  }

  Formula parse_until() {
    Formula f = parse_unary();
    skip_ws();
    if (at_keyword("U")) {
      pos_ += 1;
      auto [t1, t2] = parse_interval();
      return FormulaNode::until(f, parse_until(), t1, t2);
    }
    return f;
  }

  Formula parse_unary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of formula", pos_);
    char c = text_[pos_];
    if (c == '!') {
      ++pos_;
      return FormulaNode::negation(parse_unary());
    }
    if (at_keyword("G")) {
      pos_ += 1;
      auto [t1, t2] = parse_interval();
      return FormulaNode::globally(parse_unary(), t1, t2);
    }
    if (at_keyword("F")) {
      pos_ += 1;
      auto [t1, t2] = parse_interval();
      return FormulaNode::eventually(parse_unary(), t1, t2);
    }
    return parse_atom();
  }

  Formula parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of formula", pos_);
    if (text_[pos_] == '(') {
      ++pos_;
      Formula f = parse_or();
      skip_ws();
      if (pos_ >= text_.size() || text_[pos_] != ')') {
        throw ParseError("expected ')'", pos_);
      }
      ++pos_;
      return f;
    }
    std::size_t start = pos_;
    std::string id = parse_ident();
    if (id.empty()) throw ParseError("expected predicate name, TRUE, or '('", start);
    if (id == "TRUE") return FormulaNode::truth();
    return FormulaNode::predicate(id);
  }

  std::pair<int, int> parse_interval() {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != '[') throw ParseError("expected '['", pos_);
    ++pos_;
    int t1 = parse_int();
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != ',') throw ParseError("expected ','", pos_);
    ++pos_;
    int t2 = parse_int();
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != ']') throw ParseError("expected ']'", pos_);
    ++pos_;
    if (t1 > t2) throw ParseError("interval requires t1 <= t2", pos_);
    return {t1, t2};
  }

  int parse_int() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start) throw ParseError("expected integer", start);
    return std::stoi(text_.substr(start, pos_ - start));
  }

  std::string parse_ident() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }

  // G/F/U are operators only when followed by '['; otherwise they start an
  // identifier (e.g. a predicate named "Goal").
  bool at_keyword(const char* kw) {
    skip_ws();
    std::size_t n = std::string(kw).size();
    if (text_.compare(pos_, n, kw) != 0) return false;
    std::size_t after = pos_ + n;
    while (after < text_.size() && std::isspace(static_cast<unsigned char>(text_[after]))) ++after;
    return after < text_.size() && text_[after] == '[';
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string text_;
  std::size_t pos_ = 0;
};

inline Formula parse_formula(const std::string& text) { return FormulaParser(text).parse(); }

namespace detail {

// Binding levels for the printer; parens are emitted only when a child binds
// looser than its context requires.
inline int binding_level(NodeKind k) {
  switch (k) {
    case NodeKind::Or: return 0;
    case NodeKind::And: return 1;
    case NodeKind::Until: return 2;
    default: return 3;
  }
}

inline void print_node(const Formula& f, int min_level, std::ostringstream& out) {
  int level = binding_level(f->kind);
  bool parens = level < min_level;
  if (parens) out << '(';
  switch (f->kind) {
    case NodeKind::True:
      out << "TRUE";
      break;
    case NodeKind::Predicate:
      if (f->negated) out << '!';
      out << f->name;
      break;
    case NodeKind::Not:
      out << '!';
      print_node(f->left, 3, out);
      break;
    case NodeKind::And:
      print_node(f->left, 1, out);
      out << " & ";
      print_node(f->right, 2, out);
      break;
    case NodeKind::Or:
      print_node(f->left, 0, out);
      out << " | ";
      print_node(f->right, 1, out);
      break;
    case NodeKind::Until:
      // right-associative: the left child must bind tighter than Until
      print_node(f->left, 3, out);
      out << " U[" << f->t1 << ',' << f->t2 << "] ";
      print_node(f->right, 2, out);
      break;
    case NodeKind::Eventually:
      out << "F[" << f->t1 << ',' << f->t2 << "] ";
      print_node(f->left, 3, out);
      break;
    case NodeKind::Globally:
      out << "G[" << f->t1 << ',' << f->t2 << "] ";
      print_node(f->left, 3, out);
      break;
  }
  if (parens) out << ')';
}

}  // namespace detail

inline std::string print_formula(const Formula& f) {
  std::ostringstream out;
  detail::print_node(f, 0, out);
  return out.str();
}

inline Formula to_nnf(const Formula& f, bool negate = false) {
  switch (f->kind) {
    case NodeKind::True:
      if (negate) throw std::invalid_argument("negation of TRUE has no representation (no False node)");
      return f;
    case NodeKind::Predicate:
      return FormulaNode::predicate(f->name, f->negated != negate);
    case NodeKind::Not:
      return to_nnf(f->left, !negate);
    case NodeKind::And:
      return negate ? FormulaNode::disj(to_nnf(f->left, true), to_nnf(f->right, true))
                    : FormulaNode::conj(to_nnf(f->left, false), to_nnf(f->right, false));
    case NodeKind::Or:
      return negate ? FormulaNode::conj(to_nnf(f->left, true), to_nnf(f->right, true))
                    : FormulaNode::disj(to_nnf(f->left, false), to_nnf(f->right, false));
    case NodeKind::Until:
      if (negate) {
        throw std::invalid_argument(
            "negated Until is not supported: dualization needs a Release operator");
      }
      return FormulaNode::until(to_nnf(f->left, false), to_nnf(f->right, false), f->t1, f->t2);
    case NodeKind::Eventually:
      return negate ? FormulaNode::globally(to_nnf(f->left, true), f->t1, f->t2)
                    : FormulaNode::eventually(to_nnf(f->left, false), f->t1, f->t2);
    case NodeKind::Globally:
      return negate ? FormulaNode::eventually(to_nnf(f->left, true), f->t1, f->t2)
                    : FormulaNode::globally(to_nnf(f->left, false), f->t1, f->t2);
  }
  throw std::logic_error("unreachable");
}

inline int horizon(const Formula& f) {
  switch (f->kind) {
    case NodeKind::True:
    case NodeKind::Predicate:
      return 0;
    case NodeKind::Not:
      return horizon(f->left);
    case NodeKind::And:
    case NodeKind::Or:
      return std::max(horizon(f->left), horizon(f->right));
    case NodeKind::Until:
      return f->t2 + std::max(horizon(f->left), horizon(f->right));
    case NodeKind::Eventually:
    case NodeKind::Globally:
      return f->t2 + horizon(f->left);
  }
  throw std::logic_error("unreachable");
}

inline bool structurally_equal(const Formula& a, const Formula& b) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case NodeKind::True: return true;
    case NodeKind::Predicate: return a->name == b->name && a->negated == b->negated;
    case NodeKind::Not: return structurally_equal(a->left, b->left);
    case NodeKind::And:
    case NodeKind::Or:
      return structurally_equal(a->left, b->left) && structurally_equal(a->right, b->right);
    case NodeKind::Until:
      return a->t1 == b->t1 && a->t2 == b->t2 && structurally_equal(a->left, b->left) &&
             structurally_equal(a->right, b->right);
    case NodeKind::Eventually:
    case NodeKind::Globally:
      return a->t1 == b->t1 && a->t2 == b->t2 && structurally_equal(a->left, b->left);
  }
  return false;
}

}  // namespace stlerode
