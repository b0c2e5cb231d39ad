#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace promis::hplp {

struct Term {
  enum class Kind { Variable, Constant, Number };

  Kind kind = Kind::Constant;
  std::string name;  // variable or constant symbol
  double number = 0.0;

  static Term variable(std::string n) { return {Kind::Variable, std::move(n), 0.0}; }
  static Term constant(std::string n) { return {Kind::Constant, std::move(n), 0.0}; }
  static Term num(double v) { return {Kind::Number, {}, v}; }

  bool is_variable() const { return kind == Kind::Variable; }
  bool operator==(const Term&) const = default;
};

struct Atom {
  std::string predicate;
  std::vector<Term> args;

  std::size_t arity() const { return args.size(); }
  bool is_ground() const;
  bool operator==(const Atom&) const = default;
};

/// Arithmetic over numbers, variables and value references (atoms naming a
/// distributional fact, e.g. `distance(X, operator)` or `initial_charge`).
struct Expr {
  enum class Kind { Number, Variable, Value, Add, Sub, Mul, Neg };

  Kind kind = Kind::Number;
  double number = 0.0;
  std::string variable;
  Atom value;
  std::shared_ptr<const Expr> lhs;
  std::shared_ptr<const Expr> rhs;  // unused for Neg

  bool operator==(const Expr& other) const;
};

using ExprPtr = std::shared_ptr<const Expr>;

ExprPtr make_number(double v);
ExprPtr make_variable(std::string name);
ExprPtr make_value(Atom atom);
ExprPtr make_binary(Expr::Kind kind, ExprPtr lhs, ExprPtr rhs);
ExprPtr make_neg(ExprPtr operand);

enum class CompareOp { Less, Greater, LessEqual, GreaterEqual };

struct Comparison {
  ExprPtr lhs;
  CompareOp op = CompareOp::Less;
  ExprPtr rhs;

  bool operator==(const Comparison& o) const { return op == o.op && *lhs == *o.lhs && *rhs == *o.rhs; }
};

/// `Variable is expr`
struct Assignment {
  std::string variable;
  ExprPtr expr;

  bool operator==(const Assignment& o) const { return variable == o.variable && *expr == *o.expr; }
};

using Literal = std::variant<Atom, Comparison, Assignment>;
using Conjunction = std::vector<Literal>;

/// Disjunction (`;`) of conjunctions (`,`).
struct Body {
  std::vector<Conjunction> alternatives;
  bool operator==(const Body&) const = default;
};

struct NormalDist {
  double mean = 0.0;
  double stddev = 0.0;
  bool operator==(const NormalDist&) const = default;
};

struct Fact {
  Atom atom;
  bool operator==(const Fact&) const = default;
};

struct ProbFact {
  double probability = 0.0;
  Atom atom;
  bool operator==(const ProbFact&) const = default;
};

struct AnnotatedDisjunction {
  std::vector<std::pair<double, Atom>> alternatives;
  bool operator==(const AnnotatedDisjunction&) const = default;
};

struct DistributionalFact {
  Atom head;
  NormalDist distribution;
  bool operator==(const DistributionalFact&) const = default;
};

/// `head :- body.`, or `p::head :- body.` when `probability` is set.
struct Rule {
  std::optional<double> probability;
  Atom head;
  Body body;
  bool operator==(const Rule&) const = default;
};

struct Query {
  Atom atom;
  bool operator==(const Query&) const = default;
};

using Clause = std::variant<Fact, ProbFact, AnnotatedDisjunction, DistributionalFact, Rule, Query>;

struct Program {
  std::vector<Clause> clauses;

  std::vector<Atom> queries() const;
  bool operator==(const Program&) const = default;
};

}  // namespace promis::hplp
