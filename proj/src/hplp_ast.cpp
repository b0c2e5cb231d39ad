#include "promis/hplp/ast.hpp"

#include <algorithm>

namespace promis::hplp {

bool Atom::is_ground() const {
  return std::none_of(args.begin(), args.end(), [](const Term& t) { return t.is_variable(); });
}

bool Expr::operator==(const Expr& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case Kind::Number: return number == o.number;
    case Kind::Variable: return variable == o.variable;
    case Kind::Value: return value == o.value;
    case Kind::Neg: return *lhs == *o.lhs;
    default: return *lhs == *o.lhs && *rhs == *o.rhs;
  }
}

ExprPtr make_number(double v) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Number;
  e->number = v;
  return e;
}

ExprPtr make_variable(std::string name) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Variable;
  e->variable = std::move(name);
  return e;
}

ExprPtr make_value(Atom atom) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Value;
  e->value = std::move(atom);
  return e;
}

ExprPtr make_binary(Expr::Kind kind, ExprPtr lhs, ExprPtr rhs) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->lhs = std::move(lhs);
  e->rhs = std::move(rhs);
  return e;
}

ExprPtr make_neg(ExprPtr operand) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Neg;
  e->lhs = std::move(operand);
  return e;
}

std::vector<Atom> Program::queries() const {
  std::vector<Atom> out;
  for (const auto& c : clauses)
    if (const auto* q = std::get_if<Query>(&c)) out.push_back(q->atom);
  return out;
}

}  // namespace promis::hplp
