#include "promis/hplp/codegen.hpp"

#include <algorithm>
#include <numeric>

namespace promis::hplp {

std::string location_constant(std::size_t index) { return "x" + std::to_string(index); }

namespace {

Atom relation_atom(const Relation& r, const std::string& location) {
  if (r.kind == RelationKind::Unary) return {r.type, {Term::constant(location)}};
  return {r.predicate(), {Term::constant(location), Term::constant(r.type)}};
}

}  // namespace

std::vector<Clause> location_clauses(const RelationTable& table, std::size_t location) {
  const auto& relations = table.relations();
  std::vector<std::size_t> order(relations.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::pair(relations[a].predicate(), relations[a].type) < std::pair(relations[b].predicate(), relations[b].type);
  });

  const std::string x = location_constant(location);
  std::vector<Clause> out;
  out.reserve(order.size());
  for (std::size_t r : order) {
    const auto& params = table.at(location, r);
    Atom atom = relation_atom(relations[r], x);
    if (const auto* b = std::get_if<Bernoulli>(&params))
      out.emplace_back(ProbFact{b->p, std::move(atom)});
    else
      out.emplace_back(DistributionalFact{std::move(atom), {std::get<Normal>(params).mean, std::get<Normal>(params).stddev}});
  }
  return out;
}

Program generate_relation_clauses(const RelationTable& table) {
  Program p;
  for (std::size_t loc = 0; loc < table.locations(); ++loc) {
    auto clauses = location_clauses(table, loc);
    std::move(clauses.begin(), clauses.end(), std::back_inserter(p.clauses));
  }
  return p;
}

}  // namespace promis::hplp
