#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "promis/hplp/ast.hpp"
#include "promis/relations.hpp"

namespace promis::hplp {

/// Symbolic name of grid location `index` (`x0`, `x1`, ...).
std::string location_constant(std::size_t index);

/// Relation facts of one location, ordered by relation name.
std::vector<Clause> location_clauses(const RelationTable& table, std::size_t location);

/// All relation facts of a table, ordered by (location, relation name).
Program generate_relation_clauses(const RelationTable& table);

}  // namespace promis::hplp
