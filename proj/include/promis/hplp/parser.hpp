#pragma once

#include <string>
#include <string_view>

#include "promis/hplp/ast.hpp"

namespace promis::hplp {

/// Parses the mission-rule language. Throws ParseError carrying line and column.
Program parse(std::string_view text);

/// Canonical text; parse(pretty_print(p)) == p.
std::string pretty_print(const Program& program);
std::string to_string(const Clause& clause);
std::string to_string(const Atom& atom);
std::string to_string(const Expr& expr);

/// Shortest decimal that parses back to the same double.
std::string format_number(double v);
/// As format_number, but always with a fractional part ("1.0", "0.0").
std::string format_probability(double p);

}  // namespace promis::hplp
