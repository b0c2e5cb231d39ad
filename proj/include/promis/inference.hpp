#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "promis/hplp/ast.hpp"

namespace promis::inference {

/// An independent discrete choice: a Bernoulli fact (one probability) or an annotated
/// disjunction (one probability per alternative, leftover mass selects none).
struct ChoicePoint {
  enum class Kind { Bernoulli, Disjunction };

  Kind kind = Kind::Bernoulli;
  std::vector<double> probabilities;
  std::string label;

  /// Number of outcomes, including "none" for disjunctions with leftover mass.
  std::size_t outcomes() const;
  double outcome_probability(std::size_t outcome) const;
};

struct ContinuousVariable {
  std::string name;
  double mean = 0.0;
  double stddev = 0.0;  // 0 is a point mass
};

/// Ground arithmetic, stored as a flat expression pool.
struct ExprNode {
  enum class Kind { Constant, Variable, Add, Sub, Mul, Neg };

  Kind kind = Kind::Constant;
  double value = 0.0;
  std::size_t variable = 0;
  std::size_t lhs = 0;
  std::size_t rhs = 0;
};

struct GroundComparison {
  std::size_t lhs = 0;
  std::size_t rhs = 0;
  hplp::CompareOp op = hplp::CompareOp::Less;
  std::string text;
};

/// Propositional formula node. Children always precede their parents in `GroundProgram::nodes`.
struct LogicNode {
  enum class Kind { True, False, Choice, Alternative, Compare, And, Or };

  Kind kind = Kind::True;
  std::size_t index = 0;        // choice or comparison index
  std::size_t alternative = 0;  // for Alternative
  std::vector<std::size_t> children;
};

/// Variable-free program for one query, pruned to what the query depends on.
struct GroundProgram {
  std::vector<ChoicePoint> choices;
  std::vector<ContinuousVariable> variables;
  std::vector<ExprNode> exprs;
  std::vector<GroundComparison> comparisons;
  std::vector<LogicNode> nodes;
  std::size_t query_node = 0;
  std::string query;
  /// Ground atom text -> node, for diagnostics.
  std::map<std::string, std::size_t> atoms;
};

/// Grounds `program` (plus `extra` clauses) for the ground `query` atom.
/// Probabilistic rules get an independent choice per ground rule instance.
GroundProgram ground(const hplp::Program& program, const hplp::Atom& query,
                     std::span<const hplp::Clause> extra = {});

struct World {
  std::vector<std::size_t> assignment;  // outcome per choice point
  double weight = 1.0;
};

inline constexpr std::size_t kDefaultChoiceLimit = 24;

/// All positive-weight worlds, in mixed-radix order over the choice points.
std::vector<World> enumerate_worlds(const GroundProgram& g, std::size_t limit = kDefaultChoiceLimit);

double evaluate(const GroundProgram& g, std::size_t expr, std::span<const double> values);
bool compare(const GroundProgram& g, const GroundComparison& c, std::span<const double> values);

/// Query truth in `world` with every continuous variable fixed to `values[i]`.
bool eval_logic(const GroundProgram& g, const World& world, std::span<const double> values);
bool eval_logic(const GroundProgram& g, const World& world, const std::map<std::string, double>& values);

struct Mode {
  enum class Kind { Auto, Exact, MonteCarlo };

  Kind kind = Kind::Auto;
  std::size_t samples = 10'000;
  std::uint64_t seed = 0;

  static Mode automatic(std::size_t samples = 10'000, std::uint64_t seed = 0) { return {Kind::Auto, samples, seed}; }
  static Mode exact() { return {Kind::Exact, 0, 0}; }
  static Mode monte_carlo(std::size_t samples, std::uint64_t seed) { return {Kind::MonteCarlo, samples, seed}; }
};

/// Closed-form probability of the query in `world` when the residual formula is a
/// conjunction of comparisons, each linear in one distinct Normal variable.
std::optional<double> exact_probability(const GroundProgram& g, const World& world);

/// Probability of the query given the discrete `world`. Exact when possible (and requested),
/// otherwise Monte Carlo keyed by (seed, stream, sample, variable).
double continuous_probability(const GroundProgram& g, const World& world, const Mode& mode,
                              std::uint64_t stream = 0);

struct QueryResult {
  enum class Method { Exact, MonteCarlo };

  double probability = 0.0;
  Method method = Method::Exact;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::size_t worlds = 0;
  std::size_t continuous_variables = 0;
};

struct QueryOptions {
  Mode mode;
  std::uint64_t stream = 0;  // e.g. the global location index
  std::size_t choice_limit = kDefaultChoiceLimit;
};

/// Sum over worlds of weight * P(query | world). Monte Carlo shares one sample set
/// across all worlds.
QueryResult query(const GroundProgram& g, const QueryOptions& options = {});
QueryResult query(const hplp::Program& program, const hplp::Atom& atom, const QueryOptions& options = {},
                  std::span<const hplp::Clause> extra = {});

double normal_cdf(double z);

}  // namespace promis::inference
