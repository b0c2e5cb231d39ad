#include "promis/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "promis/error.hpp"
#include "promis/random.hpp"

namespace promis::inference {

namespace {
constexpr std::uint64_t kSamplingDomain = 0x696e6665ULL;  // "infe"
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

std::size_t ChoicePoint::outcomes() const {
  if (kind == Kind::Bernoulli) return 2;
  double mass = 0.0;
  for (double p : probabilities) mass += p;
  return probabilities.size() + (mass < 1.0 ? 1 : 0);
}

// Bernoulli outcome 1 is "true". Disjunction outcome k < size selects alternative k.
double ChoicePoint::outcome_probability(std::size_t outcome) const {
  if (kind == Kind::Bernoulli) return outcome == 1 ? probabilities[0] : 1.0 - probabilities[0];
  if (outcome < probabilities.size()) return probabilities[outcome];
  double mass = 0.0;
  for (double p : probabilities) mass += p;
  return std::max(0.0, 1.0 - mass);
}

std::vector<World> enumerate_worlds(const GroundProgram& g, std::size_t limit) {
  if (g.choices.size() > limit)
    throw Error(ErrorKind::Capacity, "ground program has " + std::to_string(g.choices.size()) +
                                         " choice points, above the enumeration limit of " + std::to_string(limit));
  std::vector<World> worlds;
  World current{std::vector<std::size_t>(g.choices.size(), 0), 1.0};
  // Depth-first over choices so partial products are shared.
  auto recurse = [&](auto& self, std::size_t i, double weight) -> void {
    if (weight <= 0.0) return;
    if (i == g.choices.size()) {
      current.weight = weight;
      worlds.push_back(current);
      return;
    }
    const auto& c = g.choices[i];
    for (std::size_t o = 0; o < c.outcomes(); ++o) {
      current.assignment[i] = o;
      self(self, i + 1, weight * c.outcome_probability(o));
    }
  };
  recurse(recurse, 0, 1.0);
  return worlds;
}

double evaluate(const GroundProgram& g, std::size_t expr, std::span<const double> values) {
  const ExprNode& e = g.exprs[expr];
  switch (e.kind) {
    case ExprNode::Kind::Constant: return e.value;
    case ExprNode::Kind::Variable: return values[e.variable];
    case ExprNode::Kind::Add: return evaluate(g, e.lhs, values) + evaluate(g, e.rhs, values);
    case ExprNode::Kind::Sub: return evaluate(g, e.lhs, values) - evaluate(g, e.rhs, values);
    case ExprNode::Kind::Mul: return evaluate(g, e.lhs, values) * evaluate(g, e.rhs, values);
    case ExprNode::Kind::Neg: return -evaluate(g, e.lhs, values);
  }
  return 0.0;
}

bool compare(const GroundProgram& g, const GroundComparison& c, std::span<const double> values) {
  const double l = evaluate(g, c.lhs, values);
  const double r = evaluate(g, c.rhs, values);
  switch (c.op) {
    case hplp::CompareOp::Less: return l < r;
    case hplp::CompareOp::Greater: return l > r;
    case hplp::CompareOp::LessEqual: return l <= r;
    case hplp::CompareOp::GreaterEqual: return l >= r;
  }
  return false;
}

namespace {

bool node_value(const LogicNode& n, const World& w, const std::vector<char>& truth, const std::vector<char>& cmp) {
  switch (n.kind) {
    case LogicNode::Kind::True: return true;
    case LogicNode::Kind::False: return false;
    case LogicNode::Kind::Choice: return w.assignment[n.index] == 1;
    case LogicNode::Kind::Alternative: return w.assignment[n.index] == n.alternative;
    case LogicNode::Kind::Compare: return cmp[n.index] != 0;
    case LogicNode::Kind::And:
      return std::all_of(n.children.begin(), n.children.end(), [&](std::size_t c) { return truth[c] != 0; });
    case LogicNode::Kind::Or:
      return std::any_of(n.children.begin(), n.children.end(), [&](std::size_t c) { return truth[c] != 0; });
  }
  return false;
}

bool eval_with_comparisons(const GroundProgram& g, const World& w, const std::vector<char>& cmp,
                           std::vector<char>& truth) {
  truth.assign(g.nodes.size(), 0);
  for (std::size_t i = 0; i <= g.query_node; ++i) truth[i] = node_value(g.nodes[i], w, truth, cmp) ? 1 : 0;
  return truth[g.query_node] != 0;
}

std::vector<char> comparison_truth(const GroundProgram& g, std::span<const double> values) {
  std::vector<char> out(g.comparisons.size());
  for (std::size_t i = 0; i < g.comparisons.size(); ++i) out[i] = compare(g, g.comparisons[i], values) ? 1 : 0;
  return out;
}

// Affine form sum(coef_v * var_v) + constant, or nullopt for nonlinear expressions.
struct Affine {
  double constant = 0.0;
  std::map<std::size_t, double> coef;
};

std::optional<Affine> affine(const GroundProgram& g, std::size_t expr) {
  const ExprNode& e = g.exprs[expr];
  switch (e.kind) {
    case ExprNode::Kind::Constant: return Affine{e.value, {}};
    case ExprNode::Kind::Variable: return Affine{0.0, {{e.variable, 1.0}}};
    case ExprNode::Kind::Neg: {
      auto a = affine(g, e.lhs);
      if (!a) return std::nullopt;
      a->constant = -a->constant;
      for (auto& [v, c] : a->coef) c = -c;
      return a;
    }
    case ExprNode::Kind::Add:
    case ExprNode::Kind::Sub: {
      auto l = affine(g, e.lhs);
      auto r = affine(g, e.rhs);
      if (!l || !r) return std::nullopt;
      const double sign = e.kind == ExprNode::Kind::Add ? 1.0 : -1.0;
      l->constant += sign * r->constant;
      for (const auto& [v, c] : r->coef) l->coef[v] += sign * c;
      return l;
    }
    case ExprNode::Kind::Mul: {
      auto l = affine(g, e.lhs);
      auto r = affine(g, e.rhs);
      if (!l || !r) return std::nullopt;
      if (!l->coef.empty() && !r->coef.empty()) return std::nullopt;
      const Affine& k = l->coef.empty() ? *l : *r;
      Affine out = l->coef.empty() ? *r : *l;
      out.constant *= k.constant;
      for (auto& [v, c] : out.coef) c *= k.constant;
      return out;
    }
  }
  return std::nullopt;
}

// Residual of a node once the discrete world is fixed.
struct Residual {
  enum class State { True, False, Conjunction, Complex };
  State state = State::True;
  std::set<std::size_t> comparisons;
};

Residual residual_of(const LogicNode& n, const World& w, const std::vector<Residual>& r) {
  using S = Residual::State;
  switch (n.kind) {
    case LogicNode::Kind::True: return {S::True, {}};
    case LogicNode::Kind::False: return {S::False, {}};
    case LogicNode::Kind::Choice: return {w.assignment[n.index] == 1 ? S::True : S::False, {}};
    case LogicNode::Kind::Alternative: return {w.assignment[n.index] == n.alternative ? S::True : S::False, {}};
    case LogicNode::Kind::Compare: return {S::Conjunction, {n.index}};
    case LogicNode::Kind::And: {
      Residual out{S::True, {}};
      for (auto c : n.children) {
        const Residual& x = r[c];
        if (x.state == S::False) return {S::False, {}};
        if (x.state == S::True) continue;
        if (x.state == S::Complex) out.state = S::Complex;
        else if (out.state == S::True) out.state = S::Conjunction;
        out.comparisons.insert(x.comparisons.begin(), x.comparisons.end());
      }
      return out;
    }
    case LogicNode::Kind::Or: {
      std::vector<const Residual*> open;
      for (auto c : n.children) {
        const Residual& x = r[c];
        if (x.state == S::True) return {S::True, {}};
        if (x.state != S::False) open.push_back(&x);
      }
      if (open.empty()) return {S::False, {}};
      // Identical residuals collapse; anything else is a genuine disjunction.
      if (std::all_of(open.begin(), open.end(), [&](const Residual* x) {
            return x->state == open.front()->state && x->comparisons == open.front()->comparisons;
          }))
        return *open.front();
      return {S::Complex, {}};
    }
  }
  return {S::Complex, {}};
}

}  // namespace

bool eval_logic(const GroundProgram& g, const World& world, std::span<const double> values) {
  std::vector<char> truth;
  return eval_with_comparisons(g, world, comparison_truth(g, values), truth);
}

bool eval_logic(const GroundProgram& g, const World& world, const std::map<std::string, double>& values) {
  std::vector<double> v(g.variables.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    auto it = values.find(g.variables[i].name);
    if (it == values.end())
      throw Error(ErrorKind::InvalidArgument, "no value bound for continuous variable " + g.variables[i].name);
    v[i] = it->second;
  }
  return eval_logic(g, world, std::span<const double>(v));
}

std::optional<double> exact_probability(const GroundProgram& g, const World& world) {
  std::vector<Residual> r(g.query_node + 1);
  for (std::size_t i = 0; i <= g.query_node; ++i) r[i] = residual_of(g.nodes[i], world, r);
  const Residual& q = r[g.query_node];
  switch (q.state) {
    case Residual::State::True: return 1.0;
    case Residual::State::False: return 0.0;
    case Residual::State::Complex: return std::nullopt;
    case Residual::State::Conjunction: break;
  }

  double probability = 1.0;
  std::set<std::size_t> used;
  for (std::size_t ci : q.comparisons) {
    const GroundComparison& c = g.comparisons[ci];
    auto l = affine(g, c.lhs);
    auto rr = affine(g, c.rhs);
    if (!l || !rr) return std::nullopt;
    // lhs - rhs = a * v + b
    Affine diff = *l;
    diff.constant -= rr->constant;
    for (const auto& [v, k] : rr->coef) diff.coef[v] -= k;
    std::erase_if(diff.coef, [](const auto& kv) { return kv.second == 0.0; });

    if (diff.coef.empty()) {
      if (!compare(g, c, std::vector<double>(g.variables.size(), 0.0))) return 0.0;
      continue;
    }
    if (diff.coef.size() > 1) return std::nullopt;
    const auto [v, a] = *diff.coef.begin();
    if (!used.insert(v).second) return std::nullopt;

    const ContinuousVariable& var = g.variables[v];
    const bool less = c.op == hplp::CompareOp::Less || c.op == hplp::CompareOp::LessEqual;
    if (var.stddev == 0.0) {
      std::vector<double> values(g.variables.size(), 0.0);
      values[v] = var.mean;
      if (!compare(g, c, values)) return 0.0;
      continue;
    }
    // a * v + b < 0  <=>  v < -b / a  (flipped for a < 0)
    const double bound = -diff.constant / a;
    const bool below = less == (a > 0.0);
    const double cdf = normal_cdf((bound - var.mean) / var.stddev);
    probability *= below ? cdf : 1.0 - cdf;
  }
  return probability;
}

double continuous_probability(const GroundProgram& g, const World& world, const Mode& mode, std::uint64_t stream) {
  if (mode.kind != Mode::Kind::MonteCarlo) {
    if (auto p = exact_probability(g, world)) return *p;
    if (mode.kind == Mode::Kind::Exact)
      throw Error(ErrorKind::InvalidArgument, "exact evaluation does not apply to query " + g.query);
  }
  if (mode.samples == 0) throw Error(ErrorKind::InvalidArgument, "Monte Carlo sample count must be > 0");
  std::vector<double> values(g.variables.size());
  std::vector<char> truth;
  std::size_t hits = 0;
  for (std::size_t m = 0; m < mode.samples; ++m) {
    const CounterRng rng({kSamplingDomain, mode.seed, stream, m});
    for (std::size_t v = 0; v < values.size(); ++v)
      values[v] = rng.normal(v, g.variables[v].mean, g.variables[v].stddev);
    hits += eval_with_comparisons(g, world, comparison_truth(g, values), truth) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(mode.samples);
}

QueryResult query(const GroundProgram& g, const QueryOptions& options) {
  const Mode& mode = options.mode;
  const auto worlds = enumerate_worlds(g, options.choice_limit);
  QueryResult result;
  result.worlds = worlds.size();
  result.continuous_variables = g.variables.size();

  if (mode.kind != Mode::Kind::MonteCarlo) {
    double total = 0.0;
    bool exact = true;
    for (const auto& w : worlds) {
      auto p = exact_probability(g, w);
      if (!p) {
        exact = false;
        break;
      }
      total += w.weight * *p;
    }
    if (exact) {
      result.probability = std::clamp(total, 0.0, 1.0);
      result.method = QueryResult::Method::Exact;
      return result;
    }
    if (mode.kind == Mode::Kind::Exact)
      throw Error(ErrorKind::InvalidArgument, "exact evaluation does not apply to query " + g.query);
  }

  if (mode.samples == 0) throw Error(ErrorKind::InvalidArgument, "Monte Carlo sample count must be > 0");
  // Common random numbers: every world sees the same sample set.
  std::vector<double> values(g.variables.size());
  std::vector<char> truth;
  double total = 0.0;
  for (std::size_t m = 0; m < mode.samples; ++m) {
    const CounterRng rng({kSamplingDomain, mode.seed, options.stream, m});
    for (std::size_t v = 0; v < values.size(); ++v)
      values[v] = rng.normal(v, g.variables[v].mean, g.variables[v].stddev);
    const auto cmp = comparison_truth(g, values);
    double sample = 0.0;
    for (const auto& w : worlds)
      if (eval_with_comparisons(g, w, cmp, truth)) sample += w.weight;
    total += sample;
  }
  result.probability = std::clamp(total / static_cast<double>(mode.samples), 0.0, 1.0);
  result.method = QueryResult::Method::MonteCarlo;
  result.samples = mode.samples;
  result.seed = mode.seed;
  return result;
}

QueryResult query(const hplp::Program& program, const hplp::Atom& atom, const QueryOptions& options,
                  std::span<const hplp::Clause> extra) {
  return query(ground(program, atom, extra), options);
}

}  // namespace promis::inference
