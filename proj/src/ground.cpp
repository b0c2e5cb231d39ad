#include <algorithm>
#include <functional>
#include <unordered_map>
#include <unordered_set>

#include "promis/error.hpp"
#include "promis/hplp/parser.hpp"
#include "promis/inference.hpp"

namespace promis::inference {

using hplp::Atom;
using hplp::Term;

namespace {

// A variable is bound either to a term or to a ground arithmetic expression (`X is ...`).
struct Value {
  std::optional<Term> term;
  std::size_t expr = 0;
};

using Binding = std::vector<std::pair<std::string, Value>>;

const Value* lookup(const Binding& b, const std::string& name) {
  for (const auto& [n, v] : b)
    if (n == name) return &v;
  return nullptr;
}

struct Answer {
  std::vector<Term> args;
  std::size_t node;
};

struct ClauseRef {
  enum class Kind { Fact, ProbFact, Alternative, Rule };
  Kind kind;
  std::size_t clause;
  std::size_t alternative = 0;
};

std::string signature(const std::string& predicate, std::size_t arity) {
  return predicate + "/" + std::to_string(arity);
}

bool same_term(const Term& a, const Term& b) {
  if (a.kind != b.kind) return false;
  return a.kind == Term::Kind::Number ? a.number == b.number : a.name == b.name;
}

std::string term_text(const Term& t) {
  return t.kind == Term::Kind::Number ? "#" + hplp::format_number(t.number) : t.name;
}

class Grounder {
 public:
  Grounder(const hplp::Program& program, std::span<const hplp::Clause> extra) {
    clauses_.reserve(program.clauses.size() + extra.size());
    for (const auto& c : program.clauses) clauses_.push_back(&c);
    for (const auto& c : extra) clauses_.push_back(&c);
    index();
    true_node_ = add_node({LogicNode::Kind::True});
    false_node_ = add_node({LogicNode::Kind::False});
  }

  GroundProgram run(const Atom& query) {
    if (!query.is_ground()) throw Error(ErrorKind::Grounding, "query " + hplp::to_string(query) + " is not ground");
    g_.query = hplp::to_string(query);
    const auto answers = resolve(query);
    g_.query_node = answers.empty() ? false_node_ : answers.front().node;
    return compact();
  }

 private:
  void index() {
    for (std::size_t i = 0; i < clauses_.size(); ++i) {
      std::visit(
          [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, hplp::Fact>) {
              by_signature_[signature(c.atom.predicate, c.atom.arity())].push_back({ClauseRef::Kind::Fact, i});
            } else if constexpr (std::is_same_v<T, hplp::ProbFact>) {
              by_signature_[signature(c.atom.predicate, c.atom.arity())].push_back({ClauseRef::Kind::ProbFact, i});
            } else if constexpr (std::is_same_v<T, hplp::AnnotatedDisjunction>) {
              for (std::size_t k = 0; k < c.alternatives.size(); ++k) {
                const Atom& a = c.alternatives[k].second;
                if (!a.is_ground())
                  throw Error(ErrorKind::Grounding, "annotated disjunction alternative " + hplp::to_string(a) +
                                                        " must be ground");
                by_signature_[signature(a.predicate, a.arity())].push_back({ClauseRef::Kind::Alternative, i, k});
              }
            } else if constexpr (std::is_same_v<T, hplp::DistributionalFact>) {
              if (!c.head.is_ground())
                throw Error(ErrorKind::Grounding, "distributional fact " + hplp::to_string(c.head) + " must be ground");
              const auto [it, inserted] = distributions_.emplace(hplp::to_string(c.head), c.distribution);
              if (!inserted)
                throw Error(ErrorKind::Grounding, "multiple distributions for " + hplp::to_string(c.head));
            } else if constexpr (std::is_same_v<T, hplp::Rule>) {
              by_signature_[signature(c.head.predicate, c.head.arity())].push_back({ClauseRef::Kind::Rule, i});
            }
          },
          *clauses_[i]);
    }
  }

  std::size_t add_node(LogicNode n) {
    g_.nodes.push_back(std::move(n));
    return g_.nodes.size() - 1;
  }

  std::size_t add_expr(ExprNode e) {
    g_.exprs.push_back(e);
    return g_.exprs.size() - 1;
  }

  std::size_t choice(const std::string& key, ChoicePoint::Kind kind, std::vector<double> probabilities,
                     const std::string& label) {
    auto [it, inserted] = choice_by_key_.emplace(key, g_.choices.size());
    if (inserted) g_.choices.push_back({kind, std::move(probabilities), label});
    return it->second;
  }

  std::size_t bernoulli_node(const std::string& key, double p, const std::string& label) {
    if (p >= 1.0) return true_node_;
    const std::size_t c = choice(key, ChoicePoint::Kind::Bernoulli, {p}, label);
    return add_node({LogicNode::Kind::Choice, c});
  }

  std::size_t conjunction(std::vector<std::size_t> children) {
    std::erase(children, true_node_);
    if (children.empty()) return true_node_;
    if (children.size() == 1) return children.front();
    return add_node({LogicNode::Kind::And, 0, 0, std::move(children)});
  }

  // Call pattern: ground arguments kept, variables replaced by '_'.
  static std::string call_key(const Atom& pattern) {
    std::string key = pattern.predicate + "(";
    for (const auto& t : pattern.args) {
      key += t.is_variable() ? std::string("_") : term_text(t);
      key += ",";
    }
    return key + ")";
  }

  std::vector<Answer> resolve(const Atom& pattern) {
    const std::string key = call_key(pattern);
    if (auto it = table_.find(key); it != table_.end()) return it->second;
    if (in_progress_.contains(key)) {
      std::string cycle;
      bool on_cycle = false;
      for (const auto& s : stack_) {
        on_cycle = on_cycle || s.first == key;
        if (on_cycle) cycle += s.second + " -> ";
      }
      throw Error(ErrorKind::Cycle, "cyclic dependency: " + cycle + hplp::to_string(pattern));
    }
    in_progress_.insert(key);
    stack_.emplace_back(key, hplp::to_string(pattern));

    std::vector<std::pair<std::vector<Term>, std::vector<std::size_t>>> found;
    std::unordered_map<std::string, std::size_t> found_index;
    auto support = [&](std::vector<Term> args, std::size_t node) {
      const std::string text = hplp::to_string(Atom{pattern.predicate, args});
      auto [it, inserted] = found_index.emplace(text, found.size());
      if (inserted) found.emplace_back(std::move(args), std::vector<std::size_t>{});
      found[it->second].second.push_back(node);
    };

    const auto sig = by_signature_.find(signature(pattern.predicate, pattern.arity()));
    if (sig != by_signature_.end()) {
      const auto refs = sig->second;
      for (const auto& ref : refs) expand(ref, pattern, support);
    }

    std::vector<Answer> answers;
    for (auto& [args, supports] : found) {
      const std::string text = hplp::to_string(Atom{pattern.predicate, args});
      auto existing = g_.atoms.find(text);
      std::size_t node;
      if (existing != g_.atoms.end()) {
        node = existing->second;
      } else if (std::find(supports.begin(), supports.end(), true_node_) != supports.end()) {
        node = true_node_;
      } else if (supports.size() == 1) {
        node = supports.front();
      } else {
        node = add_node({LogicNode::Kind::Or, 0, 0, supports});
      }
      g_.atoms.emplace(text, node);
      answers.push_back({std::move(args), node});
    }

    stack_.pop_back();
    in_progress_.erase(key);
    table_.emplace(key, answers);
    return answers;
  }

  // Unifies clause-side `args` against the call pattern, extending `b` with clause variables.
  static bool unify_head(const std::vector<Term>& args, const Atom& pattern, Binding& b) {
    for (std::size_t i = 0; i < args.size(); ++i) {
      const Term& want = pattern.args[i];
      const Term& have = args[i];
      if (have.is_variable()) {
        if (const Value* v = lookup(b, have.name)) {
          if (!want.is_variable() && (!v->term || !same_term(*v->term, want))) return false;
        } else if (!want.is_variable()) {
          b.emplace_back(have.name, Value{want, 0});
        }
      } else if (!want.is_variable() && !same_term(have, want)) {
        return false;
      }
    }
    return true;
  }

  std::optional<std::vector<Term>> ground_args(const std::vector<Term>& args, const Binding& b, bool allow_free) {
    std::vector<Term> out;
    out.reserve(args.size());
    for (const auto& t : args) {
      if (!t.is_variable()) {
        out.push_back(t);
        continue;
      }
      const Value* v = lookup(b, t.name);
      if (!v) {
        if (!allow_free) return std::nullopt;
        out.push_back(t);
      } else if (v->term) {
        out.push_back(*v->term);
      } else if (g_.exprs[v->expr].kind == ExprNode::Kind::Constant) {
        out.push_back(Term::num(g_.exprs[v->expr].value));
      } else {
        throw Error(ErrorKind::Grounding, "variable " + t.name + " holds a random quantity and cannot be an argument");
      }
    }
    return out;
  }

  template <typename Support>
  void expand(const ClauseRef& ref, const Atom& pattern, Support& support) {
    const hplp::Clause& clause = *clauses_[ref.clause];
    switch (ref.kind) {
      case ClauseRef::Kind::Fact:
      case ClauseRef::Kind::ProbFact: {
        const Atom& atom =
            ref.kind == ClauseRef::Kind::Fact ? std::get<hplp::Fact>(clause).atom : std::get<hplp::ProbFact>(clause).atom;
        Binding b;
        if (!unify_head(atom.args, pattern, b)) return;
        auto args = ground_args(atom.args, b, false);
        if (!args) throw Error(ErrorKind::Grounding, "fact " + hplp::to_string(atom) + " cannot be grounded for call " +
                                                         hplp::to_string(pattern));
        if (ref.kind == ClauseRef::Kind::Fact) {
          support(std::move(*args), true_node_);
          return;
        }
        const double p = std::get<hplp::ProbFact>(clause).probability;
        if (p <= 0.0) return;
        const std::string text = hplp::to_string(Atom{atom.predicate, *args});
        support(std::move(*args), bernoulli_node("f" + std::to_string(ref.clause) + ":" + text, p, text));
        return;
      }
      case ClauseRef::Kind::Alternative: {
        const auto& ad = std::get<hplp::AnnotatedDisjunction>(clause);
        const auto& [p, atom] = ad.alternatives[ref.alternative];
        Binding b;
        if (p <= 0.0 || !unify_head(atom.args, pattern, b)) return;
        std::vector<double> probabilities;
        std::string label;
        for (const auto& [q, a] : ad.alternatives) {
          probabilities.push_back(q);
          label += (label.empty() ? "" : "; ") + hplp::to_string(a);
        }
        const std::size_t c = choice("d" + std::to_string(ref.clause), ChoicePoint::Kind::Disjunction,
                                     std::move(probabilities), label);
        support(atom.args, add_node({LogicNode::Kind::Alternative, c, ref.alternative}));
        return;
      }
      case ClauseRef::Kind::Rule: {
        const auto& rule = std::get<hplp::Rule>(clause);
        for (const auto& conj : rule.body.alternatives) {
          Binding b;
          if (!unify_head(rule.head.args, pattern, b)) return;
          std::vector<std::size_t> nodes;
          solve(conj, 0, b, nodes, [&](const Binding& solution, const std::vector<std::size_t>& body_nodes) {
            auto args = ground_args(rule.head.args, solution, false);
            if (!args)
              throw Error(ErrorKind::Grounding, "head of rule for " + hplp::to_string(rule.head) +
                                                    " has a variable not bound by its body");
            std::vector<std::size_t> children = body_nodes;
            if (rule.probability) {
              if (*rule.probability <= 0.0) return;
              std::string key = "r" + std::to_string(ref.clause) + ":" + hplp::to_string(Atom{rule.head.predicate, *args});
              std::vector<std::string> names;
              for (const auto& [name, value] : solution) names.push_back(name);
              std::sort(names.begin(), names.end());
              for (const auto& name : names) {
                const Value* v = lookup(solution, name);
                key += "|" + name + "=" + (v->term ? term_text(*v->term) : "e" + std::to_string(v->expr));
              }
              children.push_back(bernoulli_node(key, *rule.probability, "rule instance of " + hplp::to_string(rule.head)));
            }
            support(std::move(*args), conjunction(std::move(children)));
          });
        }
        return;
      }
    }
  }

  using Emit = std::function<void(const Binding&, const std::vector<std::size_t>&)>;

  void solve(const hplp::Conjunction& conj, std::size_t i, Binding& b, std::vector<std::size_t>& nodes, const Emit& emit) {
    if (i == conj.size()) {
      emit(b, nodes);
      return;
    }
    const auto& lit = conj[i];
    if (const auto* atom = std::get_if<Atom>(&lit)) {
      if (atom->predicate == "true" && atom->args.empty()) {
        solve(conj, i + 1, b, nodes, emit);
        return;
      }
      Atom call{atom->predicate, *ground_args(atom->args, b, true)};
      for (const auto& answer : resolve(call)) {
        const std::size_t mark = b.size();
        bool ok = true;
        for (std::size_t k = 0; k < call.args.size() && ok; ++k) {
          if (!call.args[k].is_variable()) continue;
          const std::string& name = call.args[k].name;
          if (const Value* v = lookup(b, name)) ok = v->term && same_term(*v->term, answer.args[k]);
          else b.emplace_back(name, Value{answer.args[k], 0});
        }
        if (ok && answer.node != false_node_) {
          nodes.push_back(answer.node);
          solve(conj, i + 1, b, nodes, emit);
          nodes.pop_back();
        }
        b.resize(mark);
      }
      return;
    }
    if (const auto* cmp = std::get_if<hplp::Comparison>(&lit)) {
      const std::size_t lhs = compile(*cmp->lhs, b);
      const std::size_t rhs = compile(*cmp->rhs, b);
      GroundComparison gc{lhs, rhs, cmp->op, hplp::to_string(*cmp->lhs) + " vs " + hplp::to_string(*cmp->rhs)};
      if (g_.exprs[lhs].kind == ExprNode::Kind::Constant && g_.exprs[rhs].kind == ExprNode::Kind::Constant) {
        if (!compare(g_, gc, {})) return;
        solve(conj, i + 1, b, nodes, emit);
        return;
      }
      g_.comparisons.push_back(std::move(gc));
      nodes.push_back(add_node({LogicNode::Kind::Compare, g_.comparisons.size() - 1}));
      solve(conj, i + 1, b, nodes, emit);
      nodes.pop_back();
      return;
    }
    const auto& assign = std::get<hplp::Assignment>(lit);
    if (lookup(b, assign.variable))
      throw Error(ErrorKind::Grounding, "variable " + assign.variable + " is already bound before 'is'");
    b.emplace_back(assign.variable, Value{std::nullopt, compile(*assign.expr, b)});
    solve(conj, i + 1, b, nodes, emit);
    b.pop_back();
  }

  std::size_t compile(const hplp::Expr& e, const Binding& b) {
    using K = hplp::Expr::Kind;
    switch (e.kind) {
      case K::Number: return add_expr({ExprNode::Kind::Constant, e.number});
      case K::Variable: {
        const Value* v = lookup(b, e.variable);
        if (!v) throw Error(ErrorKind::Grounding, "unbound variable " + e.variable + " in arithmetic");
        if (!v->term) return v->expr;
        if (v->term->kind == Term::Kind::Number) return add_expr({ExprNode::Kind::Constant, v->term->number});
        return compile_value(Atom{v->term->name, {}});
      }
      case K::Value: {
        auto args = ground_args(e.value.args, b, false);
        if (!args) throw Error(ErrorKind::Grounding, "unbound variable in value " + hplp::to_string(e.value));
        return compile_value(Atom{e.value.predicate, std::move(*args)});
      }
      case K::Neg: {
        const std::size_t x = compile(*e.lhs, b);
        if (g_.exprs[x].kind == ExprNode::Kind::Constant) return add_expr({ExprNode::Kind::Constant, -g_.exprs[x].value});
        return add_expr({ExprNode::Kind::Neg, 0.0, 0, x});
      }
      default: {
        const std::size_t l = compile(*e.lhs, b);
        const std::size_t r = compile(*e.rhs, b);
        const auto kind = e.kind == K::Add ? ExprNode::Kind::Add : e.kind == K::Sub ? ExprNode::Kind::Sub : ExprNode::Kind::Mul;
        ExprNode node{kind, 0.0, 0, l, r};
        if (g_.exprs[l].kind == ExprNode::Kind::Constant && g_.exprs[r].kind == ExprNode::Kind::Constant) {
          g_.exprs.push_back(node);
          const double v = evaluate(g_, g_.exprs.size() - 1, {});
          g_.exprs.back() = {ExprNode::Kind::Constant, v};
          return g_.exprs.size() - 1;
        }
        return add_expr(node);
      }
    }
  }

  std::size_t compile_value(const Atom& ground) {
    const std::string text = hplp::to_string(ground);
    auto var = var_by_key_.find(text);
    if (var == var_by_key_.end()) {
      auto dist = distributions_.find(text);
      if (dist == distributions_.end())
        throw Error(ErrorKind::Grounding, "no distribution defined for value " + text);
      var = var_by_key_.emplace(text, g_.variables.size()).first;
      g_.variables.push_back({text, dist->second.mean, dist->second.stddev});
    }
    return add_expr({ExprNode::Kind::Variable, 0.0, var->second});
  }

  // Keeps only what the query node reaches and renumbers everything densely.
  GroundProgram compact() {
    std::vector<char> live(g_.nodes.size(), 0);
    live[g_.query_node] = 1;
    for (std::size_t i = g_.nodes.size(); i-- > 0;)
      if (live[i])
        for (auto c : g_.nodes[i].children) live[c] = 1;

    GroundProgram out;
    out.query = g_.query;
    std::vector<std::size_t> node_map(g_.nodes.size()), choice_map(g_.choices.size(), SIZE_MAX),
        cmp_map(g_.comparisons.size(), SIZE_MAX), var_map(g_.variables.size(), SIZE_MAX),
        expr_map(g_.exprs.size(), SIZE_MAX);

    std::function<std::size_t(std::size_t)> copy_expr = [&](std::size_t e) -> std::size_t {
      if (expr_map[e] != SIZE_MAX) return expr_map[e];
      ExprNode n = g_.exprs[e];
      switch (n.kind) {
        case ExprNode::Kind::Constant: break;
        case ExprNode::Kind::Variable:
          if (var_map[n.variable] == SIZE_MAX) {
            var_map[n.variable] = out.variables.size();
            out.variables.push_back(g_.variables[n.variable]);
          }
          n.variable = var_map[n.variable];
          break;
        case ExprNode::Kind::Neg: n.lhs = copy_expr(n.lhs); break;
        default:
          n.lhs = copy_expr(n.lhs);
          n.rhs = copy_expr(n.rhs);
      }
      out.exprs.push_back(n);
      return expr_map[e] = out.exprs.size() - 1;
    };

    for (std::size_t i = 0; i < g_.nodes.size(); ++i) {
      if (!live[i]) continue;
      LogicNode n = g_.nodes[i];
      if (n.kind == LogicNode::Kind::Choice || n.kind == LogicNode::Kind::Alternative) {
        if (choice_map[n.index] == SIZE_MAX) {
          choice_map[n.index] = out.choices.size();
          out.choices.push_back(g_.choices[n.index]);
        }
        n.index = choice_map[n.index];
      } else if (n.kind == LogicNode::Kind::Compare) {
        if (cmp_map[n.index] == SIZE_MAX) {
          GroundComparison c = g_.comparisons[n.index];
          c.lhs = copy_expr(c.lhs);
          c.rhs = copy_expr(c.rhs);
          cmp_map[n.index] = out.comparisons.size();
          out.comparisons.push_back(std::move(c));
        }
        n.index = cmp_map[n.index];
      }
      for (auto& c : n.children) c = node_map[c];
      out.nodes.push_back(std::move(n));
      node_map[i] = out.nodes.size() - 1;
    }
    out.query_node = node_map[g_.query_node];
    for (const auto& [text, node] : g_.atoms)
      if (live[node]) out.atoms.emplace(text, node_map[node]);
    return out;
  }

  std::vector<const hplp::Clause*> clauses_;
  std::unordered_map<std::string, std::vector<ClauseRef>> by_signature_;
  std::unordered_map<std::string, hplp::NormalDist> distributions_;
  std::unordered_map<std::string, std::vector<Answer>> table_;
  std::unordered_set<std::string> in_progress_;
  std::vector<std::pair<std::string, std::string>> stack_;
  std::unordered_map<std::string, std::size_t> choice_by_key_;
  std::unordered_map<std::string, std::size_t> var_by_key_;
  GroundProgram g_;
  std::size_t true_node_ = 0;
  std::size_t false_node_ = 0;
};

}  // namespace

GroundProgram ground(const hplp::Program& program, const hplp::Atom& query, std::span<const hplp::Clause> extra) {
  Grounder grounder(program, extra);
  return grounder.run(query);
}

}  // namespace promis::inference
