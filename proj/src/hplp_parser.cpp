#include "promis/hplp/parser.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "promis/error.hpp"

namespace promis::hplp {

namespace {

enum class Tok {
  Ident,     // lowercase symbol
  Variable,  // uppercase or '_' symbol
  Number,
  ColonColon,
  If,  // :-
  Tilde,
  LParen,
  RParen,
  Comma,
  Semicolon,
  Dot,
  Plus,
  Minus,
  Star,
  Slash,
  Less,
  Greater,
  LessEqual,
  GreaterEqual,
  End,
};

const char* describe(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Variable: return "variable";
    case Tok::Number: return "number";
    case Tok::ColonColon: return "'::'";
    case Tok::If: return "':-'";
    case Tok::Tilde: return "'~'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::Semicolon: return "';'";
    case Tok::Dot: return "'.'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Less: return "'<'";
    case Tok::Greater: return "'>'";
    case Tok::LessEqual: return "'=<'";
    case Tok::GreaterEqual: return "'>='";
    case Tok::End: return "end of input";
  }
  return "?";
}

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0.0;
  std::size_t line = 1;
  std::size_t column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      Token t;
      t.line = line_;
      t.column = column_;
      if (pos_ >= src_.size()) {
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) advance();
        t.text = std::string(src_.substr(start, pos_ - start));
        t.kind = (std::isupper(static_cast<unsigned char>(c)) || c == '_') ? Tok::Variable : Tok::Ident;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        lex_number(t);
      } else {
        lex_punct(t);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  bool digit_at(std::size_t i) const { return i < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i])); }

  void skip_trivia() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '%') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void lex_number(Token& t) {
    const std::size_t start = pos_;
    while (digit_at(pos_)) advance();
    // A '.' is a decimal point only when a digit follows; otherwise it ends the clause.
    if (pos_ < src_.size() && src_[pos_] == '.' && digit_at(pos_ + 1)) {
      advance();
      while (digit_at(pos_)) advance();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (digit_at(look)) {
        while (pos_ < look) advance();
        while (digit_at(pos_)) advance();
      }
    }
    t.kind = Tok::Number;
    t.text = std::string(src_.substr(start, pos_ - start));
    const auto [end, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
    if (ec != std::errc() || !std::isfinite(t.number))
      throw ParseError(where(t) + "number out of range '" + t.text + "'", t.line, t.column);
  }

  void lex_punct(Token& t) {
    auto two = [&](std::string_view s) { return src_.substr(pos_, 2) == s; };
    auto take = [&](Tok kind, std::size_t n) {
      t.kind = kind;
      t.text = std::string(src_.substr(pos_, n));
      for (std::size_t i = 0; i < n; ++i) advance();
    };
    if (two("::")) return take(Tok::ColonColon, 2);
    if (two(":-")) return take(Tok::If, 2);
    if (two("=<")) return take(Tok::LessEqual, 2);
    if (two(">=")) return take(Tok::GreaterEqual, 2);
    if (two("\\+")) throw ParseError(where(t) + "negation ('\\+') is not supported", t.line, t.column);
    switch (src_[pos_]) {
      case '~': return take(Tok::Tilde, 1);
      case '(': return take(Tok::LParen, 1);
      case ')': return take(Tok::RParen, 1);
      case ',': return take(Tok::Comma, 1);
      case ';': return take(Tok::Semicolon, 1);
      case '.': return take(Tok::Dot, 1);
      case '+': return take(Tok::Plus, 1);
      case '-': return take(Tok::Minus, 1);
      case '*': return take(Tok::Star, 1);
      case '/': return take(Tok::Slash, 1);
      case '<': return take(Tok::Less, 1);
      case '>': return take(Tok::Greater, 1);
      default: break;
    }
    const unsigned char c = static_cast<unsigned char>(src_[pos_]);
    std::string shown = std::isprint(c) ? std::string(1, static_cast<char>(c)) : "\\x" + std::to_string(c);
    throw ParseError(where(t) + "unexpected character '" + shown + "'", t.line, t.column);
  }

  static std::string where(const Token& t) {
    return "line " + std::to_string(t.line) + ", column " + std::to_string(t.column) + ": ";
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

constexpr int kMaxDepth = 200;

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Program program() {
    Program p;
    while (peek().kind != Tok::End) p.clauses.push_back(clause());
    check_arities(p);
    return p;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  bool at(Tok k) const { return peek().kind == k; }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }

  [[noreturn]] void fail(std::initializer_list<Tok> expected) const {
    const Token& t = peek();
    std::string msg = "line " + std::to_string(t.line) + ", column " + std::to_string(t.column) + ": unexpected ";
    msg += t.kind == Tok::End ? std::string("end of input") : "'" + t.text + "'";
    msg += ", expected ";
    bool first = true;
    for (Tok k : expected) {
      msg += first ? "" : " or ";
      msg += describe(k);
      first = false;
    }
    throw ParseError(msg, t.line, t.column);
  }

  [[noreturn]] void fail_at(const Token& t, const std::string& what) const {
    throw ParseError("line " + std::to_string(t.line) + ", column " + std::to_string(t.column) + ": " + what, t.line,
                     t.column);
  }

  const Token& expect(Tok k) {
    if (!at(k)) fail({k});
    return next();
  }

  Clause clause() {
    anon_ = 0;
    if (at(Tok::Number)) return probabilistic_clause();
    if (at(Tok::Ident) && peek().text == "query" && peek(1).kind == Tok::LParen) {
      next();
      next();
      Atom a = atom();
      expect(Tok::RParen);
      expect(Tok::Dot);
      return Query{std::move(a)};
    }
    if (!at(Tok::Ident)) fail({Tok::Ident, Tok::Number});
    Atom head = atom();
    if (at(Tok::Tilde)) {
      next();
      const Token& dist = expect(Tok::Ident);
      if (dist.text != "normal") fail_at(dist, "unsupported distribution '" + dist.text + "', expected normal");
      expect(Tok::LParen);
      const double mean = signed_number();
      expect(Tok::Comma);
      const Token& std_tok = peek();
      const double stddev = signed_number();
      expect(Tok::RParen);
      expect(Tok::Dot);
      if (stddev < 0.0) fail_at(std_tok, "negative standard deviation");
      return DistributionalFact{std::move(head), {mean, stddev}};
    }
    if (at(Tok::Dot)) {
      next();
      return Fact{std::move(head)};
    }
    if (at(Tok::If)) {
      next();
      Body b = body();
      expect(Tok::Dot);
      return Rule{std::nullopt, std::move(head), std::move(b)};
    }
    fail({Tok::Dot, Tok::If, Tok::Tilde});
  }

  Clause probabilistic_clause() {
    std::vector<std::pair<double, Atom>> alternatives;
    std::vector<const Token*> prob_tokens;
    for (;;) {
      prob_tokens.push_back(&peek());
      const double p = probability();
      expect(Tok::ColonColon);
      if (!at(Tok::Ident)) fail({Tok::Ident});
      alternatives.emplace_back(p, atom());
      if (at(Tok::Semicolon)) {
        next();
        continue;
      }
      break;
    }
    if (at(Tok::If)) {
      if (alternatives.size() > 1) fail_at(peek(), "annotated disjunctions cannot have a body");
      next();
      Body b = body();
      expect(Tok::Dot);
      return Rule{alternatives[0].first, std::move(alternatives[0].second), std::move(b)};
    }
    expect(Tok::Dot);
    if (alternatives.size() == 1) return ProbFact{alternatives[0].first, std::move(alternatives[0].second)};
    double mass = 0.0;
    for (const auto& [p, a] : alternatives) mass += p;
    if (mass > 1.0 + 1e-9) fail_at(*prob_tokens.front(), "annotated disjunction probabilities sum to more than 1");
    return AnnotatedDisjunction{std::move(alternatives)};
  }

  double probability() {
    const Token& t = expect(Tok::Number);
    double p = t.number;
    if (at(Tok::Slash)) {
      next();
      const Token& d = expect(Tok::Number);
      if (d.number == 0.0) fail_at(d, "division by zero in probability");
      p = t.number / d.number;
    }
    if (!(p >= 0.0 && p <= 1.0)) fail_at(t, "probability " + t.text + " outside [0, 1]");
    return p;
  }

  double signed_number() {
    bool negative = false;
    if (at(Tok::Minus)) {
      next();
      negative = true;
    }
    const double v = expect(Tok::Number).number;
    return negative ? -v : v;
  }

  Atom atom() {
    const Token& name = expect(Tok::Ident);
    if (name.text == "not" && at(Tok::LParen)) fail_at(name, "negation ('not') is not supported");
    Atom a{name.text, {}};
    if (at(Tok::LParen)) {
      next();
      a.args.push_back(term());
      while (at(Tok::Comma)) {
        next();
        a.args.push_back(term());
      }
      expect(Tok::RParen);
    }
    return a;
  }

  Term term() {
    if (at(Tok::Variable)) return variable_term(next());
    if (at(Tok::Ident)) return Term::constant(next().text);
    if (at(Tok::Number) || at(Tok::Minus)) return Term::num(signed_number());
    fail({Tok::Variable, Tok::Ident, Tok::Number});
  }

  Term variable_term(const Token& t) {
    if (t.text == "_") return Term::variable("_" + std::to_string(anon_++));
    return Term::variable(t.text);
  }

  Body body() {
    Body b;
    b.alternatives.push_back(conjunction());
    while (at(Tok::Semicolon)) {
      next();
      b.alternatives.push_back(conjunction());
    }
    return b;
  }

  Conjunction conjunction() {
    Conjunction c;
    c.push_back(literal());
    while (at(Tok::Comma)) {
      next();
      c.push_back(literal());
    }
    return c;
  }

  Literal literal() {
    if (at(Tok::Variable) && peek(1).kind == Tok::Ident && peek(1).text == "is") {
      const Token& v = next();
      if (v.text == "_") fail_at(v, "cannot assign to the anonymous variable");
      next();
      return Assignment{v.text, expr(0)};
    }
    const Token& start = peek();
    ExprPtr lhs = expr(0);
    if (at(Tok::Less) || at(Tok::Greater) || at(Tok::LessEqual) || at(Tok::GreaterEqual)) {
      const Tok op = next().kind;
      ExprPtr rhs = expr(0);
      const CompareOp cmp = op == Tok::Less      ? CompareOp::Less
                            : op == Tok::Greater ? CompareOp::Greater
                            : op == Tok::LessEqual ? CompareOp::LessEqual
                                                   : CompareOp::GreaterEqual;
      return Comparison{std::move(lhs), cmp, std::move(rhs)};
    }
    if (lhs->kind != Expr::Kind::Value) {
      if (start.kind == Tok::Variable && at(Tok::Ident)) fail_at(peek(), "unexpected '" + peek().text + "', expected 'is'");
      fail({Tok::Less, Tok::Greater, Tok::LessEqual, Tok::GreaterEqual});
    }
    return lhs->value;
  }

  // expr := term (('+'|'-') term)* ; term := factor ('*' factor)*
  ExprPtr expr(int depth) {
    guard(depth);
    ExprPtr lhs = product(depth + 1);
    while (at(Tok::Plus) || at(Tok::Minus)) {
      const auto kind = next().kind == Tok::Plus ? Expr::Kind::Add : Expr::Kind::Sub;
      lhs = make_binary(kind, lhs, product(depth + 1));
    }
    return lhs;
  }

  ExprPtr product(int depth) {
    guard(depth);
    ExprPtr lhs = factor(depth + 1);
    while (at(Tok::Star)) {
      next();
      lhs = make_binary(Expr::Kind::Mul, lhs, factor(depth + 1));
    }
    return lhs;
  }

  ExprPtr factor(int depth) {
    guard(depth);
    if (at(Tok::Number)) return make_number(next().number);
    if (at(Tok::Minus)) {
      next();
      if (at(Tok::Number)) return make_number(-next().number);
      return make_neg(factor(depth + 1));
    }
    if (at(Tok::Variable)) {
      Term v = variable_term(next());
      return make_variable(v.name);
    }
    if (at(Tok::Ident)) return make_value(atom());
    if (at(Tok::LParen)) {
      next();
      ExprPtr inner = expr(depth + 1);
      expect(Tok::RParen);
      return inner;
    }
    fail({Tok::Number, Tok::Variable, Tok::Ident, Tok::LParen, Tok::Minus});
  }

  void guard(int depth) const {
    if (depth > kMaxDepth) fail_at(peek(), "expression nested too deeply");
  }

  // Every predicate keeps one arity within a program. Value references inside
  // expressions name distributional heads and are checked the same way.
  void check_arities(const Program& p) const {
    std::map<std::string, std::size_t> arity;
    auto check = [&](const Atom& a) {
      auto [it, inserted] = arity.emplace(a.predicate, a.arity());
      if (!inserted && it->second != a.arity())
        throw ParseError("predicate '" + a.predicate + "' used with arities " + std::to_string(it->second) + " and " +
                         std::to_string(a.arity()));
    };
    for (const auto& c : p.clauses) {
      std::visit(
          [&](const auto& cl) {
            using T = std::decay_t<decltype(cl)>;
            if constexpr (std::is_same_v<T, Fact> || std::is_same_v<T, ProbFact> || std::is_same_v<T, Query>) {
              check(cl.atom);
            } else if constexpr (std::is_same_v<T, AnnotatedDisjunction>) {
              for (const auto& [pr, a] : cl.alternatives) check(a);
            } else if constexpr (std::is_same_v<T, DistributionalFact>) {
              check(cl.head);
            } else if constexpr (std::is_same_v<T, Rule>) {
              check(cl.head);
              for (const auto& conj : cl.body.alternatives)
                for (const auto& lit : conj)
                  if (const auto* a = std::get_if<Atom>(&lit)) check(*a);
            }
          },
          c);
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int anon_ = 0;
};

void print_term(std::ostringstream& out, const Term& t) {
  if (t.kind == Term::Kind::Number) out << format_number(t.number);
  else out << t.name;
}

void print_atom(std::ostringstream& out, const Atom& a) {
  out << a.predicate;
  if (a.args.empty()) return;
  out << '(';
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) out << ", ";
    print_term(out, a.args[i]);
  }
  out << ')';
}

int precedence(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Add:
    case Expr::Kind::Sub: return 1;
    case Expr::Kind::Mul: return 2;
    default: return 3;
  }
}

void print_expr(std::ostringstream& out, const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Number: out << format_number(e.number); return;
    case Expr::Kind::Variable: out << e.variable; return;
    case Expr::Kind::Value: print_atom(out, e.value); return;
    case Expr::Kind::Neg: {
      const bool bare = e.lhs->kind == Expr::Kind::Variable || e.lhs->kind == Expr::Kind::Value;
      out << '-';
      if (!bare) out << '(';
      print_expr(out, *e.lhs);
      if (!bare) out << ')';
      return;
    }
    default: break;
  }
  const int p = precedence(e);
  const bool left_parens = precedence(*e.lhs) < p;
  const bool right_parens = precedence(*e.rhs) <= p;
  if (left_parens) out << '(';
  print_expr(out, *e.lhs);
  if (left_parens) out << ')';
  out << (e.kind == Expr::Kind::Add ? " + " : e.kind == Expr::Kind::Sub ? " - " : " * ");
  if (right_parens) out << '(';
  print_expr(out, *e.rhs);
  if (right_parens) out << ')';
}

const char* op_text(CompareOp op) {
  switch (op) {
    case CompareOp::Less: return " < ";
    case CompareOp::Greater: return " > ";
    case CompareOp::LessEqual: return " =< ";
    case CompareOp::GreaterEqual: return " >= ";
  }
  return " < ";
}

void print_body(std::ostringstream& out, const Body& b) {
  for (std::size_t i = 0; i < b.alternatives.size(); ++i) {
    if (i) out << ";\n    ";
    const auto& conj = b.alternatives[i];
    for (std::size_t j = 0; j < conj.size(); ++j) {
      if (j) out << ", ";
      std::visit(
          [&](const auto& lit) {
            using T = std::decay_t<decltype(lit)>;
            if constexpr (std::is_same_v<T, Atom>) {
              print_atom(out, lit);
            } else if constexpr (std::is_same_v<T, Comparison>) {
              print_expr(out, *lit.lhs);
              out << op_text(lit.op);
              print_expr(out, *lit.rhs);
            } else {
              out << lit.variable << " is ";
              print_expr(out, *lit.expr);
            }
          },
          conj[j]);
    }
  }
}

}  // namespace

std::string format_number(double v) {
  if (v == 0.0) return "0";  // also folds -0
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string format_probability(double p) {
  std::string s = format_number(p);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

Program parse(std::string_view text) {
  Lexer lexer(text);
  Parser parser(lexer.run());
  return parser.program();
}

std::string to_string(const Atom& atom) {
  std::ostringstream out;
  print_atom(out, atom);
  return out.str();
}

std::string to_string(const Expr& expr) {
  std::ostringstream out;
  print_expr(out, expr);
  return out.str();
}

std::string to_string(const Clause& clause) {
  std::ostringstream out;
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, Fact>) {
          print_atom(out, c.atom);
        } else if constexpr (std::is_same_v<T, ProbFact>) {
          out << format_probability(c.probability) << "::";
          print_atom(out, c.atom);
        } else if constexpr (std::is_same_v<T, AnnotatedDisjunction>) {
          for (std::size_t i = 0; i < c.alternatives.size(); ++i) {
            if (i) out << "; ";
            out << format_probability(c.alternatives[i].first) << "::";
            print_atom(out, c.alternatives[i].second);
          }
        } else if constexpr (std::is_same_v<T, DistributionalFact>) {
          print_atom(out, c.head);
          out << " ~ normal(" << format_number(c.distribution.mean) << ", " << format_number(c.distribution.stddev)
              << ")";
        } else if constexpr (std::is_same_v<T, Rule>) {
          if (c.probability) out << format_probability(*c.probability) << "::";
          print_atom(out, c.head);
          out << " :- ";
          print_body(out, c.body);
        } else {
          out << "query(";
          print_atom(out, c.atom);
          out << ")";
        }
      },
      clause);
  out << '.';
  return out.str();
}

std::string pretty_print(const Program& program) {
  std::string out;
  for (const auto& c : program.clauses) {
    out += to_string(c);
    out += '\n';
  }
  return out;
}

}  // namespace promis::hplp
