#include <random>

#include <gtest/gtest.h>

#include "promis/error.hpp"
#include "promis/hplp/codegen.hpp"
#include "promis/hplp/parser.hpp"
#include "fuzz_inputs.hpp"
#include "test_support.hpp"

using namespace promis;
using namespace promis::hplp;

namespace {

Atom atom(std::string p, std::vector<std::string> args = {}) {
  Atom a{std::move(p), {}};
  for (auto& s : args) a.args.push_back(Term::constant(std::move(s)));
  return a;
}

const Clause& single(const Program& p) {
  EXPECT_EQ(p.clauses.size(), 1u);
  return p.clauses.at(0);
}

}  // namespace

TEST(Parse, ProbabilisticFact) {
  const Program p = parse("0.9::over(x0, primary).");
  EXPECT_EQ(single(p), Clause(ProbFact{0.9, atom("over", {"x0", "primary"})}));
}

TEST(Parse, DistributionalFact) {
  const Program p = parse("initial_charge ~ normal(90, 5).");
  EXPECT_EQ(single(p), Clause(DistributionalFact{atom("initial_charge"), {90, 5}}));
}

TEST(Parse, AnnotatedDisjunctionWithFractions) {
  const Program p = parse("1/10::fog; 9/10::clear.");
  EXPECT_EQ(single(p), Clause(AnnotatedDisjunction{{{0.1, atom("fog")}, {0.9, atom("clear")}}}));
}

TEST(Parse, CorpusListings) {
  for (const char* name : {"listing1.pl", "listing3_spatial.pl", "listing3_change.pl", "listing5.pl"}) {
    SCOPED_TRACE(name);
    const Program p = parse(test::read_data(name));
    EXPECT_FALSE(p.clauses.empty());
    EXPECT_EQ(parse(pretty_print(p)), p);
  }
}

TEST(Parse, ListingOneShape) {
  const Program p = parse(test::read_data("listing1.pl"));
  ASSERT_EQ(p.clauses.size(), 7u);
  const auto& rule = std::get<Rule>(p.clauses[0]);
  EXPECT_EQ(rule.probability, 0.9);
  EXPECT_EQ(rule.head.predicate, "operates_drone");
  ASSERT_EQ(p.queries().size(), 1u);
  EXPECT_EQ(p.queries()[0], atom("operates_drone", {"jonas"}));
}

TEST(Parse, ListingFiveRules) {
  const Program p = parse(test::read_data("listing5.pl"));
  const auto& vlos = std::get<Rule>(p.clauses[4]);
  EXPECT_EQ(vlos.body.alternatives.size(), 2u);
  const auto& can_return = std::get<Rule>(p.clauses[5]);
  ASSERT_EQ(can_return.body.alternatives[0].size(), 4u);
  EXPECT_TRUE(std::holds_alternative<Assignment>(can_return.body.alternatives[0][0]));
  EXPECT_TRUE(std::holds_alternative<Comparison>(can_return.body.alternatives[0][3]));
}

TEST(Parse, CommentsAndWhitespace) {
  const Program p = parse("% header\n  a.  % trailing\n\n0.5 :: b.\n");
  EXPECT_EQ(p.clauses.size(), 2u);
}

TEST(Parse, ErrorsAreLocated) {
  try {
    parse("a.\nb :- c,\n  .");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_GT(e.column(), 0u);
  }
}

TEST(Parse, RejectedInputs) {
  for (const char* text : {"1.5::a.", "-0.1::a.", "0.6::a; 0.6::b.", "a ~ normal(1, -2).", "\\+ a.",
                           "a :- \\+ b.", "a :- not(b).", "a :- b", "a(X) :- X < .", "p(a). p(a, b).",
                           "1/0::a."}) {
    SCOPED_TRACE(text);
    EXPECT_THROW(parse(text), ParseError);
  }
}

TEST(Print, ProbabilisticFact) {
  EXPECT_EQ(to_string(Clause(ProbFact{0.9, atom("a")})), "0.9::a.");
  EXPECT_EQ(to_string(Clause(ProbFact{1.0, atom("a")})), "1.0::a.");
}

TEST(Print, ArithmeticParentheses) {
  const Program p = parse("a(X) :- 0 < 2 - (3 - X), 1 < (2 * 3) + 4, 5 < 2 * (3 + X), -X < -(1 + 2).");
  const std::string s = pretty_print(p);
  EXPECT_NE(s.find("2 - (3 - X)"), std::string::npos) << s;
  EXPECT_NE(s.find("2 * 3 + 4"), std::string::npos) << s;
  EXPECT_NE(s.find("2 * (3 + X)"), std::string::npos) << s;
  EXPECT_EQ(parse(s), p);
}

TEST(Print, NumbersRoundtrip) {
  const Program p = parse("0.1::a. b ~ normal(0.30000000000000004, 1e-7). c(X) :- X < 123456789.125.");
  EXPECT_EQ(parse(pretty_print(p)), p);
}

TEST(Codegen, RelationClauses) {
  const GridSpec grid{{49.878091, 8.654052}, 10.0, 10.0, 2, 2};
  RelationTable t(grid);
  t.add({RelationKind::Distance, "building"}, std::vector<RelationParams>(4, Normal{20, 0.5}));
  t.add({RelationKind::Unary, "change"}, std::vector<RelationParams>(4, Bernoulli{0.7}));
  t.add({RelationKind::Over, "primary"}, std::vector<RelationParams>(4, Bernoulli{1.0}));
  const auto c0 = location_clauses(t, 0);
  const auto c1 = location_clauses(t, 1);
  ASSERT_EQ(c0.size(), 3u);
  EXPECT_EQ(to_string(c0[1]), "distance(x0, building) ~ normal(20, 0.5).");
  EXPECT_EQ(to_string(c0[2]), "1.0::over(x0, primary).");
  EXPECT_EQ(to_string(c1[0]), "0.7::change(x1).");
  const Program all = generate_relation_clauses(t);
  EXPECT_EQ(all.clauses.size(), 12u);
  EXPECT_EQ(parse(pretty_print(all)), all);
}

TEST(Fuzz, NoCrashesOnArbitraryInput) {
  std::mt19937_64 rng(99);
  const std::string corpus = test::read_data("listing5.pl") + test::read_data("listing1.pl");
  std::size_t parsed = 0;
  for (std::size_t i = 0; i < 2000; ++i) {
    const std::string text = test::fuzz_input(rng, corpus, i);
    try {
      parse(text);
      ++parsed;
    } catch (const ParseError&) {
    }
  }
  SUCCEED() << parsed;
}

TEST(Fuzz, DeepNestingIsAnError) {
  const std::string text = "a :- 0 < " + std::string(5000, '(') + "1" + std::string(5000, ')') + ".";
  EXPECT_THROW(parse(text), ParseError);
}
