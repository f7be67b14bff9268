#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace gti;
using json_io::json;

TEST(Rational, ParseForms) {
  EXPECT_EQ(parse_rational("3/6"), Rational(1, 2));
  EXPECT_EQ(parse_rational("-0.125"), Rational(-1, 8));
  EXPECT_EQ(parse_rational("2.5e-1"), Rational(1, 4));
  EXPECT_EQ(parse_rational(" 7 "), Rational(7));
  EXPECT_EQ(parse_rational("0.1"), Rational(1, 10));
  EXPECT_THROW(parse_rational("1/0"), ParseError);
  EXPECT_THROW(parse_rational("abc"), ParseError);
  EXPECT_THROW(parse_rational(""), ParseError);
  EXPECT_EQ(rational_from_double(0.1), Rational(1, 10));
  EXPECT_EQ(to_fraction_string(Rational(-6, 4)), "-3/2");
  EXPECT_EQ(format_decimal(2.0 / 3.0), "0.666667");
}

TEST(Rational, ExactSqrt) {
  EXPECT_EQ(*exact_sqrt(Rational(9, 49)), Rational(3, 7));
  EXPECT_FALSE(exact_sqrt(Rational(2, 9)));
  EXPECT_FALSE(exact_sqrt(Rational(-1, 4)));
}

TEST(CountsJson, RoundTripWithTruth) {
  const auto counts = fixtures::fixture_counts(fixtures::fixture("mushroom"));
  const json j = json_io::counts_to_json(counts);
  EXPECT_EQ(j.at("n"), 4);
  EXPECT_EQ(j.at("total"), 7311);
  EXPECT_FALSE(j.at("counts").contains(fixtures::oriented_pattern(fixtures::fixture("mushroom"), "0101")));
  EXPECT_EQ(json_io::counts_from_json(json::parse(j.dump())), counts);
}

TEST(CountsJson, BigCountersAsStrings) {
  DecisionCounts c = empty_counts(2, false);
  c.add("ab", BigInt("99999999999999999999999"));
  const json j = json_io::counts_to_json(c);
  EXPECT_TRUE(j.at("counts").at("ab").is_string());
  EXPECT_EQ(json_io::counts_from_json(j), c);
}

TEST(CountsJson, RejectsInvalid) {
  EXPECT_THROW(json_io::counts_from_json(json::parse(R"({"n":2,"counts":{"ab":-1}})")), ParseError);
  EXPECT_THROW(json_io::counts_from_json(json::parse(R"({"n":2,"counts":{"abc":1}})")), ParseError);
  EXPECT_THROW(json_io::counts_from_json(json::parse(R"({"n":2,"counts":{"ab":1.5}})")), ParseError);
  EXPECT_THROW(json_io::counts_from_json(json::parse(R"({"n":2,"total":3,"counts":{"ab":1}})")), ParseError);
  EXPECT_THROW(json_io::counts_from_json(json::parse(R"({"counts":{}})")), ParseError);
  EXPECT_THROW(json_io::counts_from_json(
                   json::parse(R"({"n":1,"counts":{"a":2},"by_truth":{"a":{"a":1},"b":{}}})")),
               ParseError);
}

TEST(CountsJson, FractionalExpectedCounts) {
  const auto stats = independent_stats(Rational(1, 3), {Rational(1, 2)}, {Rational(1, 2)});
  const json j = json_io::counts_to_json(expected_counts(stats));
  EXPECT_EQ(j.at("by_truth").at("a").at("a"), "1/6");
  EXPECT_EQ(j.at("total"), 1);
}

TEST(StatsJson, RoundTripIsLossless) {
  const auto stats = stats_from_truth_counts(fixtures::fixture_counts(fixtures::fixture("spambase")));
  const json j = json_io::stats_to_json(stats);
  EXPECT_TRUE(j.contains("pairwise_summary"));
  EXPECT_EQ(j.at("moments").size(), 22u);
  EXPECT_TRUE(j.at("moments").contains("a:1,2,3,4"));
  EXPECT_EQ(json_io::stats_from_json(json::parse(j.dump())), stats);
}

TEST(StatsJson, CompactInputForm) {
  const auto s = json_io::stats_from_json(json::parse(
      R"({"prevalence":"2/5","acc_alpha":[0.8,"7/10",{"exact":"9/10"}],"acc_beta":["0.9","3/5","4/5"],
          "moments":{"a:1,2":"1/50"}})"));
  EXPECT_EQ(s.n, 3u);
  EXPECT_EQ(s.acc_alpha[0], Rational(4, 5));
  EXPECT_EQ(s.moment(Label::alpha, subset_of({0, 1})), Rational(1, 50));
  EXPECT_EQ(s.moment(Label::beta, subset_of({0, 1, 2})), 0);
}

TEST(StatsJson, RejectsInvalid) {
  EXPECT_THROW(json_io::stats_from_json(json::parse(R"({"prevalence":2,"acc_alpha":[0.5],"acc_beta":[0.5]})")),
               ParseError);
  EXPECT_THROW(json_io::stats_from_json(
                   json::parse(R"({"prevalence":0.5,"acc_alpha":[0.5,0.5],"acc_beta":[0.5,0.5],"moments":{"a:1,3":0}})")),
               ParseError);
  EXPECT_THROW(json_io::stats_from_json(json::parse(R"({"acc_alpha":[0.5]})")), ParseError);
}

TEST(SolutionJson, BothBranchesAndSelection) {
  DecisionCounts c = empty_counts(3, false);
  for (const auto &[p, k] : std::vector<std::pair<std::string, int>>{
           {"aaa", 9}, {"aab", 6}, {"aba", 6}, {"baa", 6}, {"abb", 6}, {"bab", 6}, {"bba", 6}, {"bbb", 9}})
    c.add(p, BigInt(k));
  const auto sol = solve_trio<Rational>(c);
  const json j = json_io::solution_to_json(sol, {0, 1, 2}, std::size_t{0});
  EXPECT_EQ(j.at("mode"), "exact");
  EXPECT_EQ(j.at("branches").size(), 2u);
  EXPECT_EQ(j.at("branches")[0].at("residuals").size(), 8u);
  EXPECT_EQ(j.at("branches")[0].at("prevalence").at("exact"), "1/2");
  EXPECT_EQ(j.at("selected"), 0);
}

TEST(DetectionJson, Fields) {
  DecisionCounts c = empty_counts(3, false);
  c.add("aaa", BigInt(10));
  c.add("bbb", BigInt(9));
  for (const char *p : {"aab", "aba", "baa", "abb", "bab", "bba"})
    c.add(p, BigInt(6));
  const json j = json_io::detection_to_json(detect_trio(c));
  EXPECT_EQ(j.at("verdict"), "non-independent");
  EXPECT_EQ(j.at("evidence"), "irrational-discriminant");
  EXPECT_TRUE(j.at("discriminant").contains("exact"));
}

TEST(Fixtures, MassChecks) {
  const std::map<std::string_view, std::array<int, 3>> masses{
      {"twonorm", {2587, 2691, 5278}}, {"spambase", {2509, 1632, 4141}}, {"mushroom", {3787, 3524, 7311}}};
  for (const auto &[name, m] : masses) {
    const auto c = fixtures::fixture_counts(fixtures::fixture(name));
    EXPECT_EQ(c.label_total(Label::alpha), m[0]) << name;
    EXPECT_EQ(c.label_total(Label::beta), m[1]) << name;
    EXPECT_EQ(c.total, m[2]) << name;
  }
  EXPECT_THROW(fixtures::fixture("iris"), ConfigError);
}

TEST(Fixtures, TwonormOrientation) {
  const auto &f = fixtures::fixture("twonorm");
  EXPECT_TRUE(f.flip_votes);
  EXPECT_EQ(fixtures::oriented_pattern(f, "1110"), "aaab");
  EXPECT_FALSE(fixtures::fixture("spambase").flip_votes);
}
