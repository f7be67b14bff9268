#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace gti;

namespace {

Rational R(long p, long q = 1) { return Rational(p, q); }

DecisionCounts m54() {
  DecisionCounts c = empty_counts(3, false);
  for (const auto &[p, k] : std::vector<std::pair<std::string, int>>{
           {"aaa", 9}, {"aab", 6}, {"aba", 6}, {"baa", 6}, {"abb", 6}, {"bab", 6}, {"bba", 6}, {"bbb", 9}})
    c.add(p, BigInt(k));
  return c;
}

const std::array<Rational, 3> kAlpha{R(4, 5), R(7, 10), R(9, 10)};
const std::array<Rational, 3> kBeta{R(9, 10), R(3, 5), R(4, 5)};

template <class T>
bool same_estimate(const TrioEstimate<T> &e, const T &phi, const std::array<T, 3> &a, const std::array<T, 3> &b) {
  return e.prevalence == phi && e.acc_alpha == a && e.acc_beta == b;
}

} // namespace

TEST(SolveTrio, FiftyFourItemInstanceExact) {
  const auto sol = solve_trio<Rational>(m54());
  ASSERT_EQ(sol.outcome, TrioOutcome::solved);
  ASSERT_EQ(sol.branches.size(), 2u);
  const std::array<Rational, 3> two{R(2, 3), R(2, 3), R(2, 3)}, one{R(1, 3), R(1, 3), R(1, 3)};
  const bool first = same_estimate(sol.branches[0], R(1, 2), two, two) && same_estimate(sol.branches[1], R(1, 2), one, one);
  const bool second = same_estimate(sol.branches[1], R(1, 2), two, two) && same_estimate(sol.branches[0], R(1, 2), one, one);
  EXPECT_TRUE(first || second);
  for (const auto &b : sol.branches) {
    EXPECT_EQ(b.residual, 0.0);
    EXPECT_TRUE(b.feasible);
    EXPECT_TRUE(b.exact);
  }
  EXPECT_EQ(*sol.discriminant, 0);
}

TEST(SolveTrio, FiftyFourItemInstanceFloating) {
  const auto sol = solve_trio<double>(m54());
  ASSERT_TRUE(sol.solved());
  for (const auto &b : sol.branches) {
    EXPECT_NEAR(b.prevalence, 0.5, 1e-12);
    EXPECT_LE(b.residual, 1e-12);
  }
  EXPECT_NEAR(select_branch(sol).acc_alpha[0], 2.0 / 3.0, 1e-12);
}

TEST(SolveTrio, RoundTripFixtureExact) {
  const auto f = independent_frequencies<Rational>(R(2, 5), kAlpha, kBeta);
  const auto sol = solve_trio_frequencies<Rational>(f);
  ASSERT_EQ(sol.outcome, TrioOutcome::solved) << sol.detail;
  const auto &b0 = sol.branches[0];
  EXPECT_GE(b0.prevalence, R(1, 2));
  EXPECT_TRUE(same_estimate(sol.branches[1], R(2, 5), kAlpha, kBeta));
  for (const auto &b : sol.branches)
    for (const auto &r : b.residuals)
      EXPECT_EQ(r, 0);
  // Branch 0 is the label-swapped image of branch 1.
  Rational phi = sol.branches[1].prevalence;
  auto a = sol.branches[1].acc_alpha, b = sol.branches[1].acc_beta;
  apply_label_swap<Rational>(phi, a, b);
  EXPECT_TRUE(same_estimate(b0, phi, a, b));
  EXPECT_EQ(select_branch(sol).prevalence, R(2, 5));
}

TEST(SolveTrio, RoundTripThroughCounts) {
  const auto f = independent_frequencies<Rational>(R(2, 5), kAlpha, kBeta);
  const auto counts = oracle::counts_from_frequencies(f);
  const auto sol = solve_trio<Rational>(counts);
  ASSERT_TRUE(sol.solved());
  EXPECT_TRUE(same_estimate(sol.branches[1], R(2, 5), kAlpha, kBeta));
  for (const auto &r : residuals(sol.branches[1], counts))
    EXPECT_EQ(r, 0);
}

TEST(SolveTrio, AllCountsEqualIsDegenerate) {
  DecisionCounts c = empty_counts(3, false);
  for (std::size_t k = 0; k < 8; ++k)
    c.add(pattern_from_index(k, 3), BigInt(5));
  const auto sol = solve_trio<double>(c);
  EXPECT_EQ(sol.outcome, TrioOutcome::degenerate);
  EXPECT_THROW(select_branch(sol), DegenerateError);
}

TEST(SolveTrio, ZeroCovarianceIsDegenerate) {
  // Classifier 3 votes independently of the others: c13 = c23 = 0.
  const auto f = independent_frequencies<Rational>(R(1, 2), {R(4, 5), R(7, 10), R(1, 2)}, {R(9, 10), R(3, 5), R(1, 2)});
  EXPECT_EQ(solve_trio_frequencies<Rational>(f).outcome, TrioOutcome::degenerate);
}

TEST(SolveTrio, NegativeCovarianceProductIsComplex) {
  // 1-2 and 1-3 agree more often than not, 2-3 disagree more often than not.
  DecisionCounts c = empty_counts(3, false);
  for (const char *p : {"aaa", "bbb"})
    c.add(p, BigInt(3));
  for (const char *p : {"aab", "bba", "aba", "bab"})
    c.add(p, BigInt(2));
  const auto sol = solve_trio<Rational>(c);
  ASSERT_LT(sol.moments.c12 * sol.moments.c13 * sol.moments.c23, 0);
  EXPECT_EQ(sol.outcome, TrioOutcome::complex);
  EXPECT_TRUE(sol.branches.empty());
}

TEST(SolveTrio, ZeroCountsWarn) {
  const auto sol = solve_trio<double>(m54());
  EXPECT_TRUE(sol.warnings.empty());
  DecisionCounts c = m54();
  c.counts.erase("abb");
  c.total -= 6;
  EXPECT_FALSE(solve_trio<double>(c).warnings.empty());
}

TEST(SolveTrio, Preconditions) {
  EXPECT_THROW(solve_trio<double>(empty_counts(3, false)), PreconditionError);
  DecisionCounts four = empty_counts(4, false);
  four.add("aaaa", BigInt(1));
  EXPECT_THROW(solve_trio<double>(four), PreconditionError);
}

TEST(SolveTrio, IrrationalInExactModeNumericInFloating) {
  DecisionCounts c = m54();
  c.add("aaa", BigInt(1));
  const auto exact = solve_trio<Rational>(c);
  EXPECT_EQ(exact.outcome, TrioOutcome::irrational);
  const auto floating = solve_trio<double>(c);
  ASSERT_TRUE(floating.solved());
  for (const auto &b : floating.branches)
    EXPECT_LE(b.residual, 1e-9);
}

TEST(SolveTrio, QuadraticConsistency) {
  const auto f = independent_frequencies<double>(0.3, {0.8, 0.75, 0.9}, {0.7, 0.85, 0.65});
  const auto sol = solve_trio_frequencies<double>(f);
  ASSERT_TRUE(sol.solved());
  const double r = sol.moments.triple * sol.moments.triple /
                   (sol.moments.c12 * sol.moments.c13 * sol.moments.c23);
  for (const auto &b : sol.branches) {
    const double phi = b.prevalence;
    EXPECT_NEAR((4 + r) * phi * phi - (4 + r) * phi + 1, 0.0, 1e-12);
  }
}

TEST(Residuals, MatchIndependentReimplementation) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto f = independent_frequencies<double>(0.4, {0.8, 0.7, 0.9}, {0.9, 0.6, 0.8});
  for (int trial = 0; trial < 50; ++trial) {
    const double phi = u(rng);
    const std::array<double, 3> a{u(rng), u(rng), u(rng)}, b{u(rng), u(rng), u(rng)};
    const auto res = trio_residuals<double>(phi, a, b, f);
    const auto model = oracle::independent_trio<double>(phi, a, b);
    for (std::size_t k = 0; k < 8; ++k)
      EXPECT_NEAR(res[k], f[k] - model[k], 1e-15);
  }
}

TEST(Residuals, FiniteDifferenceInAlphaAccuracy) {
  const auto f = independent_frequencies<double>(0.4, {0.8, 0.7, 0.9}, {0.9, 0.6, 0.8});
  TrioEstimate<double> est;
  est.prevalence = 0.4;
  est.acc_alpha = {0.8, 0.7, 0.9};
  est.acc_beta = {0.9, 0.6, 0.8};
  const double h = 0.01;
  auto plus = est;
  plus.acc_alpha[0] += h;
  const auto r0 = residuals(est, f), r1 = residuals(plus, f);
  // d(model)/d(acc_alpha_1) = +-phi * prod of the other alpha factors; the model is linear in it.
  for (std::size_t k = 0; k < 8; ++k) {
    const auto p = pattern_from_index(k, 3);
    const double other = (p[1] == 'a' ? 0.7 : 0.3) * (p[2] == 'a' ? 0.9 : 0.1);
    const double slope = (p[0] == 'a' ? 1.0 : -1.0) * 0.4 * other;
    EXPECT_NEAR(r1[k] - r0[k], -slope * h, 1e-15);
  }
}

TEST(SelectBranch, PolicyRules) {
  TrioEstimate<Rational> hi, lo;
  hi.prevalence = lo.prevalence = R(1, 2);
  hi.acc_alpha = hi.acc_beta = {R(2, 3), R(2, 3), R(2, 3)};
  lo.acc_alpha = lo.acc_beta = {R(1, 3), R(1, 3), R(1, 3)};
  hi.feasible = lo.feasible = true;
  std::vector<TrioEstimate<Rational>> both{lo, hi};
  EXPECT_EQ(select_branch_index<Rational>(both), 1u);

  // Equal means: larger prevalence wins.
  auto tie_a = hi, tie_b = hi;
  tie_a.prevalence = R(2, 5);
  tie_b.prevalence = R(3, 5);
  std::vector<TrioEstimate<Rational>> tied{tie_a, tie_b};
  EXPECT_EQ(select_branch_index<Rational>(tied), 1u);

  // A single feasible branch is chosen even if its mean is lower.
  hi.feasible = false;
  std::vector<TrioEstimate<Rational>> single{lo, hi};
  EXPECT_EQ(select_branch_index<Rational>(single), 0u);

  lo.feasible = false;
  std::vector<TrioEstimate<Rational>> none{lo, hi};
  EXPECT_THROW(select_branch_index<Rational>(none), InfeasibleError);
}

TEST(SelectBranch, CustomPolicy) {
  const auto sol = solve_trio<Rational>(m54());
  const BranchPolicy<Rational> lowest = [](std::span<const TrioEstimate<Rational>> b) -> std::optional<std::size_t> {
    return b[0].mean_accuracy() < b[1].mean_accuracy() ? 0 : 1;
  };
  EXPECT_EQ(select_branch(sol, lowest).acc_alpha[0], R(1, 3));
}

TEST(SolveTrio, CorrelatedFixtureReportsRatherThanClamps) {
  const auto counts = marginalize_truth(fixtures::fixture_counts(fixtures::fixture("spambase")));
  for (const auto &t : kFourTrios) {
    const auto sol = solve_trio<double>(project_subset(counts, {t[0], t[1], t[2]}));
    ASSERT_TRUE(sol.solved());
    for (const auto &b : sol.branches)
      EXPECT_LE(b.residual, 1e-9);
  }
}
