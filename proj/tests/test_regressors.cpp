#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace gti;

namespace {

Eigen::MatrixXd diag(std::initializer_list<double> v) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v)
    d(k++) = x;
  return d.asDiagonal();
}

RegressorPanel orthogonal_panel(std::initializer_list<double> variances, std::size_t items = 400) {
  return sample_regressor_panel({3.0, 2.0}, diag(variances), items, 17, NoiseMode::orthogonal);
}

} // namespace

TEST(PairwiseStat, IdenticalAndShiftedColumns) {
  RegressorPanel p;
  p.regressor_ids = {"x", "y", "z"};
  p.predictions.resize(5, 3);
  p.predictions.col(0) << 1, 4, 2, 8, 5;
  p.predictions.col(1) = p.predictions.col(0);
  p.predictions.col(2) = p.predictions.col(0).array() + 7.5;
  EXPECT_EQ(pairwise_stat(p, 0, 1), 0.0);
  EXPECT_NEAR(pairwise_stat(p, 0, 2), 0.0, 1e-24);
  EXPECT_THROW(pairwise_stat(p, 1, 1), PreconditionError);
}

TEST(PairwiseStat, OrthogonalNoiseAddsVariances) {
  const auto p = orthogonal_panel({1, 4});
  EXPECT_NEAR(pairwise_stat(p, 0, 1), 5.0, 1e-12);
}

TEST(SolveTrioRegressors, OrthogonalRecoversVariances) {
  const auto p = orthogonal_panel({1, 4, 9});
  const auto est = solve_trio_regressors(p, {0, 1, 2});
  EXPECT_NEAR(est.pair_stats[0], 5.0, 1e-12);
  EXPECT_NEAR(est.pair_stats[1], 10.0, 1e-12);
  EXPECT_NEAR(est.pair_stats[2], 13.0, 1e-12);
  EXPECT_NEAR(est.diag[0], 1.0, 1e-12);
  EXPECT_NEAR(est.diag[1], 4.0, 1e-12);
  EXPECT_NEAR(est.diag[2], 9.0, 1e-12);
  EXPECT_TRUE(est.feasible);
}

TEST(SolveTrioRegressors, IdenticalColumnsGiveZero) {
  RegressorPanel p;
  p.regressor_ids = default_ids("r", 3);
  p.predictions = Eigen::MatrixXd::Ones(6, 3);
  p.predictions.col(0) << 1, 2, 3, 4, 5, 6;
  p.predictions.col(1) = p.predictions.col(0);
  p.predictions.col(2) = p.predictions.col(0);
  const auto est = solve_trio_regressors(p, {0, 1, 2});
  for (double v : est.diag)
    EXPECT_EQ(v, 0.0);
}

TEST(SolveTrioRegressors, SharedNoiseMovesErrorToThirdRegressor) {
  // Regressors 1 and 2 carry the same noise; 3 carries small independent noise.
  Eigen::MatrixXd cov(3, 3);
  cov << 4, 4, 0, 4, 4, 0, 0, 0, 0.25;
  const auto p = sample_regressor_panel({0.0, 1.0}, cov, 512, 9, NoiseMode::gaussian);
  const auto est = solve_trio_regressors(p, {0, 1, 2});
  const auto truth = error_covariance_truth(p).demeaned;
  EXPECT_NEAR(est.diag[0], 0.0, 1e-12);
  EXPECT_NEAR(est.diag[1], 0.0, 1e-12);
  EXPECT_NEAR(est.diag[2], truth(0, 0) + truth(2, 2) - 2 * truth(0, 2), 1e-9);
  EXPECT_TRUE(est.feasible);
}

TEST(SolveTrioRegressors, ScaledSharedNoiseIsInfeasible) {
  Eigen::MatrixXd cov(3, 3);
  cov << 1, 2, 0, 2, 4, 0, 0, 0, 0.25;
  const auto p = sample_regressor_panel({0.0, 1.0}, cov, 512, 9, NoiseMode::gaussian);
  const auto est = solve_trio_regressors(p, {0, 1, 2});
  EXPECT_LT(est.diag[0], -0.5);
  EXPECT_FALSE(est.feasible);
}

TEST(SolveTrioRegressors, DistinctIndices) {
  const auto p = orthogonal_panel({1, 4, 9});
  EXPECT_THROW(solve_trio_regressors(p, {0, 0, 2}), PreconditionError);
  EXPECT_THROW(solve_trio_regressors(p, {0, 1, 3}), PreconditionError);
}

TEST(PairSystem, RoundTrip) {
  const std::array<double, 3> eps{1.5, 0.25, 7.0};
  const std::array<double, 3> sigma{eps[0] + eps[1], eps[0] + eps[2], eps[1] + eps[2]};
  const auto back = invert_pair_system(sigma);
  for (int i = 0; i < 3; ++i)
    EXPECT_EQ(back[i], eps[i]);
}

TEST(ConsistencyConstraints, OrthogonalNoiseVanishes) {
  const auto p = orthogonal_panel({1, 4, 9, 16}, 64);
  for (const auto &c : consistency_constraints(p, {0, 1, 2, 3}))
    EXPECT_NEAR(c.value, 0.0, 1e-12);
}

TEST(ConsistencyConstraints, DuplicatedRegressorBreaksThem) {
  std::mt19937_64 rng(2);
  auto p = oracle::random_panel(rng, 4, 300);
  p.predictions.col(3) = p.predictions.col(1);
  const auto c = consistency_constraints(p, {0, 1, 2, 3});
  double worst = 0.0;
  for (const auto &m : c)
    worst = std::max(worst, std::abs(m.value));
  EXPECT_GT(worst, 0.1);
  EXPECT_THROW(consistency_constraints(p, {0, 1, 1, 3}), PreconditionError);
}

TEST(ConsistencyConstraints, IdenticalColumnsAreZero) {
  RegressorPanel p;
  p.regressor_ids = default_ids("r", 4);
  p.predictions.resize(3, 4);
  for (int c = 0; c < 4; ++c)
    p.predictions.col(c) << 1, -2, 5;
  for (const auto &m : consistency_constraints(p, {0, 1, 2, 3})) {
    EXPECT_EQ(m.value, 0.0);
    EXPECT_EQ(m.normalized, 0.0);
  }
}

TEST(ConsistencyConstraints, HomogeneousCorrelationSatisfiesThem) {
  const double c = 0.5;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(4, 4, c);
  cov.diagonal() << 1, 2, 3, 4;
  const auto p = sample_regressor_panel({0.0, 1.0}, cov, 64, 1, NoiseMode::orthogonal);
  for (const auto &m : consistency_constraints(p, {0, 1, 2, 3}))
    EXPECT_NEAR(m.value, 0.0, 1e-12);
  const auto est = solve_trio_regressors(p, {0, 1, 2});
  EXPECT_NEAR(est.diag[0], 1 - c, 1e-12);
  EXPECT_NEAR(est.diag[1], 2 - c, 1e-12);
  EXPECT_NEAR(est.diag[2], 3 - c, 1e-12);
}

TEST(MixedMomentTest, OrthogonalIsExactlyConsistent) {
  const auto p = orthogonal_panel({1, 2, 3, 4, 5}, 128);
  const auto r = mixed_moment_test(p);
  EXPECT_EQ(r.quads.size(), 5u);
  EXPECT_LT(r.max_normalized, 1e-12);
  EXPECT_TRUE(r.consistency_possible);
}

TEST(MixedMomentTest, IndependentNoiseIsSmall) {
  const auto p = sample_regressor_panel({0.0, 1.0}, diag({1, 2, 3, 4}), 10000, 77);
  const auto r = mixed_moment_test(p);
  EXPECT_LE(r.max_normalized, 5.0 / std::sqrt(10000.0));
  EXPECT_TRUE(r.consistency_possible);
}

TEST(MixedMomentTest, CloneRaisesSubsetsContainingIt) {
  auto p = sample_regressor_panel({0.0, 1.0}, diag({1, 2, 3, 4, 5}), 2000, 8);
  p.predictions.col(4) = p.predictions.col(0);
  const auto r = mixed_moment_test(p);
  double with_clone = 0.0, without = 0.0;
  for (const auto &q : r.quads) {
    const bool has_both = std::count(q.quad.begin(), q.quad.end(), 0u) && std::count(q.quad.begin(), q.quad.end(), 4u);
    for (const auto &m : q.pairings)
      (has_both ? with_clone : without) = std::max(has_both ? with_clone : without, std::abs(m.normalized));
  }
  EXPECT_GT(with_clone, without);
  EXPECT_FALSE(r.consistency_possible);
}

TEST(MixedMomentTest, NeedsFourRegressors) {
  EXPECT_THROW(mixed_moment_test(orthogonal_panel({1, 2, 3})), PreconditionError);
}

TEST(ErrorCovarianceTruth, Cases) {
  auto p = orthogonal_panel({1, 4, 9});
  const auto eps = error_covariance_truth(p);
  EXPECT_NEAR(eps.demeaned(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(eps.demeaned(1, 1), 4.0, 1e-12);
  EXPECT_NEAR(eps.demeaned(2, 2), 9.0, 1e-12);
  EXPECT_NEAR(eps.demeaned(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(eps.demeaned(1, 2), 0.0, 1e-12);

  auto shifted = p;
  shifted.predictions.col(1).array() += 3.0;
  const auto eps2 = error_covariance_truth(shifted);
  EXPECT_NEAR(eps2.raw(1, 1), eps.raw(1, 1) + 9.0, 1e-9);
  EXPECT_TRUE(eps2.demeaned.isApprox(eps.demeaned, 1e-12));

  auto exact = p;
  for (int c = 0; c < 3; ++c)
    exact.predictions.col(c) = *exact.truth;
  EXPECT_EQ(error_covariance_truth(exact).raw.cwiseAbs().maxCoeff(), 0.0);

  exact.truth.reset();
  EXPECT_THROW(error_covariance_truth(exact), PreconditionError);
}

TEST(ParsePredictions, RoundTripAndErrors) {
  const auto p = orthogonal_panel({1, 4, 9}, 8);
  const auto text = format_predictions(p);
  const auto back = parse_predictions(text, "truth");
  EXPECT_EQ(back.predictions, p.predictions);
  EXPECT_EQ(*back.truth, *p.truth);
  EXPECT_EQ(back.regressor_ids, p.regressor_ids);
  EXPECT_THROW(parse_predictions("r1,r2\n1,x\n"), ParseError);
  EXPECT_THROW(parse_predictions("r1,r2\n1,2\n", "y"), ConfigError);
  EXPECT_THROW(parse_predictions("r1,r2\n1,nan\n"), ParseError);
  EXPECT_THROW(parse_predictions("r1,r2\n"), PreconditionError);
}
