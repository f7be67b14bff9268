// Simulates three regressors with known error variances and recovers them
// without the truth column.

#include <gti/gti.hpp>

#include <iostream>

int main() {
  Eigen::MatrixXd cov = Eigen::Vector3d(1.0, 4.0, 9.0).asDiagonal();
  // Orthogonal noise makes the sample covariance equal `cov` exactly.
  const auto panel = gti::sample_regressor_panel({0.0, 10.0}, cov, 256, 42, gti::NoiseMode::orthogonal);

  const auto est = gti::solve_trio_regressors(panel, {0, 1, 2});
  const auto truth = gti::error_covariance_truth(panel).demeaned;
  for (std::size_t i = 0; i < 3; ++i)
    std::cout << panel.regressor_ids[i] << ": estimated " << gti::format_decimal(est.diag[i]) << ", truth "
              << gti::format_decimal(truth(i, i)) << '\n';
  std::cout << (est.feasible ? "all estimates non-negative\n" : "negative estimate: noise is correlated\n");

  // A shared error term breaks the independence assumption.
  cov << 1.0, 1.5, 0.0, 1.5, 4.0, 0.0, 0.0, 0.0, 9.0;
  const auto shared = gti::sample_regressor_panel({0.0, 10.0}, cov, 256, 42, gti::NoiseMode::orthogonal);
  const auto bad = gti::solve_trio_regressors(shared, {0, 1, 2});
  std::cout << "with shared noise:";
  for (double v : bad.diag)
    std::cout << ' ' << gti::format_decimal(v);
  std::cout << '\n';
}
