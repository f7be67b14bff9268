#pragma once

// Seeded synthetic data for classifiers and regressors.
//
// Randomness comes from std::mt19937_64, whose output sequence is fixed by the
// C++ standard. Standard distributions are implementation-defined, so every
// draw is derived from raw engine output here: uniforms take the top 53 bits,
// normals use the Box-Muller transform.

#include <gti/error.hpp>
#include <gti/forward_model.hpp>
#include <gti/rational.hpp>
#include <gti/regressors.hpp>
#include <gti/tally.hpp>

#include <Eigen/Dense>

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace gti {

class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  double normal() {
    if (spare_) {
      double v = *spare_;
      spare_.reset();
      return v;
    }
    double u1 = uniform();
    while (u1 <= 0.0)
      u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    spare_ = radius * std::sin(2.0 * std::numbers::pi * u2);
    return radius * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Index drawn from a discrete distribution given its cumulative sums.
  std::size_t categorical(std::span<const double> cumulative) {
    const double u = uniform() * cumulative.back();
    for (std::size_t k = 0; k < cumulative.size(); ++k)
      if (u < cumulative[k])
        return k;
    return cumulative.size() - 1;
  }

private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

inline std::vector<std::string> default_ids(std::string_view prefix, std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i)
    ids.push_back(std::string(prefix) + std::to_string(i + 1));
  return ids;
}

/// Independent classifiers: each item's truth is alpha with probability
/// `prevalence`; each classifier is then correct with its label accuracy.
inline VoteMatrix sample_independent_classifiers(double prevalence, std::span<const double> acc_alpha,
                                                 std::span<const double> acc_beta, std::size_t items,
                                                 std::uint64_t seed) {
  if (acc_alpha.size() != acc_beta.size() || acc_alpha.empty())
    throw PreconditionError("one alpha and one beta accuracy per classifier are required");
  auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!unit(prevalence))
    throw PreconditionError("prevalence must lie in [0,1]");
  for (std::size_t i = 0; i < acc_alpha.size(); ++i)
    if (!unit(acc_alpha[i]) || !unit(acc_beta[i]))
      throw PreconditionError("accuracies must lie in [0,1]");

  Rng rng(seed);
  VoteMatrix votes;
  votes.classifier_ids = default_ids("c", acc_alpha.size());
  votes.truth.emplace();
  votes.rows.reserve(items);
  for (std::size_t d = 0; d < items; ++d) {
    const Label truth = rng.bernoulli(prevalence) ? Label::alpha : Label::beta;
    std::string row(acc_alpha.size(), 'a');
    for (std::size_t i = 0; i < acc_alpha.size(); ++i) {
      const double acc = truth == Label::alpha ? acc_alpha[i] : acc_beta[i];
      row[i] = symbol(rng.bernoulli(acc) ? truth : other(truth));
    }
    votes.rows.push_back(std::move(row));
    votes.truth->push_back(truth);
  }
  return votes;
}

/// Per-label pattern distributions: probabilities[label][pattern_index].
using PatternDistributions = std::array<std::vector<double>, 2>;

/// Pattern distributions of the forward model for the given statistics.
inline PatternDistributions pattern_distributions(const EnsembleStats &stats) {
  PatternDistributions dist;
  const std::size_t patterns = std::size_t{1} << stats.n;
  for (Label l : kLabels) {
    auto &d = dist[index_of(l)];
    d.resize(patterns);
    for (std::size_t k = 0; k < patterns; ++k)
      d[k] = to_double(pattern_frequency_given_label(stats, pattern_from_index(k, stats.n), l));
  }
  return dist;
}

/// Any correlation structure: truth by prevalence, then a whole decision
/// pattern from that label's distribution.
inline VoteMatrix sample_from_pattern_distributions(const PatternDistributions &dist, double prevalence,
                                                    std::size_t items, std::uint64_t seed) {
  const std::size_t patterns = dist[0].size();
  if (patterns < 2 || dist[1].size() != patterns || (patterns & (patterns - 1)) != 0)
    throw PreconditionError("pattern distributions must both have 2^n entries");
  if (prevalence < 0.0 || prevalence > 1.0)
    throw PreconditionError("prevalence must lie in [0,1]");
  const auto n = static_cast<std::size_t>(std::countr_zero(patterns));
  std::array<std::vector<double>, 2> cumulative;
  for (Label l : kLabels) {
    double sum = 0.0;
    for (double p : dist[index_of(l)]) {
      if (!(p >= 0.0))
        throw PreconditionError("pattern probabilities must be non-negative");
      sum += p;
      cumulative[index_of(l)].push_back(sum);
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw PreconditionError(std::string("pattern distribution for label ") + symbol(l) +
                              " does not sum to 1");
  }

  Rng rng(seed);
  VoteMatrix votes;
  votes.classifier_ids = default_ids("c", n);
  votes.truth.emplace();
  votes.rows.reserve(items);
  for (std::size_t d = 0; d < items; ++d) {
    const Label truth = rng.bernoulli(prevalence) ? Label::alpha : Label::beta;
    votes.rows.push_back(pattern_from_index(rng.categorical(cumulative[index_of(truth)]), n));
    votes.truth->push_back(truth);
  }
  return votes;
}

/// Truth column of a synthetic regressor panel: mean + stddev * N(0,1).
struct TruthSpec {
  double mean = 0.0;
  double stddev = 1.0;
};

enum class NoiseMode {
  /// Gaussian noise with the given covariance.
  gaussian,
  /// Deterministic mean-zero noise whose sample covariance equals the target
  /// exactly: tiled Hadamard columns mixed by a factor of the covariance.
  /// Requires the item count to be a multiple of the Hadamard block size.
  orthogonal,
};

/// Hadamard block length used by NoiseMode::orthogonal for n regressors.
inline std::size_t orthogonal_block(std::size_t n) {
  std::size_t b = 1;
  while (b < n + 1)
    b <<= 1;
  return b;
}

/// F with F F^T = covariance; throws unless covariance is symmetric PSD.
inline Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd &covariance) {
  if (covariance.rows() != covariance.cols())
    throw PreconditionError("noise covariance must be square");
  const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw PreconditionError("noise covariance must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() == Eigen::Success)
    return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() < -1e-10 * scale)
    throw PreconditionError("noise covariance must be positive semidefinite");
  return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

inline RegressorPanel sample_regressor_panel(const TruthSpec &truth_spec, const Eigen::MatrixXd &covariance,
                                             std::size_t items, std::uint64_t seed,
                                             NoiseMode mode = NoiseMode::gaussian) {
  if (items == 0)
    throw PreconditionError("a regressor panel needs at least one item");
  const Eigen::MatrixXd factor = covariance_factor(covariance);
  const auto n = static_cast<std::size_t>(covariance.rows());
  const auto m = static_cast<Eigen::Index>(items);
  Rng rng(seed);

  Eigen::VectorXd truth(m);
  for (Eigen::Index d = 0; d < m; ++d)
    truth(d) = truth_spec.mean + truth_spec.stddev * rng.normal();

  Eigen::MatrixXd basis(m, static_cast<Eigen::Index>(n));
  if (mode == NoiseMode::orthogonal) {
    const std::size_t block = orthogonal_block(n);
    if (items % block != 0)
      throw PreconditionError("orthogonal noise for " + std::to_string(n) +
                              " regressors needs a multiple of " + std::to_string(block) + " items");
    // Sylvester Hadamard entry (r, c) = (-1)^popcount(r & c); column 0 is
    // constant and skipped so every used column has mean zero.
    for (Eigen::Index d = 0; d < m; ++d)
      for (std::size_t c = 0; c < n; ++c) {
        const auto r = static_cast<std::size_t>(d) % block;
        basis(d, static_cast<Eigen::Index>(c)) = std::popcount(r & (c + 1)) % 2 ? -1.0 : 1.0;
      }
  } else {
    for (Eigen::Index d = 0; d < m; ++d)
      for (Eigen::Index c = 0; c < basis.cols(); ++c)
        basis(d, c) = rng.normal();
  }

  RegressorPanel panel;
  panel.regressor_ids = default_ids("r", n);
  panel.predictions = (basis * factor.transpose()).colwise() + truth;
  panel.truth = std::move(truth);
  return panel;
}

} // namespace gti
