#pragma once

// Exact forward model: decision-event frequencies of arbitrarily correlated
// binary classifiers in terms of prevalence, label accuracies and error
// moments. Also the independent-classifier special case used by the trio
// solver.

#include <gti/error.hpp>
#include <gti/rational.hpp>
#include <gti/tally.hpp>
#include <gti/truth_stats.hpp>

#include <array>
#include <bit>
#include <span>
#include <string_view>

namespace gti {

namespace detail {

// Peels classifier i off the monomial. Either it stays a marginal factor
// (psi or 1 - psi) or it joins the moment subset with sign -1 when its vote
// is wrong. Subsets of one classifier contribute nothing.
inline void expand_pattern(const EnsembleStats &stats, std::string_view pattern, Label truth,
                           std::size_t i, SubsetMask chosen, const Rational &coeff,
                           Rational &sum) {
  if (coeff == 0)
    return;
  if (i == stats.n) {
    const int size = std::popcount(chosen);
    if (size == 0)
      sum += coeff;
    else if (size >= 2)
      sum += coeff * stats.moment(truth, chosen);
    return;
  }
  const bool correct = pattern[i] == symbol(truth);
  const Rational &acc = stats.accuracies(truth)[i];
  expand_pattern(stats, pattern, truth, i + 1, chosen, coeff * (correct ? acc : Rational(1 - acc)),
                 sum);
  expand_pattern(stats, pattern, truth, i + 1, chosen | (SubsetMask{1} << i),
                 correct ? coeff : Rational(-coeff), sum);
}

} // namespace detail

/// Frequency of `pattern` among the items whose true label is `truth`.
inline Rational pattern_frequency_given_label(const EnsembleStats &stats, std::string_view pattern,
                                              Label truth) {
  if (pattern.size() != stats.n || !is_pattern(pattern))
    throw PreconditionError("pattern '" + std::string(pattern) + "' does not fit n=" +
                            std::to_string(stats.n));
  if (stats.acc_alpha.size() != stats.n || stats.acc_beta.size() != stats.n)
    throw PreconditionError("accuracy vectors must have one entry per classifier");
  Rational sum(0);
  detail::expand_pattern(stats, pattern, truth, 0, 0, Rational(1), sum);
  return sum;
}

/// Model counts for a sample of `total` items, split by true label.
/// `total` = 1 yields frequencies. Throws InfeasibleError when some per-label
/// frequency leaves [0,1], i.e. the moments cannot come from any sample.
inline ExpectedCounts expected_counts(const EnsembleStats &stats, const Rational &total = Rational(1)) {
  stats.validate();
  require_dense(stats.n);
  if (total < 0)
    throw PreconditionError("sample size must be non-negative");
  ExpectedCounts out;
  out.n = stats.n;
  out.by_truth.emplace();
  const std::size_t patterns = std::size_t{1} << stats.n;
  for (Label l : kLabels) {
    const Rational weight = total * stats.label_weight(l);
    Rational check(0);
    for (std::size_t k = 0; k < patterns; ++k) {
      const std::string p = pattern_from_index(k, stats.n);
      const Rational f = pattern_frequency_given_label(stats, p, l);
      if (f < 0 || f > 1)
        throw InfeasibleError(std::string("moments are not realisable: frequency of ") + p +
                              " given " + symbol(l) + " is " + to_fraction_string(f));
      check += f;
      out.add(p, weight * f, l);
    }
    if (check != 1)
      throw InfeasibleError("per-label pattern frequencies do not sum to one");
  }
  return out;
}

/// Converts model counts to integer counts; throws if any counter is fractional.
inline DecisionCounts integral_counts(const ExpectedCounts &expected) {
  DecisionCounts out;
  out.n = expected.n;
  auto convert = [](const std::string &p, const Rational &c) {
    if (!is_integral(c))
      throw PreconditionError("counter for " + p + " is not an integer: " + to_fraction_string(c));
    return numerator_of(c);
  };
  if (expected.by_truth) {
    out.by_truth.emplace();
    for (Label l : kLabels)
      for (const auto &[p, c] : (*expected.by_truth)[index_of(l)])
        out.add(p, convert(p, c), l);
  } else {
    for (const auto &[p, c] : expected.counts)
      out.add(p, convert(p, c));
  }
  return out;
}

/// Smallest sample size at which every expected counter is an integer.
inline BigInt minimal_integral_total(const EnsembleStats &stats) {
  const ExpectedCounts unit = expected_counts(stats, Rational(1));
  BigInt m(1);
  for (Label l : kLabels)
    for (const auto &[p, c] : (*unit.by_truth)[index_of(l)])
      m = boost::multiprecision::lcm(m, denominator_of(c));
  return m;
}

/// Frequency of `pattern` for independent classifiers:
/// prevalence * prod(alpha factors) + (1 - prevalence) * prod(beta factors).
template <Scalar T>
T independent_frequency(const T &prevalence, std::span<const T> acc_alpha,
                        std::span<const T> acc_beta, std::string_view pattern) {
  T given_alpha(1), given_beta(1);
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (pattern[i] == 'a') {
      given_alpha *= acc_alpha[i];
      given_beta *= T(1) - acc_beta[i];
    } else {
      given_alpha *= T(1) - acc_alpha[i];
      given_beta *= acc_beta[i];
    }
  }
  return prevalence * given_alpha + (T(1) - prevalence) * given_beta;
}

/// The eight trio frequencies, in pattern_from_index order (aaa, aab, ..., bbb).
template <Scalar T>
std::array<T, 8> independent_frequencies(const T &prevalence, const std::array<T, 3> &acc_alpha,
                                         const std::array<T, 3> &acc_beta) {
  std::array<T, 8> f;
  for (std::size_t k = 0; k < 8; ++k)
    f[k] = independent_frequency<T>(prevalence, acc_alpha, acc_beta, pattern_from_index(k, 3));
  return f;
}

/// Statistics of independent classifiers: all error moments zero.
inline EnsembleStats independent_stats(Rational prevalence, std::vector<Rational> acc_alpha,
                                       std::vector<Rational> acc_beta) {
  EnsembleStats stats;
  stats.n = acc_alpha.size();
  stats.prevalence = std::move(prevalence);
  stats.acc_alpha = std::move(acc_alpha);
  stats.acc_beta = std::move(acc_beta);
  if (stats.acc_beta.size() != stats.n)
    throw PreconditionError("accuracy vectors must have one entry per classifier");
  require_dense(stats.n);
  for (Label l : kLabels)
    for (SubsetMask s = 0; s < (SubsetMask{1} << stats.n); ++s)
      if (std::popcount(s) >= 2)
        stats.set_moment(l, s, Rational(0));
  return stats;
}

/// Image of a parameter set under the ground-truth label swap:
/// prevalence -> 1 - prevalence, alpha accuracy -> 1 - beta accuracy and
/// beta accuracy -> 1 - alpha accuracy. Independent frequencies are invariant.
template <Scalar T>
void apply_label_swap(T &prevalence, std::span<T> acc_alpha, std::span<T> acc_beta) {
  prevalence = T(1) - prevalence;
  for (std::size_t i = 0; i < acc_alpha.size(); ++i) {
    T a = acc_alpha[i];
    acc_alpha[i] = T(1) - acc_beta[i];
    acc_beta[i] = T(1) - a;
  }
}

} // namespace gti
