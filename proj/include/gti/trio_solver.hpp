#pragma once

// Closed-form solution of the independent three-classifier system.
//
// With v_i the indicator "classifier i voted alpha" and f the eight observed
// pattern frequencies, independence gives
//
//   cov(v_i, v_j)            = q * a_i * a_j,              q = phi (1 - phi)
//   E[(v_1-p_1)(v_2-p_2)(v_3-p_3)] = q (1 - 2 phi) a_1 a_2 a_3
//
// where a_i = acc_alpha_i + acc_beta_i - 1. Squaring the triple moment and
// dividing by the product of pair covariances isolates phi:
//
//   r = T^2 / (c12 c13 c23) = (1 - 2 phi)^2 / q,
//   phi = 1/2 +- sqrt(r / (4 + r)) / 2.
//
// The pair covariances then fix |a_i|, their signs fix the relative signs and
// the sign of T ties the global sign to the branch. Accuracies follow from
// the marginals p_i = P(v_i = 1).

#include <gti/error.hpp>
#include <gti/forward_model.hpp>
#include <gti/rational.hpp>
#include <gti/tally.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gti {

struct SolverTolerances {
  /// Slack allowed outside [0,1] before a floating estimate is infeasible.
  double feasibility = 1e-9;
  /// Largest equation residual accepted as "solves the system".
  double residual = 1e-9;
};

template <Scalar T>
struct TrioMoments {
  std::array<T, 3> marginal{};  // P(vote_i = alpha)
  T c12{}, c13{}, c23{};        // pairwise central co-moments
  T triple{};                   // third-order central co-moment
};

template <Scalar T>
TrioMoments<T> trio_moments(const std::array<T, 8> &f) {
  TrioMoments<T> m;
  for (std::size_t i = 0; i < 3; ++i) {
    T p(0);
    for (std::size_t k = 0; k < 8; ++k)
      if ((k >> (2 - i) & 1U) == 0)
        p += f[k];
    m.marginal[i] = p;
  }
  auto centred = [&](std::size_t k, std::size_t i) {
    return ((k >> (2 - i) & 1U) == 0 ? T(1) : T(0)) - m.marginal[i];
  };
  for (std::size_t k = 0; k < 8; ++k) {
    if (f[k] == 0)
      continue;
    const T d0 = centred(k, 0), d1 = centred(k, 1), d2 = centred(k, 2);
    m.c12 += f[k] * d0 * d1;
    m.c13 += f[k] * d0 * d2;
    m.c23 += f[k] * d1 * d2;
    m.triple += f[k] * d0 * d1 * d2;
  }
  return m;
}

/// One of the two point solutions, with its substitution residuals.
template <Scalar T>
struct TrioEstimate {
  T prevalence{};
  std::array<T, 3> acc_alpha{};
  std::array<T, 3> acc_beta{};
  /// Observed frequency minus model frequency, per pattern (aaa .. bbb).
  std::array<T, 8> residuals{};
  /// Largest absolute residual.
  double residual = 0.0;
  /// Every value lies in [0,1] (within the feasibility tolerance).
  bool feasible = false;
  bool exact = std::same_as<T, Rational>;

  T mean_accuracy() const {
    T sum(0);
    for (std::size_t i = 0; i < 3; ++i)
      sum += acc_alpha[i] + acc_beta[i];
    return sum / T(6);
  }
};

enum class TrioOutcome {
  solved,
  /// Too little information: all counts equal, or some pair shows no covariance.
  degenerate,
  /// The independent model has no real solution (negative covariance product).
  complex,
  /// Exact mode only: a required square root is not rational.
  irrational,
};

inline std::string_view to_string(TrioOutcome o) {
  switch (o) {
  case TrioOutcome::solved:
    return "solved";
  case TrioOutcome::degenerate:
    return "degenerate";
  case TrioOutcome::complex:
    return "complex";
  case TrioOutcome::irrational:
    return "irrational";
  }
  return "unknown";
}

template <Scalar T>
struct TrioSolution {
  TrioOutcome outcome = TrioOutcome::degenerate;
  std::string detail;
  /// Empty unless solved; otherwise branch 0 has prevalence >= 1/2.
  std::vector<TrioEstimate<T>> branches;
  /// T^2 / (T^2 + 4 c12 c13 c23), the square of (2 phi - 1).
  std::optional<T> discriminant;
  TrioMoments<T> moments;
  std::vector<std::string> warnings;

  bool solved() const { return outcome == TrioOutcome::solved; }
};

/// Observed minus model frequency for each of the eight patterns.
template <Scalar T>
std::array<T, 8> trio_residuals(const T &prevalence, const std::array<T, 3> &acc_alpha,
                                const std::array<T, 3> &acc_beta, const std::array<T, 8> &f) {
  const auto model = independent_frequencies<T>(prevalence, acc_alpha, acc_beta);
  std::array<T, 8> out;
  for (std::size_t k = 0; k < 8; ++k)
    out[k] = f[k] - model[k];
  return out;
}

template <Scalar T>
std::array<T, 8> residuals(const TrioEstimate<T> &estimate, const std::array<T, 8> &f) {
  return trio_residuals(estimate.prevalence, estimate.acc_alpha, estimate.acc_beta, f);
}

template <Scalar T>
std::array<T, 8> trio_frequencies(const DecisionCounts &counts) {
  if (counts.n != 3)
    throw PreconditionError("trio solve needs counts over exactly three classifiers, got n=" +
                            std::to_string(counts.n));
  if (counts.total <= 0)
    throw PreconditionError("trio solve needs a non-empty sample");
  auto dense = counts.frequencies<T>();
  std::array<T, 8> f;
  std::copy(dense.begin(), dense.end(), f.begin());
  return f;
}

template <Scalar T>
std::array<T, 8> residuals(const TrioEstimate<T> &estimate, const DecisionCounts &counts) {
  return residuals(estimate, trio_frequencies<T>(counts));
}

namespace detail {

template <Scalar T>
int sign_of(const T &x) {
  return x > 0 ? 1 : (x < 0 ? -1 : 0);
}

template <Scalar T>
bool in_unit_interval(const T &x, double slack) {
  if constexpr (std::same_as<T, double>)
    return x >= -slack && x <= 1.0 + slack;
  else
    return x >= 0 && x <= 1;
}

template <Scalar T>
std::optional<T> root(const T &x) {
  if constexpr (std::same_as<T, double>)
    return x < 0 ? std::nullopt : std::optional<double>(std::sqrt(x));
  else
    return exact_sqrt(x);
}

} // namespace detail

/// Solves the independent trio system from the eight pattern frequencies
/// (pattern_from_index order). Floating mode always yields numeric branches
/// when they are real; exact mode additionally reports irrational roots.
template <Scalar T>
TrioSolution<T> solve_trio_frequencies(const std::array<T, 8> &f, const SolverTolerances &tol = {}) {
  TrioSolution<T> sol;
  if (std::all_of(f.begin(), f.end(), [&](const T &x) { return x == f[0]; })) {
    sol.outcome = TrioOutcome::degenerate;
    sol.detail = "all eight pattern counts are equal";
    return sol;
  }
  sol.moments = trio_moments(f);
  const auto &m = sol.moments;
  if (m.c12 == 0 || m.c13 == 0 || m.c23 == 0) {
    sol.outcome = TrioOutcome::degenerate;
    sol.detail = "a pair of classifiers has zero vote covariance";
    return sol;
  }
  const T pair_product = m.c12 * m.c13 * m.c23;
  const T triple_sq = m.triple * m.triple;
  const T denom = triple_sq + T(4) * pair_product;
  if (denom != 0)
    sol.discriminant = triple_sq / denom;
  if (pair_product < 0) {
    sol.outcome = TrioOutcome::complex;
    sol.detail = "product of pair covariances is negative; accuracy signals are imaginary";
    return sol;
  }

  const T disc = *sol.discriminant;
  const auto root_disc = detail::root(disc);
  if (!root_disc) {
    sol.outcome = TrioOutcome::irrational;
    if constexpr (std::same_as<T, Rational>)
      sol.detail = "prevalence discriminant " + to_fraction_string(disc) + " is not a perfect square";
    else
      sol.detail = "negative prevalence discriminant";
    return sol;
  }

  // phi (1 - phi) is the same on both branches.
  const T q = (T(1) - disc) / T(4);
  const std::array<T, 3> signal_sq{m.c12 * m.c13 / (q * m.c23), m.c12 * m.c23 / (q * m.c13),
                                   m.c13 * m.c23 / (q * m.c12)};
  std::array<T, 3> base;
  for (std::size_t i = 0; i < 3; ++i) {
    auto r = detail::root(signal_sq[i]);
    if (!r) {
      sol.outcome = TrioOutcome::irrational;
      if constexpr (std::same_as<T, Rational>)
        sol.detail = "squared accuracy signal of classifier " + std::to_string(i + 1) + " (" +
                     to_fraction_string(signal_sq[i]) + ") is not a perfect square";
      else
        sol.detail = "negative squared accuracy signal";
      return sol;
    }
    base[i] = *r;
  }
  if (m.c12 < 0)
    base[1] = -base[1];
  if (m.c13 < 0)
    base[2] = -base[2];

  // Global sign of the signal vector on the phi >= 1/2 branch.
  const int plus_sign = m.triple == 0
                            ? 1
                            : -detail::sign_of(m.triple) * detail::sign_of(T(base[0] * base[1] * base[2]));

  for (int branch = 0; branch < 2; ++branch) {
    const int sigma = branch == 0 ? plus_sign : -plus_sign;
    TrioEstimate<T> est;
    est.prevalence = branch == 0 ? T(T(1) + *root_disc) / T(2) : T(T(1) - *root_disc) / T(2);
    for (std::size_t i = 0; i < 3; ++i) {
      const T a = sigma > 0 ? base[i] : T(-base[i]);
      est.acc_alpha[i] = m.marginal[i] + (T(1) - est.prevalence) * a;
      est.acc_beta[i] = T(1) - m.marginal[i] + est.prevalence * a;
    }
    est.residuals = residuals(est, f);
    for (const auto &r : est.residuals)
      est.residual = std::max(est.residual, std::abs(to_double(r)));
    est.feasible = detail::in_unit_interval(est.prevalence, tol.feasibility);
    for (std::size_t i = 0; i < 3; ++i)
      est.feasible = est.feasible && detail::in_unit_interval(est.acc_alpha[i], tol.feasibility) &&
                     detail::in_unit_interval(est.acc_beta[i], tol.feasibility);
    if (est.residual > tol.residual)
      sol.warnings.push_back("branch " + std::to_string(branch) + " leaves residual " +
                             format_decimal(est.residual) + " above tolerance");
    sol.branches.push_back(std::move(est));
  }
  sol.outcome = TrioOutcome::solved;
  return sol;
}

/// Solves the trio system for three-classifier counts.
template <Scalar T = double>
TrioSolution<T> solve_trio(const DecisionCounts &counts, const SolverTolerances &tol = {}) {
  const auto f = trio_frequencies<T>(counts);
  std::vector<std::string> warnings;
  for (std::size_t k = 0; k < 8; ++k)
    if (counts.count(pattern_from_index(k, 3)) == 0)
      warnings.push_back("pattern " + pattern_from_index(k, 3) +
                         " has zero count; the closed form assumes every pattern was observed");
  auto sol = solve_trio_frequencies<T>(f, tol);
  sol.warnings.insert(sol.warnings.begin(), warnings.begin(), warnings.end());
  return sol;
}

template <Scalar T>
using BranchPolicy = std::function<std::optional<std::size_t>(std::span<const TrioEstimate<T>>)>;

/// Prefers the feasible branch whose mean label accuracy is highest (the
/// better-than-chance prior); equal means go to the larger prevalence.
template <Scalar T>
std::optional<std::size_t> mean_accuracy_policy(std::span<const TrioEstimate<T>> branches) {
  std::optional<std::size_t> best;
  for (std::size_t b = 0; b < branches.size(); ++b) {
    if (!branches[b].feasible)
      continue;
    if (!best) {
      best = b;
      continue;
    }
    const T mine = branches[b].mean_accuracy(), theirs = branches[*best].mean_accuracy();
    if (mine > theirs || (mine == theirs && branches[b].prevalence > branches[*best].prevalence))
      best = b;
  }
  return best;
}

template <Scalar T>
std::size_t select_branch_index(std::span<const TrioEstimate<T>> branches,
                                const BranchPolicy<T> &policy = mean_accuracy_policy<T>) {
  auto chosen = policy(branches);
  if (!chosen)
    throw InfeasibleError("no branch lies inside [0,1]");
  return *chosen;
}

template <Scalar T>
const TrioEstimate<T> &select_branch(const TrioSolution<T> &solution,
                                     const BranchPolicy<T> &policy = mean_accuracy_policy<T>) {
  if (!solution.solved())
    throw DegenerateError("trio has no solution to select from: " + solution.detail);
  return solution.branches[select_branch_index<T>(solution.branches, policy)];
}

} // namespace gti
