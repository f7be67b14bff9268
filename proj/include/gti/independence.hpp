#pragma once

// Ground-truth-free independence tests for binary classifiers.
//
// detect_trio: counts are integers, so under independence the prevalence
// recovered from three classifiers is a ratio of integers. The solver's
// square roots must then be rational and its values must lie in [0,1].
// Anything else proves the trio is not independent on this sample.
//
// four_trio_consistency: solves all four trios of a four-classifier ensemble
// and measures how much the recovered values disagree.

#include <gti/error.hpp>
#include <gti/rational.hpp>
#include <gti/tally.hpp>
#include <gti/trio_solver.hpp>
#include <gti/truth_stats.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gti {

enum class Verdict { consistent_with_independence, non_independent, degenerate };

enum class Evidence {
  rational_feasible,
  irrational_discriminant,
  complex_solution,
  out_of_range_solution,
};

inline std::string_view to_string(Verdict v) {
  switch (v) {
  case Verdict::consistent_with_independence:
    return "consistent-with-independence";
  case Verdict::non_independent:
    return "non-independent";
  case Verdict::degenerate:
    return "degenerate";
  }
  return "unknown";
}

inline std::string_view to_string(Evidence e) {
  switch (e) {
  case Evidence::rational_feasible:
    return "rational-feasible";
  case Evidence::irrational_discriminant:
    return "irrational-discriminant";
  case Evidence::complex_solution:
    return "complex-solution";
  case Evidence::out_of_range_solution:
    return "out-of-range-solution";
  }
  return "unknown";
}

struct DetectionReport {
  Verdict verdict = Verdict::degenerate;
  /// Empty only for degenerate samples.
  std::optional<Evidence> evidence;
  /// T^2 / (T^2 + 4 c12 c13 c23) in lowest terms; (2 phi - 1)^2 under independence.
  std::optional<Rational> discriminant;
  /// Both prevalence roots when they are real.
  std::vector<double> phi_candidates;
  /// Exact prevalence roots, present when the discriminant is a perfect square.
  std::vector<Rational> exact_phi;
  std::string detail;
};

/// Exact independence test for a trio. The verdict depends only on the
/// integer counts; no floating tolerance is involved.
inline DetectionReport detect_trio(const DecisionCounts &counts) {
  const auto solution = solve_trio<Rational>(counts);
  DetectionReport report;
  report.discriminant = solution.discriminant;
  report.detail = solution.detail;

  if (solution.discriminant && *solution.discriminant >= 0) {
    const double root = std::sqrt(to_double(*solution.discriminant));
    report.phi_candidates = {0.5 + root / 2, 0.5 - root / 2};
    if (auto exact = exact_sqrt(*solution.discriminant))
      report.exact_phi = {(1 + *exact) / 2, (1 - *exact) / 2};
  }

  switch (solution.outcome) {
  case TrioOutcome::degenerate:
    report.verdict = Verdict::degenerate;
    return report;
  case TrioOutcome::complex:
    report.verdict = Verdict::non_independent;
    report.evidence = Evidence::complex_solution;
    return report;
  case TrioOutcome::irrational:
    report.verdict = Verdict::non_independent;
    report.evidence = Evidence::irrational_discriminant;
    return report;
  case TrioOutcome::solved:
    break;
  }
  const bool feasible = std::all_of(solution.branches.begin(), solution.branches.end(),
                                    [](const auto &b) { return b.feasible; });
  if (feasible) {
    report.verdict = Verdict::consistent_with_independence;
    report.evidence = Evidence::rational_feasible;
    report.detail = "rational solution inside [0,1]";
  } else {
    report.verdict = Verdict::non_independent;
    report.evidence = Evidence::out_of_range_solution;
    report.detail = "rational solution with values outside [0,1]";
  }
  return report;
}

/// The four trios of a four-classifier ensemble, in lexicographic order.
inline constexpr std::array<std::array<std::size_t, 3>, 4> kFourTrios{
    {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}}};

template <Scalar T>
struct TrioEntry {
  std::array<std::size_t, 3> classifiers{};
  TrioSolution<T> solution;
  /// Branch used in the aligned assignment; empty for unsolvable trios.
  std::optional<std::size_t> chosen_branch;

  const TrioEstimate<T> *chosen() const {
    return chosen_branch ? &solution.branches[*chosen_branch] : nullptr;
  }
};

template <Scalar T>
struct EstimateSpread {
  /// (trio index, estimate) for every solvable trio that covers the quantity.
  std::vector<std::pair<std::size_t, T>> estimates;
  /// max - min over the estimates; zero with fewer than two.
  T spread{};
};

template <Scalar T>
struct ConsistencyReport {
  std::array<TrioEntry<T>, 4> trios;
  std::size_t solvable_trios = 0;
  EstimateSpread<T> prevalence;
  /// accuracy[i][label] over the trios that contain classifier i.
  std::array<std::array<EstimateSpread<T>, 2>, 4> accuracy;
  /// Sum of pairwise absolute differences minimised by the alignment.
  T total_disagreement{};

  T mean_spread(Label l) const {
    T sum(0);
    for (const auto &per_label : accuracy)
      sum += per_label[index_of(l)].spread;
    return sum / T(4);
  }
  T max_spread(Label l) const {
    T best(0);
    for (const auto &per_label : accuracy)
      best = std::max(best, per_label[index_of(l)].spread);
    return best;
  }
};

namespace detail {

template <Scalar T>
T pairwise_disagreement(const std::vector<T> &values) {
  T sum(0);
  for (std::size_t a = 0; a < values.size(); ++a)
    for (std::size_t b = a + 1; b < values.size(); ++b)
      sum += abs_value(T(values[a] - values[b]));
  return sum;
}

inline std::optional<std::size_t> position_in(const std::array<std::size_t, 3> &trio, std::size_t i) {
  for (std::size_t k = 0; k < 3; ++k)
    if (trio[k] == i)
      return k;
  return std::nullopt;
}

template <Scalar T>
T assignment_disagreement(const std::array<TrioEntry<T>, 4> &trios,
                          const std::array<std::optional<std::size_t>, 4> &branch) {
  T total(0);
  std::vector<T> values;
  for (std::size_t t = 0; t < 4; ++t)
    if (branch[t])
      values.push_back(trios[t].solution.branches[*branch[t]].prevalence);
  total += pairwise_disagreement(values);
  for (std::size_t i = 0; i < 4; ++i)
    for (Label l : kLabels) {
      values.clear();
      for (std::size_t t = 0; t < 4; ++t) {
        if (!branch[t])
          continue;
        if (auto k = position_in(trios[t].classifiers, i)) {
          const auto &est = trios[t].solution.branches[*branch[t]];
          values.push_back(l == Label::alpha ? est.acc_alpha[*k] : est.acc_beta[*k]);
        }
      }
      total += pairwise_disagreement(values);
    }
  return total;
}

template <Scalar T>
bool nearly_equal(const T &a, const T &b) {
  if constexpr (std::same_as<T, double>)
    return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a) + std::abs(b));
  else
    return a == b;
}

} // namespace detail

/// Solves the four trios of a four-classifier ensemble and aligns their
/// branches by exhaustive search for the least total disagreement. Ties
/// (every assignment ties with its global label swap) go to the higher mean
/// accuracy, then to the larger mean prevalence.
template <Scalar T = double>
ConsistencyReport<T> four_trio_consistency(const DecisionCounts &counts,
                                           const SolverTolerances &tol = {}) {
  if (counts.n != 4)
    throw PreconditionError("four-trio consistency needs counts over exactly four classifiers");
  if (counts.total <= 0)
    throw PreconditionError("four-trio consistency needs a non-empty sample");

  const DecisionCounts observed = counts.by_truth ? marginalize_truth(counts) : counts;
  ConsistencyReport<T> report;
  std::vector<std::size_t> solvable;
  for (std::size_t t = 0; t < 4; ++t) {
    auto &entry = report.trios[t];
    entry.classifiers = kFourTrios[t];
    entry.solution = solve_trio<T>(project_subset(observed, std::span<const std::size_t>(kFourTrios[t])), tol);
    if (entry.solution.solved())
      solvable.push_back(t);
  }
  report.solvable_trios = solvable.size();
  if (solvable.size() < 2)
    throw DegenerateError("four-trio consistency needs at least two solvable trios, found " +
                          std::to_string(solvable.size()));

  std::optional<std::array<std::optional<std::size_t>, 4>> best;
  T best_cost{}, best_accuracy{}, best_prevalence{};
  for (std::size_t mask = 0; mask < (std::size_t{1} << solvable.size()); ++mask) {
    std::array<std::optional<std::size_t>, 4> branch{};
    T accuracy(0), prevalence(0);
    for (std::size_t s = 0; s < solvable.size(); ++s) {
      branch[solvable[s]] = (mask >> s) & 1U;
      const auto &est = report.trios[solvable[s]].solution.branches[*branch[solvable[s]]];
      accuracy += est.mean_accuracy();
      prevalence += est.prevalence;
    }
    const T cost = detail::assignment_disagreement(report.trios, branch);
    bool take = !best;
    if (!take) {
      if (detail::nearly_equal(cost, best_cost))
        take = accuracy > best_accuracy ||
               (accuracy == best_accuracy && prevalence > best_prevalence);
      else
        take = cost < best_cost;
    }
    if (take) {
      best = branch;
      best_cost = cost;
      best_accuracy = accuracy;
      best_prevalence = prevalence;
    }
  }

  report.total_disagreement = best_cost;
  for (std::size_t t = 0; t < 4; ++t)
    report.trios[t].chosen_branch = (*best)[t];

  auto finish = [](EstimateSpread<T> &s) {
    if (s.estimates.size() < 2)
      return;
    auto [lo, hi] = std::minmax_element(s.estimates.begin(), s.estimates.end(),
                                        [](const auto &a, const auto &b) { return a.second < b.second; });
    s.spread = hi->second - lo->second;
  };
  for (std::size_t t : solvable) {
    const auto &est = *report.trios[t].chosen();
    report.prevalence.estimates.emplace_back(t, est.prevalence);
    for (std::size_t k = 0; k < 3; ++k) {
      const std::size_t i = report.trios[t].classifiers[k];
      report.accuracy[i][index_of(Label::alpha)].estimates.emplace_back(t, est.acc_alpha[k]);
      report.accuracy[i][index_of(Label::beta)].estimates.emplace_back(t, est.acc_beta[k]);
    }
  }
  finish(report.prevalence);
  for (auto &per_label : report.accuracy)
    for (auto &s : per_label)
      finish(s);
  return report;
}

/// One point of a ground-truth vs recovered scatter.
struct ScatterRow {
  std::size_t classifier = 0; // 0-based
  Label label = Label::alpha;
  std::size_t trio = 0;       // index into kFourTrios
  double truth_accuracy = 0.0;
  double recovered_accuracy = 0.0;
};

template <Scalar T>
std::vector<ScatterRow> recovery_scatter(const ConsistencyReport<T> &report, const EnsembleStats &stats) {
  if (stats.n != 4)
    throw PreconditionError("ensemble size mismatch: consistency report covers 4 classifiers, stats cover " +
                            std::to_string(stats.n));
  std::vector<ScatterRow> rows;
  for (std::size_t i = 0; i < 4; ++i)
    for (Label l : kLabels)
      for (const auto &[t, value] : report.accuracy[i][index_of(l)].estimates)
        rows.push_back({i, l, t, to_double(stats.accuracies(l)[i]), to_double(value)});
  return rows;
}

/// Writes the scatter as CSV: classifier,label,trio,truth_accuracy,recovered_accuracy.
/// Classifiers are 1-based; a trio is written as its members joined by '-'.
inline std::string format_scatter_csv(const std::vector<ScatterRow> &rows) {
  std::string out = "classifier,label,trio,truth_accuracy,recovered_accuracy\n";
  for (const auto &r : rows) {
    const auto &trio = kFourTrios[r.trio];
    out += std::to_string(r.classifier + 1) + "," + symbol(r.label) + "," +
           std::to_string(trio[0] + 1) + "-" + std::to_string(trio[1] + 1) + "-" +
           std::to_string(trio[2] + 1) + "," + format_decimal(r.truth_accuracy, 10) + "," +
           format_decimal(r.recovered_accuracy, 10) + "\n";
  }
  return out;
}

struct SpreadCorrelationPair {
  double mean_spread = 0.0;
  double max_spread = 0.0;
  /// Mean absolute 2-way error correlation for the label.
  double mean_abs_pair_moment = 0.0;
  /// Mean absolute gap between recovered and true accuracies.
  double mean_abs_recovery_error = 0.0;
};

/// Per-label (spread, correlation size) pairs for plotting how trio
/// disagreement tracks the error correlations. No verdict is attached.
template <Scalar T>
std::array<SpreadCorrelationPair, 2> consistency_vs_correlation(const ConsistencyReport<T> &report,
                                                                const EnsembleStats &stats) {
  const auto rows = recovery_scatter(report, stats);
  std::array<SpreadCorrelationPair, 2> out;
  for (Label l : kLabels) {
    auto &pair = out[index_of(l)];
    pair.mean_spread = to_double(report.mean_spread(l));
    pair.max_spread = to_double(report.max_spread(l));
    double moments = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = i + 1; j < 4; ++j) {
        moments += std::abs(to_double(stats.moment(l, (SubsetMask{1} << i) | (SubsetMask{1} << j))));
        ++count;
      }
    pair.mean_abs_pair_moment = moments / count;
    double err = 0.0;
    int points = 0;
    for (const auto &r : rows)
      if (r.label == l) {
        err += std::abs(r.recovered_accuracy - r.truth_accuracy);
        ++points;
      }
    pair.mean_abs_recovery_error = points ? err / points : 0.0;
  }
  return out;
}

} // namespace gti
