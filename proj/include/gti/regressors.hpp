#pragma once

// Error covariances of scalar regressors without ground truth.
//
// All statistics are computed on de-meaned prediction columns, so they are
// invariant to a constant shift of any regressor; what they recover is the
// covariance of the de-meaned errors.

#include <gti/error.hpp>
#include <gti/tally.hpp>

#include <Eigen/Dense>

#include <array>
#include <charconv>
#include <cmath>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace gti {

/// Predictions of n regressors on M items (M x n), optionally with the truth.
struct RegressorPanel {
  std::vector<std::string> regressor_ids;
  Eigen::MatrixXd predictions;
  std::optional<Eigen::VectorXd> truth;

  Eigen::Index items() const { return predictions.rows(); }
  std::size_t regressors() const { return static_cast<std::size_t>(predictions.cols()); }

  void validate() const {
    if (predictions.rows() < 1)
      throw PreconditionError("a regressor panel needs at least one item");
    if (regressor_ids.size() != regressors())
      throw PreconditionError("one id per regressor column is required");
    if (truth && truth->size() != predictions.rows())
      throw PreconditionError("truth length does not match the number of items");
    if (!predictions.allFinite() || (truth && !truth->allFinite()))
      throw PreconditionError("panel contains non-finite values");
  }
};

inline RegressorPanel parse_predictions(std::string_view text,
                                        std::optional<std::string> truth_column = std::nullopt) {
  auto lines = detail::csv_lines(text);
  if (lines.empty())
    throw ParseError("predictions CSV has no header row");
  auto header = detail::split_csv_line(lines.front().second);
  std::optional<std::size_t> truth_at;
  if (truth_column) {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == *truth_column)
        truth_at = c;
    if (!truth_at)
      throw ConfigError("truth column '" + *truth_column + "' is not in the header");
  }
  RegressorPanel panel;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (!truth_at || c != *truth_at)
      panel.regressor_ids.push_back(header[c]);
  if (panel.regressor_ids.empty())
    throw ParseError("predictions CSV names no regressors");

  const auto rows = static_cast<Eigen::Index>(lines.size() - 1);
  panel.predictions.resize(rows, static_cast<Eigen::Index>(panel.regressor_ids.size()));
  if (truth_at)
    panel.truth = Eigen::VectorXd(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto &[line_no, line] = lines[static_cast<std::size_t>(r) + 1];
    auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " cells, found " + std::to_string(cells.size()));
    Eigen::Index col = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      const auto &cell = cells[c];
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v))
        throw ParseError("line " + std::to_string(line_no) + ", column '" + header[c] + "': '" + cell +
                         "' is not a finite number");
      if (truth_at && c == *truth_at)
        (*panel.truth)(r) = v;
      else
        panel.predictions(r, col++) = v;
    }
  }
  panel.validate();
  return panel;
}

/// Round-trip exact CSV rendering (shortest representation of each double).
inline std::string format_predictions(const RegressorPanel &panel, std::string_view truth_column = "truth") {
  auto num = [](double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
  };
  std::ostringstream out;
  for (std::size_t c = 0; c < panel.regressor_ids.size(); ++c)
    out << (c ? "," : "") << panel.regressor_ids[c];
  if (panel.truth)
    out << ',' << truth_column;
  out << '\n';
  for (Eigen::Index r = 0; r < panel.predictions.rows(); ++r) {
    for (Eigen::Index c = 0; c < panel.predictions.cols(); ++c)
      out << (c ? "," : "") << num(panel.predictions(r, c));
    if (panel.truth)
      out << ',' << num((*panel.truth)(r));
    out << '\n';
  }
  return out.str();
}

inline Eigen::MatrixXd demeaned(const Eigen::MatrixXd &columns) {
  return columns.rowwise() - columns.colwise().mean();
}

namespace detail {

inline void require_distinct(const RegressorPanel &panel, std::initializer_list<std::size_t> idx) {
  std::set<std::size_t> seen;
  for (std::size_t i : idx) {
    if (i >= panel.regressors())
      throw PreconditionError("regressor index " + std::to_string(i + 1) + " is out of range");
    if (!seen.insert(i).second)
      throw PreconditionError("regressor index " + std::to_string(i + 1) + " is repeated");
  }
}

inline double mean_product(const Eigen::VectorXd &x, const Eigen::VectorXd &y) {
  return x.dot(y) / static_cast<double>(x.size());
}

} // namespace detail

/// Mean squared difference of two de-meaned prediction columns; equals
/// eps_ii + eps_jj - 2 eps_ij of the de-meaned errors.
inline double pairwise_stat(const RegressorPanel &panel, std::size_t i, std::size_t j) {
  detail::require_distinct(panel, {i, j});
  const Eigen::MatrixXd y = demeaned(panel.predictions);
  const Eigen::VectorXd d = y.col(static_cast<Eigen::Index>(i)) - y.col(static_cast<Eigen::Index>(j));
  return detail::mean_product(d, d);
}

/// Error variances of a trio under the assumption of zero cross-covariances.
struct CovarianceEstimate {
  std::array<std::size_t, 3> trio{};
  /// Pair statistics for (i,j), (i,k), (j,k).
  std::array<double, 3> pair_stats{};
  std::array<double, 3> diag{};
  /// False when some recovered variance is negative, which independent errors cannot produce.
  bool feasible = true;
};

/// Inverts [[1,1,0],[1,0,1],[0,1,1]] eps = (S_ij, S_ik, S_jk).
inline std::array<double, 3> invert_pair_system(const std::array<double, 3> &s) {
  return {(s[0] + s[1] - s[2]) / 2, (s[0] + s[2] - s[1]) / 2, (s[1] + s[2] - s[0]) / 2};
}

inline CovarianceEstimate solve_trio_regressors(const RegressorPanel &panel, std::array<std::size_t, 3> trio) {
  detail::require_distinct(panel, {trio[0], trio[1], trio[2]});
  CovarianceEstimate est;
  est.trio = trio;
  est.pair_stats = {pairwise_stat(panel, trio[0], trio[1]), pairwise_stat(panel, trio[0], trio[2]),
                    pairwise_stat(panel, trio[1], trio[2])};
  est.diag = invert_pair_system(est.pair_stats);
  for (double v : est.diag)
    est.feasible = est.feasible && v >= 0.0;
  return est;
}

/// A four-trio consistency constraint eps_ab + eps_cd = eps_ac + eps_bd and
/// its ground-truth-free form mean((y_a - y_d)(y_b - y_c)) on de-meaned data.
struct PairingMoment {
  std::array<std::size_t, 4> order{}; // (a, b, c, d)
  double value = 0.0;
  /// value divided by the geometric mean of the two difference columns'
  /// second moments; 0 when both are zero.
  double normalized = 0.0;
};

inline PairingMoment pairing_moment(const Eigen::MatrixXd &centred, std::array<std::size_t, 4> order) {
  auto col = [&](std::size_t i) { return centred.col(static_cast<Eigen::Index>(i)); };
  const Eigen::VectorXd left = col(order[0]) - col(order[3]);
  const Eigen::VectorXd right = col(order[1]) - col(order[2]);
  PairingMoment pm;
  pm.order = order;
  pm.value = detail::mean_product(left, right);
  const double scale = std::sqrt(detail::mean_product(left, left) * detail::mean_product(right, right));
  pm.normalized = scale > 0.0 ? pm.value / scale : 0.0;
  return pm;
}

/// The three pairing constraints of a quad (i,j,k,l):
///   eps_ij + eps_kl = eps_ik + eps_jl,
///   eps_ij + eps_kl = eps_il + eps_jk,
///   eps_ik + eps_jl = eps_il + eps_jk.
inline std::array<PairingMoment, 3> consistency_constraints(const RegressorPanel &panel,
                                                            std::array<std::size_t, 4> quad) {
  const auto [i, j, k, l] = quad;
  detail::require_distinct(panel, {i, j, k, l});
  const Eigen::MatrixXd y = demeaned(panel.predictions);
  return {pairing_moment(y, {i, j, k, l}), pairing_moment(y, {i, j, l, k}),
          pairing_moment(y, {i, k, l, j})};
}

struct QuadMoments {
  std::array<std::size_t, 4> quad{};
  std::array<PairingMoment, 3> pairings{};
};

struct MixedMomentReport {
  std::vector<QuadMoments> quads;
  double max_normalized = 0.0;
  double threshold = 0.0;
  /// Every normalised pairing moment is within the threshold.
  bool consistency_possible = true;
};

/// Pairing moments for every 4-subset. The default threshold 5/sqrt(M) is a
/// reporting convention, not a statistical guarantee.
inline MixedMomentReport mixed_moment_test(const RegressorPanel &panel,
                                           std::optional<double> threshold = std::nullopt) {
  panel.validate();
  const std::size_t n = panel.regressors();
  if (n < 4)
    throw PreconditionError("the mixed-moment test needs at least four regressors");
  MixedMomentReport report;
  report.threshold = threshold.value_or(5.0 / std::sqrt(static_cast<double>(panel.items())));
  const Eigen::MatrixXd y = demeaned(panel.predictions);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k)
        for (std::size_t l = k + 1; l < n; ++l) {
          QuadMoments q;
          q.quad = {i, j, k, l};
          q.pairings = {pairing_moment(y, {i, j, k, l}), pairing_moment(y, {i, j, l, k}),
                        pairing_moment(y, {i, k, l, j})};
          for (const auto &p : q.pairings)
            report.max_normalized = std::max(report.max_normalized, std::abs(p.normalized));
          report.quads.push_back(q);
        }
  report.consistency_possible = report.max_normalized <= report.threshold;
  return report;
}

/// Error covariances computed with the truth: raw and de-meaned.
struct ErrorCovariance {
  Eigen::MatrixXd raw;
  Eigen::MatrixXd demeaned;
};

inline ErrorCovariance error_covariance_truth(const RegressorPanel &panel) {
  panel.validate();
  if (!panel.truth)
    throw PreconditionError("error covariances need the truth column");
  const Eigen::MatrixXd errors = (-panel.predictions).colwise() + *panel.truth;
  const double m = static_cast<double>(panel.items());
  ErrorCovariance out;
  out.raw = errors.transpose() * errors / m;
  const Eigen::MatrixXd centred = gti::demeaned(errors);
  out.demeaned = centred.transpose() * centred / m;
  return out;
}

} // namespace gti
