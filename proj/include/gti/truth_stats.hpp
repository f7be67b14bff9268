#pragma once

// Ground-truth statistics of a labelled sample: prevalence, per-label
// accuracies and the central co-moments of the correctness indicators.

#include <gti/error.hpp>
#include <gti/rational.hpp>
#include <gti/tally.hpp>

#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gti {

/// Bit i set <=> classifier i (0-based) belongs to the subset.
using SubsetMask = std::uint32_t;

inline SubsetMask subset_of(std::initializer_list<std::size_t> members) {
  SubsetMask m = 0;
  for (std::size_t i : members)
    m |= SubsetMask{1} << i;
  return m;
}

struct MomentKey {
  Label label = Label::alpha;
  SubsetMask subset = 0;
  auto operator<=>(const MomentKey &) const = default;
};

/// "a:1,2,4" (1-based classifier numbers).
inline std::string format_moment_key(const MomentKey &key) {
  std::string s(1, symbol(key.label));
  s += ':';
  bool first = true;
  for (std::size_t i = 0; i < 32; ++i)
    if (key.subset >> i & 1U) {
      if (!first)
        s += ',';
      s += std::to_string(i + 1);
      first = false;
    }
  return s;
}

inline MomentKey parse_moment_key(std::string_view text) {
  if (text.size() < 3 || text[1] != ':')
    throw ParseError("moment key must look like 'a:1,2', got '" + std::string(text) + "'");
  MomentKey key;
  key.label = label_from_symbol(text[0]);
  std::string_view rest = text.substr(2);
  std::size_t start = 0;
  while (start <= rest.size()) {
    std::size_t end = rest.find(',', start);
    if (end == std::string_view::npos)
      end = rest.size();
    std::string_view item = rest.substr(start, end - start);
    unsigned long idx = 0;
    try {
      std::size_t used = 0;
      idx = std::stoul(std::string(item), &used);
      if (used != item.size())
        throw std::invalid_argument("trailing");
    } catch (const std::exception &) {
      throw ParseError("bad classifier number in moment key '" + std::string(text) + "'");
    }
    if (idx < 1 || idx > 32)
      throw ParseError("classifier number out of range in moment key '" + std::string(text) + "'");
    SubsetMask bit = SubsetMask{1} << (idx - 1);
    if (key.subset & bit)
      throw ParseError("repeated classifier in moment key '" + std::string(text) + "'");
    key.subset |= bit;
    start = end + 1;
  }
  return key;
}

/// Prevalence, label accuracies and error moments of an n-classifier ensemble.
///
/// acc_alpha[i] is the fraction of true-alpha items classifier i labels alpha;
/// acc_beta[i] likewise for beta. A moment for (label, S) is the central
/// co-moment, over true-label items, of the indicators "classifier i was
/// correct" for i in S, normalised by the number of such items. Subsets of size
/// one have moment zero by construction and are never stored.
struct EnsembleStats {
  std::size_t n = 0;
  Rational prevalence;
  std::vector<Rational> acc_alpha;
  std::vector<Rational> acc_beta;
  std::map<MomentKey, Rational> moments;

  const std::vector<Rational> &accuracies(Label l) const {
    return l == Label::alpha ? acc_alpha : acc_beta;
  }
  std::vector<Rational> &accuracies(Label l) { return l == Label::alpha ? acc_alpha : acc_beta; }

  /// Weight of label l in the sample: prevalence for alpha, 1 - prevalence for beta.
  Rational label_weight(Label l) const {
    return l == Label::alpha ? prevalence : Rational(1 - prevalence);
  }

  bool has_moment(Label l, SubsetMask s) const {
    return std::popcount(s) < 2 || moments.contains(MomentKey{l, s});
  }

  Rational moment(Label l, SubsetMask s) const {
    if (std::popcount(s) < 2)
      return Rational(0);
    auto it = moments.find(MomentKey{l, s});
    if (it == moments.end())
      throw PreconditionError("missing error moment " + format_moment_key({l, s}));
    return it->second;
  }

  void set_moment(Label l, SubsetMask s, Rational value) {
    if (std::popcount(s) < 2)
      throw PreconditionError("moments are stored only for subsets of two or more classifiers");
    moments[MomentKey{l, s}] = std::move(value);
  }

  void validate() const {
    if (n == 0 || n > kMaxDenseClassifiers)
      throw PreconditionError("ensemble size must be between 1 and " +
                              std::to_string(kMaxDenseClassifiers));
    if (acc_alpha.size() != n || acc_beta.size() != n)
      throw PreconditionError("accuracy vectors must have one entry per classifier");
    auto unit = [](const Rational &x) { return x >= 0 && x <= 1; };
    if (!unit(prevalence))
      throw PreconditionError("prevalence must lie in [0,1]");
    for (Label l : kLabels)
      for (std::size_t i = 0; i < n; ++i)
        if (!unit(accuracies(l)[i]))
          throw PreconditionError("accuracy of classifier " + std::to_string(i + 1) +
                                  " on label " + symbol(l) + " must lie in [0,1]");
    for (const auto &[key, value] : moments) {
      if (std::popcount(key.subset) < 2 || (key.subset >> n) != 0)
        throw PreconditionError("moment key " + format_moment_key(key) +
                                " does not name 2..n distinct classifiers");
      if (abs_value(value) > 1)
        throw PreconditionError("moment " + format_moment_key(key) + " exceeds 1 in magnitude");
    }
  }

  friend bool operator==(const EnsembleStats &, const EnsembleStats &) = default;
};

/// Exact ground-truth statistics from counts split by true label.
/// Moments are computed for every subset of 2..max_order classifiers
/// (max_order defaults to n).
template <class V>
EnsembleStats stats_from_truth_counts(const BasicDecisionCounts<V> &counts,
                                      std::optional<std::size_t> max_order = std::nullopt) {
  if (!counts.by_truth)
    throw PreconditionError("ground-truth statistics need counts split by true label");
  const std::size_t n = counts.n;
  require_dense(n);
  const std::size_t order = max_order.value_or(n);
  if (n >= 2 && (order < 2 || order > n))
    throw PreconditionError("max_order must lie in [2, n]");

  EnsembleStats stats;
  stats.n = n;
  stats.acc_alpha.assign(n, Rational(0));
  stats.acc_beta.assign(n, Rational(0));

  Rational m_total(0);
  std::array<Rational, 2> m_label;
  for (Label l : kLabels) {
    m_label[index_of(l)] = Rational(counts.label_total(l));
    m_total += m_label[index_of(l)];
  }
  for (Label l : kLabels)
    if (m_label[index_of(l)] == 0)
      throw DegenerateError(std::string("no items with true label ") + symbol(l) +
                            "; accuracies on that label are undefined");
  stats.prevalence = m_label[index_of(Label::alpha)] / m_total;

  for (Label l : kLabels) {
    const auto &side = (*counts.by_truth)[index_of(l)];
    const Rational &m = m_label[index_of(l)];
    const char correct = symbol(l);
    auto &acc = stats.accuracies(l);
    for (const auto &[p, c] : side)
      for (std::size_t i = 0; i < n; ++i)
        if (p[i] == correct)
          acc[i] += Rational(c);
    for (auto &a : acc)
      a /= m;

    if (n < 2)
      continue;
    const SubsetMask full = n == 32 ? ~SubsetMask{0} : (SubsetMask{1} << n) - 1;
    for (SubsetMask s = 1; s <= full && s != 0; ++s) {
      const auto size = static_cast<std::size_t>(std::popcount(s));
      if (size < 2 || size > order)
        continue;
      Rational sum(0);
      for (const auto &[p, c] : side) {
        Rational term(c);
        for (std::size_t i = 0; i < n && term != 0; ++i)
          if (s >> i & 1U)
            term *= (p[i] == correct ? Rational(1) : Rational(0)) - acc[i];
        sum += term;
      }
      stats.moments[MomentKey{l, s}] = sum / m;
    }
  }
  return stats;
}

/// Exact statistics of a labelled vote matrix.
inline EnsembleStats stats_from_votes(const VoteMatrix &votes,
                                      std::optional<std::size_t> max_order = std::nullopt) {
  if (!votes.truth)
    throw PreconditionError("ground-truth statistics need a truth column");
  return stats_from_truth_counts(tally_counts(votes), max_order);
}

struct LabelCorrelationSummary {
  Rational mean;
  /// Sample standard deviation (n - 1 normalisation over the pairs).
  double stddev = 0.0;
  double population_stddev = 0.0;
  std::size_t pairs = 0;
};

/// Mean and spread of the 2-way error correlations, per label.
struct CorrelationSummary {
  std::array<LabelCorrelationSummary, 2> per_label;
  const LabelCorrelationSummary &operator[](Label l) const { return per_label[index_of(l)]; }
};

inline CorrelationSummary summarize_pairwise(const EnsembleStats &stats) {
  if (stats.n < 2)
    throw PreconditionError("pairwise summary needs at least two classifiers");
  CorrelationSummary summary;
  for (Label l : kLabels) {
    std::vector<Rational> values;
    for (std::size_t i = 0; i < stats.n; ++i)
      for (std::size_t j = i + 1; j < stats.n; ++j) {
        SubsetMask s = (SubsetMask{1} << i) | (SubsetMask{1} << j);
        if (!stats.moments.contains(MomentKey{l, s}))
          throw PreconditionError("missing 2-way moment " + format_moment_key({l, s}));
        values.push_back(stats.moment(l, s));
      }
    auto &out = summary.per_label[index_of(l)];
    out.pairs = values.size();
    Rational sum(0);
    for (const auto &v : values)
      sum += v;
    out.mean = sum / Rational(static_cast<long>(values.size()));
    Rational ss(0);
    for (const auto &v : values)
      ss += (v - out.mean) * (v - out.mean);
    const auto k = static_cast<long>(values.size());
    out.population_stddev = std::sqrt(to_double(ss / Rational(k)));
    out.stddev = k > 1 ? std::sqrt(to_double(ss / Rational(k - 1))) : 0.0;
  }
  return summary;
}

struct AccuracyRow {
  std::size_t classifier = 0;
  Rational alpha;
  Rational beta;
};

inline std::vector<AccuracyRow> ensemble_accuracy_table(const EnsembleStats &stats) {
  std::vector<AccuracyRow> rows;
  rows.reserve(stats.n);
  for (std::size_t i = 0; i < stats.n; ++i)
    rows.push_back({i, stats.acc_alpha.at(i), stats.acc_beta.at(i)});
  return rows;
}

} // namespace gti
