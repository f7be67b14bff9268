#pragma once

// Decision event counts of three four-classifier ensembles on public binary
// benchmarks (twonorm, spambase, mushroom), with the published pairwise
// error-correlation summaries for each.
//
// Table rows are keyed by 0/1 vote strings with classifier 1 leftmost; the two
// count columns are items whose true label is 0 and 1. True label 0 is alpha.
// Votes are read with 0 = alpha except where `flip_votes` is set, in which case
// vote 1 is alpha; that orientation is the one under which the published
// summaries are reproduced.

#include <gti/error.hpp>
#include <gti/tally.hpp>

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace gti::fixtures {

struct FixtureRow {
  std::string_view votes; // e.g. "0110"
  unsigned label0 = 0;
  unsigned label1 = 0;
};

/// Published pairwise summary: mean and standard deviation of the six pair
/// correlations per label, as displayed (value, decimal places shown).
struct DisplayedValue {
  double value = 0.0;
  /// Half a unit in the last displayed digit.
  double half_unit = 0.0;
};

struct PublishedSummary {
  DisplayedValue alpha_mean, alpha_stddev, beta_mean, beta_stddev;
};

struct Fixture {
  std::string_view name;
  std::array<std::string_view, 4> classifiers;
  bool flip_votes = false;
  std::array<FixtureRow, 16> rows;
  PublishedSummary published;
};

inline constexpr std::array<Fixture, 3> kFixtures{{
    {"twonorm",
     {"NeuralNetwork-depth5", "GradientBoostedTrees", "NaiveBayes", "LogisticRegression"},
     true,
     {{{"0000", 4, 1330},  {"0001", 7, 237},  {"0010", 18, 271}, {"0011", 58, 48},
       {"0100", 15, 285},  {"0101", 58, 42},  {"0110", 50, 58},  {"0111", 268, 7},
       {"1000", 11, 258},  {"1001", 52, 38},  {"1010", 42, 58},  {"1011", 247, 8},
       {"1100", 56, 38},   {"1101", 284, 7},  {"1110", 245, 5},  {"1111", 1172, 1}}},
     {{-0.0000048, 0.00000005}, {0.0023, 0.00005}, {-0.0021, 0.00005}, {0.0024, 0.00005}}},
    {"spambase",
     {"NeuralNetwork-depth4", "SupportVectorMachine-poly-degree3", "DecisionTree-smoothing5",
      "NaiveBayes"},
     false,
     {{{"0000", 1827, 185}, {"0001", 53, 25},  {"0010", 145, 153}, {"0011", 13, 30},
       {"0100", 121, 14},   {"0101", 17, 12},  {"0110", 9, 14},    {"0111", 3, 10},
       {"1000", 223, 151},  {"1001", 10, 90},  {"1010", 45, 182},  {"1011", 5, 268},
       {"1100", 26, 22},    {"1101", 5, 66},   {"1110", 5, 65},    {"1111", 2, 345}}},
     {{0.0056, 0.00005}, {0.0036, 0.00005}, {0.067, 0.0005}, {0.020, 0.0005}}},
    {"mushroom",
     {"DecisionTree", "NaiveBayes", "NeuralNetwork", "SupportVectorMachine"},
     false,
     {{{"0000", 2929, 0},  {"0001", 75, 0},   {"0010", 70, 28},  {"0011", 45, 266},
       {"0100", 135, 35},  {"0101", 0, 0},    {"0110", 16, 14},  {"0111", 42, 174},
       {"1000", 310, 0},   {"1001", 5, 0},    {"1010", 110, 29}, {"1011", 10, 106},
       {"1100", 20, 29},   {"1101", 0, 129},  {"1110", 20, 0},   {"1111", 0, 2714}}},
     {{0.012, 0.0005}, {0.011, 0.0005}, {0.017, 0.0005}, {0.025, 0.0005}}},
}};

inline std::vector<std::string_view> fixture_names() {
  std::vector<std::string_view> names;
  for (const auto &f : kFixtures)
    names.push_back(f.name);
  return names;
}

inline const Fixture &fixture(std::string_view name) {
  for (const auto &f : kFixtures)
    if (f.name == name)
      return f;
  std::string known;
  for (const auto &f : kFixtures)
    known += (known.empty() ? "" : ", ") + std::string(f.name);
  throw ConfigError("unknown fixture '" + std::string(name) + "' (known: " + known + ")");
}

/// The a/b pattern of a table row under the fixture's vote orientation.
inline std::string oriented_pattern(const Fixture &f, std::string_view votes) {
  const char alpha_vote = f.flip_votes ? '1' : '0';
  std::string p(votes.size(), 'a');
  for (std::size_t i = 0; i < votes.size(); ++i)
    p[i] = votes[i] == alpha_vote ? 'a' : 'b';
  return p;
}

/// Counts split by true label.
inline DecisionCounts fixture_counts(const Fixture &f) {
  DecisionCounts counts = empty_counts(4, true);
  for (const auto &row : f.rows) {
    const std::string p = oriented_pattern(f, row.votes);
    counts.add(p, BigInt(row.label0), Label::alpha);
    counts.add(p, BigInt(row.label1), Label::beta);
  }
  return counts;
}

/// One vote row per item, in table order, with the truth attached.
inline VoteMatrix fixture_votes(const Fixture &f) {
  VoteMatrix votes;
  for (const auto &c : f.classifiers)
    votes.classifier_ids.emplace_back(c);
  votes.truth.emplace();
  for (const auto &row : f.rows) {
    const std::string p = oriented_pattern(f, row.votes);
    for (Label l : kLabels)
      for (unsigned k = 0; k < (l == Label::alpha ? row.label0 : row.label1); ++k) {
        votes.rows.push_back(p);
        votes.truth->push_back(l);
      }
  }
  return votes;
}

} // namespace gti::fixtures
