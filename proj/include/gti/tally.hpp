#pragma once

// Vote matrices and decision-event counters.
//
// A decision pattern is a string over {a,b}, one character per classifier in
// classifier order: "aab" means classifiers 1 and 2 voted alpha and classifier
// 3 voted beta. Counters live in sparse ordered maps; absent patterns are zero.

#include <gti/error.hpp>
#include <gti/rational.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace gti {

enum class Label : std::uint8_t { alpha = 0, beta = 1 };

inline constexpr std::array<Label, 2> kLabels{Label::alpha, Label::beta};

/// Largest ensemble for which dense 2^n pattern enumeration is allowed.
inline constexpr std::size_t kMaxDenseClassifiers = 16;

constexpr char symbol(Label l) { return l == Label::alpha ? 'a' : 'b'; }
constexpr std::size_t index_of(Label l) { return static_cast<std::size_t>(l); }
constexpr Label other(Label l) { return l == Label::alpha ? Label::beta : Label::alpha; }

inline Label label_from_symbol(char c) {
  if (c == 'a')
    return Label::alpha;
  if (c == 'b')
    return Label::beta;
  throw ParseError(std::string("label symbol must be 'a' or 'b', got '") + c + "'");
}

inline bool is_pattern(std::string_view p) {
  for (char c : p)
    if (c != 'a' && c != 'b')
      return false;
  return true;
}

/// Pattern number `index` of the 2^n patterns in lexicographic order
/// (aaa, aab, aba, abb, ...): classifier 1 is the most significant bit.
inline std::string pattern_from_index(std::size_t index, std::size_t n) {
  std::string p(n, 'a');
  for (std::size_t k = 0; k < n; ++k)
    if (index >> (n - 1 - k) & 1U)
      p[k] = 'b';
  return p;
}

inline std::size_t pattern_index(std::string_view p) {
  std::size_t index = 0;
  for (char c : p)
    index = (index << 1) | (c == 'b' ? 1U : 0U);
  return index;
}

inline void require_dense(std::size_t n) {
  if (n > kMaxDenseClassifiers)
    throw PreconditionError("dense pattern enumeration supports at most " +
                            std::to_string(kMaxDenseClassifiers) + " classifiers, got " +
                            std::to_string(n));
}

/// Mapping from the symbols written in a votes CSV to the two labels.
struct LabelMap {
  std::string alpha_symbol = "0";
  std::string beta_symbol = "1";

  Label decode(std::string_view cell) const {
    if (cell == alpha_symbol)
      return Label::alpha;
    if (cell == beta_symbol)
      return Label::beta;
    throw ParseError("'" + std::string(cell) + "' is not a label symbol");
  }

  std::string_view encode(Label l) const { return l == Label::alpha ? alpha_symbol : beta_symbol; }

  /// Parses "0=a,1=b" (either order).
  static LabelMap parse(std::string_view spec) {
    LabelMap map;
    bool have_alpha = false, have_beta = false;
    std::size_t start = 0;
    while (start <= spec.size()) {
      std::size_t end = spec.find(',', start);
      if (end == std::string_view::npos)
        end = spec.size();
      std::string_view item = spec.substr(start, end - start);
      auto eq = item.find('=');
      if (eq == std::string_view::npos || eq == 0 || eq + 2 != item.size())
        throw ConfigError("label map entries look like SYMBOL=a or SYMBOL=b, got '" +
                          std::string(item) + "'");
      std::string sym(item.substr(0, eq));
      if (item.back() == 'a') {
        map.alpha_symbol = sym;
        have_alpha = true;
      } else if (item.back() == 'b') {
        map.beta_symbol = sym;
        have_beta = true;
      } else {
        throw ConfigError("label map target must be 'a' or 'b' in '" + std::string(item) + "'");
      }
      start = end + 1;
    }
    if (!have_alpha || !have_beta || map.alpha_symbol == map.beta_symbol)
      throw ConfigError("label map must assign distinct symbols to both a and b");
    return map;
  }
};

/// Per-item decisions of n classifiers, optionally with the true label.
struct VoteMatrix {
  std::vector<std::string> classifier_ids;
  std::vector<std::string> rows;
  std::optional<std::vector<Label>> truth;

  std::size_t classifiers() const { return classifier_ids.size(); }
  std::size_t items() const { return rows.size(); }

  void validate() const {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != classifier_ids.size())
        throw PreconditionError("row " + std::to_string(r + 1) + " has " +
                                std::to_string(rows[r].size()) + " decisions, expected " +
                                std::to_string(classifier_ids.size()));
      if (!is_pattern(rows[r]))
        throw PreconditionError("row " + std::to_string(r + 1) + " contains a non-label decision");
    }
    if (truth && truth->size() != rows.size())
      throw PreconditionError("truth column length does not match the number of rows");
  }
};

template <class V>
struct BasicDecisionCounts {
  using value_type = V;
  using Map = std::map<std::string, V, std::less<>>;

  std::size_t n = 0;
  V total{};
  Map counts;
  std::optional<std::array<Map, 2>> by_truth;

  V count(std::string_view pattern) const { return lookup(counts, pattern); }

  V truth_count(Label truth, std::string_view pattern) const {
    if (!by_truth)
      throw PreconditionError("counts carry no split by true label");
    return lookup((*by_truth)[index_of(truth)], pattern);
  }

  /// Number of items whose true label is `truth`.
  V label_total(Label truth) const {
    if (!by_truth)
      throw PreconditionError("counts carry no split by true label");
    V sum{};
    for (const auto &[p, c] : (*by_truth)[index_of(truth)])
      sum += c;
    return sum;
  }

  /// Adds `amount` to a pattern, keeping the total and the truth split in sync.
  void add(std::string_view pattern, const V &amount, std::optional<Label> truth = std::nullopt) {
    if (pattern.size() != n || !is_pattern(pattern))
      throw PreconditionError("pattern '" + std::string(pattern) + "' does not fit n=" +
                              std::to_string(n));
    if (amount < 0)
      throw PreconditionError("counters are non-negative");
    if (amount == 0)
      return;
    bump(counts, pattern, amount);
    total += amount;
    if (truth) {
      if (!by_truth)
        throw PreconditionError("adding a truth-labelled count to counts without a truth split");
      bump((*by_truth)[index_of(*truth)], pattern, amount);
    } else if (by_truth) {
      throw PreconditionError("counts with a truth split need the true label of every item");
    }
  }

  void validate() const {
    V sum{};
    for (const auto &[p, c] : counts) {
      if (p.size() != n || !is_pattern(p))
        throw PreconditionError("pattern '" + p + "' does not fit n=" + std::to_string(n));
      if (c < 0)
        throw PreconditionError("negative counter for pattern '" + p + "'");
      sum += c;
    }
    if (sum != total)
      throw PreconditionError("counters do not sum to the declared total");
    if (by_truth) {
      Map merged;
      for (const auto &side : *by_truth)
        for (const auto &[p, c] : side) {
          if (p.size() != n || !is_pattern(p))
            throw PreconditionError("pattern '" + p + "' does not fit n=" + std::to_string(n));
          if (c < 0)
            throw PreconditionError("negative counter for pattern '" + p + "'");
          if (c != 0)
            bump(merged, p, c);
        }
      Map nonzero;
      for (const auto &[p, c] : counts)
        if (c != 0)
          nonzero.emplace(p, c);
      if (merged != nonzero)
        throw PreconditionError("per-truth counters do not add up to the observed counters");
    }
  }

  /// Dense vector of relative frequencies in pattern_from_index order.
  template <Scalar T>
  std::vector<T> frequencies() const {
    require_dense(n);
    if (total == 0)
      throw DegenerateError("cannot form frequencies of an empty sample");
    std::vector<T> f(std::size_t{1} << n, T(0));
    for (const auto &[p, c] : counts)
      f[pattern_index(p)] = from_rational<T>(Rational(c) / Rational(total));
    return f;
  }

  friend bool operator==(const BasicDecisionCounts &, const BasicDecisionCounts &) = default;

private:
  static V lookup(const Map &m, std::string_view pattern) {
    auto it = m.find(pattern);
    return it == m.end() ? V{} : it->second;
  }
  static void bump(Map &m, std::string_view pattern, const V &amount) {
    auto it = m.find(pattern);
    if (it == m.end())
      m.emplace(std::string(pattern), amount);
    else
      it->second += amount;
  }
};

using DecisionCounts = BasicDecisionCounts<BigInt>;
/// Model-predicted counts; not necessarily integral.
using ExpectedCounts = BasicDecisionCounts<Rational>;

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
    ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
    --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    std::size_t end = line.find(',', start);
    if (end == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, end - start)));
    start = end + 1;
  }
  return cells;
}

/// Non-blank lines of a CSV document, paired with their 1-based line numbers.
inline std::vector<std::pair<std::size_t, std::string>> csv_lines(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (trim(line).empty())
      continue;
    lines.emplace_back(number, line);
  }
  return lines;
}

} // namespace detail

/// Reads a votes CSV: a header naming the classifiers (plus, optionally, the
/// truth column) and one decision symbol per cell.
inline VoteMatrix parse_votes(std::string_view text,
                              std::optional<std::string> truth_column = std::nullopt,
                              const LabelMap &labels = {}) {
  auto lines = detail::csv_lines(text);
  if (lines.empty())
    throw ParseError("votes CSV has no header row");
  auto header = detail::split_csv_line(lines.front().second);

  std::optional<std::size_t> truth_at;
  if (truth_column) {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == *truth_column)
        truth_at = c;
    if (!truth_at)
      throw ConfigError("truth column '" + *truth_column + "' is not in the header");
  }

  VoteMatrix votes;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (truth_at && c == *truth_at)
      continue;
    if (header[c].empty())
      throw ParseError("empty classifier name in header column " + std::to_string(c + 1));
    votes.classifier_ids.push_back(header[c]);
  }
  if (votes.classifier_ids.empty())
    throw ParseError("votes CSV names no classifiers");
  if (truth_at)
    votes.truth.emplace();

  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto &[line_no, line] = lines[r];
    auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " cells, found " +
                       std::to_string(cells.size()));
    std::string row;
    row.reserve(votes.classifier_ids.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      Label l;
      try {
        l = labels.decode(cells[c]);
      } catch (const ParseError &) {
        throw ParseError("line " + std::to_string(line_no) + ", column '" + header[c] + "': '" +
                         cells[c] + "' is not one of '" + labels.alpha_symbol + "', '" +
                         labels.beta_symbol + "'");
      }
      if (truth_at && c == *truth_at)
        votes.truth->push_back(l);
      else
        row.push_back(symbol(l));
    }
    votes.rows.push_back(std::move(row));
  }
  return votes;
}

/// Writes a votes CSV that parse_votes reads back unchanged.
inline std::string format_votes(const VoteMatrix &votes, const LabelMap &labels = {},
                                std::string_view truth_column = "truth") {
  std::ostringstream out;
  for (std::size_t c = 0; c < votes.classifier_ids.size(); ++c)
    out << (c ? "," : "") << votes.classifier_ids[c];
  if (votes.truth)
    out << ',' << truth_column;
  out << '\n';
  for (std::size_t r = 0; r < votes.rows.size(); ++r) {
    const auto &row = votes.rows[r];
    for (std::size_t c = 0; c < row.size(); ++c)
      out << (c ? "," : "") << labels.encode(label_from_symbol(row[c]));
    if (votes.truth)
      out << ',' << labels.encode((*votes.truth)[r]);
    out << '\n';
  }
  return out.str();
}

inline DecisionCounts empty_counts(std::size_t n, bool with_truth) {
  DecisionCounts counts;
  counts.n = n;
  if (with_truth)
    counts.by_truth.emplace();
  return counts;
}

inline DecisionCounts tally_counts(const VoteMatrix &votes) {
  votes.validate();
  DecisionCounts counts = empty_counts(votes.classifiers(), votes.truth.has_value());
  for (std::size_t r = 0; r < votes.rows.size(); ++r) {
    std::optional<Label> truth;
    if (votes.truth)
      truth = (*votes.truth)[r];
    counts.add(votes.rows[r], BigInt(1), truth);
  }
  return counts;
}

/// Counter-wise sum of two tallies over the same ensemble.
template <class V>
BasicDecisionCounts<V> merge_counts(const BasicDecisionCounts<V> &a, const BasicDecisionCounts<V> &b) {
  if (a.n != b.n || a.by_truth.has_value() != b.by_truth.has_value())
    throw PreconditionError("merging counts of different shapes");
  BasicDecisionCounts<V> out = a;
  if (b.by_truth) {
    for (Label l : kLabels)
      for (const auto &[p, c] : (*b.by_truth)[index_of(l)])
        out.add(p, c, l);
  } else {
    for (const auto &[p, c] : b.counts)
      out.add(p, c);
  }
  return out;
}

/// Drops the truth split; each observed counter is the sum over true labels.
template <class V>
BasicDecisionCounts<V> marginalize_truth(const BasicDecisionCounts<V> &counts) {
  if (!counts.by_truth)
    throw PreconditionError("marginalize_truth needs counts split by true label");
  BasicDecisionCounts<V> out;
  out.n = counts.n;
  for (Label l : kLabels)
    for (const auto &[p, c] : (*counts.by_truth)[index_of(l)])
      out.add(p, c);
  return out;
}

/// Counts over the classifiers in `subset` (0-based, in the given order),
/// summing over the decisions of every omitted classifier.
template <class V>
BasicDecisionCounts<V> project_subset(const BasicDecisionCounts<V> &counts,
                                      std::span<const std::size_t> subset) {
  std::set<std::size_t> seen;
  for (std::size_t i : subset) {
    if (i >= counts.n)
      throw PreconditionError("classifier index " + std::to_string(i + 1) +
                              " is out of range for n=" + std::to_string(counts.n));
    if (!seen.insert(i).second)
      throw PreconditionError("classifier index " + std::to_string(i + 1) +
                              " appears twice in the subset");
  }
  if (subset.empty())
    throw PreconditionError("subset must name at least one classifier");

  auto project = [&](std::string_view p) {
    std::string q;
    q.reserve(subset.size());
    for (std::size_t i : subset)
      q.push_back(p[i]);
    return q;
  };

  BasicDecisionCounts<V> out;
  out.n = subset.size();
  if (counts.by_truth) {
    out.by_truth.emplace();
    for (Label l : kLabels)
      for (const auto &[p, c] : (*counts.by_truth)[index_of(l)])
        out.add(project(p), c, l);
  } else {
    for (const auto &[p, c] : counts.counts)
      out.add(project(p), c);
  }
  return out;
}

template <class V>
BasicDecisionCounts<V> project_subset(const BasicDecisionCounts<V> &counts,
                                      std::initializer_list<std::size_t> subset) {
  return project_subset(counts, std::span<const std::size_t>(subset.begin(), subset.size()));
}

} // namespace gti
