#pragma once

// JSON encodings of counts, statistics and reports.
//
// Exact quantities are written as {"exact": "p/q", "decimal": x}; readers
// accept that object, a fraction or decimal string, or a plain JSON number.
// Decimal fields are rounded to a fixed number of significant digits (6 by
// default) and are for display only.

#include <gti/error.hpp>
#include <gti/independence.hpp>
#include <gti/rational.hpp>
#include <gti/regressors.hpp>
#include <gti/tally.hpp>
#include <gti/trio_solver.hpp>
#include <gti/truth_stats.hpp>

#include <json.hpp>

#include <cstdlib>
#include <string>

namespace gti::json_io {

using nlohmann::json;

inline double rounded(double x, int digits) { return std::strtod(format_decimal(x, digits).c_str(), nullptr); }

inline json exact_value(const Rational &r, int digits = 6) {
  return json{{"exact", to_fraction_string(r)}, {"decimal", rounded(to_double(r), digits)}};
}

template <Scalar T>
json scalar_value(const T &x, int digits = 6) {
  if constexpr (std::same_as<T, Rational>)
    return exact_value(x, digits);
  else
    return rounded(x, digits);
}

inline Rational read_rational(const json &j) {
  if (j.is_object()) {
    if (!j.contains("exact"))
      throw ParseError("numeric object needs an \"exact\" field");
    return read_rational(j.at("exact"));
  }
  if (j.is_string())
    return parse_rational(j.get<std::string>());
  if (j.is_number_integer())
    return Rational(j.get<long long>());
  if (j.is_number_unsigned())
    return Rational(BigInt(j.get<unsigned long long>()));
  if (j.is_number_float())
    return rational_from_double(j.get<double>());
  throw ParseError("expected a number, got " + j.dump());
}

inline BigInt read_count(const json &j) {
  if (j.is_number_unsigned())
    return BigInt(j.get<unsigned long long>());
  if (j.is_number_integer())
    return BigInt(j.get<long long>());
  if (j.is_string())
    return parse_bigint(j.get<std::string>());
  throw ParseError("counters must be integers, got " + j.dump());
}

inline json count_value(const BigInt &c) {
  if (c >= 0 && c <= BigInt(std::numeric_limits<std::int64_t>::max()))
    return json(c.convert_to<std::int64_t>());
  return json(c.str());
}

inline json count_value(const Rational &c) {
  if (is_integral(c))
    return count_value(numerator_of(c));
  return json(to_fraction_string(c));
}

/// {"n":3,"total":M,"counts":{"aab":12,...},"by_truth":{"a":{...},"b":{...}}}
template <class V>
json counts_to_json(const BasicDecisionCounts<V> &counts) {
  auto map_json = [](const auto &m) {
    json out = json::object();
    for (const auto &[p, c] : m)
      if (c != 0)
        out[p] = count_value(c);
    return out;
  };
  json j{{"n", counts.n}, {"total", count_value(counts.total)}, {"counts", map_json(counts.counts)}};
  if (counts.by_truth)
    j["by_truth"] = json{{"a", map_json((*counts.by_truth)[0])}, {"b", map_json((*counts.by_truth)[1])}};
  return j;
}

inline DecisionCounts counts_from_json(const json &j) {
  try {
    DecisionCounts counts;
    counts.n = j.at("n").get<std::size_t>();
    if (counts.n == 0)
      throw ParseError("counts JSON needs n >= 1");
    if (j.contains("by_truth")) {
      counts.by_truth.emplace();
      for (Label l : kLabels) {
        const std::string key(1, symbol(l));
        if (!j.at("by_truth").contains(key))
          continue;
        for (const auto &[p, c] : j.at("by_truth").at(key).items())
          counts.add(p, read_count(c), l);
      }
      if (j.contains("counts")) {
        DecisionCounts stated;
        stated.n = counts.n;
        for (const auto &[p, c] : j.at("counts").items())
          stated.add(p, read_count(c));
        if (stated.counts != counts.counts)
          throw ParseError("\"counts\" disagrees with the sum of \"by_truth\"");
      }
    } else {
      for (const auto &[p, c] : j.at("counts").items())
        counts.add(p, read_count(c));
    }
    if (j.contains("total") && read_count(j.at("total")) != counts.total)
      throw ParseError("\"total\" does not equal the sum of the counters");
    counts.validate();
    return counts;
  } catch (const json::exception &e) {
    throw ParseError(std::string("malformed counts JSON: ") + e.what());
  } catch (const PreconditionError &e) {
    throw ParseError(std::string("invalid counts JSON: ") + e.what());
  }
}

inline json stats_to_json(const EnsembleStats &stats, int digits = 6) {
  json acc = json::array();
  for (const auto &row : ensemble_accuracy_table(stats))
    acc.push_back(json{{"classifier", row.classifier + 1},
                       {"alpha", exact_value(row.alpha, digits)},
                       {"beta", exact_value(row.beta, digits)}});
  json moments = json::object();
  for (const auto &[key, value] : stats.moments)
    moments[format_moment_key(key)] = exact_value(value, digits);
  json j{{"n", stats.n},
         {"prevalence", exact_value(stats.prevalence, digits)},
         {"accuracy", acc},
         {"moments", moments}};
  if (stats.n >= 2) {
    bool all_pairs = true;
    for (Label l : kLabels)
      for (std::size_t i = 0; i < stats.n; ++i)
        for (std::size_t k = i + 1; k < stats.n; ++k)
          all_pairs = all_pairs && stats.moments.contains({l, (SubsetMask{1} << i) | (SubsetMask{1} << k)});
    if (all_pairs) {
      const auto summary = summarize_pairwise(stats);
      json s = json::object();
      for (Label l : kLabels) {
        const auto &ls = summary[l];
        s[std::string(1, symbol(l))] = json{{"mean", exact_value(ls.mean, digits)},
                                            {"stddev", rounded(ls.stddev, digits)},
                                            {"population_stddev", rounded(ls.population_stddev, digits)},
                                            {"pairs", ls.pairs}};
      }
      j["pairwise_summary"] = s;
    }
  }
  return j;
}

/// Reads statistics written by stats_to_json, or the compact input form
/// {"prevalence": "1/2", "acc_alpha": [...], "acc_beta": [...], "moments": {"a:1,2": "1/25"}}.
/// Moments not listed are zero.
inline EnsembleStats stats_from_json(const json &j) {
  try {
    EnsembleStats stats;
    stats.prevalence = read_rational(j.at("prevalence"));
    if (j.contains("accuracy")) {
      for (const auto &row : j.at("accuracy")) {
        stats.acc_alpha.push_back(read_rational(row.at("alpha")));
        stats.acc_beta.push_back(read_rational(row.at("beta")));
      }
    } else {
      for (const auto &v : j.at("acc_alpha"))
        stats.acc_alpha.push_back(read_rational(v));
      for (const auto &v : j.at("acc_beta"))
        stats.acc_beta.push_back(read_rational(v));
    }
    stats.n = stats.acc_alpha.size();
    if (j.contains("n") && j.at("n").get<std::size_t>() != stats.n)
      throw ParseError("\"n\" does not match the number of accuracies");
    if (stats.n == 0 || stats.n > kMaxDenseClassifiers)
      throw ParseError("statistics need between 1 and 16 classifiers");
    for (Label l : kLabels)
      for (SubsetMask s = 0; s < (SubsetMask{1} << stats.n); ++s)
        if (std::popcount(s) >= 2)
          stats.set_moment(l, s, Rational(0));
    if (j.contains("moments"))
      for (const auto &[key, value] : j.at("moments").items()) {
        const MomentKey mk = parse_moment_key(key);
        if ((mk.subset >> stats.n) != 0 || std::popcount(mk.subset) < 2)
          throw ParseError("moment key '" + key + "' does not fit n=" + std::to_string(stats.n));
        stats.set_moment(mk.label, mk.subset, read_rational(value));
      }
    stats.validate();
    return stats;
  } catch (const json::exception &e) {
    throw ParseError(std::string("malformed statistics JSON: ") + e.what());
  } catch (const PreconditionError &e) {
    throw ParseError(std::string("invalid statistics JSON: ") + e.what());
  }
}

template <Scalar T>
json estimate_to_json(const TrioEstimate<T> &est, int digits = 6) {
  json alpha = json::array(), beta = json::array(), res = json::array();
  for (std::size_t i = 0; i < 3; ++i) {
    alpha.push_back(scalar_value(est.acc_alpha[i], digits));
    beta.push_back(scalar_value(est.acc_beta[i], digits));
  }
  for (const auto &r : est.residuals)
    res.push_back(scalar_value(r, digits));
  return json{{"prevalence", scalar_value(est.prevalence, digits)},
              {"acc_alpha", alpha},
              {"acc_beta", beta},
              {"residuals", res},
              {"residual", est.residual},
              {"feasible", est.feasible},
              {"exact", est.exact}};
}

/// Both branches, residuals, feasibility, the selected branch and the mode.
template <Scalar T>
json solution_to_json(const TrioSolution<T> &sol, const std::array<std::size_t, 3> &trio,
                      std::optional<std::size_t> selected, int digits = 6) {
  json branches = json::array();
  for (const auto &b : sol.branches)
    branches.push_back(estimate_to_json(b, digits));
  json j{{"mode", std::same_as<T, Rational> ? "exact" : "floating"},
         {"trio", json::array({trio[0] + 1, trio[1] + 1, trio[2] + 1})},
         {"outcome", to_string(sol.outcome)},
         {"detail", sol.detail},
         {"branches", branches},
         {"selected", selected ? json(*selected) : json(nullptr)},
         {"warnings", sol.warnings}};
  if (sol.discriminant)
    j["discriminant"] = scalar_value(*sol.discriminant, digits);
  return j;
}

inline json detection_to_json(const DetectionReport &r, int digits = 6) {
  json j{{"verdict", to_string(r.verdict)},
         {"evidence", r.evidence ? json(to_string(*r.evidence)) : json(nullptr)},
         {"detail", r.detail}};
  j["discriminant"] = r.discriminant ? exact_value(*r.discriminant, digits) : json(nullptr);
  json phis = json::array();
  for (double p : r.phi_candidates)
    phis.push_back(rounded(p, digits));
  j["phi_candidates"] = phis;
  json exact = json::array();
  for (const auto &p : r.exact_phi)
    exact.push_back(exact_value(p, digits));
  j["exact_phi"] = exact;
  return j;
}

template <Scalar T>
json consistency_to_json(const ConsistencyReport<T> &report, int digits = 6) {
  json trios = json::array();
  for (const auto &t : report.trios) {
    json e = solution_to_json(t.solution, t.classifiers, t.chosen_branch, digits);
    trios.push_back(e);
  }
  auto spread_json = [&](const EstimateSpread<T> &s) {
    json est = json::array();
    for (const auto &[t, v] : s.estimates) {
      const auto &c = kFourTrios[t];
      est.push_back(json{{"trio", json::array({c[0] + 1, c[1] + 1, c[2] + 1})},
                         {"value", scalar_value(v, digits)}});
    }
    return json{{"estimates", est}, {"spread", scalar_value(s.spread, digits)}};
  };
  json classifiers = json::array();
  for (std::size_t i = 0; i < 4; ++i)
    classifiers.push_back(json{{"classifier", i + 1},
                               {"alpha", spread_json(report.accuracy[i][0])},
                               {"beta", spread_json(report.accuracy[i][1])}});
  json assignment = json::array();
  for (const auto &t : report.trios)
    assignment.push_back(t.chosen_branch ? json(*t.chosen_branch) : json(nullptr));
  return json{{"mode", std::same_as<T, Rational> ? "exact" : "floating"},
              {"solvable_trios", report.solvable_trios},
              {"branch_assignment", assignment},
              {"total_disagreement", scalar_value(report.total_disagreement, digits)},
              {"prevalence", spread_json(report.prevalence)},
              {"classifiers", classifiers},
              {"mean_spread", json{{"a", scalar_value(report.mean_spread(Label::alpha), digits)},
                                   {"b", scalar_value(report.mean_spread(Label::beta), digits)}}},
              {"trios", trios}};
}

inline json matrix_to_json(const Eigen::MatrixXd &m, int digits = 6) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      row.push_back(rounded(m(r, c), digits));
    rows.push_back(row);
  }
  return rows;
}

inline json covariance_estimate_to_json(const CovarianceEstimate &est, int digits = 6) {
  json diag = json::array(), pairs = json::array();
  for (double v : est.diag)
    diag.push_back(rounded(v, digits));
  for (double v : est.pair_stats)
    pairs.push_back(rounded(v, digits));
  return json{{"mode", "independent-trio"},
              {"trio", json::array({est.trio[0] + 1, est.trio[1] + 1, est.trio[2] + 1})},
              {"pair_stats", pairs},
              {"diag", diag},
              {"feasible", est.feasible}};
}

inline json pairing_to_json(const PairingMoment &p, int digits = 6) {
  return json{{"order", json::array({p.order[0] + 1, p.order[1] + 1, p.order[2] + 1, p.order[3] + 1})},
              {"value", rounded(p.value, digits)},
              {"normalized", rounded(p.normalized, digits)}};
}

inline json mixed_moment_to_json(const MixedMomentReport &r, int digits = 6) {
  json quads = json::array();
  for (const auto &q : r.quads) {
    json pairings = json::array();
    for (const auto &p : q.pairings)
      pairings.push_back(pairing_to_json(p, digits));
    quads.push_back(json{{"quad", json::array({q.quad[0] + 1, q.quad[1] + 1, q.quad[2] + 1, q.quad[3] + 1})},
                         {"pairings", pairings}});
  }
  return json{{"quads", quads},
              {"max_normalized", rounded(r.max_normalized, digits)},
              {"threshold", rounded(r.threshold, digits)},
              {"consistency_possible", r.consistency_possible}};
}

} // namespace gti::json_io
