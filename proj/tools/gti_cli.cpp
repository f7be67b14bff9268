// gti: command-line front end for ground-truth-free ensemble evaluation.
//
// Exit codes: 0 ok, 2 input error, 3 degenerate or infeasible sample.
// JSON goes to stdout (or -o), diagnostics to stderr.

#include <gti/gti.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

namespace {

using gti::json_io::json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitDegenerate = 3;

struct Options {
  int digits = 6;
  std::string output = "-";
};

std::string read_file(const std::string &path) {
  if (path == "-")
    return {std::istreambuf_iterator<char>(std::cin), {}};
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw gti::ConfigError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), {}};
}

json read_json(const std::string &path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error &e) {
    throw gti::ParseError(path + ": " + e.what());
  }
}

void write_text(const std::string &path, const std::string &text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw gti::ConfigError("cannot write '" + path + "'");
  out << text;
}

void write_json(const Options &opt, const json &j) { write_text(opt.output, j.dump(2) + "\n"); }

/// "1,2,4" -> {0,1,3}
std::vector<std::size_t> parse_indices(const std::string &text, std::size_t expected) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    cell = gti::detail::trim(cell);
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || v == 0)
      throw gti::ConfigError("'" + text + "' is not a list of 1-based indices");
    out.push_back(v - 1);
  }
  if (out.size() != expected)
    throw gti::ConfigError("expected " + std::to_string(expected) + " indices, got '" + text + "'");
  return out;
}

std::array<std::size_t, 3> as_trio(const std::vector<std::size_t> &v) { return {v[0], v[1], v[2]}; }

gti::DecisionCounts without_truth(const gti::DecisionCounts &c) {
  return c.by_truth ? gti::marginalize_truth(c) : c;
}

gti::DecisionCounts load_counts(const std::string &path) { return gti::json_io::counts_from_json(read_json(path)); }

gti::DecisionCounts trio_counts(const gti::DecisionCounts &counts, const std::string &trio) {
  if (!trio.empty())
    return gti::project_subset(counts, parse_indices(trio, 3));
  if (counts.n != 3)
    throw gti::ConfigError("counts cover " + std::to_string(counts.n) +
                           " classifiers; choose three with --trio i,j,k");
  return counts;
}

template <gti::Scalar T>
int solve_command(const Options &opt, const gti::DecisionCounts &counts, std::array<std::size_t, 3> trio,
                  const std::string &policy) {
  const auto solution = gti::solve_trio<T>(without_truth(counts));
  std::optional<std::size_t> selected;
  if (solution.solved() && policy == "mean-acc")
    selected = gti::mean_accuracy_policy<T>(solution.branches);
  write_json(opt, gti::json_io::solution_to_json(solution, trio, selected, opt.digits));
  for (const auto &w : solution.warnings)
    std::cerr << "warning: " << w << '\n';
  if (!solution.solved()) {
    std::cerr << "gti: " << gti::to_string(solution.outcome) << ": " << solution.detail << '\n';
    return kExitDegenerate;
  }
  if (policy == "mean-acc" && !selected) {
    std::cerr << "gti: no branch lies inside [0,1]\n";
    return kExitDegenerate;
  }
  return kExitOk;
}

json detection_entry(const gti::DecisionCounts &counts, std::array<std::size_t, 3> trio, int digits) {
  json j = gti::json_io::detection_to_json(gti::detect_trio(gti::project_subset(counts, trio)), digits);
  j["trio"] = json::array({trio[0] + 1, trio[1] + 1, trio[2] + 1});
  return j;
}

json detect_all(const gti::DecisionCounts &counts, int digits) {
  json trios = json::array();
  for (std::size_t i = 0; i < counts.n; ++i)
    for (std::size_t j = i + 1; j < counts.n; ++j)
      for (std::size_t k = j + 1; k < counts.n; ++k)
        trios.push_back(detection_entry(counts, {i, j, k}, digits));
  return trios;
}

json recovery_summary(const std::vector<gti::ScatterRow> &rows, int digits) {
  json out = json::object();
  for (gti::Label l : gti::kLabels) {
    double sum = 0.0, worst = 0.0;
    std::size_t k = 0;
    for (const auto &r : rows)
      if (r.label == l) {
        const double e = std::abs(r.recovered_accuracy - r.truth_accuracy);
        sum += e;
        worst = std::max(worst, e);
        ++k;
      }
    out[std::string(1, gti::symbol(l))] =
        json{{"estimates", k},
             {"mean_abs_error", gti::json_io::rounded(k ? sum / static_cast<double>(k) : 0.0, digits)},
             {"max_abs_error", gti::json_io::rounded(worst, digits)}};
  }
  return out;
}

json published_check(const gti::fixtures::Fixture &f, const gti::CorrelationSummary &summary, bool &all_match) {
  struct Item {
    const char *name;
    double computed;
    gti::fixtures::DisplayedValue published;
  };
  const auto &a = summary[gti::Label::alpha];
  const auto &b = summary[gti::Label::beta];
  const Item items[] = {{"alpha_mean", gti::to_double(a.mean), f.published.alpha_mean},
                        {"alpha_stddev", a.stddev, f.published.alpha_stddev},
                        {"beta_mean", gti::to_double(b.mean), f.published.beta_mean},
                        {"beta_stddev", b.stddev, f.published.beta_stddev}};
  json out = json::array();
  all_match = true;
  for (const auto &it : items) {
    const bool ok = std::abs(it.computed - it.published.value) <= it.published.half_unit;
    all_match = all_match && ok;
    out.push_back(json{{"quantity", it.name},
                       {"computed", gti::json_io::rounded(it.computed, 8)},
                       {"published", it.published.value},
                       {"tolerance", it.published.half_unit},
                       {"match", ok}});
  }
  return out;
}

Eigen::MatrixXd read_matrix(const json &j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd m(rows, rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto &row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != rows)
      throw gti::ParseError("covariance must be a square array of arrays");
    for (Eigen::Index c = 0; c < rows; ++c)
      m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

std::size_t read_items(const json &params, std::optional<std::size_t> override_items) {
  if (override_items)
    return *override_items;
  if (!params.contains("items"))
    throw gti::ParseError("params need \"items\" (or pass --items)");
  return params.at("items").get<std::size_t>();
}

std::string simulate_classifiers(const json &params, std::uint64_t seed, std::optional<std::size_t> items_opt) {
  const std::size_t items = read_items(params, items_opt);
  const gti::EnsembleStats stats = gti::json_io::stats_from_json(params);
  gti::VoteMatrix votes;
  if (params.contains("moments")) {
    // Any correlation structure must first be a valid pair of pattern distributions.
    (void)gti::expected_counts(stats);
    votes = gti::sample_from_pattern_distributions(gti::pattern_distributions(stats),
                                                   gti::to_double(stats.prevalence), items, seed);
  } else {
    std::vector<double> alpha, beta;
    for (const auto &v : stats.acc_alpha)
      alpha.push_back(gti::to_double(v));
    for (const auto &v : stats.acc_beta)
      beta.push_back(gti::to_double(v));
    votes = gti::sample_independent_classifiers(gti::to_double(stats.prevalence), alpha, beta, items, seed);
  }
  return gti::format_votes(votes);
}

std::string simulate_regressors(const json &params, std::uint64_t seed, std::optional<std::size_t> items_opt) {
  const std::size_t items = read_items(params, items_opt);
  gti::TruthSpec truth;
  if (params.contains("truth")) {
    truth.mean = params.at("truth").value("mean", 0.0);
    truth.stddev = params.at("truth").value("stddev", 1.0);
  }
  const std::string mode = params.value("mode", "gaussian");
  if (mode != "gaussian" && mode != "orthogonal")
    throw gti::ParseError("\"mode\" must be gaussian or orthogonal");
  const auto panel = gti::sample_regressor_panel(truth, read_matrix(params.at("covariance")), items, seed,
                                                 mode == "orthogonal" ? gti::NoiseMode::orthogonal
                                                                      : gti::NoiseMode::gaussian);
  return gti::format_predictions(panel);
}

constexpr const char *kFormats = R"(Formats:
  votes CSV        header c1,...,cn[,truth]; one item per row; cells are label
                   symbols mapped by --labels (default 0=a,1=b).
  counts JSON      {"n":3,"total":M,"counts":{"aab":12,...},
                    "by_truth":{"a":{...},"b":{...}}}; patterns list classifier 1
                   first; "by_truth" is optional. Counters are integers (or
                   integer strings when large).
  stats JSON       {"prevalence":"2/5","acc_alpha":[...],"acc_beta":[...],
                    "moments":{"a:1,2":"1/50",...}}; numbers may be fractions
                   "p/q", decimal strings, JSON numbers or {"exact":"p/q"}.
                   Unlisted moments are zero.
  predictions CSV  header r1,...,rn[,truth]; one real per cell.
  classifier params  stats JSON plus "items"; with "moments" the sample is drawn
                   from the implied pattern distributions, otherwise from
                   independent classifiers.
  regressor params {"items":M,"truth":{"mean":0,"stddev":1},
                    "covariance":[[...]],"mode":"gaussian"|"orthogonal"}
  scatter CSV      classifier,label,trio,truth_accuracy,recovered_accuracy
Exact values are written as {"exact":"p/q","decimal":x}.
Exit codes: 0 ok, 2 input error, 3 degenerate or infeasible sample.)";

} // namespace

int main(int argc, char **argv) {
  using namespace gti;
  CLI::App app{"Ground-truth-free evaluation of classifier and regressor ensembles"};
  app.footer(kFormats);
  app.require_subcommand(1);
  Options opt;
  app.add_option("--digits", opt.digits, "Significant digits of decimal output")
      ->check(CLI::Range(1, 17))
      ->capture_default_str();

  int exit_code = kExitOk;
  auto with_output = [&](CLI::App *cmd) {
    cmd->add_option("-o,--output", opt.output, "Output file ('-' for stdout)")->capture_default_str();
  };

  // tally
  auto *tally = app.add_subcommand("tally", "Count decision events in a votes CSV");
  std::string votes_path, truth_col, labels_spec = "0=a,1=b";
  tally->add_option("--votes", votes_path, "Votes CSV ('-' for stdin)")->required();
  tally->add_option("--truth-col", truth_col, "Name of the truth column");
  tally->add_option("--labels", labels_spec, "Symbol mapping for alpha and beta")->capture_default_str();
  with_output(tally);
  tally->callback([&] {
    const auto labels = LabelMap::parse(labels_spec);
    auto votes = parse_votes(read_file(votes_path),
                             truth_col.empty() ? std::nullopt : std::optional<std::string>(truth_col), labels);
    write_json(opt, json_io::counts_to_json(tally_counts(votes)));
  });

  // stats
  auto *stats_cmd = app.add_subcommand("stats", "Ground-truth statistics from counts split by true label");
  std::string counts_path;
  std::optional<std::size_t> max_order;
  stats_cmd->add_option("--counts", counts_path, "Counts JSON with by_truth")->required();
  stats_cmd->add_option("--max-order", max_order, "Highest moment order to compute");
  with_output(stats_cmd);
  stats_cmd->callback([&] {
    write_json(opt, json_io::stats_to_json(stats_from_truth_counts(load_counts(counts_path), max_order),
                                           opt.digits));
  });

  // forward
  auto *forward = app.add_subcommand("forward", "Expected decision counts for given statistics");
  std::string stats_path, total_text;
  forward->add_option("--stats", stats_path, "Stats JSON")->required();
  forward->add_option("--total", total_text, "Sample size (default: smallest total giving integral counts)");
  with_output(forward);
  forward->callback([&] {
    const auto stats = json_io::stats_from_json(read_json(stats_path));
    const Rational total = total_text.empty() ? Rational(minimal_integral_total(stats)) : parse_rational(total_text);
    write_json(opt, json_io::counts_to_json(expected_counts(stats, total)));
  });

  // solve
  auto *solve = app.add_subcommand("solve", "Solve the independent trio system");
  std::string trio_text, policy = "mean-acc";
  bool exact = false;
  solve->add_option("--counts", counts_path, "Counts JSON")->required();
  solve->add_option("--trio", trio_text, "Three 1-based classifier indices, e.g. 1,2,4");
  solve->add_flag("--exact", exact, "Exact rational arithmetic");
  solve->add_option("--branch-policy", policy, "Branch selection: mean-acc or none")
      ->check(CLI::IsMember({"mean-acc", "none"}))
      ->capture_default_str();
  with_output(solve);
  solve->callback([&] {
    const auto all = load_counts(counts_path);
    const auto counts = trio_counts(all, trio_text);
    const auto trio = trio_text.empty() ? std::array<std::size_t, 3>{0, 1, 2} : as_trio(parse_indices(trio_text, 3));
    exit_code = exact ? solve_command<Rational>(opt, counts, trio, policy)
                      : solve_command<double>(opt, counts, trio, policy);
  });

  // detect
  auto *detect = app.add_subcommand("detect", "Exact independence test on trios");
  detect->add_option("--counts", counts_path, "Counts JSON")->required();
  detect->add_option("--trio", trio_text, "Test only this trio (default: every trio)");
  with_output(detect);
  detect->callback([&] {
    const auto counts = without_truth(load_counts(counts_path));
    if (counts.n < 3)
      throw ConfigError("detection needs at least three classifiers");
    if (!trio_text.empty())
      write_json(opt, detection_entry(counts, as_trio(parse_indices(trio_text, 3)), opt.digits));
    else if (counts.n == 3)
      write_json(opt, detection_entry(counts, {0, 1, 2}, opt.digits));
    else
      write_json(opt, json{{"trios", detect_all(counts, opt.digits)}});
  });

  // consistency
  auto *consistency = app.add_subcommand("consistency", "Four-trio consistency of a four-classifier ensemble");
  std::string truth_counts_path, scatter_path;
  consistency->add_option("--counts", counts_path, "Counts JSON for four classifiers")->required();
  consistency->add_option("--truth-counts", truth_counts_path,
                          "Counts JSON with by_truth, for comparison with ground truth");
  consistency->add_option("--scatter", scatter_path, "Write the scatter CSV here ('-' for stdout)");
  consistency->add_flag("--exact", exact, "Exact rational arithmetic (requires rational roots)");
  with_output(consistency);
  consistency->callback([&] {
    const auto counts = load_counts(counts_path);
    std::optional<DecisionCounts> truth;
    if (!truth_counts_path.empty())
      truth = load_counts(truth_counts_path);
    else if (counts.by_truth)
      truth = counts;
    if (!scatter_path.empty() && !truth)
      throw ConfigError("--scatter needs --truth-counts or counts with by_truth");
    auto run = [&](auto tag) {
      using T = decltype(tag);
      const auto report = four_trio_consistency<T>(counts);
      json j = json_io::consistency_to_json(report, opt.digits);
      if (truth) {
        const auto stats = stats_from_truth_counts(*truth, 2);
        const auto rows = recovery_scatter(report, stats);
        j["recovery"] = recovery_summary(rows, opt.digits);
        if (!scatter_path.empty())
          write_text(scatter_path, format_scatter_csv(rows));
      }
      if (scatter_path != "-" || opt.output != "-")
        write_json(opt, j);
    };
    if (exact)
      run(Rational{});
    else
      run(double{});
  });

  // eval-fixture
  auto *eval = app.add_subcommand("eval-fixture", "Evaluate a bundled benchmark fixture");
  std::string fixture_name;
  eval->add_option("--name", fixture_name, "twonorm, spambase or mushroom")->required();
  with_output(eval);
  eval->callback([&] {
    const auto &f = fixtures::fixture(fixture_name);
    const auto counts = fixtures::fixture_counts(f);
    const auto stats = stats_from_truth_counts(counts);
    const auto summary = summarize_pairwise(stats);
    bool all_match = false;
    const json published = published_check(f, summary, all_match);
    const auto report = four_trio_consistency<double>(marginalize_truth(counts));
    const auto rows = recovery_scatter(report, stats);
    json names = json::array();
    for (const auto &c : f.classifiers)
      names.push_back(c);
    json out{{"fixture", f.name},
             {"classifiers", names},
             {"orientation", f.flip_votes ? "vote 1 is alpha" : "vote 0 is alpha"},
             {"mass", json{{"a", json_io::count_value(counts.label_total(Label::alpha))},
                           {"b", json_io::count_value(counts.label_total(Label::beta))},
                           {"total", json_io::count_value(counts.total)}}},
             {"ground_truth", json_io::stats_to_json(stats, opt.digits)},
             {"published_comparison", published},
             {"published_match", all_match},
             {"consistency", json_io::consistency_to_json(report, opt.digits)},
             {"recovery", recovery_summary(rows, opt.digits)},
             {"detection", detect_all(marginalize_truth(counts), opt.digits)}};
    write_json(opt, out);
    std::cerr << f.name << ": correlation summary " << (all_match ? "matches" : "DOES NOT match")
              << " the published values\n";
  });

  // export-fixture
  auto *export_cmd = app.add_subcommand("export-fixture", "Write a bundled fixture as votes CSV or counts JSON");
  std::string export_format = "counts";
  export_cmd->add_option("--name", fixture_name, "twonorm, spambase or mushroom")->required();
  export_cmd->add_option("--format", export_format, "counts or votes")
      ->check(CLI::IsMember({"counts", "votes"}))
      ->capture_default_str();
  with_output(export_cmd);
  export_cmd->callback([&] {
    const auto &f = fixtures::fixture(fixture_name);
    if (export_format == "votes")
      write_text(opt.output, format_votes(fixtures::fixture_votes(f)));
    else
      write_json(opt, json_io::counts_to_json(fixtures::fixture_counts(f)));
  });

  // regress
  auto *regress = app.add_subcommand("regress", "Error variances and consistency tests for regressors");
  std::string preds_path;
  bool consistency_mode = false;
  std::optional<double> threshold;
  regress->add_option("--preds", preds_path, "Predictions CSV")->required();
  regress->add_option("--truth-col", truth_col, "Name of the truth column");
  auto *trio_opt = regress->add_option("--trio", trio_text, "Three 1-based regressor indices");
  auto *cons_opt = regress->add_flag("--consistency", consistency_mode, "Pairing-moment test over all 4-subsets");
  trio_opt->excludes(cons_opt);
  regress->add_option("--threshold", threshold, "Normalised moment threshold (default 5/sqrt(M))");
  with_output(regress);
  regress->callback([&] {
    if (trio_text.empty() && !consistency_mode)
      throw ConfigError("regress needs --trio i,j,k or --consistency");
    const auto panel = parse_predictions(read_file(preds_path), truth_col.empty()
                                                                    ? std::nullopt
                                                                    : std::optional<std::string>(truth_col));
    json out = consistency_mode
                   ? json_io::mixed_moment_to_json(mixed_moment_test(panel, threshold), opt.digits)
                   : json_io::covariance_estimate_to_json(
                         solve_trio_regressors(panel, as_trio(parse_indices(trio_text, 3))), opt.digits);
    if (panel.truth) {
      const auto eps = error_covariance_truth(panel);
      out["truth_error_covariance"] = json{{"raw", json_io::matrix_to_json(eps.raw, opt.digits)},
                                           {"demeaned", json_io::matrix_to_json(eps.demeaned, opt.digits)}};
    }
    write_json(opt, out);
  });

  // simulate
  auto *simulate = app.add_subcommand("simulate", "Generate a seeded synthetic sample");
  std::string sim_kind, params_path;
  std::uint64_t seed = 0;
  std::optional<std::size_t> items;
  simulate->add_option("kind", sim_kind, "classifier or regressor")
      ->required()
      ->check(CLI::IsMember({"classifier", "regressor"}));
  simulate->add_option("--params", params_path, "Parameter JSON")->required();
  simulate->add_option("--seed", seed, "Random seed")->required();
  simulate->add_option("--items", items, "Number of items (overrides params)");
  with_output(simulate);
  simulate->callback([&] {
    const json params = read_json(params_path);
    try {
      write_text(opt.output, sim_kind == "classifier" ? simulate_classifiers(params, seed, items)
                                                      : simulate_regressors(params, seed, items));
    } catch (const json::exception &e) {
      throw ParseError(std::string("invalid params: ") + e.what());
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitInput;
  } catch (const DegenerateError &e) {
    std::cerr << "gti: degenerate: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const InfeasibleError &e) {
    std::cerr << "gti: infeasible: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const Error &e) {
    std::cerr << "gti: " << e.what() << '\n';
    return kExitInput;
  } catch (const json::exception &e) {
    std::cerr << "gti: " << e.what() << '\n';
    return kExitInput;
  }
  return exit_code;
}
