// Runs the four-trio test on a bundled fixture and compares the recovered
// accuracies with the ones computed from the true labels.
//
//   fixture_consistency [twonorm|spambase|mushroom]

#include <gti/gti.hpp>

#include <iostream>

int main(int argc, char **argv) {
  const std::string name = argc > 1 ? argv[1] : "twonorm";
  try {
    const auto &f = gti::fixtures::fixture(name);
    const auto counts = gti::fixtures::fixture_counts(f);
    const auto truth = gti::stats_from_truth_counts(counts);

    // Only the label-free counts go to the solver.
    const auto report = gti::four_trio_consistency<double>(gti::marginalize_truth(counts));

    std::cout << name << ": " << report.solvable_trios << " of 4 trios solvable\n";
    std::cout << "prevalence truth " << gti::format_decimal(gti::to_double(truth.prevalence)) << ", estimates";
    for (const auto &[trio, phi] : report.prevalence.estimates)
      std::cout << ' ' << gti::format_decimal(phi);
    std::cout << '\n';
    for (std::size_t i = 0; i < 4; ++i)
      for (gti::Label l : gti::kLabels) {
        const auto &s = report.accuracy[i][gti::index_of(l)];
        std::cout << f.classifiers[i] << ' ' << gti::symbol(l) << ": truth "
                  << gti::format_decimal(gti::to_double(truth.accuracies(l)[i])) << ", spread "
                  << gti::format_decimal(s.spread) << '\n';
      }
  } catch (const gti::Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
