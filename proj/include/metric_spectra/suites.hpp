#ifndef METRIC_SPECTRA_SUITES_HPP
#define METRIC_SPECTRA_SUITES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace mspec {

// One randomized audit: trials fan out over a worker pool with per-trial
// seeds derived from the master seed; aggregation is in trial order so the
// report bytes depend only on the configuration and the seed.
struct SuiteResult {
  std::string name;
  int trials = 0;
  std::uint64_t seed = 0;
  int violations = 0;
  double worst_margin = 0.0;
  nlohmann::json detail;                  // per-suite summary numbers
  std::vector<nlohmann::json> failures;   // serialized offending instances
  bool ok() const { return violations == 0; }
  nlohmann::json to_json() const;
};

// eigenvalue bound on random trees and cyclic graphs with signed weights
SuiteResult bounds_suite(int tree_trials, int cyclic_trials, int n_max, std::uint64_t seed);
// balanced-partition certificates over random trees, n in [1, n_range]
SuiteResult partition_suite(int tree_trials, int n_range, std::uint64_t seed);
// step-approximation bound over random graphs and test functions
SuiteResult approx_suite(int graph_trials, int n_range, int fn_trials, std::uint64_t seed);
// superadditivity + monotonicity margins over random subtree partitions
SuiteResult superadditivity_suite(int trials, std::uint64_t seed);
// half-inverse composition singular-number bound over random amplitudes
SuiteResult snumbers_suite(int trials, std::uint64_t seed);
// cycle cutting: length preservation, cut count, pullback integrals
SuiteResult cycles_suite(int trials, std::uint64_t seed);
// scaling homogeneity of the spectrum and the V == 1 lower bound
SuiteResult scaling_suite(int trials, std::uint64_t seed);

SuiteResult run_suite(const std::string& name, int trials, std::uint64_t seed);

}  // namespace mspec

#endif
