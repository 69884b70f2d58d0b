#pragma once

// Run harness shared by the CLI and the acceptance suite: one run executes
// an algorithm on a generated instance and checks it against the oracle.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccsel/oracle.hpp"
#include "ccsel/runtime.hpp"
#include "ccsel/selection.hpp"

namespace ccsel {

enum class Algorithm { kMom, kRs, kOpt, kMulti };

Algorithm parse_algorithm(const std::string& text);
const char* to_string(Algorithm algorithm);
const char* to_string(SortMode mode);
SortMode parse_sort_mode(const std::string& text);

/// Bad flag combinations; the CLI maps these to exit status 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  Algorithm algorithm = Algorithm::kOpt;
  std::uint64_t n = 0;
  std::uint32_t p = 2;
  std::optional<std::uint64_t> k;                     // single-rank algorithms
  std::optional<std::vector<std::uint64_t>> ranks;    // multi
  std::uint64_t r = 1;                                // random ranks when none are given
  std::uint32_t phi = 1;
  std::uint32_t bandwidth = 1;
  SortMode sort_mode = SortMode::kCharged;
  std::uint32_t c_sort = 3;
  Distribution distribution = Distribution::kUniformRandom;
  std::uint64_t distinct = 4;
  std::uint64_t seed = 1;
  bool strict = true;
  bool check_invariants = true;
  bool record_trace = false;
  bool parallel_nodes = false;
};

struct RunRecord {
  std::string algorithm;
  std::uint64_t n = 0, p = 0, r = 0, phi = 0, bandwidth = 0;
  std::string sort_mode;
  std::uint64_t c_sort = 0, seed = 0;
  std::uint64_t rounds_total = 0, main_phases = 0, preprocess_phases = 0, max_ops_per_node = 0;
  bool correct = false;
};

struct RunOutcome {
  RunRecord record;
  SelectionResult result;
  std::vector<std::string> trace;
  /// Empty when the run is correct; otherwise names the failed check.
  std::string failure;
};

/// Throws UsageError for invalid configurations. Invariant and bandwidth
/// violations are reported through RunOutcome::failure.
RunOutcome run_one(const RunConfig& config);

std::string csv_header();
std::string to_csv_row(const RunRecord& record);
/// Appends rows, writing the header first when the file is new or empty.
void append_csv(const std::string& path, const std::vector<RunRecord>& records);

/// Largest main-loop phase count the tower analysis allows for this run.
std::uint64_t main_phase_bound(const RunConfig& config);

struct SweepConfig {
  std::vector<std::uint32_t> ps = {4, 8, 16, 32};
  std::vector<std::uint64_t> n_factors = {1, 4, 16};  // n = factor * p^2
  std::vector<std::uint64_t> rs = {1, 2, 8};
  std::vector<std::uint32_t> phis = {1, 2, 4};
  std::vector<std::string> distributions = {"uniform"};
  std::vector<Algorithm> algorithms = {Algorithm::kMom, Algorithm::kRs, Algorithm::kOpt, Algorithm::kMulti};
  std::uint64_t repeats = 1;
  std::uint64_t seed_base = 1;
  std::uint32_t bandwidth = 1;
  SortMode sort_mode = SortMode::kCharged;
  std::uint32_t c_sort = 3;
  bool strict = true;
};

/// Grid cells in their fixed output order.
std::vector<RunConfig> sweep_grid(const SweepConfig& sweep);

/// Runs every cell (in parallel when OpenMP is available) and returns the
/// outcomes in grid order.
std::vector<RunOutcome> run_sweep(const std::vector<RunConfig>& cells);

/// Phases against their bound and ops / (n/p * log2(r+1)) per row.
void print_summary(std::ostream& os, const std::vector<RunConfig>& cells, const std::vector<RunOutcome>& outcomes);

}  // namespace ccsel
