#pragma once

// Distributed selection and multiple selection as round programs over the
// clique runtime:
//
//   mom_select      parallel median of medians, one group per node
//   rs_select       selection by regular sampling, sample base 2^phi
//   select_optimal  a bounded number of median-of-medians phases followed by
//                   regular sampling with the original size budget
//   multiselect     regular sampling with up to |K| active intervals
//
// All of them leave the clique's rounds and per-node operation counts in the
// returned metrics, together with a per-phase log that the checkers below
// replay.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ccsel/element.hpp"
#include "ccsel/runtime.hpp"
#include "ccsel/sampling.hpp"

namespace ccsel {

struct SelectionOptions {
  /// Verify load balance, element conservation, interval-count conservation
  /// and the per-phase shrink bounds after every phase; a failure throws
  /// InvariantViolation.
  bool check_invariants = false;
};

enum class PhaseKind { kMedianOfMedians, kRegularSampling, kMultiPreprocess, kMultiMain };

const char* to_string(PhaseKind kind);

struct PhaseSchedule {
  std::uint64_t phase_index = 0;
  std::uint64_t set_size = 0;     // |S_i|
  std::uint64_t sample_size = 0;  // h_i, 0 for median-of-medians phases
  std::uint64_t base = 0;         // sampling base, 0 for median-of-medians phases
};

struct PhaseRecord {
  PhaseKind kind = PhaseKind::kMedianOfMedians;
  PhaseSchedule schedule;
  std::uint64_t next_size = 0;     // |S_{i+1}|
  std::uint64_t merged_size = 0;   // size of the merged sample actually broadcast
  std::uint64_t per_node_gap = 0;  // max local regular-sample gap
  std::uint64_t rounds = 0;
  std::uint64_t max_ops = 0;  // largest per-node operation count spent in the phase
  RankSet ranks_before;       // relative to S_i
  RankSet ranks_after;        // relative to S_{i+1}
  IntervalCounts global_counts;
  std::vector<ActiveInterval> intervals;
};

struct SelectionResult {
  std::vector<std::pair<std::uint64_t, TaggedElement>> answers;  // (rank, element), ascending ranks
  CliqueMetrics metrics;
  std::vector<PhaseRecord> phase_log;
  std::uint64_t preprocess_phases = 0;
  std::uint64_t main_phases = 0;
  bool delegated_to_sort = false;
};

/// h_i = min(|S_i|, h_cap, max(2, base^floor(n0/|S_i|))), overflow-safe.
std::uint64_t phase_sample_size(std::uint64_t base, std::uint64_t n0, std::uint64_t set_size,
                                std::uint64_t h_cap);

/// Main loops run while |S| exceeds floor(n0 / log2 n0).
std::uint64_t sampling_threshold(std::uint64_t n0);

/// Number of median-of-medians phases select_optimal runs before handing
/// over: ceil(log_{4/3} max(2, log*(n))).
std::uint64_t optimal_preprocess_phases(std::uint64_t n);

/// Number of sampling preprocessing phases multiselect runs for r ranks:
/// ceil(log_{r+1} max(2, log*_{r+1}(n))).
std::uint64_t multiselect_preprocess_phases(std::uint64_t r, std::uint64_t n);

/// Restores | |S_v| - |S_u| | <= 1 in two rounds (more when a link must carry
/// more than B words in the second round).
void redistribute(Clique& clique);

SelectionResult mom_select(Clique& clique, std::uint64_t k, const SelectionOptions& options = {});

/// `phi` >= 1 raises the sampling base to 2^phi.
SelectionResult rs_select(Clique& clique, std::uint64_t k, std::uint32_t phi = 1,
                          const SelectionOptions& options = {});

SelectionResult select_optimal(Clique& clique, std::uint64_t k, const SelectionOptions& options = {});

SelectionResult multiselect(Clique& clique, const RankSet& ranks, const SelectionOptions& options = {});

struct CheckResult {
  bool ok = true;
  std::string detail;
};

/// Every median-of-medians phase satisfies 4|S_{i+1}| <= 3|S_i| + 4p.
CheckResult mom_phase_shrink_check(const std::vector<PhaseRecord>& phase_log, std::uint64_t p);

/// Replays every sampling phase: each rank must fall inside the cumulative
/// count bracket of its interval with the recorded residual, the residuals
/// must map to the next phase's ranks, and every answer must lie inside each
/// interval its rank passed through.
CheckResult rank_of_boundary_consistency(const SelectionResult& result);

}  // namespace ccsel
