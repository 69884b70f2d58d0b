#pragma once

// Sequential building blocks shared by the distributed algorithms: multi-rank
// selection, regular samples, sample merging, interval counting and the
// iterated-logarithm helpers that predict phase counts.
//
// Every function that compares keys takes an optional `ops` counter and adds
// one unit per comparison.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ccsel/element.hpp"

namespace ccsel {

/// Sorted, strictly increasing, 1-based ranks.
class RankSet {
 public:
  RankSet() = default;
  /// Throws RankError unless `ranks` is strictly increasing and starts at >= 1.
  explicit RankSet(std::vector<std::uint64_t> ranks);

  /// Throws RankError if the largest rank exceeds `n`.
  void check_within(std::uint64_t n) const;

  std::span<const std::uint64_t> ranks() const { return ranks_; }
  std::size_t size() const { return ranks_.size(); }
  bool empty() const { return ranks_.empty(); }
  std::uint64_t operator[](std::size_t i) const { return ranks_[i]; }
  std::uint64_t max() const { return ranks_.back(); }

  friend bool operator==(const RankSet&, const RankSet&) = default;

 private:
  std::vector<std::uint64_t> ranks_;
};

struct RegularSample {
  std::vector<TaggedElement> items;  // strictly increasing
  std::uint64_t source_size = 0;
  std::uint64_t h = 0;
  /// Upper bound on the number of source elements in (items[j-1], items[j]]
  /// (and before items[0]); nothing follows the last item.
  std::uint64_t gap_bound = 0;
};

/// Counts of a set split by sample boundaries y_1 < ... < y_h into
/// I_0 = (-inf, y_1), I_j = [y_j, y_{j+1}), I_h = [y_h, +inf).
struct IntervalCounts {
  std::vector<TaggedElement> boundaries;
  std::vector<std::uint64_t> counts;  // boundaries.size() + 1 entries

  std::uint64_t total() const;
};

struct ActiveInterval {
  std::size_t index = 0;  // j of I_j
  std::optional<TaggedElement> low;   // nullopt = -inf
  std::optional<TaggedElement> high;  // nullopt = +inf
  std::uint64_t offset = 0;           // elements left of the interval
  std::uint64_t size = 0;
  RankSet residual_ranks;  // ranks relative to the interval

  bool contains(const TaggedElement& z) const {
    return (!low || !(z < *low)) && (!high || z < *high);
  }
};

/// Elements of `set` at the requested ranks, in rank order. Partitions around
/// a median-of-three pivot and recurses only into sides that still hold
/// requested ranks; past a depth of 4*log2|S| the pivot switches to median of
/// medians, which bounds the worst case at O(|S| log(r+1)) comparisons.
std::vector<TaggedElement> local_multiselect(std::span<const TaggedElement> set, const RankSet& ranks,
                                             std::uint64_t* ops = nullptr);

/// Elements at ranks ceil(j*m/h) for j = 1..h, m = |set|. The maximum is always
/// included and gap_bound = ceil(m/h).
RegularSample local_regular_sample(std::span<const TaggedElement> set, std::uint64_t h,
                                   std::uint64_t* ops = nullptr);

/// Regular sample of size h of the sorted union of p local samples. The
/// result certifies gap 3*p*per_node_gap against the union of the sets the
/// local samples were drawn from.
RegularSample merge_samples(std::span<const TaggedElement> merged_sorted, std::uint64_t h,
                            std::uint64_t per_node_gap, std::uint64_t p);

IntervalCounts count_in_intervals(std::span<const TaggedElement> set,
                                  std::span<const TaggedElement> boundaries, std::uint64_t* ops = nullptr);

/// The interval containing each requested rank, deduplicated, with the
/// residual ranks it must answer.
std::vector<ActiveInterval> find_active_intervals(const IntervalCounts& global_counts, const RankSet& ranks);

enum class TowerMode {
  kPower,        // f_0 = 1, f_i = b^{f_{i-1}}
  kMultiselect,  // f_0 = b, f_i = b^{f_{i-1} - 1}
};

inline constexpr std::uint64_t kUnbounded = std::numeric_limits<std::uint64_t>::max();

/// min{i : f_i >= n} for the chosen tower recurrence. Returns kUnbounded when
/// the sequence stops growing below n (kMultiselect with b = 2).
std::uint64_t log_star(TowerMode mode, std::uint64_t base, std::uint64_t n);

/// Tower bound for the multiselect main loop with r ranks: the shifted
/// recurrence with base r+1, or the base-2 power tower when that recurrence
/// degenerates (r = 1).
std::uint64_t multiselect_log_star(std::uint64_t r, std::uint64_t n);

/// Smallest t >= 0 with base^t >= x (base >= 2).
std::uint64_t ceil_log(std::uint64_t base, std::uint64_t x);

/// Smallest t >= 0 with (4/3)^t >= x.
std::uint64_t ceil_log_four_thirds(std::uint64_t x);

/// base^exp, saturating at `cap`.
std::uint64_t saturating_pow(std::uint64_t base, std::uint64_t exp, std::uint64_t cap);

}  // namespace ccsel
