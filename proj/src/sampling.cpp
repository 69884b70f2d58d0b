#include "ccsel/sampling.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <string>
#include <utility>

#include "ccsel/counting.hpp"
#include "ccsel/errors.hpp"

namespace ccsel {

RankSet::RankSet(std::vector<std::uint64_t> ranks) : ranks_(std::move(ranks)) {
  for (std::size_t i = 0; i < ranks_.size(); ++i) {
    if (ranks_[i] < 1) throw RankError("ranks are 1-based, got 0");
    if (i > 0 && ranks_[i] <= ranks_[i - 1]) {
      throw RankError("ranks must be strictly increasing at position " + std::to_string(i));
    }
  }
}

void RankSet::check_within(std::uint64_t n) const {
  if (!ranks_.empty() && ranks_.back() > n) {
    throw RankError("rank " + std::to_string(ranks_.back()) + " exceeds set size " + std::to_string(n));
  }
}

std::uint64_t IntervalCounts::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

namespace {

constexpr std::size_t kSmallRange = 16;

class MultiSelector {
 public:
  MultiSelector(std::span<TaggedElement> data, std::uint64_t* ops) : data_(data), less_{ops} {}

  // Places the element of absolute position `pos[i]` at that position for
  // every requested position in [lo, hi).
  void select(std::size_t lo, std::size_t hi, std::span<const std::size_t> pos, unsigned depth_left) {
    while (!pos.empty()) {
      if (hi - lo <= kSmallRange) {
        insertion_sort(lo, hi);
        return;
      }
      const std::size_t pivot = depth_left == 0 ? mom_pivot(lo, hi) : median_of_three(lo, hi);
      const std::size_t q = partition(lo, hi, pivot);
      const auto split_lo = std::lower_bound(pos.begin(), pos.end(), q);
      const auto split_hi = std::upper_bound(split_lo, pos.end(), q);
      auto left = pos.subspan(0, static_cast<std::size_t>(split_lo - pos.begin()));
      auto right = pos.subspan(static_cast<std::size_t>(split_hi - pos.begin()));
      if (depth_left > 0) --depth_left;
      // Recurse into the smaller rank list, loop on the larger.
      if (left.size() < right.size()) {
        select(lo, q, left, depth_left);
        lo = q + 1;
        pos = right;
      } else {
        select(q + 1, hi, right, depth_left);
        hi = q;
        pos = left;
      }
    }
  }

 private:
  bool less(std::size_t a, std::size_t b) const { return less_(data_[a], data_[b]); }

  void insertion_sort(std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo + 1; i < hi; ++i) {
      for (std::size_t j = i; j > lo && less(j, j - 1); --j) std::swap(data_[j], data_[j - 1]);
    }
  }

  std::size_t median_of_three(std::size_t lo, std::size_t hi) const {
    std::size_t a = lo, b = lo + (hi - lo) / 2, c = hi - 1;
    if (less(b, a)) std::swap(a, b);
    if (less(c, b)) {
      b = c;
      if (less(b, a)) b = a;
    }
    return b;
  }

  // Median of medians of groups of five; the group medians are gathered at
  // the front of the range and selected recursively.
  std::size_t mom_pivot(std::size_t lo, std::size_t hi) {
    std::size_t groups = 0;
    for (std::size_t g = lo; g < hi; g += 5) {
      const std::size_t end = std::min(g + 5, hi);
      insertion_sort(g, end);
      std::swap(data_[lo + groups], data_[g + (end - g - 1) / 2]);
      ++groups;
    }
    const std::size_t mid = lo + (groups - 1) / 2;
    const std::size_t target[] = {mid};
    select(lo, lo + groups, target, 0);
    return mid;
  }

  // Returns the final position of the pivot.
  std::size_t partition(std::size_t lo, std::size_t hi, std::size_t pivot) {
    std::swap(data_[pivot], data_[hi - 1]);
    const TaggedElement value = data_[hi - 1];
    std::size_t store = lo;
    for (std::size_t i = lo; i + 1 < hi; ++i) {
      if (less_(data_[i], value)) std::swap(data_[i], data_[store++]);
    }
    std::swap(data_[store], data_[hi - 1]);
    return store;
  }

  std::span<TaggedElement> data_;
  CountingLess less_;
};

}  // namespace

std::vector<TaggedElement> local_multiselect(std::span<const TaggedElement> set, const RankSet& ranks,
                                             std::uint64_t* ops) {
  ranks.check_within(set.size());
  if (ranks.empty()) return {};
  std::vector<TaggedElement> work(set.begin(), set.end());
  std::vector<std::size_t> pos;
  pos.reserve(ranks.size());
  for (auto r : ranks.ranks()) pos.push_back(static_cast<std::size_t>(r - 1));
  const unsigned budget = 4 * static_cast<unsigned>(std::bit_width(work.size()));
  MultiSelector(work, ops).select(0, work.size(), pos, budget);
  std::vector<TaggedElement> out;
  out.reserve(pos.size());
  for (auto i : pos) out.push_back(work[i]);
  return out;
}

namespace {

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

std::vector<std::uint64_t> sample_ranks(std::uint64_t m, std::uint64_t h) {
  std::vector<std::uint64_t> ranks;
  ranks.reserve(h);
  for (std::uint64_t j = 1; j <= h; ++j) {
    // ceil(j*m/h), computed in 128 bits
    const unsigned __int128 num = static_cast<unsigned __int128>(j) * m;
    ranks.push_back(static_cast<std::uint64_t>((num + h - 1) / h));
  }
  return ranks;
}

}  // namespace

RegularSample local_regular_sample(std::span<const TaggedElement> set, std::uint64_t h, std::uint64_t* ops) {
  const std::uint64_t m = set.size();
  if (h < 1 || h > m) {
    throw SampleError("sample size " + std::to_string(h) + " outside [1, " + std::to_string(m) + "]");
  }
  RegularSample sample;
  sample.items = local_multiselect(set, RankSet(sample_ranks(m, h)), ops);
  sample.source_size = m;
  sample.h = h;
  sample.gap_bound = ceil_div(m, h);
  return sample;
}

RegularSample merge_samples(std::span<const TaggedElement> merged_sorted, std::uint64_t h,
                            std::uint64_t per_node_gap, std::uint64_t p) {
  RegularSample sample = local_regular_sample(merged_sorted, h);
  sample.gap_bound = 3 * p * per_node_gap;
  return sample;
}

IntervalCounts count_in_intervals(std::span<const TaggedElement> set, std::span<const TaggedElement> boundaries,
                                  std::uint64_t* ops) {
  IntervalCounts out;
  out.boundaries.assign(boundaries.begin(), boundaries.end());
  out.counts.assign(boundaries.size() + 1, 0);
  const CountingLess less{ops};
  for (const auto& z : set) {
    // Number of boundaries <= z is the index of z's interval.
    const auto it = std::upper_bound(boundaries.begin(), boundaries.end(), z, less);
    ++out.counts[static_cast<std::size_t>(it - boundaries.begin())];
  }
  return out;
}

std::vector<ActiveInterval> find_active_intervals(const IntervalCounts& global_counts, const RankSet& ranks) {
  const std::uint64_t total = global_counts.total();
  ranks.check_within(total);

  std::vector<ActiveInterval> out;
  std::uint64_t before = 0;  // elements left of interval j
  std::size_t next = 0;      // next rank to place
  const auto& counts = global_counts.counts;
  const auto& bounds = global_counts.boundaries;
  for (std::size_t j = 0; j < counts.size() && next < ranks.size(); ++j) {
    const std::uint64_t after = before + counts[j];
    std::vector<std::uint64_t> residual;
    while (next < ranks.size() && ranks[next] <= after) residual.push_back(ranks[next++] - before);
    if (!residual.empty()) {
      ActiveInterval interval;
      interval.index = j;
      if (j > 0) interval.low = bounds[j - 1];
      if (j < bounds.size()) interval.high = bounds[j];
      interval.offset = before;
      interval.size = counts[j];
      interval.residual_ranks = RankSet(std::move(residual));
      out.push_back(std::move(interval));
    }
    before = after;
  }
  return out;
}

std::uint64_t saturating_pow(std::uint64_t base, std::uint64_t exp, std::uint64_t cap) {
  std::uint64_t result = 1;
  for (std::uint64_t i = 0; i < exp; ++i) {
    if (base != 0 && result > cap / base) return cap;
    result *= base;
    if (result >= cap) return cap;
  }
  return std::min(result, cap);
}

std::uint64_t log_star(TowerMode mode, std::uint64_t base, std::uint64_t n) {
  if (base < 2) throw ConfigError("tower base must be at least 2");
  constexpr std::uint64_t cap = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t f = mode == TowerMode::kPower ? 1 : base;
  for (std::uint64_t i = 0;; ++i) {
    if (f >= n) return i;
    const std::uint64_t exp = mode == TowerMode::kPower ? f : f - 1;
    const std::uint64_t next = saturating_pow(base, exp, cap);
    if (next <= f) return kUnbounded;
    f = next;
  }
}

std::uint64_t multiselect_log_star(std::uint64_t r, std::uint64_t n) {
  const std::uint64_t bound = log_star(TowerMode::kMultiselect, r + 1, n);
  return bound == kUnbounded ? log_star(TowerMode::kPower, 2, n) : bound;
}

std::uint64_t ceil_log(std::uint64_t base, std::uint64_t x) {
  std::uint64_t t = 0;
  unsigned __int128 power = 1;
  while (power < x) {
    power *= base;
    ++t;
  }
  return t;
}

std::uint64_t ceil_log_four_thirds(std::uint64_t x) {
  if (x >= (std::uint64_t{1} << 32)) throw ConfigError("ceil_log_four_thirds argument too large");
  // (4/3)^t >= x  <=>  4^t >= x * 3^t, exact in 128 bits for x < 2^32.
  std::uint64_t t = 0;
  unsigned __int128 lhs = 1;
  unsigned __int128 rhs = x;
  while (lhs < rhs) {
    lhs *= 4;
    rhs *= 3;
    ++t;
  }
  return t;
}

}  // namespace ccsel
