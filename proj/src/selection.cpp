#include "ccsel/selection.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>

#include "ccsel/counting.hpp"
#include "ccsel/errors.hpp"

namespace ccsel {

const char* to_string(PhaseKind kind) {
  switch (kind) {
    case PhaseKind::kMedianOfMedians: return "mom";
    case PhaseKind::kRegularSampling: return "rs";
    case PhaseKind::kMultiPreprocess: return "ms-pre";
    case PhaseKind::kMultiMain: return "ms";
  }
  return "?";
}

std::uint64_t phase_sample_size(std::uint64_t base, std::uint64_t n0, std::uint64_t set_size,
                                std::uint64_t h_cap) {
  if (set_size == 0) return 0;
  const std::uint64_t limit = std::min(set_size, h_cap);
  const std::uint64_t grown = std::max<std::uint64_t>(2, saturating_pow(base, n0 / set_size, limit));
  return std::min(grown, limit);
}

std::uint64_t sampling_threshold(std::uint64_t n0) {
  if (n0 < 2) return 0;
  return static_cast<std::uint64_t>(std::floor(static_cast<double>(n0) / std::log2(static_cast<double>(n0))));
}

std::uint64_t optimal_preprocess_phases(std::uint64_t n) {
  return ceil_log_four_thirds(std::max<std::uint64_t>(2, log_star(TowerMode::kPower, 2, n)));
}

std::uint64_t multiselect_preprocess_phases(std::uint64_t r, std::uint64_t n) {
  return ceil_log(r + 1, std::max<std::uint64_t>(2, multiselect_log_star(r, n)));
}

namespace {

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

std::string phase_label(PhaseKind kind, std::uint64_t index) {
  return std::string(to_string(kind)) + "#" + std::to_string(index);
}

std::vector<std::uint64_t> ops_of(const Clique& clique) {
  std::vector<std::uint64_t> out;
  for (const auto& node : clique.nodes()) out.push_back(node.ops);
  return out;
}

std::uint64_t max_delta(const std::vector<std::uint64_t>& before, const Clique& clique) {
  std::uint64_t best = 0;
  for (std::size_t v = 0; v < before.size(); ++v) best = std::max(best, clique.node(v).ops - before[v]);
  return best;
}

std::vector<TaggedElement> sorted_copy(std::vector<TaggedElement> v) {
  std::sort(v.begin(), v.end());
  return v;
}

// Invariant checks shared by all phase kinds.
class PhaseChecker {
 public:
  PhaseChecker(const Clique& clique, bool enabled, std::string label)
      : enabled_(enabled), label_(std::move(label)) {
    if (enabled_) before_ = sorted_copy(clique.gather_all());
  }

  void after(const Clique& clique, const std::function<bool(const TaggedElement&)>& keep) const {
    if (!enabled_) return;
    const auto loads = clique.loads();
    const auto [lo, hi] = std::minmax_element(loads.begin(), loads.end());
    if (*hi - *lo > 1) {
      throw InvariantViolation("load-balance", label_,
                               "loads differ by " + std::to_string(*hi - *lo));
    }
    std::vector<TaggedElement> expected;
    std::copy_if(before_.begin(), before_.end(), std::back_inserter(expected), keep);
    if (sorted_copy(clique.gather_all()) != expected) {
      throw InvariantViolation("element-conservation", label_, "surviving multiset differs from filter");
    }
  }

  void require(bool condition, const std::string& invariant, const std::string& detail) const {
    if (enabled_ && !condition) throw InvariantViolation(invariant, label_, detail);
  }

 private:
  bool enabled_;
  std::string label_;
  std::vector<TaggedElement> before_;
};

std::vector<std::pair<std::uint64_t, TaggedElement>> pair_answers(const RankSet& original,
                                                                  const std::vector<TaggedElement>& found) {
  std::vector<std::pair<std::uint64_t, TaggedElement>> out;
  for (std::size_t i = 0; i < original.size(); ++i) out.emplace_back(original[i], found[i]);
  return out;
}

// Survivors (at most one per node once balanced) go to node 0, which selects
// locally.
std::vector<TaggedElement> gather_finish(Clique& clique, const RankSet& ranks) {
  clique.begin_phase("finish");
  Outbox out(clique.p());
  for (auto& node : clique.nodes()) {
    for (const auto& e : node.local_set) out[node.id].emplace_back(0, e);
  }
  const auto received = clique.route(out, 1);
  std::vector<TaggedElement> at_root;
  for (const auto& from : received[0]) {
    for (const auto& w : from) at_root.push_back(as_element(w));
  }
  for (auto& node : clique.nodes()) node.local_set.clear();
  clique.node(0).local_set = at_root;
  return local_multiselect(at_root, ranks, &clique.node(0).ops);
}

// Sorts the survivors globally; the holder of each requested position knows
// the answer.
std::vector<TaggedElement> sort_finish(Clique& clique, const RankSet& ranks) {
  clique.begin_phase("finish");
  std::vector<std::vector<TaggedElement>> items(clique.p());
  for (auto& node : clique.nodes()) items[node.id] = node.local_set;
  auto blocks = clique.distributed_sort(items, "finish:sort");
  std::vector<TaggedElement> flat;
  for (auto& node : clique.nodes()) {
    node.local_set = blocks[node.id];
    flat.insert(flat.end(), blocks[node.id].begin(), blocks[node.id].end());
  }
  std::vector<TaggedElement> out;
  for (auto r : ranks.ranks()) out.push_back(flat[r - 1]);
  return out;
}

// One median-of-medians phase. Returns the updated rank.
std::uint64_t mom_phase(Clique& clique, std::uint64_t k, std::uint64_t index, const SelectionOptions& options,
                        SelectionResult& result) {
  const std::string label = phase_label(PhaseKind::kMedianOfMedians, index);
  clique.begin_phase(label);
  const auto ops_before = ops_of(clique);
  const auto rounds_before = clique.metrics_snapshot().rounds_total;
  PhaseChecker checker(clique, options.check_invariants, label);

  PhaseRecord rec;
  rec.kind = PhaseKind::kMedianOfMedians;
  rec.schedule.phase_index = index;
  rec.schedule.set_size = clique.total_size();
  rec.ranks_before = RankSet({k});

  const std::uint32_t p = clique.p();
  std::vector<std::vector<Word>> medians(p);
  clique.for_each_node([&](NodeState& node) {
    if (node.local_set.empty()) return;
    const RankSet mid({(node.local_set.size() + 1) / 2});
    medians[node.id].emplace_back(local_multiselect(node.local_set, mid, &node.ops).front());
  });
  const auto all_medians = clique.broadcast(medians);

  // Every node computes the same median of the received medians.
  std::vector<TaggedElement> pool;
  for (const auto& from : all_medians) {
    for (const auto& w : from) pool.push_back(as_element(w));
  }
  std::uint64_t pool_ops = 0;
  const TaggedElement y = local_multiselect(pool, RankSet({(pool.size() + 1) / 2}), &pool_ops).front();
  clique.charge_all(pool_ops);

  // x counts elements not greater than y, so y itself stays on the side that
  // may hold rank k.
  std::vector<std::vector<Word>> counts(p);
  clique.for_each_node([&](NodeState& node) {
    std::uint64_t le = 0;
    const CountingLess less{&node.ops};
    for (const auto& z : node.local_set) le += less(y, z) ? 0 : 1;
    counts[node.id].emplace_back(Counter{le});
  });
  const auto all_counts = clique.broadcast(counts);
  std::uint64_t x = 0;
  for (const auto& from : all_counts) {
    for (const auto& w : from) x += as_counter(w);
  }

  const bool go_right = k > x;
  const std::uint64_t next_k = go_right ? k - x : k;
  auto keep = [&](const TaggedElement& z) { return go_right ? y < z : !(y < z); };
  clique.for_each_node([&](NodeState& node) {
    const CountingLess less{&node.ops};
    std::erase_if(node.local_set, [&](const TaggedElement& z) { return go_right ? !less(y, z) : less(y, z); });
  });
  redistribute(clique);

  rec.next_size = clique.total_size();
  rec.ranks_after = RankSet({next_k});
  rec.rounds = clique.metrics_snapshot().rounds_total - rounds_before;
  rec.max_ops = max_delta(ops_before, clique);
  checker.after(clique, keep);
  checker.require(4 * rec.next_size <= 3 * rec.schedule.set_size + 4 * p, "mom-shrink",
                  std::to_string(rec.schedule.set_size) + " -> " + std::to_string(rec.next_size));
  result.phase_log.push_back(std::move(rec));
  return next_k;
}

// Runs median-of-medians phases while more than p elements remain, at most
// `max_phases` of them. Returns the updated rank.
std::uint64_t mom_loop(Clique& clique, std::uint64_t k, std::uint64_t max_phases, const SelectionOptions& options,
                       SelectionResult& result, std::uint64_t& phases) {
  phases = 0;
  while (clique.total_size() > clique.p() && phases < max_phases) {
    k = mom_phase(clique, k, phases, options, result);
    ++phases;
  }
  return k;
}

// One regular-sampling phase with global sample size h. Returns the ranks
// relative to the surviving set.
RankSet sampling_phase(Clique& clique, const RankSet& ranks, PhaseKind kind, std::uint64_t index,
                       std::uint64_t h, std::uint64_t base, const SelectionOptions& options,
                       SelectionResult& result) {
  const std::string label = phase_label(kind, index);
  clique.begin_phase(label);
  const auto ops_before = ops_of(clique);
  const auto rounds_before = clique.metrics_snapshot().rounds_total;
  PhaseChecker checker(clique, options.check_invariants, label);
  const std::uint32_t p = clique.p();

  PhaseRecord rec;
  rec.kind = kind;
  rec.schedule = {index, clique.total_size(), h, base};
  rec.ranks_before = ranks;

  // Local regular samples.
  std::vector<std::vector<TaggedElement>> samples(p);
  std::vector<std::uint64_t> gaps(p, 0);
  clique.for_each_node([&](NodeState& node) {
    const std::uint64_t local_h = std::min<std::uint64_t>(h, node.local_set.size());
    if (local_h == 0) return;
    auto sample = local_regular_sample(node.local_set, local_h, &node.ops);
    samples[node.id] = std::move(sample.items);
    gaps[node.id] = sample.gap_bound;
  });
  rec.per_node_gap = *std::max_element(gaps.begin(), gaps.end());

  // Sort the union of the samples; every node knows the block layout, so the
  // holders of the merged-sample positions broadcast them.
  const auto blocks = clique.distributed_sort(samples, label + ":sort");
  std::uint64_t total = 0;
  for (const auto& b : blocks) total += b.size();
  const std::uint64_t merged_h = std::min(h, total);
  rec.merged_size = merged_h;

  std::vector<std::vector<Word>> picks(p);
  {
    std::uint64_t offset = 0;
    NodeId holder = 0;
    for (std::uint64_t j = 1; j <= merged_h; ++j) {
      const std::uint64_t pos =
          static_cast<std::uint64_t>((static_cast<unsigned __int128>(j) * total + merged_h - 1) / merged_h) - 1;
      while (pos >= offset + blocks[holder].size()) offset += blocks[holder++].size();
      picks[holder].emplace_back(blocks[holder][pos - offset]);
    }
  }
  const auto broadcast_picks = clique.broadcast(picks);
  std::vector<TaggedElement> boundaries;
  for (const auto& from : broadcast_picks) {
    for (const auto& w : from) boundaries.push_back(as_element(w));
  }
  if (options.check_invariants) {
    std::vector<TaggedElement> merged;
    for (const auto& b : blocks) merged.insert(merged.end(), b.begin(), b.end());
    checker.require(merge_samples(merged, merged_h, rec.per_node_gap, p).items == boundaries, "merged-sample",
                    "broadcast boundaries differ from the merged regular sample");
  }

  // Local interval counts, routed to aggregator j mod p, summed and broadcast.
  const std::size_t intervals = boundaries.size() + 1;
  std::vector<std::vector<std::uint64_t>> local_counts(p);
  clique.for_each_node([&](NodeState& node) {
    local_counts[node.id] = count_in_intervals(node.local_set, boundaries, &node.ops).counts;
  });
  Outbox to_aggregators(p);
  for (NodeId v = 0; v < p; ++v) {
    for (std::size_t j = 0; j < intervals; ++j) {
      to_aggregators[v].emplace_back(static_cast<NodeId>(j % p), Counter{local_counts[v][j]});
    }
  }
  const auto received = clique.route(to_aggregators);
  std::vector<std::vector<Word>> sums(p);
  for (NodeId a = 0; a < p; ++a) {
    const std::size_t owned = a < intervals ? (intervals - a + p - 1) / p : 0;
    std::vector<std::uint64_t> acc(owned, 0);
    for (NodeId src = 0; src < p; ++src) {
      for (std::size_t i = 0; i < received[a][src].size(); ++i) acc[i] += as_counter(received[a][src][i]);
    }
    for (auto c : acc) sums[a].emplace_back(Counter{c});
  }
  const auto all_sums = clique.broadcast(sums);
  IntervalCounts global;
  global.boundaries = boundaries;
  global.counts.assign(intervals, 0);
  for (std::size_t j = 0; j < intervals; ++j) global.counts[j] = as_counter(all_sums[j % p][j / p]);
  checker.require(global.total() == rec.schedule.set_size, "interval-count-conservation",
                  std::to_string(global.total()) + " counted, " + std::to_string(rec.schedule.set_size) +
                      " held");

  // Every node derives the same active intervals and residual ranks.
  auto active = find_active_intervals(global, ranks);
  clique.charge_all(intervals + ranks.size());

  std::vector<TaggedElement> lows;
  for (const auto& a : active) lows.push_back(a.low.value_or(TaggedElement{INT64_MIN, 0, 0}));
  auto keep = [&](const TaggedElement& z) {
    return std::any_of(active.begin(), active.end(), [&](const ActiveInterval& a) { return a.contains(z); });
  };
  clique.for_each_node([&](NodeState& node) {
    const CountingLess less{&node.ops};
    std::erase_if(node.local_set, [&](const TaggedElement& z) {
      // Last interval whose low end is <= z, then test its high end.
      const auto it = std::upper_bound(lows.begin(), lows.end(), z, less);
      if (it == lows.begin()) return !active.front().contains(z);
      const auto& a = active[static_cast<std::size_t>(it - lows.begin()) - 1];
      return a.high && !less(z, *a.high);
    });
  });

  std::vector<std::uint64_t> next;
  std::uint64_t union_offset = 0;
  for (const auto& a : active) {
    for (auto r : a.residual_ranks.ranks()) next.push_back(union_offset + r);
    union_offset += a.size;
  }
  RankSet next_ranks(std::move(next));

  redistribute(clique);

  checker.after(clique, keep);
  rec.next_size = clique.total_size();
  rec.ranks_after = next_ranks;
  rec.global_counts = std::move(global);
  rec.intervals = std::move(active);
  rec.rounds = clique.metrics_snapshot().rounds_total - rounds_before;
  rec.max_ops = max_delta(ops_before, clique);
  const std::uint64_t per_interval = 3 * p * ceil_div(rec.schedule.set_size, p * merged_h) + 2;
  checker.require(rec.next_size <= rec.intervals.size() * per_interval, "sampling-shrink",
                  std::to_string(rec.schedule.set_size) + " -> " + std::to_string(rec.next_size));
  result.phase_log.push_back(std::move(rec));
  return next_ranks;
}

std::uint64_t sampling_cut(const Clique& clique) {
  const std::uint64_t p = clique.p();
  return p * (p - 1) * clique.config().bandwidth;
}

std::uint64_t h_cap(const Clique& clique) { return sampling_cut(clique); }

bool keep_sampling(const Clique& clique, std::uint64_t n0) {
  const std::uint64_t size = clique.total_size();
  return size > sampling_threshold(n0) && size > sampling_cut(clique);
}

// Main regular-sampling loop with sample base `base` and size budget n0.
RankSet sampling_loop(Clique& clique, RankSet ranks, PhaseKind kind, std::uint64_t base, std::uint64_t n0,
                      const SelectionOptions& options, SelectionResult& result) {
  std::uint64_t index = 0;
  while (keep_sampling(clique, n0)) {
    const std::uint64_t h = phase_sample_size(base, n0, clique.total_size(), h_cap(clique));
    ranks = sampling_phase(clique, ranks, kind, index, h, base, options, result);
    ++index;
  }
  result.main_phases = index;
  return ranks;
}

void check_rank(const Clique& clique, std::uint64_t k) {
  if (k < 1 || k > clique.total_size()) {
    throw RankError("rank " + std::to_string(k) + " outside [1, " + std::to_string(clique.total_size()) + "]");
  }
}

}  // namespace

void redistribute(Clique& clique) {
  const std::uint32_t p = clique.p();
  std::vector<std::vector<Word>> sizes(p);
  for (const auto& node : clique.nodes()) sizes[node.id].emplace_back(Counter{node.local_set.size()});
  const auto all_sizes = clique.broadcast(sizes);

  Outbox out(p);
  std::uint64_t prefix = 0;
  for (NodeId v = 0; v < p; ++v) {
    auto& node = clique.node(v);
    for (std::uint64_t i = 0; i < node.local_set.size(); ++i) {
      out[v].emplace_back(static_cast<NodeId>((i + prefix) % p), node.local_set[i]);
    }
    prefix += as_counter(all_sizes[v].front());
  }
  const auto received = clique.route(out, 1);
  clique.for_each_node([&](NodeState& node) {
    node.local_set.clear();
    for (const auto& from : received[node.id]) {
      for (const auto& w : from) node.local_set.push_back(as_element(w));
    }
  });
}

SelectionResult mom_select(Clique& clique, std::uint64_t k, const SelectionOptions& options) {
  check_rank(clique, k);
  SelectionResult result;
  std::uint64_t phases = 0;
  const std::uint64_t residual = mom_loop(clique, k, kUnbounded, options, result, phases);
  result.main_phases = phases;
  const auto found = gather_finish(clique, RankSet({residual}));
  result.answers = {{k, found.front()}};
  result.metrics = clique.metrics_snapshot();
  return result;
}

SelectionResult rs_select(Clique& clique, std::uint64_t k, std::uint32_t phi, const SelectionOptions& options) {
  if (phi < 1 || phi > 63) throw ConfigError("phi must be in [1, 63], got " + std::to_string(phi));
  check_rank(clique, k);
  SelectionResult result;
  const std::uint64_t n0 = clique.total_size();
  const RankSet ranks =
      sampling_loop(clique, RankSet({k}), PhaseKind::kRegularSampling, std::uint64_t{1} << phi, n0, options, result);
  const auto found = sort_finish(clique, ranks);
  result.answers = {{k, found.front()}};
  result.metrics = clique.metrics_snapshot();
  return result;
}

SelectionResult select_optimal(Clique& clique, std::uint64_t k, const SelectionOptions& options) {
  check_rank(clique, k);
  SelectionResult result;
  const std::uint64_t n0 = clique.total_size();
  std::uint64_t phases = 0;
  const std::uint64_t residual =
      mom_loop(clique, k, optimal_preprocess_phases(n0), options, result, phases);
  result.preprocess_phases = phases;
  std::vector<TaggedElement> found;
  if (clique.total_size() <= clique.p()) {
    found = gather_finish(clique, RankSet({residual}));
  } else {
    const RankSet ranks =
        sampling_loop(clique, RankSet({residual}), PhaseKind::kRegularSampling, 2, n0, options, result);
    found = sort_finish(clique, ranks);
  }
  result.answers = {{k, found.front()}};
  result.metrics = clique.metrics_snapshot();
  return result;
}

SelectionResult multiselect(Clique& clique, const RankSet& ranks, const SelectionOptions& options) {
  if (ranks.empty()) throw RankError("rank set is empty");
  const std::uint64_t n0 = clique.total_size();
  ranks.check_within(n0);
  SelectionResult result;
  const std::uint64_t r = ranks.size();

  if (r * clique.p() >= n0) {
    result.delegated_to_sort = true;
    result.answers = pair_answers(ranks, sort_finish(clique, ranks));
    result.metrics = clique.metrics_snapshot();
    return result;
  }

  RankSet current = ranks;
  const std::uint64_t pre_phases = multiselect_preprocess_phases(r, n0);
  const std::uint64_t pre_h = 4 * (r + 1) * (r + 1);
  std::uint64_t done = 0;
  while (done < pre_phases && clique.total_size() > sampling_cut(clique)) {
    const std::uint64_t h = std::min({pre_h, clique.total_size(), h_cap(clique)});
    current = sampling_phase(clique, current, PhaseKind::kMultiPreprocess, done, h, r + 1, options, result);
    ++done;
  }
  result.preprocess_phases = done;

  current = sampling_loop(clique, current, PhaseKind::kMultiMain, r + 1, n0, options, result);
  result.answers = pair_answers(ranks, sort_finish(clique, current));
  result.metrics = clique.metrics_snapshot();
  return result;
}

CheckResult mom_phase_shrink_check(const std::vector<PhaseRecord>& phase_log, std::uint64_t p) {
  for (const auto& rec : phase_log) {
    if (rec.kind != PhaseKind::kMedianOfMedians) continue;
    if (4 * rec.next_size > 3 * rec.schedule.set_size + 4 * p) {
      return {false, "phase " + std::to_string(rec.schedule.phase_index) + ": " +
                         std::to_string(rec.schedule.set_size) + " -> " + std::to_string(rec.next_size) +
                         " exceeds 3/4 + p"};
    }
  }
  return {};
}

CheckResult rank_of_boundary_consistency(const SelectionResult& result) {
  std::optional<RankSet> carried;
  for (const auto& rec : result.phase_log) {
    const std::string where = std::string(to_string(rec.kind)) + "#" + std::to_string(rec.schedule.phase_index);
    if (carried && !(*carried == rec.ranks_before)) {
      return {false, where + ": ranks do not continue the previous phase"};
    }
    carried = rec.ranks_after;
    if (rec.kind == PhaseKind::kMedianOfMedians) continue;

    const auto& counts = rec.global_counts.counts;
    if (rec.global_counts.total() != rec.schedule.set_size) {
      return {false, where + ": interval counts sum to " + std::to_string(rec.global_counts.total()) +
                         " but the set held " + std::to_string(rec.schedule.set_size)};
    }
    std::vector<std::uint64_t> cumulative(counts.size() + 1, 0);
    for (std::size_t j = 0; j < counts.size(); ++j) cumulative[j + 1] = cumulative[j] + counts[j];

    std::size_t rank_index = 0;
    std::uint64_t union_offset = 0;
    std::vector<std::uint64_t> expected_after;
    for (const auto& interval : rec.intervals) {
      const std::size_t j = interval.index;
      if (j >= counts.size() || interval.offset != cumulative[j] || interval.size != counts[j]) {
        return {false, where + ": interval " + std::to_string(j) + " disagrees with the counts"};
      }
      for (auto residual : interval.residual_ranks.ranks()) {
        if (rank_index >= rec.ranks_before.size()) return {false, where + ": more residuals than ranks"};
        const std::uint64_t k = rec.ranks_before[rank_index];
        if (!(cumulative[j] < k && k <= cumulative[j + 1]) || residual != k - cumulative[j]) {
          return {false, where + ": rank " + std::to_string(k) + " outside bracket of interval " +
                             std::to_string(j)};
        }
        if (rank_index < result.answers.size() && !interval.contains(result.answers[rank_index].second)) {
          return {false, where + ": answer for rank " + std::to_string(result.answers[rank_index].first) +
                             " lies outside its active interval"};
        }
        expected_after.push_back(union_offset + residual);
        ++rank_index;
      }
      union_offset += interval.size;
    }
    if (rank_index != rec.ranks_before.size()) return {false, where + ": some ranks have no interval"};
    if (std::vector<std::uint64_t>(rec.ranks_after.ranks().begin(), rec.ranks_after.ranks().end()) !=
        expected_after) {
      return {false, where + ": residual ranks do not map to the next phase"};
    }
  }
  return {};
}

}  // namespace ccsel
