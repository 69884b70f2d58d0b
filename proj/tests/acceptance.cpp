// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--expect-fail N[,M...]]
//
// Exit status is 0 when every criterion passes, except those listed with
// --expect-fail, which must fail. A listed criterion that passes is an error
// too, so the list cannot go stale.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "ccsel/bench.hpp"
#include "ccsel/errors.hpp"
#include "ccsel/oracle.hpp"
#include "ccsel/sampling.hpp"
#include "ccsel/selection.hpp"

using namespace ccsel;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

const std::vector<std::string> kDistributions = {"uniform", "sorted", "reversed", "equal", "few:4", "halves"};

RunConfig cell(Algorithm a, std::uint64_t n, std::uint32_t p, std::uint64_t seed = 1) {
  RunConfig c;
  c.algorithm = a;
  c.n = n;
  c.p = p;
  c.seed = seed;
  return c;
}

std::string describe(const RunConfig& c) {
  std::ostringstream os;
  os << to_string(c.algorithm) << " n=" << c.n << " p=" << c.p << " r=" << c.r << " phi=" << c.phi
     << " dist=" << distribution_name(c.distribution, c.distinct) << " seed=" << c.seed;
  return os.str();
}

bool is_bandwidth_failure(const std::string& failure) {
  return failure.find("bandwidth violation") != std::string::npos;
}

// Largest count of elements of `set` in (y_{j-1}, y_j], with the tail above
// the last item included.
std::uint64_t brute_force_gap(const std::vector<TaggedElement>& set, const std::vector<TaggedElement>& sample) {
  std::vector<std::uint64_t> buckets(sample.size() + 1, 0);
  for (const auto& z : set) {
    std::size_t j = 0;
    while (j < sample.size() && sample[j] < z) ++j;
    ++buckets[j];
  }
  return *std::max_element(buckets.begin(), buckets.end());
}

// Runs outside the grid, tallied for the bandwidth criterion.
std::uint64_t g_extra_runs = 0;
std::vector<std::string> g_extra_bandwidth_failures;

RunOutcome extra_run(const RunConfig& c) {
  auto out = run_one(c);
  ++g_extra_runs;
  if (!c.strict || c.bandwidth != 1) g_extra_bandwidth_failures.push_back(describe(c) + " not strict at B=1");
  if (is_bandwidth_failure(out.failure)) g_extra_bandwidth_failures.push_back(describe(c) + ": " + out.failure);
  return out;
}

// ---------------------------------------------------------------------------

struct Suite {
  std::vector<RunConfig> cells;
  std::vector<RunOutcome> outcomes;
};

Suite run_grid() {
  SweepConfig sweep;
  sweep.distributions = kDistributions;
  sweep.repeats = 2;
  Suite s;
  s.cells = sweep_grid(sweep);
  s.outcomes = run_sweep(s.cells);
  return s;
}

Verdict criterion_oracle(const Suite& s) {
  Verdict v;
  std::uint64_t correct = 0;
  for (std::size_t i = 0; i < s.cells.size(); ++i) {
    const auto& c = s.cells[i];
    const auto& out = s.outcomes[i];
    // Recompute the truth here rather than trusting the harness flag alone.
    std::vector<std::uint64_t> ks;
    for (const auto& answer : out.result.answers) ks.push_back(answer.first);
    const bool matches =
        !ks.empty() && out.result.answers == oracle_multiselect(generate({c.n, c.p, c.distribution, c.distinct, c.seed}),
                                                                RankSet(ks));
    if (matches && out.record.correct) {
      ++correct;
    } else {
      v.fail(describe(c) + ": " + (out.failure.empty() ? "answer mismatch" : out.failure));
    }
  }
  if (s.cells.size() < 1000) v.fail("only " + std::to_string(s.cells.size()) + " runs");
  std::ostringstream os;
  os << correct << "/" << s.cells.size() << " runs equal the oracle";
  v.detail = v.pass ? os.str() : os.str() + "; first failure: " + v.detail;
  return v;
}

Verdict criterion_mom(const Suite& s) {
  Verdict v;
  std::uint64_t phases_checked = 0;
  for (std::size_t i = 0; i < s.cells.size(); ++i) {
    const auto& c = s.cells[i];
    const auto& result = s.outcomes[i].result;
    if (c.algorithm != Algorithm::kMom && c.algorithm != Algorithm::kOpt) continue;
    if (auto check = mom_phase_shrink_check(result.phase_log, c.p); !check.ok) {
      v.fail(describe(c) + ": " + check.detail);
    }
    for (const auto& rec : result.phase_log) phases_checked += rec.kind == PhaseKind::kMedianOfMedians;
    if (c.algorithm == Algorithm::kMom && result.main_phases > ceil_log_four_thirds(c.n) + 1) {
      v.fail(describe(c) + ": " + std::to_string(result.main_phases) + " phases");
    }
  }
  // A larger instance against the quoted bound.
  const auto big = extra_run(cell(Algorithm::kMom, 1u << 16, 16));
  const auto bound = ceil_log_four_thirds(1u << 16) + 1;
  if (bound != 40) v.fail("bound at n=2^16 is " + std::to_string(bound));
  if (!big.record.correct || big.result.main_phases > bound) {
    v.fail("n=2^16: " + std::to_string(big.result.main_phases) + " phases, " + big.failure);
  }
  if (auto check = mom_phase_shrink_check(big.result.phase_log, 16); !check.ok) v.fail("n=2^16: " + check.detail);
  if (v.pass) {
    v.detail = std::to_string(phases_checked) + " phases within 3|S|/4 + p; n=2^16 took " +
               std::to_string(big.result.main_phases) + " <= " + std::to_string(bound) + " phases";
  }
  return v;
}

Verdict criterion_redistribution(const Suite& s) {
  Verdict v;
  // Load balance after every phase is an invariant the checked runs enforce
  // (a violation would surface as a failure).
  std::uint64_t checked_runs = 0;
  for (std::size_t i = 0; i < s.cells.size(); ++i) {
    if (s.outcomes[i].failure.find("load-balance") != std::string::npos) {
      v.fail(describe(s.cells[i]) + ": " + s.outcomes[i].failure);
    }
    checked_runs += s.outcomes[i].failure.empty();
  }
  SplitMix64 rng(2);
  std::uint64_t invocations = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::uint32_t p = 2 + static_cast<std::uint32_t>(rng.below(31));
    std::vector<std::uint64_t> loads(p);
    std::uint64_t total = 0;
    for (auto& l : loads) total += (l = rng.below(3 * p));
    if (total == 0) continue;
    // Node v's busiest link carries ceil(load_v / p) words.
    std::uint64_t demand = 1;
    for (auto l : loads) demand = std::max(demand, (l + p - 1) / p);
    CliqueConfig cfg;
    cfg.p = p;
    cfg.bandwidth = static_cast<std::uint32_t>(demand + rng.below(2));
    auto clique = Clique::load_instance(generate({p, p, Distribution::kSorted, 4, 0}), cfg);
    std::int64_t key = 0;
    for (NodeId u = 0; u < p; ++u) {
      auto& set = clique.node(u).local_set;
      set.clear();
      for (std::uint32_t j = 0; j < loads[u]; ++j) set.push_back({key++, u, j});
    }
    redistribute(clique);
    ++invocations;
    const auto after = clique.loads();
    const auto [lo, hi] = std::minmax_element(after.begin(), after.end());
    const auto rounds = clique.metrics_snapshot().rounds_total;
    if (*hi - *lo > 1 || rounds != 2 || clique.total_size() != total) {
      v.fail("p=" + std::to_string(p) + " B=" + std::to_string(cfg.bandwidth) + ": spread " +
             std::to_string(*hi - *lo) + ", " + std::to_string(rounds) + " rounds");
    }
  }
  if (v.pass) {
    v.detail = std::to_string(invocations) + " direct invocations at B >= demand took 2 rounds with spread <= 1; " +
               std::to_string(checked_runs) + " checked runs kept every phase balanced";
  }
  return v;
}

Verdict criterion_phase_counts(const Suite& s) {
  Verdict v;
  std::uint64_t rs_runs = 0, opt_runs = 0;
  for (std::size_t i = 0; i < s.cells.size(); ++i) {
    const auto& c = s.cells[i];
    const auto& result = s.outcomes[i].result;
    if (c.algorithm == Algorithm::kRs && c.phi == 1) {
      ++rs_runs;
      const auto bound = log_star(TowerMode::kPower, 2, c.n) + 2;
      if (result.main_phases > bound) v.fail(describe(c) + ": " + std::to_string(result.main_phases) + " phases");
    }
    if (c.algorithm == Algorithm::kOpt) {
      ++opt_runs;
      const auto t = optimal_preprocess_phases(c.n);
      // The loop stops early only once |S| <= p, when no phase has work left.
      const bool drained = !result.phase_log.empty() && result.phase_log[result.preprocess_phases - 1].next_size <= c.p;
      if (result.preprocess_phases != t && !(result.preprocess_phases < t && drained)) {
        v.fail(describe(c) + ": " + std::to_string(result.preprocess_phases) + " preprocessing phases, expected " +
               std::to_string(t));
      }
    }
  }

  std::ostringstream os;
  for (std::uint32_t e : {16u, 20u}) {
    const std::uint64_t n = std::uint64_t{1} << e;
    const auto bound = log_star(TowerMode::kPower, 2, n) + 2;
    const auto rs = extra_run(cell(Algorithm::kRs, n, e == 16 ? 16 : 32));
    if (!rs.record.correct || rs.result.main_phases > bound) {
      v.fail("rs n=2^" + std::to_string(e) + ": " + std::to_string(rs.result.main_phases) + " > " +
             std::to_string(bound) + " " + rs.failure);
    }
    os << "rs n=2^" << e << " " << rs.result.main_phases << "<=" << bound << "; ";
  }
  if (log_star(TowerMode::kPower, 2, 1u << 16) + 2 != 6) v.fail("bound at 2^16 is not 6");
  if (log_star(TowerMode::kPower, 2, 1u << 20) + 2 != 7) v.fail("bound at 2^20 is not 7");

  const auto opt = extra_run(cell(Algorithm::kOpt, 1u << 20, 32));
  const auto t = optimal_preprocess_phases(1u << 20);
  if (t != 6) v.fail("t at 2^20 is " + std::to_string(t));
  if (!opt.record.correct || opt.result.preprocess_phases != t) {
    v.fail("opt n=2^20: " + std::to_string(opt.result.preprocess_phases) + " preprocessing phases " + opt.failure);
  }
  os << "opt n=2^20 pre=" << opt.result.preprocess_phases << "=" << t << "; grid rs=" << rs_runs
     << " opt=" << opt_runs;
  if (v.pass) v.detail = os.str();
  return v;
}

Verdict criterion_multiselect(const Suite& s) {
  Verdict v;
  std::uint64_t runs = 0, over = 0;
  std::map<std::string, std::uint64_t> over_by_shape;
  for (std::size_t i = 0; i < s.cells.size(); ++i) {
    const auto& c = s.cells[i];
    if (c.algorithm != Algorithm::kMulti) continue;
    ++runs;
    const auto bound = multiselect_log_star(c.r, c.n) + 2;
    const auto phases = s.outcomes[i].result.main_phases;
    if (phases > bound) {
      ++over;
      ++over_by_shape["n=" + std::to_string(c.n) + " p=" + std::to_string(c.p) + " r=" + std::to_string(c.r) +
                      " (bound " + std::to_string(bound) + ")"];
      v.fail("");
    }
  }
  std::ostringstream os;
  os << runs - over << "/" << runs << " grid runs within bound";
  for (const auto& [shape, count] : over_by_shape) os << "; " << count << "x over at " << shape;

  const std::uint64_t n = 1u << 20;
  const auto bound = log_star(TowerMode::kMultiselect, 9, n) + 2;
  if (bound != 3) v.fail("bound at r=8, n=2^20 is " + std::to_string(bound));
  auto c = cell(Algorithm::kMulti, n, 32);
  c.r = 8;
  const auto big = extra_run(c);
  if (!big.record.correct || big.result.main_phases > bound) v.fail("r=8 n=2^20 failed");
  os << "; r=8 n=2^20 main=" << big.result.main_phases << " <= " << bound;
  v.detail = os.str();
  return v;
}

Verdict criterion_ops(std::ostream& report) {
  Verdict v;
  std::ostringstream summary;
  for (std::uint32_t p : {4u, 8u, 16u, 32u}) {
    std::map<std::string, std::vector<double>> ratios;
    for (std::uint64_t factor : {1u, 4u, 16u}) {
      const std::uint64_t n = factor * p * p;
      const double per_node = static_cast<double>(n) / p;
      auto opt = cell(Algorithm::kOpt, n, p);
      opt.k = (n + 1) / 2;
      const auto o = extra_run(opt);
      if (!o.record.correct) v.fail(describe(opt) + ": " + o.failure);
      ratios["opt"].push_back(static_cast<double>(o.record.max_ops_per_node) / per_node);
      for (std::uint64_t r : {1u, 2u, 8u}) {
        auto multi = cell(Algorithm::kMulti, n, p);
        multi.r = r;
        const auto m = extra_run(multi);
        if (!m.record.correct) v.fail(describe(multi) + ": " + m.failure);
        ratios["multi r=" + std::to_string(r)].push_back(static_cast<double>(m.record.max_ops_per_node) /
                                                          (per_node * std::log2(r + 1.0)));
      }
    }
    for (const auto& [name, values] : ratios) {
      const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
      const double spread = *hi / *lo;
      report << "    p=" << p << " " << name << ": ops/(n/p) = ";
      for (std::size_t i = 0; i < values.size(); ++i) report << (i ? ", " : "") << std::fixed << std::setprecision(1) << values[i];
      report << "  spread " << std::setprecision(2) << spread << (spread < 2.0 ? "" : "  (>= 2)") << '\n';
      if (spread >= 2.0) {
        std::ostringstream why;
        why << "p=" << p << " " << name << " spread " << std::fixed << std::setprecision(2) << spread;
        v.fail(why.str());
        summary << why.str() << "; ";
      }
    }
  }
  if (v.pass) v.detail = "every spread < 2 across n in {p^2, 4p^2, 16p^2}";
  else v.detail = summary.str() + "see table";
  return v;
}

Verdict criterion_phi() {
  Verdict v;
  const std::uint64_t n = 1u << 16;
  std::ostringstream os;
  std::uint64_t previous_phases = ~0ull, base_ops = 0;
  for (std::uint32_t phi : {1u, 2u, 4u}) {
    auto c = cell(Algorithm::kRs, n, 16);
    c.phi = phi;
    const auto out = extra_run(c);
    const auto bound = log_star(TowerMode::kPower, std::uint64_t{1} << phi, n) + 2;
    const auto phases = out.result.main_phases;
    const auto ops = out.record.max_ops_per_node;
    if (phi == 1) base_ops = ops;
    if (!out.record.correct) v.fail("phi=" + std::to_string(phi) + ": " + out.failure);
    if (phases > bound) v.fail("phi=" + std::to_string(phi) + " phases " + std::to_string(phases) + " > bound");
    if (phases > previous_phases) v.fail("phi=" + std::to_string(phi) + " phase count increased");
    if (ops > 2 * phi * base_ops) v.fail("phi=" + std::to_string(phi) + " ops " + std::to_string(ops) + " > 2*phi*base");
    previous_phases = phases;
    os << (phi == 1 ? "" : "; ") << "phi=" << phi << " phases=" << phases << "<=" << bound << " ops=" << ops;
  }
  if (v.pass) v.detail = os.str();
  return v;
}

Verdict criterion_bandwidth(const Suite& s) {
  Verdict v;
  for (std::size_t i = 0; i < s.cells.size(); ++i) {
    const auto& c = s.cells[i];
    if (!c.strict || c.bandwidth != 1) v.fail(describe(c) + " not strict at B=1");
    if (is_bandwidth_failure(s.outcomes[i].failure)) v.fail(describe(c) + ": " + s.outcomes[i].failure);
  }
  for (const auto& failure : g_extra_bandwidth_failures) v.fail(failure);
  if (v.pass) {
    v.detail = std::to_string(s.cells.size() + g_extra_runs) + " strict runs at B=1, zero bandwidth violations";
  }
  return v;
}

Verdict criterion_sampling() {
  // Each node samples min(h, m_v) items and the merge draws min(h, |H'|)
  // from their union, as in a sampling phase.
  Verdict v;
  SplitMix64 rng(9);
  std::uint64_t local_checks = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::uint64_t p = 1 + rng.below(16);
    const std::uint64_t h = 1 + rng.below(64);
    std::vector<TaggedElement> all, merged;
    std::uint64_t per_node_gap = 0;
    const std::uint64_t key_range = 1 + rng.below(trial % 2 ? 1u << 30 : 50);
    for (NodeId node = 0; node < p; ++node) {
      const std::uint64_t m = 1 + rng.below(128);
      std::vector<TaggedElement> set;
      for (std::uint32_t j = 0; j < m; ++j) set.push_back({static_cast<std::int64_t>(rng.below(key_range)), node, j});
      const std::uint64_t local_h = std::min(h, m);
      const auto local = local_regular_sample(set, local_h);
      const std::uint64_t expected = (m + local_h - 1) / local_h;
      const auto gap = brute_force_gap(set, local.items);
      ++local_checks;
      if (local.gap_bound != expected || gap > expected) {
        v.fail("local m=" + std::to_string(m) + " h=" + std::to_string(local_h) + " gap " + std::to_string(gap));
      }
      per_node_gap = std::max(per_node_gap, expected);
      all.insert(all.end(), set.begin(), set.end());
      merged.insert(merged.end(), local.items.begin(), local.items.end());
    }
    std::sort(merged.begin(), merged.end());
    const auto y = merge_samples(merged, std::min<std::uint64_t>(h, merged.size()), per_node_gap, p);
    const auto gap = brute_force_gap(all, y.items);
    if (gap > 3 * p * per_node_gap) {
      v.fail("merged p=" + std::to_string(p) + " h=" + std::to_string(h) + " gap " + std::to_string(gap) + " > " +
             std::to_string(3 * p * per_node_gap));
    }
  }
  if (v.pass) v.detail = "200 sets, " + std::to_string(local_checks) + " local samples, all gaps within bounds";
  return v;
}

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string run_bytes(const RunOutcome& out, const std::filesystem::path& dir, int rep) {
  const auto csv = dir / ("run" + std::to_string(rep) + ".csv");
  const auto trace = dir / ("run" + std::to_string(rep) + ".tsv");
  std::filesystem::remove(csv);
  append_csv(csv.string(), {out.record});
  {
    std::ofstream t(trace, std::ios::trunc | std::ios::binary);
    for (const auto& line : out.trace) t << line << '\n';
  }
  return read_bytes(csv) + '\x1f' + read_bytes(trace);
}

Verdict criterion_determinism(const Suite& s) {
  Verdict v;
  const auto dir = std::filesystem::temp_directory_path() / "ccsel_acceptance";
  std::filesystem::create_directories(dir);
  std::uint64_t compared = 0, via_files = 0;
  // Every 10th grid cell runs three more times with traces, the last with
  // OpenMP node steps. The first dozen go through the CSV and trace files.
  for (std::size_t i = 0; i < s.cells.size(); i += 10) {
    auto c = s.cells[i];
    c.record_trace = true;
    const bool files = via_files < 12;
    std::string bytes[3];
    for (int rep = 0; rep < 3; ++rep) {
      c.parallel_nodes = rep == 2;
      const auto out = run_one(c);
      if (files) {
        bytes[rep] = run_bytes(out, dir, rep);
      } else {
        bytes[rep] = to_csv_row(out.record);
        for (const auto& line : out.trace) bytes[rep] += '\n' + line;
      }
      if (to_csv_row(out.record) != to_csv_row(s.outcomes[i].record)) v.fail(describe(c) + ": CSV row changed");
    }
    if (bytes[0] != bytes[1] || bytes[0] != bytes[2]) v.fail(describe(c) + ": output bytes differ");
    ++compared;
    via_files += files;
  }
  std::filesystem::remove_all(dir);
  if (v.pass) {
    v.detail = std::to_string(compared) + " runs repeated 3x (one with OpenMP nodes), " + std::to_string(via_files) +
               " through files: identical CSV rows and traces";
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expect_fail;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--expect-fail" && i + 1 < argc) {
      std::stringstream in(argv[++i]);
      for (std::string item; std::getline(in, item, ',');) expect_fail.insert(std::stoi(item));
    } else {
      std::cerr << "usage: acceptance [--expect-fail N[,M...]]\n";
      return 2;
    }
  }

  const auto start = std::chrono::steady_clock::now();
  const auto suite = run_grid();

  std::ostringstream ops_table;
  std::vector<std::pair<int, Verdict>> verdicts;
  verdicts.emplace_back(1, criterion_oracle(suite));
  verdicts.emplace_back(2, criterion_mom(suite));
  verdicts.emplace_back(3, criterion_redistribution(suite));
  verdicts.emplace_back(4, criterion_phase_counts(suite));
  verdicts.emplace_back(5, criterion_multiselect(suite));
  verdicts.emplace_back(6, criterion_ops(ops_table));
  verdicts.emplace_back(7, criterion_phi());
  verdicts.emplace_back(8, criterion_bandwidth(suite));
  verdicts.emplace_back(9, criterion_sampling());
  verdicts.emplace_back(10, criterion_determinism(suite));

  int status = 0;
  for (const auto& [id, verdict] : verdicts) {
    std::cout << "criterion " << id << ": " << (verdict.pass ? "PASS" : "FAIL") << "  " << verdict.detail;
    if (expect_fail.count(id)) std::cout << (verdict.pass ? "  [listed as expected failure]" : "  [expected]");
    std::cout << '\n';
    if (id == 6) std::cout << ops_table.str();
    if (verdict.pass == static_cast<bool>(expect_fail.count(id))) status = 1;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << "elapsed " << std::fixed << std::setprecision(1) << seconds << " s\n";
  return status;
}
