#include "ccsel/bench.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "ccsel/errors.hpp"

namespace ccsel {

Algorithm parse_algorithm(const std::string& text) {
  if (text == "mom") return Algorithm::kMom;
  if (text == "rs") return Algorithm::kRs;
  if (text == "opt") return Algorithm::kOpt;
  if (text == "multi") return Algorithm::kMulti;
  throw UsageError("unknown algorithm '" + text + "'");
}

const char* to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kMom: return "mom";
    case Algorithm::kRs: return "rs";
    case Algorithm::kOpt: return "opt";
    case Algorithm::kMulti: return "multi";
  }
  return "?";
}

const char* to_string(SortMode mode) { return mode == SortMode::kCharged ? "charged" : "explicit"; }

SortMode parse_sort_mode(const std::string& text) {
  if (text == "charged") return SortMode::kCharged;
  if (text == "explicit") return SortMode::kExplicit;
  throw UsageError("unknown sort mode '" + text + "'");
}

namespace {

RankSet resolve_ranks(const RunConfig& config) {
  if (config.algorithm == Algorithm::kMulti) {
    if (config.ranks) {
      auto sorted = *config.ranks;
      std::sort(sorted.begin(), sorted.end());
      sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
      return RankSet(std::move(sorted));
    }
    return random_ranks(config.n, config.r, config.seed);
  }
  if (config.k) return RankSet({*config.k});
  return RankSet({(config.n + 1) / 2});
}

void validate(const RunConfig& config, const RankSet& ranks) {
  if (config.n < 1) throw UsageError("--n must be at least 1");
  if (config.p < 2) throw UsageError("--p must be at least 2");
  if (config.bandwidth < 1) throw UsageError("--bandwidth must be at least 1");
  if (config.c_sort < 1) throw UsageError("--c-sort must be at least 1");
  if (config.phi < 1 || config.phi > 63) throw UsageError("--phi must be in [1, 63]");
  if (config.algorithm == Algorithm::kRs && config.n < config.p) {
    throw UsageError("rs needs n >= p (got n=" + std::to_string(config.n) + ", p=" + std::to_string(config.p) + ")");
  }
  if (ranks.empty()) throw UsageError("no ranks requested");
  if (ranks.max() > config.n) throw UsageError("rank " + std::to_string(ranks.max()) + " exceeds n");
}

}  // namespace

RunOutcome run_one(const RunConfig& config) {
  RankSet ranks;
  try {
    ranks = resolve_ranks(config);
  } catch (const RankError& e) {
    throw UsageError(e.what());
  }
  validate(config, ranks);

  InstanceSpec spec;
  spec.n = config.n;
  spec.p = config.p;
  spec.distribution = config.distribution;
  spec.distinct = config.distinct;
  spec.seed = config.seed;
  const auto elements = generate(spec);

  CliqueConfig cc;
  cc.p = config.p;
  cc.bandwidth = config.bandwidth;
  cc.sort_mode = config.sort_mode;
  cc.c_sort = config.c_sort;
  cc.strict_bandwidth = config.strict;
  cc.record_trace = config.record_trace;
  cc.parallel_nodes = config.parallel_nodes;
  auto clique = Clique::load_instance(elements, cc);

  SelectionOptions options;
  options.check_invariants = config.check_invariants;

  RunOutcome outcome;
  auto& rec = outcome.record;
  rec.algorithm = to_string(config.algorithm);
  rec.n = config.n;
  rec.p = config.p;
  rec.r = ranks.size();
  rec.phi = config.phi;
  rec.bandwidth = config.bandwidth;
  rec.sort_mode = to_string(config.sort_mode);
  rec.c_sort = config.c_sort;
  rec.seed = config.seed;

  try {
    switch (config.algorithm) {
      case Algorithm::kMom: outcome.result = mom_select(clique, ranks[0], options); break;
      case Algorithm::kRs: outcome.result = rs_select(clique, ranks[0], config.phi, options); break;
      case Algorithm::kOpt: outcome.result = select_optimal(clique, ranks[0], options); break;
      case Algorithm::kMulti: outcome.result = multiselect(clique, ranks, options); break;
    }
  } catch (const InvariantViolation& e) {
    outcome.failure = e.what();
  } catch (const BandwidthViolation& e) {
    outcome.failure = e.what();
  }
  outcome.trace = clique.trace();
  const auto metrics = clique.metrics_snapshot();
  rec.rounds_total = metrics.rounds_total;
  rec.max_ops_per_node = metrics.max_ops_per_node;
  rec.main_phases = outcome.result.main_phases;
  rec.preprocess_phases = outcome.result.preprocess_phases;

  if (outcome.failure.empty()) {
    if (outcome.result.answers != oracle_multiselect(elements, ranks)) {
      outcome.failure = "oracle mismatch";
    } else if (auto shrink = mom_phase_shrink_check(outcome.result.phase_log, config.p); !shrink.ok) {
      outcome.failure = "mom-shrink: " + shrink.detail;
    } else if (auto replay = rank_of_boundary_consistency(outcome.result); !replay.ok) {
      outcome.failure = "rank-bracket: " + replay.detail;
    }
  }
  rec.correct = outcome.failure.empty();
  return outcome;
}

std::string csv_header() {
  return "algorithm,n,p,r,phi,B,sort_mode,c_sort,seed,rounds_total,main_phases,preprocess_phases,"
         "max_ops_per_node,correct";
}

std::string to_csv_row(const RunRecord& r) {
  std::ostringstream os;
  os << r.algorithm << ',' << r.n << ',' << r.p << ',' << r.r << ',' << r.phi << ',' << r.bandwidth << ','
     << r.sort_mode << ',' << r.c_sort << ',' << r.seed << ',' << r.rounds_total << ',' << r.main_phases << ','
     << r.preprocess_phases << ',' << r.max_ops_per_node << ',' << (r.correct ? "true" : "false");
  return os.str();
}

void append_csv(const std::string& path, const std::vector<RunRecord>& records) {
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + path);
  if (fresh) out << csv_header() << '\n';
  for (const auto& r : records) out << to_csv_row(r) << '\n';
}

std::uint64_t main_phase_bound(const RunConfig& config) {
  switch (config.algorithm) {
    case Algorithm::kMom: return ceil_log_four_thirds(config.n) + 1;
    case Algorithm::kRs: return log_star(TowerMode::kPower, std::uint64_t{1} << config.phi, config.n) + 2;
    case Algorithm::kOpt: return log_star(TowerMode::kPower, 2, config.n) + 2;
    case Algorithm::kMulti: {
      const std::uint64_t r = config.ranks ? config.ranks->size() : config.r;
      return multiselect_log_star(r, config.n) + 2;
    }
  }
  return 0;
}

std::vector<RunConfig> sweep_grid(const SweepConfig& sweep) {
  std::vector<RunConfig> cells;
  for (std::uint64_t rep = 0; rep < sweep.repeats; ++rep) {
    for (const auto& dist : sweep.distributions) {
      const auto [distribution, distinct] = parse_distribution(dist);
      for (auto p : sweep.ps) {
        for (auto factor : sweep.n_factors) {
          RunConfig base;
          base.n = factor * p * p;
          base.p = p;
          base.bandwidth = sweep.bandwidth;
          base.sort_mode = sweep.sort_mode;
          base.c_sort = sweep.c_sort;
          base.strict = sweep.strict;
          base.distribution = distribution;
          base.distinct = distinct;
          base.seed = sweep.seed_base + rep;
          base.k = random_ranks(base.n, 1, base.seed)[0];
          for (auto algorithm : sweep.algorithms) {
            RunConfig cell = base;
            cell.algorithm = algorithm;
            if (algorithm == Algorithm::kRs) {
              for (auto phi : sweep.phis) {
                cell.phi = phi;
                cells.push_back(cell);
              }
            } else if (algorithm == Algorithm::kMulti) {
              cell.k.reset();
              for (auto r : sweep.rs) {
                cell.r = r;
                cells.push_back(cell);
              }
            } else {
              cells.push_back(cell);
            }
          }
        }
      }
    }
  }
  return cells;
}

std::vector<RunOutcome> run_sweep(const std::vector<RunConfig>& cells) {
  std::vector<RunOutcome> outcomes(cells.size());
  const auto count = static_cast<std::int64_t>(cells.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < count; ++i) {
    outcomes[static_cast<std::size_t>(i)] = run_one(cells[static_cast<std::size_t>(i)]);
  }
  return outcomes;
}

void print_summary(std::ostream& os, const std::vector<RunConfig>& cells, const std::vector<RunOutcome>& outcomes) {
  os << std::left << std::setw(6) << "algo" << std::right << std::setw(8) << "n" << std::setw(4) << "p"
     << std::setw(4) << "r" << std::setw(4) << "phi" << std::setw(7) << "pre" << std::setw(7) << "main"
     << std::setw(7) << "bound" << std::setw(9) << "rounds" << std::setw(12) << "ops_ratio" << "  ok\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& rec = outcomes[i].record;
    const double per_node = static_cast<double>(rec.n) / static_cast<double>(rec.p);
    const double ratio = static_cast<double>(rec.max_ops_per_node) / (per_node * std::log2(rec.r + 1.0));
    os << std::left << std::setw(6) << rec.algorithm << std::right << std::setw(8) << rec.n << std::setw(4)
       << rec.p << std::setw(4) << rec.r << std::setw(4) << rec.phi << std::setw(7) << rec.preprocess_phases
       << std::setw(7) << rec.main_phases << std::setw(7) << main_phase_bound(cells[i]) << std::setw(9)
       << rec.rounds_total << std::setw(12) << std::fixed << std::setprecision(2) << ratio << "  "
       << (rec.correct ? "yes" : "NO") << '\n';
  }
}

}  // namespace ccsel
