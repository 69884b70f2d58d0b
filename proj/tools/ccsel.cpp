// ccsel: run and sweep the congested-clique selection algorithms.
//
//   ccsel run --algo opt --n 4096 --p 16 --k 2048
//   ccsel run --algo multi --n 65536 --p 16 --ranks 1,32768,65536 --csv runs.csv
//   ccsel sweep --repeats 3 --csv sweep.csv
//
// Exit status: 0 when every run matches the oracle with no invariant
// violation, 1 otherwise, 2 on usage errors.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ccsel/bench.hpp"

namespace {

std::vector<std::uint64_t> parse_rank_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    const auto value = std::stoull(item, &used);
    if (used != item.size()) throw ccsel::UsageError("bad rank '" + item + "'");
    out.push_back(value);
  }
  if (out.empty()) throw ccsel::UsageError("--ranks is empty");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Congested-clique selection by regular sampling"};
  app.require_subcommand(1);

  std::string algo = "opt", sort_mode = "charged", dist = "uniform", ranks_text, csv_path, trace_path;
  std::uint64_t n = 0, r = 1, seed = 1;
  std::uint32_t p = 2, phi = 1, bandwidth = 1, c_sort = 3;
  std::optional<std::uint64_t> k;
  bool strict = false, parallel = false;

  auto* run = app.add_subcommand("run", "run one algorithm on one generated instance");
  run->add_option("--algo", algo, "mom | rs | opt | multi")->check(CLI::IsMember({"mom", "rs", "opt", "multi"}));
  run->add_option("--n", n, "number of elements")->required();
  run->add_option("--p", p, "number of clique nodes")->required();
  run->add_option("--k", k, "rank for single selection (default ceil(n/2))");
  run->add_option("--ranks", ranks_text, "comma-separated ranks for multi");
  run->add_option("--r", r, "number of random ranks for multi when --ranks is absent");
  run->add_option("--phi", phi, "inefficiency exponent for rs (sample base 2^phi)");
  run->add_option("--bandwidth", bandwidth, "words per directed link per round");
  run->add_option("--sort-mode", sort_mode, "charged | explicit")->check(CLI::IsMember({"charged", "explicit"}));
  run->add_option("--c-sort", c_sort, "rounds charged per distributed sort");
  run->add_option("--dist", dist, "uniform | sorted | reversed | equal | few:<d> | halves");
  run->add_option("--seed", seed, "instance seed");
  run->add_flag("--strict", strict, "fail on any link carrying more than B words in a round");
  run->add_flag("--parallel", parallel, "run node-local steps with OpenMP");
  run->add_option("--csv", csv_path, "append the run record to this CSV file");
  run->add_option("--trace", trace_path, "write the per-round TSV trace here");

  ccsel::SweepConfig sweep;
  std::vector<std::string> sweep_algos = {"mom", "rs", "opt", "multi"};
  std::string sweep_sort = "charged";
  bool sweep_lenient = false;
  auto* sw = app.add_subcommand("sweep", "run the parameter grid");
  sw->add_option("--ps", sweep.ps, "node counts")->delimiter(',');
  sw->add_option("--n-factors", sweep.n_factors, "n = factor * p^2")->delimiter(',');
  sw->add_option("--rs", sweep.rs, "rank-set sizes for multi")->delimiter(',');
  sw->add_option("--phis", sweep.phis, "phi values for rs")->delimiter(',');
  sw->add_option("--dists", sweep.distributions, "distributions")->delimiter(',');
  sw->add_option("--algos", sweep_algos, "algorithms")->delimiter(',');
  sw->add_option("--repeats", sweep.repeats, "repeats per cell");
  sw->add_option("--seed-base", sweep.seed_base, "seed of the first repeat");
  sw->add_option("--bandwidth", sweep.bandwidth, "words per directed link per round");
  sw->add_option("--sort-mode", sweep_sort, "charged | explicit")->check(CLI::IsMember({"charged", "explicit"}));
  sw->add_option("--c-sort", sweep.c_sort, "rounds charged per distributed sort");
  sw->add_flag("--lenient", sweep_lenient, "record bandwidth overruns instead of failing");
  sw->add_option("--csv", csv_path, "append run records to this CSV file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*run) {
      ccsel::RunConfig config;
      config.algorithm = ccsel::parse_algorithm(algo);
      config.n = n;
      config.p = p;
      config.k = k;
      if (!ranks_text.empty()) config.ranks = parse_rank_list(ranks_text);
      config.r = r;
      config.phi = phi;
      config.bandwidth = bandwidth;
      config.sort_mode = ccsel::parse_sort_mode(sort_mode);
      config.c_sort = c_sort;
      std::tie(config.distribution, config.distinct) = ccsel::parse_distribution(dist);
      config.seed = seed;
      config.strict = strict;
      config.parallel_nodes = parallel;
      config.record_trace = !trace_path.empty();

      const auto outcome = ccsel::run_one(config);
      if (!trace_path.empty()) {
        std::ofstream trace(trace_path, std::ios::trunc);
        for (const auto& line : outcome.trace) trace << line << '\n';
      }
      if (!csv_path.empty()) ccsel::append_csv(csv_path, {outcome.record});
      std::cout << ccsel::csv_header() << '\n' << ccsel::to_csv_row(outcome.record) << '\n';
      for (const auto& [rank, element] : outcome.result.answers) {
        std::cout << "rank " << rank << ": " << element << '\n';
      }
      if (!outcome.failure.empty()) {
        std::cerr << "error: " << outcome.failure << '\n';
        return 1;
      }
      return 0;
    }

    sweep.algorithms.clear();
    for (const auto& a : sweep_algos) sweep.algorithms.push_back(ccsel::parse_algorithm(a));
    sweep.sort_mode = ccsel::parse_sort_mode(sweep_sort);
    sweep.strict = !sweep_lenient;
    const auto cells = ccsel::sweep_grid(sweep);
    const auto outcomes = ccsel::run_sweep(cells);
    std::vector<ccsel::RunRecord> records;
    int status = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      records.push_back(outcomes[i].record);
      if (!outcomes[i].failure.empty()) {
        std::cerr << "error: " << ccsel::to_csv_row(outcomes[i].record) << ": " << outcomes[i].failure << '\n';
        status = 1;
      }
    }
    if (!csv_path.empty()) ccsel::append_csv(csv_path, records);
    ccsel::print_summary(std::cout, cells, outcomes);
    return status;
  } catch (const ccsel::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  }
}
