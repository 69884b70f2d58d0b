// Serial versus OpenMP node-local steps. The second argument selects
// parallel_nodes; both settings produce identical results and metrics.

#include <benchmark/benchmark.h>

#include "ccsel/oracle.hpp"
#include "ccsel/selection.hpp"

namespace {

using namespace ccsel;

std::vector<TaggedElement> instance(std::uint64_t n, std::uint32_t p) {
  InstanceSpec spec;
  spec.n = n;
  spec.p = p;
  spec.seed = 42;
  return generate(spec);
}

CliqueConfig config(std::uint32_t p, bool parallel) {
  CliqueConfig c;
  c.p = p;
  c.parallel_nodes = parallel;
  return c;
}

// One local multiselect per node, the dominant kernel of every phase.
void BM_LocalSelect(benchmark::State& state) {
  const auto p = static_cast<std::uint32_t>(state.range(0));
  const auto elements = instance(std::uint64_t{1} << 20, p);
  auto clique = Clique::load_instance(elements, config(p, state.range(1) != 0));
  for (auto _ : state) {
    clique.for_each_node([](NodeState& node) {
      const auto m = node.local_set.size();
      benchmark::DoNotOptimize(local_multiselect(node.local_set, RankSet({1, m / 4, m / 2, m}), &node.ops));
    });
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * elements.size()));
}

void BM_SelectOptimal(benchmark::State& state) {
  const auto p = static_cast<std::uint32_t>(state.range(0));
  const auto elements = instance(std::uint64_t{1} << 18, p);
  for (auto _ : state) {
    auto clique = Clique::load_instance(elements, config(p, state.range(1) != 0));
    benchmark::DoNotOptimize(select_optimal(clique, elements.size() / 2));
  }
}

void BM_Multiselect(benchmark::State& state) {
  const auto p = static_cast<std::uint32_t>(state.range(0));
  const auto elements = instance(std::uint64_t{1} << 18, p);
  const auto ranks = random_ranks(elements.size(), 8, 1);
  for (auto _ : state) {
    auto clique = Clique::load_instance(elements, config(p, state.range(1) != 0));
    benchmark::DoNotOptimize(multiselect(clique, ranks));
  }
}

}  // namespace

BENCHMARK(BM_LocalSelect)->ArgNames({"p", "parallel"})->ArgsProduct({{16, 64}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SelectOptimal)->ArgNames({"p", "parallel"})->ArgsProduct({{16, 64}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Multiselect)->ArgNames({"p", "parallel"})->ArgsProduct({{16, 64}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
