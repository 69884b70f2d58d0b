#pragma once

// Ground truth and deterministic instance generation.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ccsel/element.hpp"
#include "ccsel/sampling.hpp"

namespace ccsel {

/// Sorts a copy under the total order and indexes it. Throws RankError for
/// ranks beyond |S|.
std::vector<std::pair<std::uint64_t, TaggedElement>> oracle_multiselect(std::span<const TaggedElement> set,
                                                                         const RankSet& ranks);

/// SplitMix64: state += 0x9E3779B97F4A7C15, then
///   z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   out = z ^ (z >> 31)
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  /// Uniform in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

enum class Distribution { kUniformRandom, kSorted, kReversed, kAllEqualKeys, kFewDistinct, kAdversarialHalves };

struct InstanceSpec {
  std::uint64_t n = 1;
  std::uint32_t p = 2;
  Distribution distribution = Distribution::kUniformRandom;
  std::uint64_t distinct = 4;  // d for kFewDistinct
  std::uint64_t seed = 0;
};

/// Element i gets tag (i mod p, i div p), i.e. the node and slot it occupies
/// under round-robin loading.
///
///   uniform_random    key = next() >> 2
///   sorted            key = i
///   reversed          key = n - 1 - i
///   all_equal_keys    key = 0
///   few_distinct(d)   key = below(d)
///   adversarial_halves  even i take n/2 + i/2 ascending, odd i take the
///                     lower half descending, so with even p the large keys
///                     all start on even nodes
std::vector<TaggedElement> generate(const InstanceSpec& spec);

/// Parses "uniform", "sorted", "reversed", "equal", "few:<d>", "halves".
/// Throws std::invalid_argument on anything else.
std::pair<Distribution, std::uint64_t> parse_distribution(const std::string& text);
std::string distribution_name(Distribution distribution, std::uint64_t distinct);

/// FNV-1a over (key, origin, seq) in generation order.
std::uint64_t instance_checksum(std::span<const TaggedElement> elements);

/// r distinct ranks in [1, n], drawn from `seed`.
RankSet random_ranks(std::uint64_t n, std::uint64_t r, std::uint64_t seed);

}  // namespace ccsel
