#include "ccsel/oracle.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "ccsel/errors.hpp"

namespace ccsel {

std::vector<std::pair<std::uint64_t, TaggedElement>> oracle_multiselect(std::span<const TaggedElement> set,
                                                                         const RankSet& ranks) {
  ranks.check_within(set.size());
  std::vector<TaggedElement> sorted(set.begin(), set.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<std::uint64_t, TaggedElement>> out;
  out.reserve(ranks.size());
  for (auto r : ranks.ranks()) out.emplace_back(r, sorted[r - 1]);
  return out;
}

std::uint64_t SplitMix64::next() {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t SplitMix64::below(std::uint64_t bound) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return x % bound;
}

std::vector<TaggedElement> generate(const InstanceSpec& spec) {
  if (spec.n < 1) throw InstanceError("instance needs n >= 1");
  if (spec.p < 2) throw ConfigError("instance needs p >= 2");
  if (spec.distribution == Distribution::kFewDistinct && spec.distinct < 1) {
    throw InstanceError("few_distinct needs d >= 1");
  }
  SplitMix64 rng(spec.seed);
  const std::uint64_t n = spec.n;
  const std::uint64_t half = n / 2;
  std::vector<TaggedElement> out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::int64_t key = 0;
    switch (spec.distribution) {
      case Distribution::kUniformRandom: key = static_cast<std::int64_t>(rng.next() >> 2); break;
      case Distribution::kSorted: key = static_cast<std::int64_t>(i); break;
      case Distribution::kReversed: key = static_cast<std::int64_t>(n - 1 - i); break;
      case Distribution::kAllEqualKeys: key = 0; break;
      case Distribution::kFewDistinct: key = static_cast<std::int64_t>(rng.below(spec.distinct)); break;
      case Distribution::kAdversarialHalves:
        key = static_cast<std::int64_t>(i % 2 == 0 ? half + i / 2 : half - 1 - i / 2);
        break;
    }
    out.push_back({key, static_cast<NodeId>(i % spec.p), static_cast<std::uint32_t>(i / spec.p)});
  }
  return out;
}

std::pair<Distribution, std::uint64_t> parse_distribution(const std::string& text) {
  if (text == "uniform") return {Distribution::kUniformRandom, 0};
  if (text == "sorted") return {Distribution::kSorted, 0};
  if (text == "reversed") return {Distribution::kReversed, 0};
  if (text == "equal") return {Distribution::kAllEqualKeys, 0};
  if (text == "halves") return {Distribution::kAdversarialHalves, 0};
  if (text.rfind("few:", 0) == 0) {
    std::size_t used = 0;
    const auto digits = text.substr(4);
    const std::uint64_t d = digits.empty() ? 0 : std::stoull(digits, &used);
    if (d >= 1 && used == digits.size()) return {Distribution::kFewDistinct, d};
  }
  throw std::invalid_argument("unknown distribution '" + text + "'");
}

std::string distribution_name(Distribution distribution, std::uint64_t distinct) {
  switch (distribution) {
    case Distribution::kUniformRandom: return "uniform";
    case Distribution::kSorted: return "sorted";
    case Distribution::kReversed: return "reversed";
    case Distribution::kAllEqualKeys: return "equal";
    case Distribution::kFewDistinct: return "few:" + std::to_string(distinct);
    case Distribution::kAdversarialHalves: return "halves";
  }
  return "?";
}

std::uint64_t instance_checksum(std::span<const TaggedElement> elements) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  auto mix = [&h](std::uint64_t value, int bytes) {
    for (int b = 0; b < bytes; ++b) {
      h ^= (value >> (8 * b)) & 0xFF;
      h *= 0x100000001B3ULL;
    }
  };
  for (const auto& e : elements) {
    mix(static_cast<std::uint64_t>(e.key), 8);
    mix(e.origin, 4);
    mix(e.seq, 4);
  }
  return h;
}

RankSet random_ranks(std::uint64_t n, std::uint64_t r, std::uint64_t seed) {
  if (r > n) throw RankError("cannot draw " + std::to_string(r) + " distinct ranks from " + std::to_string(n));
  SplitMix64 rng(seed ^ 0x5EEDC0DE5EEDC0DEULL);
  std::set<std::uint64_t> picked;
  while (picked.size() < r) picked.insert(1 + rng.below(n));
  return RankSet(std::vector<std::uint64_t>(picked.begin(), picked.end()));
}

}  // namespace ccsel
