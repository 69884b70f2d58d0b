#pragma once

#include <compare>
#include <cstdint>
#include <ostream>
#include <variant>

namespace ccsel {

using NodeId = std::uint32_t;

/// An element of the input set. Keys may repeat; the (origin, seq) tag makes
/// the lexicographic order on (key, origin, seq) a strict total order, so
/// every element has a unique rank.
struct TaggedElement {
  std::int64_t key = 0;
  NodeId origin = 0;
  std::uint32_t seq = 0;

  friend auto operator<=>(const TaggedElement&, const TaggedElement&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const TaggedElement& e) {
  return os << e.key << '@' << e.origin << '.' << e.seq;
}

struct Counter {
  std::uint64_t value = 0;
  friend bool operator==(const Counter&, const Counter&) = default;
};

struct Rank {
  std::uint64_t value = 0;
  friend bool operator==(const Rank&, const Rank&) = default;
};

enum class Control : std::uint8_t { kNone, kDone };

/// One unit of link bandwidth: a single element, counter, rank or control
/// token. Models an O(log n)-bit congest message.
using Word = std::variant<TaggedElement, Counter, Rank, Control>;

inline const TaggedElement& as_element(const Word& w) { return std::get<TaggedElement>(w); }
inline std::uint64_t as_counter(const Word& w) { return std::get<Counter>(w).value; }

}  // namespace ccsel
