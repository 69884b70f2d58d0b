#pragma once

#include <cstdint>

#include "ccsel/element.hpp"

namespace ccsel {

/// Strict-weak-order functor that tallies every comparison into `*ops`.
/// A null counter disables the tally.
struct CountingLess {
  std::uint64_t* ops = nullptr;

  bool operator()(const TaggedElement& a, const TaggedElement& b) const {
    if (ops != nullptr) ++*ops;
    return a < b;
  }
};

}  // namespace ccsel
