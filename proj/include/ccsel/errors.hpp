#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ccsel {

class InstanceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class RankError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class SampleError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Raised in strict mode when a directed link carries more than B words in a
/// single round.
class BandwidthViolation : public std::runtime_error {
 public:
  BandwidthViolation(std::uint32_t from, std::uint32_t to, std::uint64_t words, std::uint32_t bandwidth)
      : std::runtime_error("bandwidth violation on link " + std::to_string(from) + "->" +
                           std::to_string(to) + ": " + std::to_string(words) + " words, B=" +
                           std::to_string(bandwidth)),
        from_(from), to_(to), words_(words) {}

  std::uint32_t from() const { return from_; }
  std::uint32_t to() const { return to_; }
  std::uint64_t words() const { return words_; }

 private:
  std::uint32_t from_;
  std::uint32_t to_;
  std::uint64_t words_;
};

/// A runtime invariant check failed during an algorithm phase.
class InvariantViolation : public std::runtime_error {
 public:
  InvariantViolation(std::string invariant, std::string phase, const std::string& detail)
      : std::runtime_error("invariant '" + invariant + "' violated in phase " + phase + ": " + detail),
        invariant_(std::move(invariant)), phase_(std::move(phase)) {}

  const std::string& invariant() const { return invariant_; }
  const std::string& phase() const { return phase_; }

 private:
  std::string invariant_;
  std::string phase_;
};

}  // namespace ccsel
