#pragma once

// Synchronous congested-clique simulator.
//
// p nodes, every ordered pair joined by a directed link that carries at most
// B words per round. Algorithms are written as alternating local steps and
// communication rounds; the runtime counts rounds, per-link words and
// per-node local operations (one unit per key comparison, per word sent and
// per word received).

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ccsel/element.hpp"

namespace ccsel {

enum class SortMode { kCharged, kExplicit };

struct CliqueConfig {
  std::uint32_t p = 2;
  std::uint32_t bandwidth = 1;  // words per directed link per round
  SortMode sort_mode = SortMode::kCharged;
  std::uint32_t c_sort = 3;
  bool strict_bandwidth = true;
  bool parallel_nodes = false;  // run node-local steps with OpenMP
  bool record_trace = false;

  /// Throws ConfigError when p < 2, B < 1 or c_sort < 1.
  void validate() const;
};

struct NodeState {
  NodeId id = 0;
  std::vector<TaggedElement> local_set;
  std::vector<std::vector<Word>> inbox;  // indexed by source node
  std::uint64_t ops = 0;
  std::uint64_t words_sent = 0;
};

struct CliqueMetrics {
  std::uint64_t rounds_total = 0;
  std::vector<std::pair<std::string, std::uint64_t>> rounds_by_phase;  // simulated rounds only
  std::uint64_t charged_rounds = 0;
  std::uint64_t max_words_per_link_round = 0;
  std::vector<std::uint64_t> words_sent_per_node;
  std::vector<std::uint64_t> ops_per_node;
  std::uint64_t max_ops_per_node = 0;
};

/// Per-source list of (destination, word) pairs queued for one round.
using Outbox = std::vector<std::vector<std::pair<NodeId, Word>>>;
/// Per-source received words.
using Inbox = std::vector<std::vector<Word>>;

class Clique {
 public:
  /// Distributes `elements` round-robin (element i goes to node i mod p).
  static Clique load_instance(std::span<const TaggedElement> elements, const CliqueConfig& config);

  std::uint32_t p() const { return config_.p; }
  const CliqueConfig& config() const { return config_; }

  NodeState& node(NodeId v) { return nodes_[v]; }
  const NodeState& node(NodeId v) const { return nodes_[v]; }
  std::vector<NodeState>& nodes() { return nodes_; }
  const std::vector<NodeState>& nodes() const { return nodes_; }

  std::uint64_t total_size() const;
  std::vector<std::uint64_t> loads() const;
  /// Concatenation of all local sets in node order.
  std::vector<TaggedElement> gather_all() const;

  /// Attributes subsequent rounds to `label`.
  void begin_phase(std::string label);
  const std::string& phase() const { return phase_; }

  /// One synchronous round. Inboxes are replaced by the delivered words.
  /// Strict mode throws BandwidthViolation before delivering anything.
  void exchange(const Outbox& outgoing);

  /// Delivers `outgoing` over as many rounds as the busiest link needs at
  /// bandwidth B (at least `min_rounds`). Self-addressed words stay local and
  /// cost no bandwidth. Returns what each node received, per source, in send
  /// order.
  std::vector<Inbox> route(const Outbox& outgoing, std::uint64_t min_rounds = 0);

  /// Every node sends its words to all other nodes, B words per round, so the
  /// call takes max_v ceil(m_v / B) rounds. Returns the words per source, as
  /// held identically by every node afterwards.
  Inbox broadcast(const std::vector<std::vector<Word>>& source_words);

  /// Globally sorts the items and returns them balanced in contiguous blocks
  /// (node i holds the i-th block; the first total mod p blocks hold one extra
  /// item). Charged mode adds c_sort rounds; explicit mode broadcasts all
  /// items and sorts locally with the rounds counted.
  std::vector<std::vector<TaggedElement>> distributed_sort(
      const std::vector<std::vector<TaggedElement>>& items, const std::string& label);

  void charge(NodeId v, std::uint64_t ops) { nodes_[v].ops += ops; }
  void charge_all(std::uint64_t ops);

  CliqueMetrics metrics_snapshot() const;

  const std::vector<std::string>& trace() const { return trace_; }
  void write_trace(std::ostream& os) const;

  /// Runs `step(node)` for every node. With parallel_nodes the nodes run
  /// concurrently; steps must touch only their own node.
  template <typename Step>
  void for_each_node(Step&& step);

 private:
  explicit Clique(const CliqueConfig& config);

  void count_round(std::uint64_t max_link_words);
  void append_trace(std::uint64_t max_link_words);

  CliqueConfig config_;
  std::vector<NodeState> nodes_;
  std::string phase_ = "init";
  std::uint64_t rounds_total_ = 0;
  std::uint64_t charged_rounds_ = 0;
  std::uint64_t max_link_words_ = 0;
  std::vector<std::pair<std::string, std::uint64_t>> rounds_by_phase_;
  std::vector<std::string> trace_;
};

template <typename Step>
void Clique::for_each_node(Step&& step) {
  const auto count = static_cast<std::int64_t>(nodes_.size());
  if (config_.parallel_nodes) {
#pragma omp parallel for schedule(static)
    for (std::int64_t v = 0; v < count; ++v) step(nodes_[static_cast<std::size_t>(v)]);
  } else {
    for (std::int64_t v = 0; v < count; ++v) step(nodes_[static_cast<std::size_t>(v)]);
  }
}

}  // namespace ccsel
