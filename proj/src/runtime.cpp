#include "ccsel/runtime.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include "ccsel/counting.hpp"
#include "ccsel/errors.hpp"

namespace ccsel {

void CliqueConfig::validate() const {
  if (p < 2) throw ConfigError("clique needs at least 2 nodes, got p=" + std::to_string(p));
  if (bandwidth < 1) throw ConfigError("bandwidth must be at least 1 word per link");
  if (c_sort < 1) throw ConfigError("c_sort must be at least 1 round");
}

Clique::Clique(const CliqueConfig& config) : config_(config) {
  nodes_.resize(config_.p);
  for (NodeId v = 0; v < config_.p; ++v) {
    nodes_[v].id = v;
    nodes_[v].inbox.resize(config_.p);
  }
}

Clique Clique::load_instance(std::span<const TaggedElement> elements, const CliqueConfig& config) {
  config.validate();
  if (elements.empty()) throw InstanceError("instance has no elements");
  Clique clique(config);
  for (auto& node : clique.nodes_) node.local_set.reserve(elements.size() / config.p + 1);
  for (std::size_t i = 0; i < elements.size(); ++i) {
    clique.nodes_[i % config.p].local_set.push_back(elements[i]);
  }
  return clique;
}

std::uint64_t Clique::total_size() const {
  std::uint64_t total = 0;
  for (const auto& node : nodes_) total += node.local_set.size();
  return total;
}

std::vector<std::uint64_t> Clique::loads() const {
  std::vector<std::uint64_t> out;
  out.reserve(nodes_.size());
  for (const auto& node : nodes_) out.push_back(node.local_set.size());
  return out;
}

std::vector<TaggedElement> Clique::gather_all() const {
  std::vector<TaggedElement> out;
  out.reserve(total_size());
  for (const auto& node : nodes_) out.insert(out.end(), node.local_set.begin(), node.local_set.end());
  return out;
}

void Clique::begin_phase(std::string label) { phase_ = std::move(label); }

void Clique::charge_all(std::uint64_t ops) {
  for (auto& node : nodes_) node.ops += ops;
}

void Clique::count_round(std::uint64_t max_link_words) {
  ++rounds_total_;
  max_link_words_ = std::max(max_link_words_, max_link_words);
  auto it = std::find_if(rounds_by_phase_.begin(), rounds_by_phase_.end(),
                         [&](const auto& entry) { return entry.first == phase_; });
  if (it == rounds_by_phase_.end()) {
    rounds_by_phase_.emplace_back(phase_, 1);
  } else {
    ++it->second;
  }
  append_trace(max_link_words);
}

void Clique::append_trace(std::uint64_t max_link_words) {
  if (!config_.record_trace) return;
  std::ostringstream line;
  line << rounds_total_ << '\t' << phase_ << '\t' << max_link_words << '\t';
  for (std::size_t v = 0; v < nodes_.size(); ++v) {
    if (v != 0) line << ',';
    line << nodes_[v].local_set.size();
  }
  trace_.push_back(line.str());
}

void Clique::exchange(const Outbox& outgoing) {
  const std::uint32_t p = config_.p;
  std::vector<std::uint64_t> link(static_cast<std::size_t>(p) * p, 0);
  std::uint64_t busiest = 0;
  for (NodeId src = 0; src < outgoing.size() && src < p; ++src) {
    for (const auto& [dst, word] : outgoing[src]) {
      if (dst >= p) throw ConfigError("message addressed to unknown node " + std::to_string(dst));
      if (dst == src) continue;
      busiest = std::max(busiest, ++link[static_cast<std::size_t>(src) * p + dst]);
    }
  }
  if (config_.strict_bandwidth && busiest > config_.bandwidth) {
    for (NodeId src = 0; src < p; ++src) {
      for (NodeId dst = 0; dst < p; ++dst) {
        const auto words = link[static_cast<std::size_t>(src) * p + dst];
        if (words > config_.bandwidth) throw BandwidthViolation(src, dst, words, config_.bandwidth);
      }
    }
  }

  for (auto& node : nodes_) {
    for (auto& queue : node.inbox) queue.clear();
  }
  for (NodeId src = 0; src < outgoing.size() && src < p; ++src) {
    for (const auto& [dst, word] : outgoing[src]) {
      nodes_[dst].inbox[src].push_back(word);
      if (dst == src) continue;
      ++nodes_[src].ops;
      ++nodes_[src].words_sent;
      ++nodes_[dst].ops;
    }
  }
  count_round(busiest);
}

std::vector<Inbox> Clique::route(const Outbox& outgoing, std::uint64_t min_rounds) {
  const std::uint32_t p = config_.p;
  const std::uint64_t bandwidth = config_.bandwidth;

  // Per-link FIFO queues; self-addressed words are delivered immediately.
  std::vector<Inbox> received(p, Inbox(p));
  std::vector<std::vector<std::vector<Word>>> queues(p, std::vector<std::vector<Word>>(p));
  std::uint64_t busiest = 0;
  for (NodeId src = 0; src < outgoing.size() && src < p; ++src) {
    for (const auto& [dst, word] : outgoing[src]) {
      if (dst >= p) throw ConfigError("message addressed to unknown node " + std::to_string(dst));
      if (dst == src) {
        received[src][src].push_back(word);
      } else {
        queues[src][dst].push_back(word);
        busiest = std::max<std::uint64_t>(busiest, queues[src][dst].size());
      }
    }
  }

  const std::uint64_t rounds = std::max(min_rounds, (busiest + bandwidth - 1) / bandwidth);
  for (std::uint64_t r = 0; r < rounds; ++r) {
    Outbox batch(p);
    const std::uint64_t begin = r * bandwidth;
    for (NodeId src = 0; src < p; ++src) {
      for (NodeId dst = 0; dst < p; ++dst) {
        const auto& queue = queues[src][dst];
        for (std::uint64_t i = begin; i < queue.size() && i < begin + bandwidth; ++i) {
          batch[src].emplace_back(dst, queue[i]);
        }
      }
    }
    exchange(batch);
    for (NodeId dst = 0; dst < p; ++dst) {
      for (NodeId src = 0; src < p; ++src) {
        if (src == dst) continue;
        auto& in = nodes_[dst].inbox[src];
        received[dst][src].insert(received[dst][src].end(), in.begin(), in.end());
      }
    }
  }
  return received;
}

Inbox Clique::broadcast(const std::vector<std::vector<Word>>& source_words) {
  const std::uint32_t p = config_.p;
  const std::uint64_t bandwidth = config_.bandwidth;
  std::uint64_t longest = 0;
  for (const auto& words : source_words) longest = std::max<std::uint64_t>(longest, words.size());
  const std::uint64_t rounds = (longest + bandwidth - 1) / bandwidth;

  for (std::uint64_t r = 0; r < rounds; ++r) {
    Outbox batch(p);
    const std::uint64_t begin = r * bandwidth;
    for (NodeId src = 0; src < source_words.size() && src < p; ++src) {
      const auto& words = source_words[src];
      for (std::uint64_t i = begin; i < words.size() && i < begin + bandwidth; ++i) {
        for (NodeId dst = 0; dst < p; ++dst) {
          if (dst != src) batch[src].emplace_back(dst, words[i]);
        }
      }
    }
    exchange(batch);
  }

  Inbox all(p);
  for (NodeId src = 0; src < source_words.size() && src < p; ++src) all[src] = source_words[src];
  return all;
}

std::vector<std::vector<TaggedElement>> Clique::distributed_sort(
    const std::vector<std::vector<TaggedElement>>& items, const std::string& label) {
  const std::uint32_t p = config_.p;
  const std::string saved = phase_;
  begin_phase(label);

  std::vector<TaggedElement> all;
  for (const auto& block : items) all.insert(all.end(), block.begin(), block.end());
  const std::uint64_t total = all.size();

  std::vector<std::vector<TaggedElement>> placed(p);
  if (config_.sort_mode == SortMode::kCharged) {
    // Item movement and the sort of each received block are charged to the
    // nodes; the routing itself costs a fixed c_sort rounds. A block is sorted
    // in arrival order (by source node, then send order).
    std::vector<std::size_t> order(total);
    for (std::size_t i = 0; i < total; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return all[a] < all[b]; });
    std::uint64_t offset = 0;
    for (NodeId v = 0; v < p; ++v) {
      const std::uint64_t len = total / p + (v < total % p ? 1 : 0);
      std::vector<std::size_t> arrival(order.begin() + static_cast<std::ptrdiff_t>(offset),
                                       order.begin() + static_cast<std::ptrdiff_t>(offset + len));
      offset += len;
      std::sort(arrival.begin(), arrival.end());
      placed[v].reserve(len);
      for (auto i : arrival) placed[v].push_back(all[i]);
      std::uint64_t comparisons = 0;
      std::sort(placed[v].begin(), placed[v].end(), CountingLess{&comparisons});
      const std::uint64_t sent = v < items.size() ? items[v].size() : 0;
      nodes_[v].ops += sent + len + comparisons;
      nodes_[v].words_sent += sent;
    }
    for (std::uint32_t r = 0; r < config_.c_sort; ++r) {
      ++rounds_total_;
      ++charged_rounds_;
      append_trace(0);
    }
  } else {
    std::vector<std::vector<Word>> words(p);
    for (NodeId v = 0; v < p && v < items.size(); ++v) {
      for (const auto& e : items[v]) words[v].emplace_back(e);
    }
    broadcast(words);
    // Every node sorts the same union; the count is identical for all of them.
    std::uint64_t comparisons = 0;
    std::sort(all.begin(), all.end(), CountingLess{&comparisons});
    charge_all(comparisons);
    std::uint64_t offset = 0;
    for (NodeId v = 0; v < p; ++v) {
      const std::uint64_t len = total / p + (v < total % p ? 1 : 0);
      placed[v].assign(all.begin() + static_cast<std::ptrdiff_t>(offset),
                       all.begin() + static_cast<std::ptrdiff_t>(offset + len));
      offset += len;
    }
  }

  begin_phase(saved);
  return placed;
}

CliqueMetrics Clique::metrics_snapshot() const {
  CliqueMetrics m;
  m.rounds_total = rounds_total_;
  m.rounds_by_phase = rounds_by_phase_;
  m.charged_rounds = charged_rounds_;
  m.max_words_per_link_round = max_link_words_;
  for (const auto& node : nodes_) {
    m.words_sent_per_node.push_back(node.words_sent);
    m.ops_per_node.push_back(node.ops);
    m.max_ops_per_node = std::max(m.max_ops_per_node, node.ops);
  }
  return m;
}

void Clique::write_trace(std::ostream& os) const {
  for (const auto& line : trace_) os << line << '\n';
}

}  // namespace ccsel
