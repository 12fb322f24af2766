#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace rs {

struct CallEdge {
  std::uint64_t caller = 0;
  std::uint64_t callee = 0;
};

// Undirected acquaintance graph. Immutable after construction; concurrent
// reads are safe.
class SocialGraph {
 public:
  static constexpr std::size_t kDefaultDegreeCap = 1000;

  // One edge per pair with at least one call in either direction. Nodes whose
  // degree exceeds degree_cap are dropped with their incident edges, in a
  // single pass after construction.
  static SocialGraph from_calls(std::span<const CallEdge> calls,
                                std::size_t degree_cap = kDefaultDegreeCap);

  static SocialGraph from_edges(std::span<const std::pair<std::uint64_t, std::uint64_t>> edges,
                                std::size_t degree_cap = kDefaultDegreeCap);

  // Preferential attachment: each new node attaches to edges_per_node distinct
  // existing nodes picked proportionally to degree (mean degree ~ 2m).
  // node_ids, when non-empty, relabels node i as node_ids[i].
  static SocialGraph preferential_attachment(std::size_t n, std::size_t edges_per_node,
                                             std::uint64_t seed,
                                             std::span<const std::uint64_t> node_ids = {});

  static SocialGraph load_edge_csv(const std::string& path);
  void save_edge_csv(const std::string& path) const;

  bool has_node(std::uint64_t u) const;
  bool has_edge(std::uint64_t u, std::uint64_t v) const;
  std::size_t degree(std::uint64_t u) const;
  std::size_t node_count() const { return adj_.size(); }
  std::size_t edge_count() const;
  std::size_t max_degree() const;
  const std::unordered_map<std::uint64_t, std::vector<std::uint64_t>>& adjacency() const {
    return adj_;
  }

  // Shortest-path distance <= k, k in {1, 2}. False if either node is absent.
  bool within_k_hops(std::uint64_t u, std::uint64_t v, int k) const;

 private:
  void finalize(std::size_t degree_cap);
  std::unordered_map<std::uint64_t, std::vector<std::uint64_t>> adj_;  // sorted lists
};

// Per-node (mean neighbor degree) / (own degree) for nodes with degree >= 1,
// sorted ascending.
std::vector<double> friendship_paradox_ratios(const SocialGraph& g);

}  // namespace rs
