#include "rs/social.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace rs {

namespace {

bool sorted_contains(const std::vector<std::uint64_t>& v, std::uint64_t x) {
  return std::binary_search(v.begin(), v.end(), x);
}

}  // namespace

void SocialGraph::finalize(std::size_t degree_cap) {
  for (auto& [u, nbrs] : adj_) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
  std::vector<std::uint64_t> dropped;
  for (const auto& [u, nbrs] : adj_)
    if (nbrs.size() > degree_cap) dropped.push_back(u);
  if (dropped.empty()) return;
  std::sort(dropped.begin(), dropped.end());
  for (std::uint64_t u : dropped) adj_.erase(u);
  for (auto& [u, nbrs] : adj_) {
    nbrs.erase(std::remove_if(nbrs.begin(), nbrs.end(),
                              [&](std::uint64_t v) { return sorted_contains(dropped, v); }),
               nbrs.end());
  }
}

SocialGraph SocialGraph::from_calls(std::span<const CallEdge> calls, std::size_t degree_cap) {
  SocialGraph g;
  for (const auto& e : calls) {
    if (e.caller == e.callee)
      throw std::invalid_argument("from_calls: self-call record");
    g.adj_[e.caller].push_back(e.callee);
    g.adj_[e.callee].push_back(e.caller);
  }
  g.finalize(degree_cap);
  return g;
}

SocialGraph SocialGraph::from_edges(
    std::span<const std::pair<std::uint64_t, std::uint64_t>> edges, std::size_t degree_cap) {
  SocialGraph g;
  for (const auto& [a, b] : edges) {
    if (a == b) throw std::invalid_argument("from_edges: self-loop");
    g.adj_[a].push_back(b);
    g.adj_[b].push_back(a);
  }
  g.finalize(degree_cap);
  return g;
}

SocialGraph SocialGraph::preferential_attachment(std::size_t n, std::size_t edges_per_node,
                                                 std::uint64_t seed,
                                                 std::span<const std::uint64_t> node_ids) {
  if (!node_ids.empty() && node_ids.size() != n)
    throw std::invalid_argument("preferential_attachment: node_ids size mismatch");
  const std::size_t m = std::max<std::size_t>(1, edges_per_node);
  if (n < m + 1) throw std::invalid_argument("preferential_attachment: n too small");
  auto label = [&](std::size_t i) { return node_ids.empty() ? i + 1 : node_ids[i]; };

  std::mt19937_64 rng(seed);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> edges;
  std::vector<std::size_t> endpoints;  // one entry per half-edge, degree-proportional
  // seed clique over the first m+1 nodes
  for (std::size_t i = 0; i <= m; ++i)
    for (std::size_t j = i + 1; j <= m; ++j) {
      edges.emplace_back(label(i), label(j));
      endpoints.push_back(i);
      endpoints.push_back(j);
    }
  for (std::size_t i = m + 1; i < n; ++i) {
    std::set<std::size_t> targets;
    while (targets.size() < m)
      targets.insert(endpoints[rng() % endpoints.size()]);
    for (std::size_t t : targets) {
      edges.emplace_back(label(i), label(t));
      endpoints.push_back(i);
      endpoints.push_back(t);
    }
  }
  return from_edges(edges, ~std::size_t{0});
}

SocialGraph SocialGraph::load_edge_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> edges;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line == "user_a,user_b") continue;
    std::stringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b))
      throw std::runtime_error(path + " line " + std::to_string(lineno) + ": bad edge");
    edges.emplace_back(std::stoull(a), std::stoull(b));
  }
  return from_edges(edges);
}

void SocialGraph::save_edge_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "user_a,user_b\n";
  std::vector<std::pair<std::uint64_t, std::uint64_t>> edges;
  for (const auto& [u, nbrs] : adj_)
    for (std::uint64_t v : nbrs)
      if (u < v) edges.emplace_back(u, v);
  std::sort(edges.begin(), edges.end());
  for (const auto& [a, b] : edges) out << a << "," << b << "\n";
}

bool SocialGraph::has_node(std::uint64_t u) const { return adj_.count(u) > 0; }

bool SocialGraph::has_edge(std::uint64_t u, std::uint64_t v) const {
  auto it = adj_.find(u);
  return it != adj_.end() && sorted_contains(it->second, v);
}

std::size_t SocialGraph::degree(std::uint64_t u) const {
  auto it = adj_.find(u);
  return it == adj_.end() ? 0 : it->second.size();
}

std::size_t SocialGraph::edge_count() const {
  std::size_t half = 0;
  for (const auto& [u, nbrs] : adj_) half += nbrs.size();
  return half / 2;
}

std::size_t SocialGraph::max_degree() const {
  std::size_t d = 0;
  for (const auto& [u, nbrs] : adj_) d = std::max(d, nbrs.size());
  return d;
}

bool SocialGraph::within_k_hops(std::uint64_t u, std::uint64_t v, int k) const {
  if (k != 1 && k != 2) throw std::invalid_argument("within_k_hops: k must be 1 or 2");
  auto iu = adj_.find(u);
  auto iv = adj_.find(v);
  if (iu == adj_.end() || iv == adj_.end()) return false;
  if (u == v) return true;
  if (sorted_contains(iu->second, v)) return true;
  if (k == 1) return false;
  // common neighbor; 2-hop paths may pass through nodes without home/work data
  const auto& a = iu->second.size() <= iv->second.size() ? iu->second : iv->second;
  const auto& b = iu->second.size() <= iv->second.size() ? iv->second : iu->second;
  for (std::uint64_t w : a)
    if (sorted_contains(b, w)) return true;
  return false;
}

std::vector<double> friendship_paradox_ratios(const SocialGraph& g) {
  if (g.node_count() == 0)
    throw std::invalid_argument("friendship_paradox_ratios: empty graph");
  std::vector<double> ratios;
  for (const auto& [u, nbrs] : g.adjacency()) {
    if (nbrs.empty()) continue;
    double sum = 0.0;
    for (std::uint64_t v : nbrs) sum += static_cast<double>(g.degree(v));
    ratios.push_back(sum / static_cast<double>(nbrs.size()) /
                     static_cast<double>(nbrs.size()));
  }
  std::sort(ratios.begin(), ratios.end());
  return ratios;
}

}  // namespace rs
