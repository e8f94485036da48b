#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bcast/error.hpp"
#include "bcast/rational.hpp"

namespace bcast {

using NodeId = std::size_t;
using EdgeId = std::size_t;

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

struct Edge {
  NodeId from = 0;
  NodeId to = 0;
  Rational capacity = 1;  // packets per slot
};

/// Directed multigraph with per-edge capacities and a designated source.
/// Nodes are dense indices 0..n-1; edges are identified by list position,
/// so parallel edges stay distinguishable. Immutable after construction.
class Network {
 public:
  Network(std::vector<std::string> names, NodeId source, std::vector<Edge> edges)
      : names_(std::move(names)), source_(source), edges_(std::move(edges)) {
    if (names_.empty()) throw Error(ErrorCode::ValidationError, "network has no nodes");
    if (source_ >= names_.size())
      throw Error(ErrorCode::ValidationError, "source index out of range");
    if (edges_.empty() && names_.size() > 1)
      throw Error(ErrorCode::ValidationError, "network with several nodes has no edges");
    in_.resize(names_.size());
    out_.resize(names_.size());
    for (EdgeId e = 0; e < edges_.size(); ++e) {
      const Edge& edge = edges_[e];
      if (edge.from >= names_.size() || edge.to >= names_.size())
        throw Error(ErrorCode::ValidationError,
                    "edge " + std::to_string(e) + " has an endpoint out of range");
      if (edge.from == edge.to)
        throw Error(ErrorCode::ValidationError, "edge " + std::to_string(e) + " is a self-loop");
      if (sgn(edge.capacity) < 0)
        throw Error(ErrorCode::ValidationError,
                    "edge " + std::to_string(e) + " has negative capacity");
      out_[edge.from].push_back(e);
      in_[edge.to].push_back(e);
    }
  }

  std::size_t node_count() const noexcept { return names_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  NodeId source() const noexcept { return source_; }

  const Edge& edge(EdgeId e) const { return edges_.at(e); }
  std::span<const Edge> edges() const noexcept { return edges_; }

  std::span<const EdgeId> in_edges(NodeId v) const { return in_.at(v); }
  std::span<const EdgeId> out_edges(NodeId v) const { return out_.at(v); }
  std::size_t in_degree(NodeId v) const { return in_.at(v).size(); }

  const std::string& name(NodeId v) const { return names_.at(v); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  std::optional<NodeId> find_node(std::string_view name) const {
    for (NodeId v = 0; v < names_.size(); ++v)
      if (names_[v] == name) return v;
    return std::nullopt;
  }

  std::string edge_label(EdgeId e) const {
    return names_[edges_.at(e).from] + "->" + names_[edges_.at(e).to];
  }

  bool unit_capacity() const {
    return std::all_of(edges_.begin(), edges_.end(),
                       [](const Edge& e) { return e.capacity == 1; });
  }

  bool integer_capacities() const {
    return std::all_of(edges_.begin(), edges_.end(),
                       [](const Edge& e) { return is_integer(e.capacity); });
  }

  /// Capacities as integers; simulations only run on integer capacities.
  std::vector<std::int64_t> integer_capacity_vector() const {
    std::vector<std::int64_t> caps;
    caps.reserve(edges_.size());
    for (const Edge& e : edges_) caps.push_back(to_int64(e.capacity));
    return caps;
  }

  friend bool operator==(const Network& a, const Network& b) {
    if (a.names_ != b.names_ || a.source_ != b.source_ || a.edges_.size() != b.edges_.size())
      return false;
    for (std::size_t e = 0; e < a.edges_.size(); ++e) {
      const Edge& x = a.edges_[e];
      const Edge& y = b.edges_[e];
      if (x.from != y.from || x.to != y.to || x.capacity != y.capacity) return false;
    }
    return true;
  }

 private:
  std::vector<std::string> names_;
  NodeId source_;
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeId>> in_;
  std::vector<std::vector<EdgeId>> out_;
};

/// A node set U holding the source (U != V) and the edges leaving it.
struct ProperCut {
  std::vector<NodeId> members;   // sorted
  std::vector<EdgeId> crossing;  // sorted, tail in U and head outside U

  bool contains(NodeId v) const {
    return std::binary_search(members.begin(), members.end(), v);
  }
  friend bool operator==(const ProperCut&, const ProperCut&) = default;
};

/// Edge set of a spanning tree directed away from the source.
struct Arborescence {
  std::vector<EdgeId> edges;  // sorted
  friend bool operator==(const Arborescence&, const Arborescence&) = default;
};

/// Edges with tail inside `in_cut` and head outside it, by edge scan.
inline std::vector<EdgeId> crossing_edges(const Network& net, const std::vector<bool>& in_cut) {
  std::vector<EdgeId> crossing;
  for (EdgeId e = 0; e < net.edge_count(); ++e) {
    const Edge& edge = net.edge(e);
    if (in_cut[edge.from] && !in_cut[edge.to]) crossing.push_back(e);
  }
  return crossing;
}

inline ProperCut make_cut(const Network& net, std::vector<NodeId> members) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  std::vector<bool> in_cut(net.node_count(), false);
  for (NodeId v : members) in_cut.at(v) = true;
  if (!in_cut[net.source()])
    throw Error(ErrorCode::InvalidArgument, "a proper cut must contain the source");
  if (members.size() == net.node_count())
    throw Error(ErrorCode::InvalidArgument, "a proper cut must exclude some node");
  return ProperCut{std::move(members), crossing_edges(net, in_cut)};
}

/// One directed cycle as a node sequence a, b, ..., a, rotated so that it
/// starts at its smallest node. Empty when the graph is acyclic.
inline std::optional<std::vector<NodeId>> find_cycle(const Network& net) {
  enum class Mark : std::uint8_t { White, Gray, Black };
  const std::size_t n = net.node_count();
  std::vector<Mark> mark(n, Mark::White);
  std::vector<NodeId> path;
  std::vector<std::size_t> cursor(n, 0);

  for (NodeId root = 0; root < n; ++root) {
    if (mark[root] != Mark::White) continue;
    path.assign(1, root);
    mark[root] = Mark::Gray;
    while (!path.empty()) {
      NodeId u = path.back();
      auto out = net.out_edges(u);
      if (cursor[u] == out.size()) {
        mark[u] = Mark::Black;
        path.pop_back();
        continue;
      }
      NodeId w = net.edge(out[cursor[u]++]).to;
      if (mark[w] == Mark::White) {
        mark[w] = Mark::Gray;
        path.push_back(w);
      } else if (mark[w] == Mark::Gray) {
        auto start = std::find(path.begin(), path.end(), w);
        std::vector<NodeId> cycle(start, path.end());
        std::rotate(cycle.begin(), std::min_element(cycle.begin(), cycle.end()), cycle.end());
        cycle.push_back(cycle.front());
        return cycle;
      }
    }
  }
  return std::nullopt;
}

/// Validates DAG mode and returns a topological order (smallest index first
/// among ready nodes). The source must be the only node without in-edges.
inline std::vector<NodeId> topological_order(const Network& net) {
  if (auto cycle = find_cycle(net)) {
    std::string text;
    for (std::size_t i = 0; i < cycle->size(); ++i)
      text += (i ? "->" : "") + net.name((*cycle)[i]);
    throw CyclicGraphError(*cycle, "graph has a directed cycle " + text);
  }
  if (net.in_degree(net.source()) != 0)
    throw Error(ErrorCode::SourceHasInEdges, "source " + net.name(net.source()) + " has in-edges");

  const std::size_t n = net.node_count();
  std::vector<std::size_t> pending(n);
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (NodeId v = 0; v < n; ++v) {
    pending[v] = net.in_degree(v);
    if (pending[v] == 0 && v != net.source())
      throw Error(ErrorCode::NotConnected,
                  "node " + net.name(v) + " has no in-edges and is unreachable from the source");
  }
  ready.push(net.source());
  std::vector<NodeId> order;
  order.reserve(n);
  while (!ready.empty()) {
    NodeId u = ready.top();
    ready.pop();
    order.push_back(u);
    for (EdgeId e : net.out_edges(u))
      if (--pending[net.edge(e).to] == 0) ready.push(net.edge(e).to);
  }
  return order;
}

inline bool is_dag(const Network& net) { return !find_cycle(net).has_value(); }

/// Every subset of V that holds the source, except V itself, exactly once.
/// The number of cuts is 2^(|V|-1) - 1, hence the node limit.
inline std::vector<ProperCut> enumerate_proper_cuts(const Network& net,
                                                    std::size_t node_limit = 20) {
  const std::size_t n = net.node_count();
  if (n > node_limit)
    throw Error(ErrorCode::TooManyNodes, "cut enumeration limited to " +
                                             std::to_string(node_limit) + " nodes, got " +
                                             std::to_string(n));
  std::vector<NodeId> others;
  for (NodeId v = 0; v < n; ++v)
    if (v != net.source()) others.push_back(v);

  std::vector<ProperCut> cuts;
  const std::uint64_t full = (std::uint64_t{1} << others.size()) - 1;
  cuts.reserve(full);
  std::vector<bool> in_cut(n);
  for (std::uint64_t mask = 0; mask < full; ++mask) {
    std::fill(in_cut.begin(), in_cut.end(), false);
    in_cut[net.source()] = true;
    std::vector<NodeId> members{net.source()};
    for (std::size_t i = 0; i < others.size(); ++i)
      if (mask >> i & 1) {
        in_cut[others[i]] = true;
        members.push_back(others[i]);
      }
    std::sort(members.begin(), members.end());
    cuts.push_back(ProperCut{std::move(members), crossing_edges(net, in_cut)});
  }
  return cuts;
}

/// The cut V \ {v} for every non-source v; its crossing edges are the
/// in-edges of v.
inline std::vector<ProperCut> receiver_cuts(const Network& net) {
  std::vector<ProperCut> cuts;
  for (NodeId v = 0; v < net.node_count(); ++v) {
    if (v == net.source()) continue;
    ProperCut cut;
    for (NodeId u = 0; u < net.node_count(); ++u)
      if (u != v) cut.members.push_back(u);
    cut.crossing.assign(net.in_edges(v).begin(), net.in_edges(v).end());
    std::sort(cut.crossing.begin(), cut.crossing.end());
    cuts.push_back(std::move(cut));
  }
  return cuts;
}

/// Checks the arborescence invariants on any graph (cyclic or not).
inline bool is_arborescence(const Network& net, const Arborescence& tree) {
  const std::size_t n = net.node_count();
  if (tree.edges.size() + 1 != n) return false;
  std::vector<NodeId> parent(n, npos);
  for (EdgeId e : tree.edges) {
    if (e >= net.edge_count()) return false;
    NodeId head = net.edge(e).to;
    if (head == net.source() || parent[head] != npos) return false;
    parent[head] = net.edge(e).from;
  }
  for (NodeId v = 0; v < n; ++v) {
    NodeId u = v;
    for (std::size_t steps = 0; u != net.source(); ++steps) {
      if (steps >= n || parent[u] == npos) return false;
      u = parent[u];
    }
  }
  return true;
}

struct ArborescenceEnumeration {
  std::uint64_t count = 0;            // exact, even when materialization is capped
  std::vector<Arborescence> trees;    // at most `limit` entries
};

/// For a DAG every non-source node picks one in-edge independently, so the
/// count is the product of in-degrees. Trees are produced in odometer order
/// with the highest-index node varying fastest.
inline ArborescenceEnumeration enumerate_arborescences(const Network& net,
                                                       std::uint64_t limit = 100000) {
  (void)topological_order(net);  // DAG mode; throws NotConnected on orphans

  std::vector<NodeId> receivers;
  ArborescenceEnumeration out;
  out.count = 1;
  for (NodeId v = 0; v < net.node_count(); ++v) {
    if (v == net.source()) continue;
    receivers.push_back(v);
    const std::uint64_t d = net.in_degree(v);
    if (out.count > std::numeric_limits<std::uint64_t>::max() / d)
      throw Error(ErrorCode::SizeLimit, "arborescence count overflows 64 bits");
    out.count *= d;
  }

  const std::uint64_t materialize = std::min(out.count, limit);
  out.trees.reserve(materialize);
  std::vector<std::size_t> digit(receivers.size(), 0);
  for (std::uint64_t k = 0; k < materialize; ++k) {
    Arborescence tree;
    for (std::size_t i = 0; i < receivers.size(); ++i)
      tree.edges.push_back(net.in_edges(receivers[i])[digit[i]]);
    std::sort(tree.edges.begin(), tree.edges.end());
    out.trees.push_back(std::move(tree));
    for (std::size_t i = receivers.size(); i-- > 0;) {
      if (++digit[i] < net.in_degree(receivers[i])) break;
      digit[i] = 0;
    }
  }
  return out;
}

/// Maximum number of pairwise edge-disjoint arborescences by exhaustive
/// packing. Works on cyclic graphs too; exponential, so small inputs only.
inline std::size_t max_disjoint_trees_bruteforce(const Network& net,
                                                 std::size_t node_limit = 8,
                                                 std::size_t edge_limit = 14) {
  const std::size_t n = net.node_count();
  const std::size_t m = net.edge_count();
  if (n > node_limit || m > edge_limit)
    throw Error(ErrorCode::SizeLimit, "brute-force tree packing limited to " +
                                          std::to_string(node_limit) + " nodes and " +
                                          std::to_string(edge_limit) + " edges");
  if (!net.unit_capacity())
    throw Error(ErrorCode::NotUnitCapacity, "tree packing expects unit capacities");
  if (n == 1) return 0;

  // All arborescences as edge bitmasks: each non-source node picks any
  // in-edge; keep the choices that reach the source.
  std::vector<NodeId> receivers;
  for (NodeId v = 0; v < n; ++v)
    if (v != net.source()) {
      if (net.in_degree(v) == 0) return 0;
      receivers.push_back(v);
    }
  std::vector<std::uint32_t> masks;
  std::vector<std::size_t> digit(receivers.size(), 0);
  while (true) {
    Arborescence tree;
    std::uint32_t mask = 0;
    for (std::size_t i = 0; i < receivers.size(); ++i) {
      EdgeId e = net.in_edges(receivers[i])[digit[i]];
      tree.edges.push_back(e);
      mask |= std::uint32_t{1} << e;
    }
    std::sort(tree.edges.begin(), tree.edges.end());
    if (is_arborescence(net, tree)) masks.push_back(mask);
    std::size_t i = receivers.size();
    while (i-- > 0) {
      if (++digit[i] < net.in_degree(receivers[i])) break;
      digit[i] = 0;
    }
    if (i == npos) break;
  }

  const std::size_t edge_bound = m / (n - 1);
  std::size_t best = 0;
  std::function<void(std::size_t, std::uint32_t, std::size_t)> pack =
      [&](std::size_t start, std::uint32_t used, std::size_t depth) {
        best = std::max(best, depth);
        if (best == edge_bound) return;
        for (std::size_t t = start; t < masks.size(); ++t)
          if ((masks[t] & used) == 0) pack(t + 1, used | masks[t], depth + 1);
      };
  pack(0, 0, 0);
  return best;
}

}  // namespace bcast
