#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "bcast/bcast.hpp"

namespace oracle {

using bcast::EdgeId;
using bcast::NodeId;

/// Random DAG on nodes 0..n-1 (0 is the source, index order is topological).
/// Every non-source node gets one in-edge from an earlier node, then extra
/// edges up to `edges` total. Parallel edges only when `parallel`.
inline bcast::Network random_dag(std::mt19937_64& rng, std::size_t n, std::size_t edges,
                                 bool parallel, long max_capacity) {
  std::vector<std::string> names;
  for (std::size_t v = 0; v < n; ++v) names.push_back("v" + std::to_string(v));
  std::vector<bcast::Edge> list;
  auto cap = [&] {
    return bcast::Rational(std::uniform_int_distribution<long>(1, max_capacity)(rng));
  };
  auto has = [&](NodeId a, NodeId b) {
    return std::any_of(list.begin(), list.end(), [&](const bcast::Edge& e) { return e.from == a && e.to == b; });
  };
  for (NodeId v = 1; v < n; ++v)
    list.push_back({std::uniform_int_distribution<NodeId>(0, v - 1)(rng), v, cap()});
  const std::size_t possible = n * (n - 1) / 2;
  std::size_t guard = 0;
  while (list.size() < edges && guard++ < 10000) {
    NodeId a = std::uniform_int_distribution<NodeId>(0, n - 1)(rng);
    NodeId b = std::uniform_int_distribution<NodeId>(0, n - 1)(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (!parallel && (has(a, b) || list.size() >= possible)) continue;
    list.push_back({a, b, cap()});
  }
  return bcast::Network(names, 0, list);
}

/// Matching count of the underlying multigraph by checking all 2^m edge sets.
inline std::size_t brute_force_matching_count(const bcast::Network& net) {
  const std::size_t m = net.edge_count();
  std::size_t count = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    std::vector<int> used(net.node_count(), 0);
    bool ok = true;
    for (EdgeId e = 0; e < m && ok; ++e) {
      if (!(mask >> e & 1)) continue;
      const auto& edge = net.edge(e);
      if (used[edge.from]++ || used[edge.to]++) ok = false;
    }
    count += ok;
  }
  return count;
}

/// Involutions of n elements: T(n) = T(n-1) + (n-1) T(n-2).
inline std::uint64_t telephone(std::size_t n) {
  std::uint64_t a = 1, b = 1;  // T(0), T(1)
  if (n == 0) return 1;
  for (std::size_t k = 2; k <= n; ++k) {
    const std::uint64_t c = b + (k - 1) * a;
    a = b;
    b = c;
  }
  return b;
}

/// Capacity LP solved in floating point over every member of S, as an
/// independent check of the exact solver and of the maximal-column shortcut.
inline double capacity_double(const bcast::Network& net, const bcast::ActivationSet& set,
                              const std::vector<bcast::ProperCut>& cuts) {
  const auto columns = set.lp_columns();
  bcast::LinearProgram<double> lp(columns.size() + 1);
  lp.set_objective(columns.size(), 1.0);
  for (const auto& cut : cuts) {
    std::vector<std::pair<std::size_t, double>> row{{columns.size(), 1.0}};
    for (std::size_t l = 0; l < columns.size(); ++l) {
      double v = 0;
      for (EdgeId e : cut.crossing)
        if (columns[l][e]) v += net.edge(e).capacity.get_d();
      if (v != 0) row.emplace_back(l, -v);
    }
    lp.add_row(row, bcast::RowSense::LessEqual, 0.0);
  }
  std::vector<std::pair<std::size_t, double>> simplex;
  for (std::size_t l = 0; l < columns.size(); ++l) simplex.emplace_back(l, 1.0);
  lp.add_row(simplex, bcast::RowSense::Equal, 1.0);
  return bcast::solve(lp).objective;
}

/// In-order forwarding without the all-in-neighbors rule: each edge is up
/// with probability 3/4 per slot and node j takes packets R_j+1, R_j+2, ...
/// over its up in-edges from any in-neighbor already holding them, in a
/// random edge order. Used to exercise cyclic graphs.
class GreedyInOrderPolicy final : public bcast::Policy {
 public:
  GreedyInOrderPolicy(const bcast::Network& net, const bcast::ActivationSet& set, std::uint64_t seed)
      : net_(net), set_(set), caps_(net.integer_capacity_vector()), rng_(seed) {}

  std::string_view name() const noexcept override { return "greedy"; }
  const bcast::ActivationSet& activation_set() const noexcept override { return set_; }

  bcast::PolicyDecision decide(const bcast::SystemState& state) override {
    bcast::PolicyDecision d;
    d.activation = bcast::ActivationVector(net_.edge_count());
    for (EdgeId e = 0; e < net_.edge_count(); ++e) d.activation.set(e, rng_() % 4 != 0);
    d.pulls.assign(net_.node_count(), 0);
    d.offered.assign(net_.node_count(), 0);
    for (NodeId j = 0; j < net_.node_count(); ++j) {
      if (j == net_.source()) continue;
      std::int64_t next = state.received[j] + 1;
      std::vector<EdgeId> in(net_.in_edges(j).begin(), net_.in_edges(j).end());
      std::shuffle(in.begin(), in.end(), rng_);
      for (EdgeId e : in) {
        if (!d.activation[e]) continue;
        d.offered[j] += caps_[e];
        const std::int64_t available = state.received[net_.edge(e).from] - next + 1;
        const std::int64_t count = std::min(caps_[e], available);
        if (count <= 0) continue;
        d.transfers.push_back({e, next, count});
        next += count;
        d.pulls[j] += count;
      }
    }
    std::sort(d.transfers.begin(), d.transfers.end(),
              [](const bcast::Transfer& a, const bcast::Transfer& b) { return a.edge < b.edge; });
    return d;
  }

 private:
  const bcast::Network& net_;
  const bcast::ActivationSet& set_;
  std::vector<std::int64_t> caps_;
  std::mt19937_64 rng_;
};

inline bcast::ActivationVector activation_of(std::size_t edges, std::initializer_list<EdgeId> on) {
  bcast::ActivationVector s(edges);
  for (EdgeId e : on) s.set(e);
  return s;
}

}  // namespace oracle
