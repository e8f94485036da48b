#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <iostream>
#include <memory>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bcast/capacity.hpp"
#include "bcast/error.hpp"
#include "bcast/interference.hpp"
#include "bcast/network.hpp"

namespace bcast {

/// R(t): distinct packets held per node (R at the source counts every packet
/// generated so far) and the slot index.
struct SystemState {
  std::vector<std::int64_t> received;
  std::int64_t slot = 0;

  static SystemState initial(std::size_t nodes) { return {std::vector<std::int64_t>(nodes, 0), 0}; }
  friend bool operator==(const SystemState&, const SystemState&) = default;
};

/// Per-slot deficit quantities driving the optimal policy.
struct DeficitView {
  std::vector<std::int64_t> deficit;              // Q per edge: R_from - R_to
  std::vector<std::int64_t> min_deficit;          // X per node, 0 at the source
  std::vector<NodeId> minimizer;                  // i* per node, npos if none
  std::vector<EdgeId> minimizer_edge;             // edge realizing i*
  std::vector<std::vector<NodeId>> minimized_for; // K per node
  std::vector<std::int64_t> weight;               // W per edge
};

/// Argmin ties go to the smallest tail node, then the smallest edge index.
inline DeficitView compute_deficits(const Network& net, const SystemState& state) {
  const std::size_t n = net.node_count();
  const auto& R = state.received;
  DeficitView view;
  view.deficit.resize(net.edge_count());
  view.min_deficit.assign(n, 0);
  view.minimizer.assign(n, npos);
  view.minimizer_edge.assign(n, npos);
  view.minimized_for.assign(n, {});
  view.weight.assign(net.edge_count(), 0);

  for (EdgeId e = 0; e < net.edge_count(); ++e)
    view.deficit[e] = R[net.edge(e).from] - R[net.edge(e).to];

  for (NodeId j = 0; j < n; ++j) {
    if (j == net.source()) continue;
    for (EdgeId e : net.in_edges(j)) {
      const NodeId i = net.edge(e).from;
      const EdgeId best = view.minimizer_edge[j];
      if (best == npos || view.deficit[e] < view.deficit[best] ||
          (view.deficit[e] == view.deficit[best] && i < view.minimizer[j])) {
        view.minimizer_edge[j] = e;
        view.minimizer[j] = i;
      }
    }
    if (view.minimizer_edge[j] != npos) {
      view.min_deficit[j] = view.deficit[view.minimizer_edge[j]];
      view.minimized_for[view.minimizer[j]].push_back(j);
    }
  }

  for (EdgeId e = 0; e < net.edge_count(); ++e) {
    const NodeId j = net.edge(e).to;
    if (j == net.source()) continue;
    std::int64_t w = view.min_deficit[j];
    for (NodeId k : view.minimized_for[j]) w -= view.min_deficit[k];
    view.weight[e] = std::max<std::int64_t>(0, w);
  }
  return view;
}

/// A contiguous run of packet ids sent over one edge in one slot.
struct Transfer {
  EdgeId edge = 0;
  std::int64_t first_packet = 0;
  std::int64_t count = 0;
  friend bool operator==(const Transfer&, const Transfer&) = default;
};

struct PolicyDecision {
  ActivationVector activation;
  std::vector<std::int64_t> pulls;    // new packets per node this slot
  std::vector<Transfer> transfers;
  std::vector<std::int64_t> offered;  // capacity of activated in-edges per node
};

namespace detail {

inline std::vector<std::int64_t> offered_capacity(const Network& net,
                                                  std::span<const std::int64_t> caps,
                                                  const ActivationVector& s) {
  std::vector<std::int64_t> offered(net.node_count(), 0);
  for (EdgeId e = 0; e < net.edge_count(); ++e)
    if (s[e]) offered[net.edge(e).to] += caps[e];
  return offered;
}

// Node j takes packets R_j+1 .. R_j+min(X_j, offered_j), split over its
// activated in-edges in increasing edge order, each edge up to capacity.
inline PolicyDecision pull_in_order(const Network& net, std::span<const std::int64_t> caps,
                                   const SystemState& state, const DeficitView& view,
                                   ActivationVector activation) {
  PolicyDecision d;
  d.offered = offered_capacity(net, caps, activation);
  d.pulls.assign(net.node_count(), 0);
  for (NodeId j = 0; j < net.node_count(); ++j) {
    if (j == net.source()) continue;
    std::int64_t remaining = std::min(view.min_deficit[j], d.offered[j]);
    d.pulls[j] = std::max<std::int64_t>(0, remaining);
    std::int64_t next = state.received[j] + 1;
    for (EdgeId e : net.in_edges(j)) {
      if (remaining <= 0) break;
      if (!activation[e]) continue;
      const std::int64_t count = std::min(caps[e], remaining);
      if (count == 0) continue;
      d.transfers.push_back({e, next, count});
      next += count;
      remaining -= count;
    }
  }
  std::sort(d.transfers.begin(), d.transfers.end(),
            [](const Transfer& a, const Transfer& b) { return a.edge < b.edge; });
  d.activation = std::move(activation);
  return d;
}

}  // namespace detail

/// One slot of the optimal policy: activation maximizing sum c_e W_e s_e
/// over S, then in-order pulls bounded by X_j.
inline PolicyDecision pistar_decide(const Network& net, const ActivationSet& set,
                                    const SystemState& state) {
  const std::vector<std::int64_t> caps = net.integer_capacity_vector();
  const DeficitView view = compute_deficits(net, state);
  std::vector<std::int64_t> score(net.edge_count());
  for (EdgeId e = 0; e < net.edge_count(); ++e) score[e] = caps[e] * view.weight[e];
  return detail::pull_in_order(net, caps, state, view, max_weight_activation(set, score));
}

/// Arrivals land at the end of the slot, after forwarding.
inline SystemState pistar_update(const Network& net, const SystemState& state,
                                 const PolicyDecision& decision, std::int64_t arrivals) {
  SystemState next = state;
  for (NodeId j = 0; j < net.node_count(); ++j)
    if (j != net.source()) next.received[j] += decision.pulls[j];
  next.received[net.source()] += arrivals;
  ++next.slot;
  return next;
}

/// Stateful scheduling policy driven by the simulator, one instance per run.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string_view name() const noexcept = 0;
  /// True for policies that deliver in order and only packets held by every
  /// in-neighbor; the simulator then checks the deficit invariants.
  virtual bool in_order() const noexcept { return true; }
  virtual const ActivationSet& activation_set() const noexcept = 0;
  virtual PolicyDecision decide(const SystemState& state) = 0;
  /// Packets first_packet .. first_packet+count-1 arrived at the source.
  virtual void on_arrivals(std::int64_t first_packet, std::int64_t count) {
    (void)first_packet;
    (void)count;
  }
};

class PiStarPolicy final : public Policy {
 public:
  /// `net` and `set` must outlive the policy.
  PiStarPolicy(const Network& net, const ActivationSet& set, std::ostream* warnings = &std::clog)
      : net_(net), set_(set), caps_(net.integer_capacity_vector()) {
    if (!is_dag(net) && warnings)
      *warnings << "warning: pistar on a cyclic graph; a deadlock may occur\n";
  }

  std::string_view name() const noexcept override { return "pistar"; }
  const ActivationSet& activation_set() const noexcept override { return set_; }

  PolicyDecision decide(const SystemState& state) override {
    const DeficitView view = compute_deficits(net_, state);
    score_.resize(net_.edge_count());
    for (EdgeId e = 0; e < net_.edge_count(); ++e) score_[e] = caps_[e] * view.weight[e];
    return detail::pull_in_order(net_, caps_, state, view, max_weight_activation(set_, score_));
  }

 private:
  const Network& net_;
  const ActivationSet& set_;
  std::vector<std::int64_t> caps_;
  std::vector<std::int64_t> score_;
};

namespace detail {

// Uniform double in [0,1) from the top 53 bits; keeps runs reproducible
// across standard libraries.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Stationary randomized policy: draws s_l with probability p_l, keeps each
/// activated in-edge of the l-th node in topological order with probability
/// q_l, and forwards under the same in-order rules as the optimal policy.
class PiRandPolicy final : public Policy {
 public:
  PiRandPolicy(const Network& net, const ActivationSet& set, const CapacityReport& report,
               double lambda, double epsilon, std::uint64_t seed)
      : net_(net), set_(set), caps_(net.integer_capacity_vector()), rng_(seed) {
    if (!(lambda >= 0) || !(epsilon >= 0))
      throw Error(ErrorCode::InvalidArgument, "lambda and epsilon must be nonnegative");
    if (lambda + epsilon > report.lambda.get_d() + 1e-12)
      throw Error(ErrorCode::RateTooHigh, "lambda + epsilon exceeds the capacity " +
                                              to_fraction_string(report.lambda));
    if (report.mixture.empty())
      throw Error(ErrorCode::InvalidArgument, "capacity report carries no mixture");

    const std::vector<NodeId> order = topological_order(net);
    const double n = static_cast<double>(net.node_count());
    keep_probability_.assign(net.node_count(), 1.0);
    position_.assign(net.node_count(), 0);
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      const NodeId v = order[pos];
      position_[v] = pos + 1;
      if (v == net.source()) continue;
      Rational cut = 0;
      for (EdgeId e : net.in_edges(v)) cut += net.edge(e).capacity * report.beta[e];
      const double target = lambda + epsilon * static_cast<double>(pos + 1) / n;
      double q = 0.0;
      if (sgn(cut) > 0) {
        q = target / cut.get_d();
      } else if (target > 0) {
        q = 2.0;
      }
      if (q > 1.0 + 1e-12)
        throw Error(ErrorCode::RateTooHigh,
                    "node " + net.name(v) + " would need keep probability " + std::to_string(q));
      keep_probability_[v] = std::min(q, 1.0);
    }

    double acc = 0.0;
    for (const auto& term : report.mixture) {
      activations_.push_back(term.activation);
      acc += term.probability.get_d();
      cumulative_.push_back(acc);
    }
    cumulative_.back() = 1.0;
  }

  std::string_view name() const noexcept override { return "pirand"; }
  const ActivationSet& activation_set() const noexcept override { return set_; }

  /// q per node (1 at the source).
  std::span<const double> keep_probabilities() const noexcept { return keep_probability_; }
  /// 1-based position of each node in the topological order used for q.
  std::span<const std::size_t> positions() const noexcept { return position_; }

  PolicyDecision decide(const SystemState& state) override {
    const double u = detail::unit_uniform(rng_);
    const std::size_t l = static_cast<std::size_t>(
        std::upper_bound(cumulative_.begin(), cumulative_.end(), u) - cumulative_.begin());
    ActivationVector s = activations_[std::min(l, activations_.size() - 1)];
    for (EdgeId e = 0; e < s.size(); ++e)
      if (s[e] && detail::unit_uniform(rng_) >= keep_probability_[net_.edge(e).to]) s.set(e, false);
    return detail::pull_in_order(net_, caps_, state, compute_deficits(net_, state), std::move(s));
  }

 private:
  const Network& net_;
  const ActivationSet& set_;
  std::vector<std::int64_t> caps_;
  std::mt19937_64 rng_;
  std::vector<ActivationVector> activations_;
  std::vector<double> cumulative_;
  std::vector<double> keep_probability_;
  std::vector<std::size_t> position_;
};

/// Tree-based baseline. Each (tree, edge) pair keeps a FIFO of packets
/// waiting to cross that edge; a packet crossing into v is copied to the
/// queues of v's out-edges in the same tree. New packets join the tree whose
/// source queues hold the fewest packets. The differential of tree k on edge
/// e is its queue minus the queues leaving e's head in k; edge weight is c_e
/// times the sum of positive differentials, and an activated edge serves
/// trees in decreasing differential order.
class PiTreePolicy final : public Policy {
 public:
  PiTreePolicy(const Network& net, const ActivationSet& set, std::vector<Arborescence> trees)
      : net_(net), set_(set), caps_(net.integer_capacity_vector()), trees_(std::move(trees)) {
    if (trees_.empty()) throw Error(ErrorCode::InvalidTree, "pitree needs at least one tree");
    const std::size_t n = net.node_count();
    children_.assign(trees_.size(), std::vector<std::vector<EdgeId>>(n));
    queues_.assign(trees_.size(), std::vector<std::deque<std::int64_t>>(net.edge_count()));
    edge_trees_.assign(net.edge_count(), {});
    for (std::size_t k = 0; k < trees_.size(); ++k) {
      if (!is_arborescence(net, trees_[k]))
        throw Error(ErrorCode::InvalidTree, "tree " + std::to_string(k) + " is not an arborescence");
      for (EdgeId e : trees_[k].edges) {
        children_[k][net.edge(e).from].push_back(e);
        edge_trees_[e].push_back(k);
      }
    }
  }

  std::string_view name() const noexcept override { return "pitree"; }
  bool in_order() const noexcept override { return false; }
  const ActivationSet& activation_set() const noexcept override { return set_; }
  std::span<const Arborescence> trees() const noexcept { return trees_; }

  std::size_t queue_length(std::size_t tree, EdgeId e) const { return queues_.at(tree).at(e).size(); }

  void on_arrivals(std::int64_t first_packet, std::int64_t count) override {
    for (std::int64_t p = first_packet; p < first_packet + count; ++p) {
      std::size_t best = 0;
      std::size_t best_load = 0;
      for (std::size_t k = 0; k < trees_.size(); ++k) {
        std::size_t load = 0;
        for (EdgeId e : children_[k][net_.source()]) load += queues_[k][e].size();
        if (k == 0 || load < best_load) {
          best = k;
          best_load = load;
        }
      }
      enqueue(best, net_.source(), p);
    }
  }

  PolicyDecision decide(const SystemState& state) override {
    (void)state;
    std::vector<std::int64_t> score(net_.edge_count(), 0);
    // Per edge: (rank, tree); positive differentials first, largest first.
    std::vector<std::vector<std::pair<std::int64_t, std::size_t>>> order(net_.edge_count());
    for (EdgeId e = 0; e < net_.edge_count(); ++e) {
      std::int64_t sum = 0;
      for (std::size_t k : edge_trees_[e]) {
        if (queues_[k][e].empty()) continue;
        std::int64_t head = 0;
        for (EdgeId child : children_[k][net_.edge(e).to])
          head += static_cast<std::int64_t>(queues_[k][child].size());
        const std::int64_t diff = static_cast<std::int64_t>(queues_[k][e].size()) - head;
        if (diff > 0) sum += diff;
        order[e].push_back({diff > 0 ? -diff : 1 - diff, k});
      }
      std::sort(order[e].begin(), order[e].end());
      score[e] = caps_[e] * sum;
    }

    PolicyDecision d;
    d.activation = max_weight_activation(set_, score);
    d.offered = detail::offered_capacity(net_, caps_, d.activation);
    d.pulls.assign(net_.node_count(), 0);
    std::vector<std::pair<std::size_t, std::pair<NodeId, std::int64_t>>> arrived;
    for (EdgeId e = 0; e < net_.edge_count(); ++e) {
      if (!d.activation[e]) continue;
      std::int64_t budget = caps_[e];
      for (const auto& [rank, k] : order[e]) {
        auto& q = queues_[k][e];
        while (budget > 0 && !q.empty()) {
          const std::int64_t p = q.front();
          q.pop_front();
          --budget;
          if (!d.transfers.empty() && d.transfers.back().edge == e &&
              d.transfers.back().first_packet + d.transfers.back().count == p) {
            ++d.transfers.back().count;
          } else {
            d.transfers.push_back({e, p, 1});
          }
          ++d.pulls[net_.edge(e).to];
          arrived.push_back({k, {net_.edge(e).to, p}});
        }
      }
    }
    // Packets received this slot are forwarded from the next slot on.
    for (const auto& [k, at] : arrived) enqueue(k, at.first, at.second);
    return d;
  }

 private:
  void enqueue(std::size_t k, NodeId v, std::int64_t packet) {
    for (EdgeId e : children_[k][v]) queues_[k][e].push_back(packet);
  }

  const Network& net_;
  const ActivationSet& set_;
  std::vector<std::int64_t> caps_;
  std::vector<Arborescence> trees_;
  std::vector<std::vector<std::vector<EdgeId>>> children_;      // [tree][node] -> edges
  std::vector<std::vector<std::deque<std::int64_t>>> queues_;   // [tree][edge]
  std::vector<std::vector<std::size_t>> edge_trees_;            // [edge] -> trees
};

/// Builds the randomized policy from a node-cuts capacity report.
inline std::unique_ptr<PiRandPolicy> pirand_build(const Network& net, const ActivationSet& set,
                                                  const CapacityReport& report, double lambda,
                                                  double epsilon, std::uint64_t seed) {
  return std::make_unique<PiRandPolicy>(net, set, report, lambda, epsilon, seed);
}

/// Deterministic tree choice for the baseline. Small graphs: the k trees
/// with the best joint tree-restricted capacity (exhaustive over subsets).
/// Large graphs: tree i gives each node its (i mod in-degree)-th in-edge.
inline std::vector<Arborescence> auto_select_trees(const Network& net, const ActivationSet& set,
                                                   std::size_t k, std::uint64_t exhaustive_limit = 64) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "tree count must be positive");
  ArborescenceEnumeration all = enumerate_arborescences(net, exhaustive_limit);
  if (all.count <= exhaustive_limit) {
    const TreeSubset best = best_tree_subset(net, set, all.trees, std::min<std::size_t>(k, all.trees.size()));
    std::vector<Arborescence> out;
    for (std::size_t i : best.members) out.push_back(all.trees[i]);
    return out;
  }

  std::vector<Arborescence> trees;
  for (std::size_t i = 0; i < k; ++i) {
    Arborescence tree;
    for (NodeId v = 0; v < net.node_count(); ++v) {
      if (v == net.source()) continue;
      auto in = net.in_edges(v);
      tree.edges.push_back(in[i % in.size()]);
    }
    std::sort(tree.edges.begin(), tree.edges.end());
    if (std::find(trees.begin(), trees.end(), tree) == trees.end()) trees.push_back(std::move(tree));
  }
  return trees;
}

}  // namespace bcast
