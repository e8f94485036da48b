#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "bcast/error.hpp"
#include "bcast/network.hpp"

namespace bcast {

enum class InterferenceModel { None, Primary, Explicit };

constexpr std::string_view model_name(InterferenceModel model) noexcept {
  switch (model) {
    case InterferenceModel::None: return "none";
    case InterferenceModel::Primary: return "primary";
    case InterferenceModel::Explicit: return "explicit";
  }
  return "none";
}

inline InterferenceModel parse_model(std::string_view name) {
  if (name == "none") return InterferenceModel::None;
  if (name == "primary") return InterferenceModel::Primary;
  if (name == "explicit") return InterferenceModel::Explicit;
  throw Error(ErrorCode::ParseError, "unknown interference model '" + std::string(name) + "'");
}

/// Binary per-edge activation indicator.
class ActivationVector {
 public:
  ActivationVector() = default;
  explicit ActivationVector(std::size_t edges) : bits_(edges, 0) {}

  static ActivationVector from_edges(std::size_t edge_count, std::span<const EdgeId> active) {
    ActivationVector s(edge_count);
    for (EdgeId e : active) s.bits_.at(e) = 1;
    return s;
  }

  std::size_t size() const noexcept { return bits_.size(); }
  bool operator[](EdgeId e) const { return bits_[e] != 0; }
  void set(EdgeId e, bool on = true) { bits_.at(e) = on ? 1 : 0; }

  std::vector<EdgeId> active_edges() const {
    std::vector<EdgeId> out;
    for (EdgeId e = 0; e < bits_.size(); ++e)
      if (bits_[e]) out.push_back(e);
    return out;
  }

  bool empty() const noexcept {
    return std::none_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b != 0; });
  }

  /// '0'/'1' per edge, edge 0 first.
  std::string bitstring() const {
    std::string s(bits_.size(), '0');
    for (std::size_t e = 0; e < bits_.size(); ++e)
      if (bits_[e]) s[e] = '1';
    return s;
  }

  // Lexicographic over edge indices with 0 < 1.
  friend auto operator<=>(const ActivationVector&, const ActivationVector&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// The feasible activation set S of one network.
class ActivationSet {
 public:
  ActivationSet(InterferenceModel model, const Network& net, std::vector<ActivationVector> list)
      : model_(model), node_count_(net.node_count()), activations_(std::move(list)) {
    endpoints_.reserve(net.edge_count());
    for (const Edge& e : net.edges()) endpoints_.emplace_back(e.from, e.to);
  }

  InterferenceModel model() const noexcept { return model_; }
  std::size_t edge_count() const noexcept { return endpoints_.size(); }
  std::size_t node_count() const noexcept { return node_count_; }

  /// Materialized members in lexicographic order; under `none` this holds
  /// only the zero and all-ones vectors (membership is implicit).
  std::span<const ActivationVector> activations() const noexcept { return activations_; }
  std::size_t size() const noexcept { return activations_.size(); }

  /// Two edges conflict iff they share an endpoint; direction is ignored.
  bool conflicts(EdgeId a, EdgeId b) const {
    auto [u1, v1] = endpoints_[a];
    auto [u2, v2] = endpoints_[b];
    return u1 == u2 || u1 == v2 || v1 == u2 || v1 == v2;
  }

  bool contains(const ActivationVector& s) const {
    if (s.size() != edge_count()) return false;
    switch (model_) {
      case InterferenceModel::None:
        return true;
      case InterferenceModel::Primary: {
        std::vector<bool> used(node_count_, false);
        for (EdgeId e = 0; e < s.size(); ++e) {
          if (!s[e]) continue;
          auto [u, v] = endpoints_[e];
          if (used[u] || used[v]) return false;
          used[u] = used[v] = true;
        }
        return true;
      }
      case InterferenceModel::Explicit:
        return std::binary_search(activations_.begin(), activations_.end(), s);
    }
    return false;
  }

  /// Columns for capacity LPs. Under `none` the all-ones vector dominates
  /// every other member, so it is the only column needed.
  std::vector<ActivationVector> lp_columns() const {
    if (model_ == InterferenceModel::None) {
      ActivationVector ones(edge_count());
      for (EdgeId e = 0; e < edge_count(); ++e) ones.set(e);
      return {ones};
    }
    return activations_;
  }

  const std::vector<std::pair<NodeId, NodeId>>& endpoints() const noexcept { return endpoints_; }

 private:
  InterferenceModel model_;
  std::size_t node_count_;
  std::vector<std::pair<NodeId, NodeId>> endpoints_;
  std::vector<ActivationVector> activations_;
};

namespace detail {

// Emits matchings in lexicographic order: at each edge "off" is explored
// before "on".
inline void enumerate_matchings(const Network& net, EdgeId e, std::vector<bool>& used,
                                ActivationVector& current, std::vector<ActivationVector>& out,
                                std::size_t cap) {
  if (e == net.edge_count()) {
    if (out.size() >= cap)
      throw Error(ErrorCode::TooManyActivations,
                  "more than " + std::to_string(cap) + " matchings");
    out.push_back(current);
    return;
  }
  enumerate_matchings(net, e + 1, used, current, out, cap);
  const Edge& edge = net.edge(e);
  if (!used[edge.from] && !used[edge.to]) {
    used[edge.from] = used[edge.to] = true;
    current.set(e, true);
    enumerate_matchings(net, e + 1, used, current, out, cap);
    current.set(e, false);
    used[edge.from] = used[edge.to] = false;
  }
}

}  // namespace detail

inline ActivationSet build_activation_set(
    const Network& net, InterferenceModel model,
    const std::optional<std::vector<std::vector<EdgeId>>>& explicit_list = std::nullopt,
    std::size_t cap = 50000) {
  const std::size_t m = net.edge_count();
  std::vector<ActivationVector> list;
  switch (model) {
    case InterferenceModel::None: {
      ActivationVector ones(m);
      for (EdgeId e = 0; e < m; ++e) ones.set(e);
      list.emplace_back(m);
      if (m > 0) list.push_back(ones);
      break;
    }
    case InterferenceModel::Primary: {
      std::vector<bool> used(net.node_count(), false);
      ActivationVector current(m);
      detail::enumerate_matchings(net, 0, used, current, list, cap);
      break;
    }
    case InterferenceModel::Explicit: {
      if (!explicit_list)
        throw Error(ErrorCode::InvalidExplicitVector, "explicit model needs an activation list");
      list.emplace_back(m);  // the idle vector is always feasible
      for (const auto& active : *explicit_list) {
        ActivationVector s(m);
        for (EdgeId e : active) {
          if (e >= m)
            throw Error(ErrorCode::InvalidExplicitVector,
                        "activation refers to edge " + std::to_string(e) + " of " +
                            std::to_string(m));
          if (s[e])
            throw Error(ErrorCode::InvalidExplicitVector,
                        "activation lists edge " + std::to_string(e) + " twice");
          s.set(e);
        }
        list.push_back(std::move(s));
      }
      if (list.size() > cap)
        throw Error(ErrorCode::TooManyActivations,
                    "more than " + std::to_string(cap) + " explicit activations");
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
      break;
    }
  }
  return ActivationSet(model, net, std::move(list));
}

/// Exhaustive scan over the materialized list. The list is sorted, so the
/// first maximizer is the lexicographically smallest one.
template <class Weight>
ActivationVector max_weight_activation_scan(const ActivationSet& set,
                                            std::span<const Weight> weights) {
  const ActivationVector* best = nullptr;
  Weight best_value{};
  for (const ActivationVector& s : set.activations()) {
    Weight value{};
    for (EdgeId e = 0; e < s.size(); ++e)
      if (s[e]) value += weights[e];
    if (best == nullptr || value > best_value) {
      best = &s;
      best_value = value;
    }
  }
  if (best == nullptr) throw Error(ErrorCode::EmptyActivationSet, "activation set is empty");
  return *best;
}

namespace detail {

// Max-weight matching over the positive-weight edges by memoized search on
// (edge position, used-node mask). Zero-weight edges never appear in the
// lexicographically smallest maximizer, so dropping them keeps the order.
template <class Weight>
ActivationVector max_weight_matching_dp(const ActivationSet& set, std::span<const Weight> weights) {
  std::vector<EdgeId> positive;
  for (EdgeId e = 0; e < weights.size(); ++e)
    if (weights[e] > Weight{}) positive.push_back(e);
  ActivationVector s(set.edge_count());
  if (positive.empty()) return s;

  // Only nodes touched by positive edges matter for conflicts.
  std::vector<std::uint32_t> bit_of(set.node_count(), 0);
  std::size_t touched = 0;
  std::vector<std::uint32_t> edge_bits(positive.size());
  for (std::size_t i = 0; i < positive.size(); ++i) {
    auto [u, v] = set.endpoints()[positive[i]];
    for (NodeId w : {u, v})
      if (bit_of[w] == 0) bit_of[w] = std::uint32_t{1} << touched++;
    edge_bits[i] = bit_of[u] | bit_of[v];
  }

  const std::size_t k = positive.size();
  const std::size_t states = std::size_t{1} << touched;
  // Reused across calls; a stamp marks which entries belong to this call.
  thread_local std::vector<Weight> memo_value;
  thread_local std::vector<std::uint32_t> memo_stamp;
  thread_local std::uint32_t stamp = 0;
  if (memo_stamp.size() < (k + 1) * states) {
    memo_stamp.assign((k + 1) * states, 0);
    memo_value.resize((k + 1) * states);
  }
  if (++stamp == 0) {
    std::fill(memo_stamp.begin(), memo_stamp.end(), 0);
    stamp = 1;
  }

  auto best = [&](auto&& self, std::size_t i, std::uint32_t mask) -> Weight {
    if (i == k) return Weight{};
    const std::size_t slot = i * states + mask;
    if (memo_stamp[slot] == stamp) return memo_value[slot];
    Weight value = self(self, i + 1, mask);
    if ((mask & edge_bits[i]) == 0) {
      Weight with = weights[positive[i]] + self(self, i + 1, mask | edge_bits[i]);
      if (with > value) value = with;
    }
    memo_stamp[slot] = stamp;
    memo_value[slot] = value;
    return value;
  };

  std::uint32_t mask = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const Weight here = best(best, i, mask);
    if (best(best, i + 1, mask) == here) continue;  // prefer "off"
    mask |= edge_bits[i];
    s.set(positive[i]);
  }
  return s;
}

// Integer weights: scale by 2^k and subtract 2^(k-1-i) for the i-th positive
// edge, so the lexicographically smallest maximizer becomes the unique
// maximizer. Then a DP over subsets of touched nodes (lowest node is either
// unmatched or matched to a partner) finds it in O(2^n * n).
template <class Weight>
std::optional<ActivationVector> max_weight_matching_subset(const ActivationSet& set,
                                                           std::span<const Weight> weights) {
  using Wide = __int128;
  std::vector<EdgeId> positive;
  Weight top{};
  for (EdgeId e = 0; e < weights.size(); ++e)
    if (weights[e] > Weight{}) {
      positive.push_back(e);
      top = std::max(top, weights[e]);
    }
  const std::size_t k = positive.size();
  if (k == 0) return ActivationVector(set.edge_count());
  int top_bits = 0;
  for (auto w = static_cast<unsigned long long>(top); w != 0; w >>= 1) ++top_bits;
  if (k > 62 || top_bits + static_cast<int>(k) + 6 > 126) return std::nullopt;

  std::vector<int> index_of(set.node_count(), -1);
  std::size_t touched = 0;
  for (EdgeId e : positive) {
    auto [u, v] = set.endpoints()[e];
    for (NodeId w : {u, v})
      if (index_of[w] < 0) index_of[w] = static_cast<int>(touched++);
  }
  if (touched > 20) return std::nullopt;

  // Best edge per unordered node pair under the perturbed weight.
  const std::size_t t = touched;
  std::vector<Wide> pair_value(t * t, 0);
  std::vector<EdgeId> pair_edge(t * t, npos);
  for (std::size_t i = 0; i < k; ++i) {
    const EdgeId e = positive[i];
    auto [u, v] = set.endpoints()[e];
    const std::size_t a = static_cast<std::size_t>(index_of[u]);
    const std::size_t b = static_cast<std::size_t>(index_of[v]);
    const Wide value = (static_cast<Wide>(weights[e]) << k) - (static_cast<Wide>(1) << (k - 1 - i));
    for (std::size_t slot : {a * t + b, b * t + a})
      if (pair_edge[slot] == npos || value > pair_value[slot]) {
        pair_value[slot] = value;
        pair_edge[slot] = e;
      }
  }

  const std::size_t full = std::size_t{1} << t;
  thread_local std::vector<Wide> best;
  thread_local std::vector<std::uint8_t> partner;  // 255: lowest node stays unmatched
  best.assign(full, 0);
  partner.assign(full, 255);
  for (std::size_t mask = 1; mask < full; ++mask) {
    const std::size_t low = static_cast<std::size_t>(std::countr_zero(mask));
    const std::size_t rest = mask & (mask - 1);
    Wide value = best[rest];
    std::uint8_t choice = 255;
    for (std::size_t m = rest; m != 0; m &= m - 1) {
      const std::size_t j = static_cast<std::size_t>(std::countr_zero(m));
      const EdgeId e = pair_edge[low * t + j];
      if (e == npos || pair_value[low * t + j] <= 0) continue;
      const Wide with = pair_value[low * t + j] + best[rest & ~(std::size_t{1} << j)];
      if (with > value) {
        value = with;
        choice = static_cast<std::uint8_t>(j);
      }
    }
    best[mask] = value;
    partner[mask] = choice;
  }

  ActivationVector s(set.edge_count());
  std::size_t mask = full - 1;
  while (mask != 0) {
    const std::size_t low = static_cast<std::size_t>(std::countr_zero(mask));
    const std::uint8_t j = partner[mask];
    mask &= mask - 1;
    if (j == 255) continue;
    s.set(pair_edge[low * t + j]);
    mask &= ~(std::size_t{1} << j);
  }
  return s;
}

}  // namespace detail

/// argmax over S of sum_e weights[e] * s[e], ties broken toward the
/// lexicographically smallest vector. Weights must be nonnegative.
template <class Weight>
ActivationVector max_weight_activation(const ActivationSet& set, std::span<const Weight> weights) {
  if (weights.size() != set.edge_count())
    throw Error(ErrorCode::InvalidArgument, "weight vector length does not match edge count");
  switch (set.model()) {
    case InterferenceModel::None: {
      ActivationVector s(set.edge_count());
      for (EdgeId e = 0; e < weights.size(); ++e)
        if (weights[e] > Weight{}) s.set(e);
      return s;
    }
    case InterferenceModel::Primary:
      if constexpr (std::is_integral_v<Weight>) {
        if (auto s = detail::max_weight_matching_subset(set, weights)) return *std::move(s);
      }
      if (set.node_count() <= 16) return detail::max_weight_matching_dp(set, weights);
      return max_weight_activation_scan(set, weights);
    case InterferenceModel::Explicit:
      return max_weight_activation_scan(set, weights);
  }
  return ActivationVector(set.edge_count());
}

template <class Weight>
ActivationVector max_weight_activation(const ActivationSet& set, const std::vector<Weight>& weights) {
  return max_weight_activation(set, std::span<const Weight>(weights));
}

}  // namespace bcast
