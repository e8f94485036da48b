#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bcast/error.hpp"
#include "bcast/interference.hpp"
#include "bcast/network.hpp"
#include "bcast/rational.hpp"
#include "bcast/simplex.hpp"

namespace bcast {

enum class CapacityMethod { NodeCuts, AllCuts, TreeRestricted };

constexpr std::string_view method_name(CapacityMethod method) noexcept {
  switch (method) {
    case CapacityMethod::NodeCuts: return "node-cuts";
    case CapacityMethod::AllCuts: return "all-cuts";
    case CapacityMethod::TreeRestricted: return "tree-restricted";
  }
  return "node-cuts";
}

inline CapacityMethod parse_method(std::string_view name) {
  if (name == "node-cuts") return CapacityMethod::NodeCuts;
  if (name == "all-cuts") return CapacityMethod::AllCuts;
  if (name == "tree-restricted") return CapacityMethod::TreeRestricted;
  throw Error(ErrorCode::InvalidArgument, "unknown capacity method '" + std::string(name) + "'");
}

struct MixtureTerm {
  ActivationVector activation;
  Rational probability;
};

struct CapacityReport {
  Rational lambda;
  std::vector<MixtureTerm> mixture;   // p_l > 0 only; sums to 1
  std::vector<Rational> beta;         // per-edge time share
  std::vector<ProperCut> binding_cuts;
  std::vector<Rational> tree_rates;   // tree-restricted only
  CapacityMethod method = CapacityMethod::NodeCuts;
};

/// sum over crossing edges of c_e * beta_e.
inline Rational cut_value(const Network& net, std::span<const Rational> beta, const ProperCut& cut) {
  Rational total = 0;
  for (EdgeId e : cut.crossing) total += net.edge(e).capacity * beta[e];
  return total;
}

/// beta = sum_l p_l s_l.
inline std::vector<Rational> mixture_beta(std::size_t edges, std::span<const MixtureTerm> mixture) {
  std::vector<Rational> beta(edges, Rational(0));
  for (const auto& term : mixture)
    for (EdgeId e = 0; e < edges; ++e)
      if (term.activation[e]) beta[e] += term.probability;
  return beta;
}

namespace detail {

// Members of S not contained in another member. All LP coefficients are
// nonnegative, so the others are never needed as columns.
inline std::vector<ActivationVector> maximal_columns(const ActivationSet& set) {
  std::vector<ActivationVector> all = set.lp_columns();
  if (set.model() == InterferenceModel::None) return all;
  std::vector<ActivationVector> out;
  if (set.model() == InterferenceModel::Primary) {
    for (const auto& s : all) {
      bool maximal = true;
      for (EdgeId e = 0; e < s.size() && maximal; ++e) {
        if (s[e]) continue;
        ActivationVector grown = s;
        grown.set(e);
        if (set.contains(grown)) maximal = false;
      }
      if (maximal) out.push_back(s);
    }
    return out;
  }
  auto subset = [](const ActivationVector& a, const ActivationVector& b) {
    for (EdgeId e = 0; e < a.size(); ++e)
      if (a[e] && !b[e]) return false;
    return true;
  };
  for (std::size_t i = 0; i < all.size(); ++i) {
    bool maximal = true;
    for (std::size_t j = 0; j < all.size() && maximal; ++j)
      if (i != j && all[i] != all[j] && subset(all[i], all[j])) maximal = false;
    if (maximal) out.push_back(all[i]);
  }
  return out;
}

inline Rational column_cut_value(const Network& net, const ActivationVector& s, const ProperCut& cut) {
  Rational total = 0;
  for (EdgeId e : cut.crossing)
    if (s[e]) total += net.edge(e).capacity;
  return total;
}

inline std::vector<MixtureTerm> extract_mixture(const std::vector<ActivationVector>& columns,
                                                const std::vector<Rational>& values) {
  std::vector<MixtureTerm> mixture;
  for (std::size_t l = 0; l < columns.size(); ++l)
    if (sgn(values[l]) > 0) mixture.push_back({columns[l], values[l]});
  return mixture;
}

}  // namespace detail

/// Largest lambda such that some beta in conv(S) gives every cut of the
/// method's family a value of at least lambda. node-cuts uses the cuts
/// V \ {v}; all-cuts uses every proper cut.
inline CapacityReport compute_capacity(const Network& net, const ActivationSet& set,
                                       CapacityMethod method) {
  if (method == CapacityMethod::TreeRestricted)
    throw Error(ErrorCode::InvalidArgument, "use compute_tree_capacity for tree-restricted capacity");
  if (set.size() == 0) throw Error(ErrorCode::EmptyActivationSet, "activation set is empty");
  if (net.node_count() == 1)
    throw Error(ErrorCode::InvalidArgument, "a single-node network has no proper cuts");

  const std::vector<ProperCut> cuts =
      method == CapacityMethod::NodeCuts ? receiver_cuts(net) : enumerate_proper_cuts(net);
  const std::vector<ActivationVector> columns = detail::maximal_columns(set);

  CapacityReport report;
  report.method = method;
  if (columns.size() == 1) {
    report.mixture = {{columns.front(), Rational(1)}};
  } else {
    const std::size_t lambda_var = columns.size();
    LinearProgram<Rational> lp(columns.size() + 1);
    lp.set_objective(lambda_var, 1);
    for (const ProperCut& cut : cuts) {
      std::vector<std::pair<std::size_t, Rational>> terms{{lambda_var, Rational(1)}};
      for (std::size_t l = 0; l < columns.size(); ++l) {
        Rational v = detail::column_cut_value(net, columns[l], cut);
        if (sgn(v) != 0) terms.emplace_back(l, -v);
      }
      lp.add_row(std::move(terms), RowSense::LessEqual, 0);
    }
    std::vector<std::pair<std::size_t, Rational>> simplex_row;
    for (std::size_t l = 0; l < columns.size(); ++l) simplex_row.emplace_back(l, 1);
    lp.add_row(std::move(simplex_row), RowSense::Equal, 1);

    auto result = solve(lp);
    if (result.status != LpStatus::Optimal)
      throw Error(ErrorCode::InvalidArgument, "capacity LP did not reach an optimum");
    report.mixture = detail::extract_mixture(columns, result.values);
  }

  report.beta = mixture_beta(net.edge_count(), report.mixture);
  bool first = true;
  for (const ProperCut& cut : cuts) {
    Rational v = cut_value(net, report.beta, cut);
    if (first || v < report.lambda) {
      report.lambda = v;
      first = false;
    }
  }
  for (const ProperCut& cut : cuts)
    if (cut_value(net, report.beta, cut) == report.lambda) report.binding_cuts.push_back(cut);
  return report;
}

/// Best total rate when traffic is split over the given trees: maximize
/// sum_k lambda_k with sum_{k: e in T_k} lambda_k <= c_e beta_e on each edge.
inline CapacityReport compute_tree_capacity(const Network& net, const ActivationSet& set,
                                            std::span<const Arborescence> trees) {
  if (trees.empty()) throw Error(ErrorCode::InvalidTree, "no trees given");
  for (std::size_t k = 0; k < trees.size(); ++k)
    if (!is_arborescence(net, trees[k]))
      throw Error(ErrorCode::InvalidTree, "tree " + std::to_string(k) + " is not an arborescence");
  if (set.size() == 0) throw Error(ErrorCode::EmptyActivationSet, "activation set is empty");

  const std::vector<ActivationVector> columns = detail::maximal_columns(set);
  const std::size_t first_tree = columns.size();
  LinearProgram<Rational> lp(columns.size() + trees.size());
  for (std::size_t k = 0; k < trees.size(); ++k) lp.set_objective(first_tree + k, 1);
  for (EdgeId e = 0; e < net.edge_count(); ++e) {
    std::vector<std::pair<std::size_t, Rational>> terms;
    for (std::size_t k = 0; k < trees.size(); ++k)
      if (std::binary_search(trees[k].edges.begin(), trees[k].edges.end(), e))
        terms.emplace_back(first_tree + k, 1);
    if (terms.empty()) continue;
    for (std::size_t l = 0; l < columns.size(); ++l)
      if (columns[l][e] && sgn(net.edge(e).capacity) != 0)
        terms.emplace_back(l, -net.edge(e).capacity);
    lp.add_row(std::move(terms), RowSense::LessEqual, 0);
  }
  std::vector<std::pair<std::size_t, Rational>> simplex_row;
  for (std::size_t l = 0; l < columns.size(); ++l) simplex_row.emplace_back(l, 1);
  lp.add_row(std::move(simplex_row), RowSense::Equal, 1);

  auto result = solve(lp);
  if (result.status != LpStatus::Optimal)
    throw Error(ErrorCode::InvalidArgument, "tree LP did not reach an optimum");

  CapacityReport report;
  report.method = CapacityMethod::TreeRestricted;
  report.lambda = result.objective;
  report.mixture = detail::extract_mixture(
      columns, std::vector<Rational>(result.values.begin(), result.values.begin() + first_tree));
  report.beta = mixture_beta(net.edge_count(), report.mixture);
  report.tree_rates.assign(result.values.begin() + first_tree, result.values.end());
  return report;
}

struct TreeSubset {
  Rational lambda = -1;
  std::vector<std::size_t> members;  // indices into the candidate list
};

/// Best size-k subset of `candidates` by tree-restricted capacity; the first
/// subset in lexicographic index order wins ties.
inline TreeSubset best_tree_subset(const Network& net, const ActivationSet& set,
                                   std::span<const Arborescence> candidates, std::size_t k) {
  if (k == 0 || k > candidates.size())
    throw Error(ErrorCode::InvalidArgument, "subset size must be between 1 and the candidate count");
  const std::size_t total = candidates.size();
  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  TreeSubset best;
  std::vector<Arborescence> subset(k);
  while (true) {
    for (std::size_t i = 0; i < k; ++i) subset[i] = candidates[pick[i]];
    Rational value = compute_tree_capacity(net, set, subset).lambda;
    if (value > best.lambda) {
      best.lambda = value;
      best.members = pick;
    }
    std::size_t i = k;
    while (i-- > 0 && pick[i] == total - k + i) {}
    if (i == npos) break;
    ++pick[i];
    for (std::size_t j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

/// Minimum in-degree over non-source nodes of a unit-capacity DAG, which
/// equals the maximum number of edge-disjoint arborescences.
inline std::size_t disjoint_tree_count(const Network& net) {
  if (!net.unit_capacity())
    throw Error(ErrorCode::NotUnitCapacity, "disjoint tree count needs unit capacities");
  if (!is_dag(net)) throw Error(ErrorCode::NotDag, "disjoint tree count needs a DAG");
  if (net.node_count() == 1) return 0;
  std::size_t best = npos;
  for (NodeId v = 0; v < net.node_count(); ++v)
    if (v != net.source()) best = std::min(best, net.in_degree(v));
  return best;
}

inline nlohmann::json to_json(const Network& net, const CapacityReport& report) {
  nlohmann::json out;
  out["lambda"] = to_fraction_string(report.lambda);
  out["lambda_float"] = report.lambda.get_d();
  out["method"] = std::string(method_name(report.method));
  auto& beta = out["beta"] = nlohmann::json::array();
  for (const Rational& b : report.beta) beta.push_back(to_fraction_string(b));
  auto& cuts = out["binding_cuts"] = nlohmann::json::array();
  for (const ProperCut& cut : report.binding_cuts) {
    nlohmann::json names = nlohmann::json::array();
    for (NodeId v : cut.members) names.push_back(net.name(v));
    cuts.push_back(std::move(names));
  }
  auto& mixture = out["mixture"] = nlohmann::json::array();
  for (const auto& term : report.mixture) {
    nlohmann::json labels = nlohmann::json::array();
    for (EdgeId e : term.activation.active_edges()) labels.push_back(net.edge_label(e));
    mixture.push_back({{"activation", term.activation.bitstring()},
                       {"edges", std::move(labels)},
                       {"p", to_fraction_string(term.probability)}});
  }
  if (!report.tree_rates.empty()) {
    auto& rates = out["tree_rates"] = nlohmann::json::array();
    for (const Rational& r : report.tree_rates) rates.push_back(to_fraction_string(r));
  }
  return out;
}

}  // namespace bcast
