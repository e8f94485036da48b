#include <gtest/gtest.h>

#include <random>

#include "bcast/bcast.hpp"
#include "oracles.hpp"

using namespace bcast;

namespace {

struct Fixture {
  Scenario sc;
  ActivationSet set;
  explicit Fixture(const std::string& name) : sc(builtin(name)), set(make_activation_set(sc)) {}
};

// The three perfect matchings of k4 with weights 1/2, 1/4, 1/4.
std::vector<Rational> k4_beta() {
  const std::vector<MixtureTerm> mix{{oracle::activation_of(6, {0, 5}), Rational(1, 2)},
                                     {oracle::activation_of(6, {1, 4}), Rational(1, 4)},
                                     {oracle::activation_of(6, {2, 3}), Rational(1, 4)}};
  return mixture_beta(6, mix);
}

}  // namespace

TEST(CutValue, K4Examples) {
  const auto net = builtin("k4_unit").network;
  const auto beta = k4_beta();
  EXPECT_EQ(cut_value(net, beta, make_cut(net, {0, 1, 3})), Rational(1, 2));
  EXPECT_EQ(cut_value(net, beta, make_cut(net, {0})), Rational(1));
  const std::vector<Rational> zero(6, Rational(0));
  for (const auto& cut : enumerate_proper_cuts(net)) EXPECT_EQ(cut_value(net, zero, cut), 0);
}

TEST(Capacity, K4) {
  Fixture f("k4_unit");
  const auto r = compute_capacity(f.sc.network, f.set, CapacityMethod::NodeCuts);
  EXPECT_EQ(r.lambda, Rational(1, 2));
  EXPECT_EQ(compute_capacity(f.sc.network, f.set, CapacityMethod::AllCuts).lambda, Rational(1, 2));

  // The mixture is a distribution over S and its beta meets every cut.
  Rational total = 0;
  for (const auto& t : r.mixture) {
    EXPECT_GT(t.probability, 0);
    EXPECT_TRUE(f.set.contains(t.activation));
    total += t.probability;
  }
  EXPECT_EQ(total, 1);
  for (const auto& cut : enumerate_proper_cuts(f.sc.network))
    EXPECT_GE(cut_value(f.sc.network, r.beta, cut), r.lambda);
  EXPECT_FALSE(r.binding_cuts.empty());
  for (const auto& cut : r.binding_cuts) EXPECT_EQ(cut_value(f.sc.network, r.beta, cut), r.lambda);
}

// The in-edges of a and b (ra, rb, ab) pairwise share a node, so a matching
// feeds at most one of them and min(cut_a, cut_b) <= 1/2.
TEST(Capacity, K4UpperBoundByMatchingArgument) {
  Fixture f("k4_unit");
  for (const auto& s : f.set.activations()) {
    const auto& net = f.sc.network;
    int into_ab = 0;
    for (EdgeId e : s.active_edges()) into_ab += net.edge(e).to == 1 || net.edge(e).to == 2;
    EXPECT_LE(into_ab, 1);
  }
}

TEST(Capacity, Fig5) {
  Fixture f("fig5");
  EXPECT_EQ(compute_capacity(f.sc.network, f.set, CapacityMethod::NodeCuts).lambda, Rational(1));
  EXPECT_EQ(compute_capacity(f.sc.network, f.set, CapacityMethod::AllCuts).lambda, Rational(1));
}

TEST(Capacity, Cycle4Wired) {
  Fixture f("cycle4");
  const auto r = compute_capacity(f.sc.network, f.set, CapacityMethod::AllCuts);
  EXPECT_EQ(r.lambda, Rational(2));
  ASSERT_EQ(r.mixture.size(), 1u);
  EXPECT_EQ(r.mixture[0].activation.bitstring(), "111111");
}

TEST(Capacity, Dag10Golden) {
  Fixture f("dag10");
  const auto r = compute_capacity(f.sc.network, f.set, CapacityMethod::NodeCuts);
  EXPECT_EQ(r.lambda, Rational(12517, 3790));
  EXPECT_GE(r.lambda, Rational(31, 10));
  for (const auto& cut : receiver_cuts(f.sc.network))
    EXPECT_GE(cut_value(f.sc.network, r.beta, cut), r.lambda);
}

// Node cuts and all cuts agree on DAGs, and both match a floating-point LP
// over every member of S.
TEST(Capacity, RandomDagsAgreeWithOracle) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const auto net = oracle::random_dag(rng, 3 + trial % 5, 4 + trial % 8, true, 4);
    const auto set = build_activation_set(net, InterferenceModel::Primary);
    const auto node = compute_capacity(net, set, CapacityMethod::NodeCuts);
    const auto all = compute_capacity(net, set, CapacityMethod::AllCuts);
    EXPECT_EQ(node.lambda, all.lambda) << "trial " << trial;
    EXPECT_NEAR(node.lambda.get_d(), oracle::capacity_double(net, set, enumerate_proper_cuts(net)), 1e-9);
  }
}

TEST(Capacity, Errors) {
  Network single({"r"}, 0, {});
  const auto set = build_activation_set(single, InterferenceModel::Primary);
  EXPECT_THROW(compute_capacity(single, set, CapacityMethod::NodeCuts), Error);
  Fixture f("k4_unit");
  EXPECT_THROW(compute_capacity(f.sc.network, f.set, CapacityMethod::TreeRestricted), Error);
  EXPECT_EQ(parse_method("all-cuts"), CapacityMethod::AllCuts);
  EXPECT_THROW(parse_method("bogus"), Error);
}

TEST(TreeCapacity, Fig5SinglesAndAll) {
  Fixture f("fig5");
  const auto trees = enumerate_arborescences(f.sc.network).trees;
  ASSERT_EQ(trees.size(), 6u);
  Rational best = 0;
  for (const auto& t : trees) best = std::max(best, compute_tree_capacity(f.sc.network, f.set, {&t, 1}).lambda);
  EXPECT_EQ(best, Rational(3, 4));
  EXPECT_EQ(compute_tree_capacity(f.sc.network, f.set, trees).lambda, Rational(1));
  EXPECT_EQ(best_tree_subset(f.sc.network, f.set, trees, 1).lambda, Rational(3, 4));
}

// T1 = {ra, rb, ac}, T2 = {ra, ab, bc}, T3 = {ra, rc, ab}.
TEST(TreeCapacity, Fig5NestedChainReachesOne) {
  Fixture f("fig5");
  const std::vector<Arborescence> chain{{{0, 1, 4}}, {{0, 3, 5}}, {{0, 2, 3}}};
  const auto one = compute_tree_capacity(f.sc.network, f.set, {chain.data(), 1}).lambda;
  const auto two = compute_tree_capacity(f.sc.network, f.set, {chain.data(), 2}).lambda;
  const auto three = compute_tree_capacity(f.sc.network, f.set, chain).lambda;
  EXPECT_EQ(one, Rational(3, 4));
  EXPECT_EQ(two, Rational(6, 7));
  EXPECT_EQ(three, Rational(1));
}

TEST(TreeCapacity, NeverExceedsCapacity) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto net = oracle::random_dag(rng, 4 + trial % 3, 7, true, 3);
    const auto set = build_activation_set(net, InterferenceModel::Primary);
    const auto trees = enumerate_arborescences(net, 50).trees;
    const auto cap = compute_capacity(net, set, CapacityMethod::NodeCuts).lambda;
    const auto tree = compute_tree_capacity(net, set, trees);
    EXPECT_LE(tree.lambda, cap);
    Rational sum = 0;
    for (const auto& r : tree.tree_rates) sum += r;
    EXPECT_EQ(sum, tree.lambda);
  }
}

TEST(TreeCapacity, RejectsNonTree) {
  Fixture f("fig5");
  const std::vector<Arborescence> bad{{{0, 1}}};
  EXPECT_THROW(compute_tree_capacity(f.sc.network, f.set, bad), Error);
  EXPECT_THROW(compute_tree_capacity(f.sc.network, f.set, std::vector<Arborescence>{}), Error);
}

TEST(DisjointTrees, Examples) {
  EXPECT_EQ(disjoint_tree_count(builtin("k4_unit").network), 1u);
  Network doubled({"r", "v", "w"}, 0, {{0, 1, 1}, {0, 1, 1}, {1, 2, 1}, {1, 2, 1}});
  EXPECT_EQ(disjoint_tree_count(doubled), 2u);
}

TEST(DisjointTrees, MatchesBruteForce) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 60; ++trial) {
    const auto net = oracle::random_dag(rng, 2 + trial % 5, 3 + trial % 10, true, 1);
    EXPECT_EQ(disjoint_tree_count(net), max_disjoint_trees_bruteforce(net)) << "trial " << trial;
  }
}

TEST(DisjointTrees, Errors) {
  try {
    disjoint_tree_count(builtin("fig5").network);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotUnitCapacity);
  }
  try {
    disjoint_tree_count(builtin("cycle4").network);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotDag);
  }
}

TEST(CapacityJson, Fields) {
  Fixture f("k4_unit");
  const auto j = to_json(f.sc.network, compute_capacity(f.sc.network, f.set, CapacityMethod::NodeCuts));
  EXPECT_EQ(j["lambda"], "1/2");
  EXPECT_DOUBLE_EQ(j["lambda_float"].get<double>(), 0.5);
  EXPECT_EQ(j["method"], "node-cuts");
  EXPECT_EQ(j["beta"].size(), 6u);
  EXPECT_FALSE(j["mixture"].empty());
  EXPECT_FALSE(j.contains("tree_rates"));
}
