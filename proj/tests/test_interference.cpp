#include <gtest/gtest.h>

#include <random>

#include "bcast/bcast.hpp"
#include "oracles.hpp"

using namespace bcast;

namespace {

template <class W>
W value_of(const ActivationVector& s, const std::vector<W>& w) {
  W total{};
  for (EdgeId e = 0; e < s.size(); ++e)
    if (s[e]) total += w[e];
  return total;
}

}  // namespace

TEST(ActivationSet, K4PrimaryHasTenMatchings) {
  const auto net = builtin("k4_unit").network;
  const auto set = build_activation_set(net, InterferenceModel::Primary);
  EXPECT_EQ(set.size(), 10u);
  EXPECT_EQ(set.size(), oracle::telephone(4));
  std::size_t perfect = 0, singles = 0;
  for (const auto& s : set.activations()) {
    EXPECT_TRUE(set.contains(s));
    const auto n = s.active_edges().size();
    perfect += n == 2;
    singles += n == 1;
  }
  EXPECT_EQ(perfect, 3u);
  EXPECT_EQ(singles, 6u);
}

TEST(ActivationSet, Dag10MatchingCount) {
  const auto net = builtin("dag10").network;
  const auto set = build_activation_set(net, InterferenceModel::Primary);
  EXPECT_EQ(set.size(), 9496u);
  EXPECT_EQ(set.size(), oracle::telephone(10));
}

TEST(ActivationSet, MatchingCountAgainstBruteForce) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const auto net = oracle::random_dag(rng, 3 + trial % 5, 4 + trial % 9, true, 2);
    const auto set = build_activation_set(net, InterferenceModel::Primary);
    EXPECT_EQ(set.size(), oracle::brute_force_matching_count(net)) << "trial " << trial;
    EXPECT_TRUE(std::is_sorted(set.activations().begin(), set.activations().end()));
  }
}

TEST(ActivationSet, NoneModelAcceptsEverything) {
  const auto net = builtin("k4_unit").network;
  const auto set = build_activation_set(net, InterferenceModel::None);
  ActivationVector ones(net.edge_count());
  for (EdgeId e = 0; e < net.edge_count(); ++e) ones.set(e);
  EXPECT_TRUE(set.contains(ones));
  EXPECT_EQ(set.lp_columns().size(), 1u);
}

TEST(ActivationSet, ExplicitList) {
  const auto net = builtin("k4_unit").network;
  const auto set = build_activation_set(net, InterferenceModel::Explicit,
                                        std::vector<std::vector<EdgeId>>{{0, 1}, {2}});
  EXPECT_EQ(set.size(), 3u);  // plus the idle vector
  EXPECT_TRUE(set.contains(oracle::activation_of(6, {0, 1})));
  EXPECT_FALSE(set.contains(oracle::activation_of(6, {0})));
  EXPECT_THROW(build_activation_set(net, InterferenceModel::Explicit,
                                    std::vector<std::vector<EdgeId>>{{9}}),
               Error);
  EXPECT_THROW(build_activation_set(net, InterferenceModel::Explicit), Error);
}

TEST(ActivationSet, CapOnMaterialization) {
  const auto net = builtin("dag10").network;
  try {
    build_activation_set(net, InterferenceModel::Primary, std::nullopt, 1000);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooManyActivations);
  }
}

TEST(MaxWeight, WorkedSlotWeights) {
  const auto net = builtin("k4_unit").network;
  const auto set = build_activation_set(net, InterferenceModel::Primary);
  const std::vector<std::int64_t> w{6, 0, 1, 0, 1, 1};
  const auto s = max_weight_activation(set, w);
  EXPECT_EQ(s.bitstring(), "100001");
  EXPECT_EQ(value_of(s, w), 7);
}

TEST(MaxWeight, ZeroWeightsGiveIdle) {
  const auto net = builtin("k4_unit").network;
  const auto set = build_activation_set(net, InterferenceModel::Primary);
  const std::vector<std::int64_t> w(6, 0);
  EXPECT_TRUE(max_weight_activation(set, w).empty());
}

TEST(MaxWeight, NoInterference) {
  Network net({"r", "a", "b"}, 0, {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}});
  const auto set = build_activation_set(net, InterferenceModel::None);
  const std::vector<std::int64_t> w{2, 0, 3};
  const auto s = max_weight_activation(set, w);
  EXPECT_EQ(s.bitstring(), "101");
  EXPECT_EQ(value_of(s, w), 5);
}

TEST(MaxWeight, LengthMismatch) {
  const auto set = build_activation_set(builtin("k4_unit").network, InterferenceModel::Primary);
  EXPECT_THROW(max_weight_activation(set, std::vector<std::int64_t>{1, 2}), Error);
}

// Small weights make ties common; every solver must return the scan's
// lexicographically smallest maximizer.
TEST(MaxWeight, SolversAgreeWithScan) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const auto net = oracle::random_dag(rng, 3 + trial % 7, 5 + trial % 14, trial % 2 == 0, 3);
    const auto set = build_activation_set(net, InterferenceModel::Primary);
    std::vector<std::int64_t> w(net.edge_count());
    for (auto& x : w) x = std::uniform_int_distribution<int>(0, 3)(rng);
    const auto expected = max_weight_activation_scan(set, std::span<const std::int64_t>(w));
    const auto dp = detail::max_weight_matching_dp(set, std::span<const std::int64_t>(w));
    const auto subset = detail::max_weight_matching_subset(set, std::span<const std::int64_t>(w));
    EXPECT_EQ(dp, expected) << "trial " << trial;
    ASSERT_TRUE(subset.has_value());
    EXPECT_EQ(*subset, expected) << "trial " << trial;
    EXPECT_EQ(max_weight_activation(set, w), expected);
  }
}

TEST(MaxWeight, DoubleWeightsAgreeWithScan) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto net = oracle::random_dag(rng, 4 + trial % 5, 6 + trial % 8, false, 2);
    const auto set = build_activation_set(net, InterferenceModel::Primary);
    std::vector<double> w(net.edge_count());
    for (auto& x : w) x = std::uniform_int_distribution<int>(0, 4)(rng) * 0.5;
    EXPECT_EQ(max_weight_activation(set, w), max_weight_activation_scan(set, std::span<const double>(w)));
  }
}

TEST(MaxWeight, ScalingInvariance) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto net = oracle::random_dag(rng, 5, 9, false, 3);
    const auto set = build_activation_set(net, InterferenceModel::Primary);
    std::vector<std::int64_t> w(net.edge_count()), scaled(net.edge_count());
    const std::int64_t k = std::uniform_int_distribution<int>(2, 1000)(rng);
    for (std::size_t e = 0; e < w.size(); ++e) {
      w[e] = std::uniform_int_distribution<int>(0, 5)(rng);
      scaled[e] = w[e] * k;
    }
    EXPECT_EQ(max_weight_activation(set, w), max_weight_activation(set, scaled));
  }
}

TEST(MaxWeight, Dag10WeightsAreFeasibleMaximizers) {
  const auto net = builtin("dag10").network;
  const auto set = build_activation_set(net, InterferenceModel::Primary);
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::int64_t> w(net.edge_count());
    for (auto& x : w) x = std::uniform_int_distribution<int>(0, 50)(rng);
    const auto fast = max_weight_activation(set, w);
    EXPECT_TRUE(set.contains(fast));
    EXPECT_EQ(fast, max_weight_activation_scan(set, std::span<const std::int64_t>(w)));
  }
}
