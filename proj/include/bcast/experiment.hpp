#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "bcast/capacity.hpp"
#include "bcast/error.hpp"
#include "bcast/policies.hpp"
#include "bcast/scenario.hpp"
#include "bcast/simulation.hpp"

namespace bcast {

/// Scenario plus the derived objects policies hold references to.
class Workspace {
 public:
  explicit Workspace(Scenario scenario)
      : scenario_(std::move(scenario)), set_(make_activation_set(scenario_)) {}

  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;

  const Scenario& scenario() const noexcept { return scenario_; }
  const Network& network() const noexcept { return scenario_.network; }
  const ActivationSet& activation_set() const noexcept { return set_; }

  /// Node-cuts capacity, computed once on first use.
  const CapacityReport& capacity() const {
    std::call_once(capacity_once_, [this] {
      capacity_ = compute_capacity(scenario_.network, set_, CapacityMethod::NodeCuts);
    });
    return *capacity_;
  }

 private:
  Scenario scenario_;
  ActivationSet set_;
  mutable std::once_flag capacity_once_;
  mutable std::optional<CapacityReport> capacity_;
};

/// Where the tree baseline gets its trees.
struct TreeChoice {
  enum class Source { Auto, Scenario, Given };
  Source source = Source::Auto;
  std::size_t count = 1;            // Auto
  std::vector<Arborescence> given;  // Given

  std::string label() const {
    switch (source) {
      case Source::Auto: return "auto:" + std::to_string(count);
      case Source::Scenario: return "scenario:" + std::to_string(count);
      case Source::Given: return "file:" + std::to_string(given.size());
    }
    return "auto";
  }
};

struct PolicyOptions {
  TreeChoice trees;
  double epsilon = 0.0;  // pirand slack
};

inline std::vector<Arborescence> resolve_trees(const Workspace& ws, const TreeChoice& choice) {
  switch (choice.source) {
    case TreeChoice::Source::Auto:
      return auto_select_trees(ws.network(), ws.activation_set(), choice.count);
    case TreeChoice::Source::Scenario: {
      if (ws.scenario().trees.empty()) throw Error(ErrorCode::InvalidTree, "scenario lists no trees");
      auto trees = ws.scenario().arborescences();
      if (choice.count < trees.size()) trees.resize(choice.count);
      return trees;
    }
    case TreeChoice::Source::Given:
      if (choice.given.empty()) throw Error(ErrorCode::InvalidTree, "no trees given");
      return choice.given;
  }
  return {};
}

/// "pistar" | "pitree" | "pirand". Pre-resolved trees skip tree selection.
inline std::unique_ptr<Policy> make_policy(std::string_view name, const Workspace& ws, double lambda,
                                           std::uint64_t seed, const PolicyOptions& options,
                                           const std::vector<Arborescence>* trees = nullptr) {
  if (name == "pistar") return std::make_unique<PiStarPolicy>(ws.network(), ws.activation_set());
  if (name == "pitree")
    return std::make_unique<PiTreePolicy>(ws.network(), ws.activation_set(),
                                          trees ? *trees : resolve_trees(ws, options.trees));
  if (name == "pirand")
    // Its own stream, apart from the arrival stream seeded with `seed`.
    return pirand_build(ws.network(), ws.activation_set(), ws.capacity(), lambda, options.epsilon,
                        seed ^ 0x9E3779B97F4A7C15ULL);
  throw Error(ErrorCode::UnknownPolicy, "unknown policy '" + std::string(name) + "'");
}

struct SweepConfig {
  std::vector<std::string> policies;
  std::vector<double> lambdas;
  std::size_t seeds = 1;
  std::uint64_t seed_base = 0;
  std::int64_t slots = 0;
  ArrivalKind arrivals = ArrivalKind::Poisson;
  PolicyOptions policy;
  bool check_invariants = false;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct SweepRow {
  std::string policy;
  std::string trees;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::int64_t slots = 0;
  double min_rate = 0.0;
  std::optional<double> avg_delay;
  std::int64_t delivered = 0;
  std::int64_t undelivered = 0;
  bool deadlock = false;
  std::string error;  // set when the run could not start (e.g. RateTooHigh)
};

/// Runs are indexed policy-major, then lambda, then seed; run i uses seed
/// seed_base + i. Rows come back in index order whatever the thread count.
inline std::vector<SweepRow> run_sweep(const Workspace& ws, const SweepConfig& cfg) {
  for (const auto& p : cfg.policies)
    if (p != "pistar" && p != "pitree" && p != "pirand")
      throw Error(ErrorCode::UnknownPolicy, "unknown policy '" + p + "'");
  if (cfg.seeds == 0 || cfg.lambdas.empty() || cfg.policies.empty())
    throw Error(ErrorCode::InvalidArgument, "sweep needs policies, lambdas and at least one seed");

  std::optional<std::vector<Arborescence>> trees;
  if (std::find(cfg.policies.begin(), cfg.policies.end(), "pitree") != cfg.policies.end())
    trees = resolve_trees(ws, cfg.policy.trees);

  const std::size_t total = cfg.policies.size() * cfg.lambdas.size() * cfg.seeds;
  std::vector<SweepRow> rows(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      const std::size_t lambda_idx = (i / cfg.seeds) % cfg.lambdas.size();
      const std::size_t policy_idx = i / (cfg.seeds * cfg.lambdas.size());
      SweepRow& row = rows[i];
      row.policy = cfg.policies[policy_idx];
      row.trees = row.policy == "pitree" ? cfg.policy.trees.label() : "-";
      row.lambda = cfg.lambdas[lambda_idx];
      row.seed = cfg.seed_base + i;
      row.slots = cfg.slots;
      try {
        auto policy = make_policy(row.policy, ws, row.lambda, row.seed, cfg.policy,
                                  trees ? &*trees : nullptr);
        RunOptions opts;
        opts.slots = cfg.slots;
        opts.seed = row.seed;
        opts.check_invariants = cfg.check_invariants;
        const RunMetrics m = run(ws.network(), *policy, {cfg.arrivals, row.lambda}, opts);
        row.min_rate = m.min_rate;
        row.avg_delay = m.average_delay;
        row.delivered = m.delivered;
        row.undelivered = m.undelivered;
        row.deadlock = m.deadlock;
      } catch (const Error& e) {
        row.error = std::string(e.name());
      }
    }
  };

  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

inline constexpr std::string_view sweep_csv_header =
    "policy,trees,lambda,seed,slots,min_rate,avg_delay,delivered,undelivered,deadlock,error";

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << sweep_csv_header << '\n';
  for (const SweepRow& r : rows) {
    std::ostringstream line;
    line << std::setprecision(10);
    line << r.policy << ',' << r.trees << ',' << r.lambda << ',' << r.seed << ',' << r.slots << ','
         << r.min_rate << ',';
    if (r.avg_delay) line << *r.avg_delay;
    line << ',' << r.delivered << ',' << r.undelivered << ',' << (r.deadlock ? 1 : 0) << ',' << r.error;
    os << line.str() << '\n';
  }
}

}  // namespace bcast
