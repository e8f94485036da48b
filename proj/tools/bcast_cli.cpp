// Command-line front end: capacity, trees, simulate, sweep.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "bcast/bcast.hpp"

namespace {

using bcast::Error;
using bcast::ErrorCode;

// Relative output paths land under $BCAST_OUT_DIR when it is set.
std::string output_path(const std::string& path) {
  if (path.empty() || path == "-") return path;
  const char* dir = std::getenv("BCAST_OUT_DIR");
  if (dir == nullptr || *dir == '\0' || std::filesystem::path(path).is_absolute()) return path;
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / path).string();
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  const std::string target = output_path(path);
  std::ofstream out(target);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + target);
  out << text;
}

std::vector<double> parse_lambdas(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw Error(ErrorCode::InvalidArgument, "bad lambda '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "no lambdas given");
  return out;
}

std::vector<std::string> split_policies(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

// --trees: "auto", "scenario", or a JSON file holding [[edge indices], ...].
bcast::TreeChoice tree_choice(const bcast::Network& net, const std::string& which, std::size_t count) {
  bcast::TreeChoice choice;
  choice.count = count;
  if (which == "auto") return choice;
  if (which == "scenario") {
    choice.source = bcast::TreeChoice::Source::Scenario;
    return choice;
  }
  choice.source = bcast::TreeChoice::Source::Given;
  choice.given = bcast::load_tree_file(which, net);
  return choice;
}

int fail(std::string_view name, const std::string& message, int code) {
  nlohmann::json err{{"error", name}, {"message", message}};
  std::cerr << err.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Broadcast capacity and scheduling toolkit"};
  app.require_subcommand(1);

  std::string scenario_ref;

  auto* capacity = app.add_subcommand("capacity", "Broadcast capacity LP");
  std::string method = "node-cuts";
  std::string capacity_out;
  capacity->add_option("scenario", scenario_ref, "builtin:NAME or scenario file")->required();
  capacity->add_option("--method", method, "node-cuts | all-cuts")
      ->check(CLI::IsMember({"node-cuts", "all-cuts"}));
  capacity->add_option("--out", capacity_out, "output file (default stdout)");

  auto* trees = app.add_subcommand("trees", "Arborescence counts and tree-restricted capacity");
  std::size_t subset_max = 0;
  bool count_only = false;
  std::uint64_t tree_limit = 4096;
  std::string trees_out;
  trees->add_option("scenario", scenario_ref, "builtin:NAME or scenario file")->required();
  trees->add_option("--subset-max", subset_max, "best capacity for subset sizes 1..k");
  trees->add_flag("--count-only", count_only, "print only the arborescence count");
  trees->add_option("--limit", tree_limit, "largest tree count searched by --subset-max");
  trees->add_option("--out", trees_out, "output file (default stdout)");

  auto* simulate = app.add_subcommand("simulate", "Run one simulation");
  std::string policy = "pistar";
  double lambda = 0;
  std::int64_t slots = 0;
  std::uint64_t seed = 0;
  std::string tree_spec = "auto";
  std::size_t tree_count = 1;
  double epsilon = 0;
  std::string arrival = "poisson";
  std::string trace_path, metrics_path, packets_path;
  bool no_checks = false;
  simulate->add_option("scenario", scenario_ref, "builtin:NAME or scenario file")->required();
  simulate->add_option("--policy", policy, "pistar | pitree | pirand");
  simulate->add_option("--lambda", lambda, "arrival rate (packets per slot)")->required();
  simulate->add_option("--slots", slots, "number of slots")->required();
  simulate->add_option("--seed", seed, "random seed")->required();
  simulate->add_option("--trees", tree_spec, "auto | scenario | tree file");
  simulate->add_option("--tree-count", tree_count, "number of trees for --trees auto");
  simulate->add_option("--epsilon", epsilon, "pirand slack");
  simulate->add_option("--arrivals", arrival, "poisson | bernoulli | deterministic");
  simulate->add_option("--trace", trace_path, "per-slot trace CSV");
  simulate->add_option("--out", metrics_path, "metrics JSON (default stdout)");
  simulate->add_option("--packets", packets_path, "per-packet CSV");
  simulate->add_flag("--no-checks", no_checks, "skip per-slot invariant checks");

  auto* sweep = app.add_subcommand("sweep", "Grid of simulations");
  std::string policies = "pistar";
  std::string lambdas;
  std::size_t seeds = 1;
  std::string sweep_out;
  unsigned threads = 0;
  sweep->add_option("scenario", scenario_ref, "builtin:NAME or scenario file")->required();
  sweep->add_option("--policy", policies, "comma-separated policies");
  sweep->add_option("--lambdas", lambdas, "comma-separated arrival rates")->required();
  sweep->add_option("--slots", slots, "slots per run")->required();
  sweep->add_option("--seeds", seeds, "runs per (policy, lambda)");
  sweep->add_option("--seed", seed, "seed of run 0; run i uses seed + i")->required();
  sweep->add_option("--trees", tree_spec, "auto | scenario | tree file");
  sweep->add_option("--tree-count", tree_count, "number of trees for --trees auto");
  sweep->add_option("--epsilon", epsilon, "pirand slack");
  sweep->add_option("--arrivals", arrival, "poisson | bernoulli | deterministic");
  sweep->add_option("--threads", threads, "worker threads (0: all cores)");
  sweep->add_option("--out", sweep_out, "sweep CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("UsageError", e.what(), 2);
  }

  try {
    const bcast::Scenario sc = bcast::resolve_scenario(scenario_ref);

    if (*capacity) {
      const auto set = bcast::make_activation_set(sc);
      const auto report = bcast::compute_capacity(sc.network, set, bcast::parse_method(method));
      nlohmann::json out = bcast::to_json(sc.network, report);
      out["scenario"] = sc.name;
      emit(capacity_out, out.dump(2) + "\n");
      return 0;
    }

    if (*trees) {
      const auto all = bcast::enumerate_arborescences(sc.network, subset_max > 0 ? tree_limit : 0);
      if (count_only) {
        emit(trees_out, std::to_string(all.count) + "\n");
        return 0;
      }
      nlohmann::json out;
      out["scenario"] = sc.name;
      out["count"] = all.count;
      if (subset_max > 0) {
        if (all.count > tree_limit)
          throw Error(ErrorCode::SizeLimit, std::to_string(all.count) + " trees exceed --limit " +
                                                std::to_string(tree_limit));
        const auto set = bcast::make_activation_set(sc);
        auto& best = out["best"] = nlohmann::json::array();
        for (std::size_t k = 1; k <= std::min<std::size_t>(subset_max, all.trees.size()); ++k) {
          const auto subset = bcast::best_tree_subset(sc.network, set, all.trees, k);
          nlohmann::json chosen = nlohmann::json::array();
          for (std::size_t i : subset.members) chosen.push_back(all.trees[i].edges);
          best.push_back({{"size", k},
                          {"lambda", bcast::to_fraction_string(subset.lambda)},
                          {"lambda_float", subset.lambda.get_d()},
                          {"trees", std::move(chosen)}});
        }
      }
      emit(trees_out, out.dump(2) + "\n");
      return 0;
    }

    bcast::Workspace ws(sc);
    bcast::PolicyOptions options;
    options.trees = tree_choice(sc.network, tree_spec, tree_count);
    options.epsilon = epsilon;
    const auto kind = bcast::parse_arrival_kind(arrival);

    if (*simulate) {
      auto pol = bcast::make_policy(policy, ws, lambda, seed, options);
      bcast::RunOptions opts;
      opts.slots = slots;
      opts.seed = seed;
      opts.check_invariants = !no_checks;
      std::ofstream trace;
      if (!trace_path.empty()) {
        const std::string target = output_path(trace_path);
        trace.open(target);
        if (!trace) throw Error(ErrorCode::InvalidArgument, "cannot write " + target);
        bcast::write_trace_header(trace, sc.network);
        opts.trace = [&](const bcast::TraceRecord& row) { bcast::write_trace_row(trace, sc.network, row); };
      }
      const auto m = bcast::run(sc.network, *pol, {kind, lambda}, opts);
      nlohmann::json out = bcast::to_json(sc.network, m);
      out["scenario"] = sc.name;
      out["arrivals"] = arrival;
      if (policy == "pitree") out["trees"] = options.trees.label();
      emit(metrics_path, out.dump(2) + "\n");
      if (!packets_path.empty()) {
        std::ostringstream csv;
        bcast::write_packets_csv(csv, m);
        emit(packets_path, csv.str());
      }
      return 0;
    }

    if (*sweep) {
      bcast::SweepConfig cfg;
      cfg.policies = split_policies(policies);
      cfg.lambdas = parse_lambdas(lambdas);
      cfg.seeds = seeds;
      cfg.seed_base = seed;
      cfg.slots = slots;
      cfg.arrivals = kind;
      cfg.policy = options;
      cfg.threads = threads;
      const auto rows = bcast::run_sweep(ws, cfg);
      std::ostringstream csv;
      bcast::write_sweep_csv(csv, rows);
      emit(sweep_out, csv.str());
      return 0;
    }
  } catch (const bcast::Error& e) {
    return fail(e.name(), e.what(), 1);
  } catch (const std::exception& e) {
    return fail("InternalError", e.what(), 1);
  }
  return 0;
}
