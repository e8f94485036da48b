// Deficit policy against the tree baseline on fig5, across a few loads.

#include <cstdio>

#include "bcast/bcast.hpp"

using namespace bcast;

int main() {
  Workspace ws(builtin("fig5"));
  const auto one = auto_select_trees(ws.network(), ws.activation_set(), 1);
  const auto all = enumerate_arborescences(ws.network()).trees;

  std::printf("%-8s %-10s %10s %12s\n", "lambda", "policy", "min_rate", "avg_delay");
  for (double lambda : {0.5, 0.7, 0.8, 0.95}) {
    RunOptions opts;
    opts.slots = 20000;
    opts.seed = 7;

    PiStarPolicy star(ws.network(), ws.activation_set());
    PiTreePolicy tree1(ws.network(), ws.activation_set(), one);
    PiTreePolicy tree_all(ws.network(), ws.activation_set(), all);
    const std::pair<const char*, Policy*> runs[] = {{"pistar", &star}, {"tree x1", &tree1}, {"tree all", &tree_all}};
    for (const auto& [label, policy] : runs) {
      const RunMetrics m = run(ws.network(), *policy, {ArrivalKind::Poisson, lambda}, opts);
      std::printf("%-8.2f %-10s %10.4f %12.1f\n", lambda, label, m.min_rate, m.average_delay.value_or(-1));
    }
  }
}
