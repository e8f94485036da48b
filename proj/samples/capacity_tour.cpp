// Broadcast capacity of the built-in scenarios with an optimal schedule mix.

#include <iostream>

#include "bcast/bcast.hpp"

using namespace bcast;

int main() {
  for (const std::string& name : builtin_names()) {
    const Scenario sc = builtin(name);
    const ActivationSet set = make_activation_set(sc);
    const auto method = sc.mode == GraphMode::Dag ? CapacityMethod::NodeCuts : CapacityMethod::AllCuts;
    const CapacityReport report = compute_capacity(sc.network, set, method);

    std::cout << name << ": lambda = " << to_fraction_string(report.lambda) << " (" << report.lambda.get_d()
              << "), " << method_name(method) << ", |S| = " << set.size() << '\n';
    for (const auto& term : report.mixture) {
      if (term.activation.active_edges().size() > 6) {
        std::cout << "    p=" << to_fraction_string(term.probability) << "  " << term.activation.bitstring() << '\n';
        continue;
      }
      std::cout << "    p=" << to_fraction_string(term.probability) << " ";
      for (EdgeId e : term.activation.active_edges()) std::cout << ' ' << sc.network.edge_label(e);
      std::cout << '\n';
    }
  }
}
