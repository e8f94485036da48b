// One slot of the deficit policy on the 4-node unit graph, printed step by step.

#include <iostream>

#include "bcast/bcast.hpp"

using namespace bcast;

int main() {
  const Scenario sc = builtin("k4_unit");
  const Network& net = sc.network;
  const ActivationSet set = make_activation_set(sc);

  SystemState state{{10, 3, 3, 2}, 0};
  const DeficitView view = compute_deficits(net, state);

  std::cout << "deficits Q:\n";
  for (EdgeId e = 0; e < net.edge_count(); ++e)
    std::cout << "  " << net.edge_label(e) << "  Q=" << view.deficit[e] << "  W=" << view.weight[e] << '\n';

  std::cout << "minimum deficits X:\n";
  for (NodeId v = 0; v < net.node_count(); ++v) {
    if (v == net.source()) continue;
    std::cout << "  " << net.name(v) << "  X=" << view.min_deficit[v] << "  via " << net.name(view.minimizer[v])
              << '\n';
  }

  const PolicyDecision d = pistar_decide(net, set, state);
  std::cout << "activation:";
  for (EdgeId e : d.activation.active_edges()) std::cout << ' ' << net.edge_label(e);
  std::cout << '\n';
  for (const Transfer& t : d.transfers)
    std::cout << "  " << net.edge_label(t.edge) << " carries packets " << t.first_packet << ".."
              << t.first_packet + t.count - 1 << '\n';

  state = pistar_update(net, state, d, 1);
  std::cout << "after one arrival R =";
  for (auto r : state.received) std::cout << ' ' << r;
  std::cout << '\n';
}
