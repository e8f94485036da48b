#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "bcast/error.hpp"
#include "bcast/network.hpp"
#include "bcast/policies.hpp"

namespace bcast {

enum class ArrivalKind { Bernoulli, Poisson, Deterministic };

constexpr std::string_view arrival_name(ArrivalKind kind) noexcept {
  switch (kind) {
    case ArrivalKind::Bernoulli: return "bernoulli";
    case ArrivalKind::Poisson: return "poisson";
    case ArrivalKind::Deterministic: return "deterministic";
  }
  return "poisson";
}

inline ArrivalKind parse_arrival_kind(std::string_view name) {
  if (name == "bernoulli") return ArrivalKind::Bernoulli;
  if (name == "poisson") return ArrivalKind::Poisson;
  if (name == "deterministic") return ArrivalKind::Deterministic;
  throw Error(ErrorCode::InvalidArgument, "unknown arrival process '" + std::string(name) + "'");
}

/// i.i.d. exogenous arrivals A(t) with mean `rate` packets per slot.
struct ArrivalProcess {
  ArrivalKind kind = ArrivalKind::Poisson;
  double rate = 0.0;
};

class ArrivalGenerator {
 public:
  ArrivalGenerator(ArrivalProcess process, std::uint64_t seed)
      : process_(process), rng_(seed) {
    if (!(process.rate >= 0) || !std::isfinite(process.rate))
      throw Error(ErrorCode::InvalidArgument, "arrival rate must be finite and nonnegative");
    if (process.kind == ArrivalKind::Bernoulli && process.rate > 1)
      throw Error(ErrorCode::InvalidArgument, "bernoulli arrivals need rate <= 1");
    exp_minus_rate_ = std::exp(-process.rate);
  }

  std::int64_t next() {
    switch (process_.kind) {
      case ArrivalKind::Bernoulli:
        return detail::unit_uniform(rng_) < process_.rate ? 1 : 0;
      case ArrivalKind::Deterministic: {
        // floor((t+1) rate) - floor(t rate)
        const double before = std::floor(static_cast<double>(t_) * process_.rate);
        ++t_;
        return static_cast<std::int64_t>(std::floor(static_cast<double>(t_) * process_.rate) - before);
      }
      case ArrivalKind::Poisson: {
        if (process_.rate > 30.0) return std::poisson_distribution<std::int64_t>(process_.rate)(rng_);
        // Inversion by sequential search.
        const double u = detail::unit_uniform(rng_);
        std::int64_t k = 0;
        double p = exp_minus_rate_;
        double cdf = p;
        while (u >= cdf && k < 10000) {
          ++k;
          p *= process_.rate / static_cast<double>(k);
          cdf += p;
        }
        return k;
      }
    }
    return 0;
  }

 private:
  ArrivalProcess process_;
  std::mt19937_64 rng_;
  double exp_minus_rate_ = 1.0;
  std::int64_t t_ = 0;
};

/// One row of the per-slot trace; R and X are the values at the start of
/// the slot, pulls and edge_packets what happened during it.
struct TraceRecord {
  std::int64_t slot = 0;
  ActivationVector activation;
  std::vector<std::int64_t> pulls;
  std::vector<std::int64_t> received;
  std::vector<std::int64_t> min_deficit;
  std::vector<std::int64_t> edge_packets;
  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct PacketRecord {
  std::int64_t arrival_slot = 0;
  std::int64_t full_delivery_slot = -1;  // -1 while some node lacks it
  friend bool operator==(const PacketRecord&, const PacketRecord&) = default;
};

/// Violation counters; the deficit checks only apply to in-order policies.
struct InvariantReport {
  std::int64_t neighbor_bound = 0;     // R_j > min over in-neighbors R_i
  std::int64_t eligible_set = 0;       // pulled packet outside [R_j+1, min_i R_i]
  std::int64_t in_order = 0;           // transfers not contiguous from R_j+1
  std::int64_t deficit_dynamics = 0;   // X_j(t+1) above its one-slot bound
  std::int64_t telescoping = 0;        // nonzero path residual
  std::int64_t conservation = 0;       // R_j > R_source or duplicate delivery
  std::int64_t infeasible_activation = 0;
  std::int64_t checked_slots = 0;

  std::int64_t total() const noexcept {
    return neighbor_bound + eligible_set + in_order + deficit_dynamics + telescoping +
           conservation + infeasible_activation;
  }
  friend bool operator==(const InvariantReport&, const InvariantReport&) = default;
};

struct RunMetrics {
  std::string policy;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::int64_t slots = 0;
  std::vector<std::int64_t> final_received;
  std::vector<double> rates;
  double min_rate = 0.0;
  std::int64_t total_arrivals = 0;
  std::vector<PacketRecord> packets;
  std::vector<std::int32_t> node_delivery_slots;  // packets x nodes, optional
  std::optional<double> average_delay;
  std::int64_t delivered = 0;
  std::int64_t undelivered = 0;
  std::int64_t max_sum_deficit = 0;
  std::vector<std::int64_t> sum_deficit_series;
  std::vector<double> mean_offered;  // time-average activated in-capacity per node
  bool deadlock = false;
  std::int64_t deadlock_slot = -1;
  InvariantReport invariants;
  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

struct RunOptions {
  std::int64_t slots = 0;
  std::uint64_t seed = 0;
  bool check_invariants = true;
  std::int64_t telescoping_interval = 1;
  std::int64_t deadlock_window = 0;  // 0: 10 * |V| * max capacity
  bool record_node_deliveries = false;
  std::function<void(const TraceRecord&)> trace;
};

/// Path r -> ... -> j obtained by walking from j to the in-neighbor with the
/// smallest deficit (ties: smallest node, then smallest edge).
inline std::vector<NodeId> construct_path(const Network& net, const SystemState& state, NodeId j) {
  std::vector<NodeId> path{j};
  NodeId u = j;
  while (u != net.source()) {
    if (path.size() > net.node_count())
      throw Error(ErrorCode::Unreachable, "path construction revisits a node");
    NodeId best = npos;
    std::int64_t best_q = 0;
    for (EdgeId e : net.in_edges(u)) {
      const NodeId i = net.edge(e).from;
      const std::int64_t q = state.received[i] - state.received[u];
      if (best == npos || q < best_q || (q == best_q && i < best)) {
        best = i;
        best_q = q;
      }
    }
    if (best == npos)
      throw Error(ErrorCode::Unreachable, "node " + net.name(u) + " has no in-neighbors");
    path.push_back(best);
    u = best;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

/// R_r - sum of X over the constructed path (source excluded) - R_j.
inline std::int64_t telescoping_check(const Network& net, const SystemState& state, NodeId j) {
  const std::vector<NodeId> path = construct_path(net, state, j);
  std::int64_t residual = state.received[net.source()] - state.received[j];
  for (NodeId u : path) {
    if (u == net.source()) continue;
    std::int64_t x = std::numeric_limits<std::int64_t>::max();
    for (EdgeId e : net.in_edges(u))
      x = std::min(x, state.received[net.edge(e).from] - state.received[u]);
    residual -= x;
  }
  return residual;
}

/// Slots in which every edge of `cycle` carried at least one packet.
inline std::int64_t check_idle_link(std::span<const TraceRecord> trace, std::span<const EdgeId> cycle) {
  std::int64_t violations = 0;
  for (const TraceRecord& row : trace) {
    if (cycle.empty()) break;
    bool all_busy = true;
    for (EdgeId e : cycle)
      if (row.edge_packets.at(e) == 0) {
        all_busy = false;
        break;
      }
    if (all_busy) ++violations;
  }
  return violations;
}

/// Runs `options.slots` slots of decide, deliver, update, arrive.
inline RunMetrics run(const Network& net, Policy& policy, const ArrivalProcess& arrivals,
                      const RunOptions& options) {
  if (options.slots < 1) throw Error(ErrorCode::InvalidArgument, "need at least one slot");
  const std::size_t n = net.node_count();
  const NodeId src = net.source();
  const std::vector<std::int64_t> caps = net.integer_capacity_vector();
  const bool in_order = policy.in_order();
  const bool check = options.check_invariants;
  const bool dag = is_dag(net);  // path construction needs a DAG
  const std::int64_t max_cap = caps.empty() ? 1 : std::max<std::int64_t>(1, *std::max_element(caps.begin(), caps.end()));
  const std::int64_t window = options.deadlock_window > 0
                                  ? options.deadlock_window
                                  : 10 * static_cast<std::int64_t>(n) * max_cap;

  ArrivalGenerator generator(arrivals, options.seed);
  RunMetrics m;
  m.policy = std::string(policy.name());
  m.lambda = arrivals.rate;
  m.seed = options.seed;
  m.slots = options.slots;
  m.sum_deficit_series.reserve(static_cast<std::size_t>(options.slots));

  SystemState state = SystemState::initial(n);
  std::vector<std::int32_t> missing;  // per packet: nodes still lacking it
  std::vector<std::vector<bool>> holds(in_order ? 0 : n);  // packet flags, 1-based ids
  std::vector<double> offered_total(n, 0.0);
  std::vector<std::int64_t> last_progress(n, 0);
  std::vector<std::int64_t> edge_packets(net.edge_count());

  auto deliver = [&](NodeId node, std::int64_t packet, std::int64_t slot) {
    const std::size_t idx = static_cast<std::size_t>(packet - 1);
    if (options.record_node_deliveries) m.node_delivery_slots[idx * n + node] = static_cast<std::int32_t>(slot);
    if (--missing[idx] == 0) m.packets[idx].full_delivery_slot = slot;
  };

  std::optional<DeficitView> previous_view;
  std::vector<std::int64_t> previous_offered;
  std::int64_t previous_arrivals = 0;

  for (std::int64_t t = 0; t < options.slots; ++t) {
    const DeficitView view = compute_deficits(net, state);

    if (check && in_order) {
      ++m.invariants.checked_slots;
      for (NodeId j = 0; j < n; ++j) {
        if (j == src) continue;
        for (EdgeId e : net.in_edges(j))
          if (state.received[j] > state.received[net.edge(e).from]) {
            ++m.invariants.neighbor_bound;
            break;
          }
      }
      // X_j(t) <= (X_j(t-1) - mu_in_j)^+ + mu_in at i*, where mu_in at the
      // source reads as A(t-1).
      if (previous_view) {
        for (NodeId j = 0; j < n; ++j) {
          if (j == src || previous_view->minimizer[j] == npos) continue;
          const NodeId istar = previous_view->minimizer[j];
          const std::int64_t upstream = istar == src ? previous_arrivals : previous_offered[istar];
          const std::int64_t bound =
              std::max<std::int64_t>(0, previous_view->min_deficit[j] - previous_offered[j]) + upstream;
          if (view.min_deficit[j] > bound) ++m.invariants.deficit_dynamics;
        }
      }
      if (dag && options.telescoping_interval > 0 && t % options.telescoping_interval == 0)
        for (NodeId j = 0; j < n; ++j)
          if (j != src && telescoping_check(net, state, j) != 0) ++m.invariants.telescoping;
    }

    std::int64_t sum_x = 0;
    for (NodeId j = 0; j < n; ++j)
      if (j != src) sum_x += view.min_deficit[j];
    m.sum_deficit_series.push_back(sum_x);
    m.max_sum_deficit = std::max(m.max_sum_deficit, sum_x);

    PolicyDecision decision = policy.decide(state);
    if (check && !policy.activation_set().contains(decision.activation))
      ++m.invariants.infeasible_activation;

    std::fill(edge_packets.begin(), edge_packets.end(), 0);
    std::vector<std::int64_t> gained(n, 0);
    if (in_order) {
      std::vector<std::int64_t> next_expected(n);
      for (NodeId j = 0; j < n; ++j) next_expected[j] = state.received[j] + 1;
      for (const Transfer& tr : decision.transfers) {
        const Edge& edge = net.edge(tr.edge);
        edge_packets[tr.edge] += tr.count;
        if (check) {
          if (tr.first_packet != next_expected[edge.to] || !decision.activation[tr.edge] ||
              tr.count > caps[tr.edge])
            ++m.invariants.in_order;
          if (tr.first_packet + tr.count - 1 > state.received[edge.from]) ++m.invariants.eligible_set;
        }
        next_expected[edge.to] = tr.first_packet + tr.count;
        for (std::int64_t p = tr.first_packet; p < tr.first_packet + tr.count; ++p) deliver(edge.to, p, t);
        gained[edge.to] += tr.count;
      }
      for (NodeId j = 0; j < n; ++j) {
        if (j == src) continue;
        if (check) {
          if (gained[j] != decision.pulls[j]) ++m.invariants.in_order;
          if (decision.pulls[j] > view.min_deficit[j]) ++m.invariants.eligible_set;
        }
        state.received[j] += gained[j];
      }
    } else {
      for (const Transfer& tr : decision.transfers) {
        const Edge& edge = net.edge(tr.edge);
        edge_packets[tr.edge] += tr.count;
        for (std::int64_t p = tr.first_packet; p < tr.first_packet + tr.count; ++p) {
          const std::size_t idx = static_cast<std::size_t>(p - 1);
          const bool tail_has = edge.from == src ? p <= state.received[src] : holds[edge.from][idx];
          if (check && (!tail_has || holds[edge.to][idx] || !decision.activation[tr.edge]))
            ++m.invariants.conservation;
          if (holds[edge.to][idx]) continue;
          holds[edge.to][idx] = true;
          deliver(edge.to, p, t);
          ++gained[edge.to];
        }
      }
      for (NodeId j = 0; j < n; ++j)
        if (j != src) state.received[j] += gained[j];
    }

    for (NodeId j = 0; j < n; ++j) offered_total[j] += static_cast<double>(decision.offered[j]);

    if (options.trace) {
      TraceRecord row;
      row.slot = t;
      row.activation = decision.activation;
      row.pulls = gained;
      row.received = state.received;
      for (NodeId j = 0; j < n; ++j)
        if (j != src) row.received[j] -= gained[j];
      row.min_deficit = view.min_deficit;
      row.edge_packets = edge_packets;
      options.trace(row);
    }

    const std::int64_t a = generator.next();
    const std::int64_t first = state.received[src] + 1;
    for (std::int64_t k = 0; k < a; ++k) {
      m.packets.push_back({t, n == 1 ? t : -1});
      missing.push_back(static_cast<std::int32_t>(n - 1));
      if (options.record_node_deliveries) {
        m.node_delivery_slots.resize(m.packets.size() * n, -1);
        m.node_delivery_slots[(m.packets.size() - 1) * n + src] = static_cast<std::int32_t>(t);
      }
      for (auto& flags : holds) flags.push_back(false);
    }
    if (!in_order && a > 0)
      for (std::int64_t p = first; p < first + a; ++p) holds[src][static_cast<std::size_t>(p - 1)] = true;
    state.received[src] += a;
    m.total_arrivals += a;
    if (a > 0) policy.on_arrivals(first, a);
    state.slot = t + 1;

    if (check)
      for (NodeId j = 0; j < n; ++j)
        if (state.received[j] > state.received[src]) ++m.invariants.conservation;

    for (NodeId j = 0; j < n; ++j) {
      if (j == src) continue;
      if (gained[j] > 0 || state.received[j] == state.received[src]) last_progress[j] = t;
      if (!m.deadlock && state.received[j] < state.received[src] && t - last_progress[j] >= window) {
        m.deadlock = true;
        m.deadlock_slot = t;
      }
    }

    previous_view = view;
    previous_offered = decision.offered;
    previous_arrivals = a;
  }

  // Closing check of the deficit bound on the final state.
  if (check && in_order && previous_view) {
    const DeficitView view = compute_deficits(net, state);
    for (NodeId j = 0; j < n; ++j) {
      if (j == src || previous_view->minimizer[j] == npos) continue;
      const NodeId istar = previous_view->minimizer[j];
      const std::int64_t upstream = istar == src ? previous_arrivals : previous_offered[istar];
      if (view.min_deficit[j] >
          std::max<std::int64_t>(0, previous_view->min_deficit[j] - previous_offered[j]) + upstream)
        ++m.invariants.deficit_dynamics;
    }
  }

  const double T = static_cast<double>(options.slots);
  m.final_received = state.received;
  m.rates.resize(n);
  m.mean_offered.resize(n);
  for (NodeId j = 0; j < n; ++j) {
    m.rates[j] = static_cast<double>(state.received[j]) / T;
    m.mean_offered[j] = offered_total[j] / T;
  }
  m.min_rate = *std::min_element(m.rates.begin(), m.rates.end());
  double delay_sum = 0.0;
  for (const PacketRecord& p : m.packets) {
    if (p.full_delivery_slot >= 0) {
      ++m.delivered;
      delay_sum += static_cast<double>(p.full_delivery_slot - p.arrival_slot);
    } else {
      ++m.undelivered;
    }
  }
  if (m.delivered > 0) m.average_delay = delay_sum / static_cast<double>(m.delivered);
  return m;
}

struct TrendTest {
  double slope = 0.0;    // per batch index
  double p_value = 1.0;  // two-sided, H0: slope == 0
  std::size_t batches = 0;
};

/// Linear-trend test on batch means of the series tail starting at `from`.
/// Batching removes most of the slot-to-slot correlation before the usual
/// OLS t-test on the slope.
inline TrendTest trend_test(std::span<const std::int64_t> series, std::size_t from,
                            std::size_t batches = 50) {
  TrendTest out;
  if (from >= series.size() || batches < 3) return out;
  const std::size_t len = (series.size() - from) / batches;
  if (len == 0) return out;
  std::vector<double> mean(batches, 0.0);
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t i = 0; i < len; ++i) mean[b] += static_cast<double>(series[from + b * len + i]);
    mean[b] /= static_cast<double>(len);
  }
  const double k = static_cast<double>(batches);
  const double xbar = (k - 1) / 2.0;
  double ybar = 0.0;
  for (double y : mean) ybar += y;
  ybar /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t b = 0; b < batches; ++b) {
    sxx += (b - xbar) * (b - xbar);
    sxy += (b - xbar) * (mean[b] - ybar);
  }
  out.batches = batches;
  out.slope = sxy / sxx;
  double sse = 0.0;
  for (std::size_t b = 0; b < batches; ++b) {
    const double r = mean[b] - ybar - out.slope * (b - xbar);
    sse += r * r;
  }
  const double se = std::sqrt(sse / (k - 2) / sxx);
  if (se == 0.0) {
    out.p_value = out.slope == 0.0 ? 1.0 : 0.0;
    return out;
  }
  boost::math::students_t dist(k - 2);
  out.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.slope / se)));
  return out;
}

inline void write_trace_header(std::ostream& os, const Network& net) {
  os << "slot,activation";
  for (NodeId v = 0; v < net.node_count(); ++v) os << ",R_" << v;
  for (NodeId v = 0; v < net.node_count(); ++v)
    if (v != net.source()) os << ",X_" << v;
  for (NodeId v = 0; v < net.node_count(); ++v)
    if (v != net.source()) os << ",pulls_" << v;
  os << '\n';
}

inline void write_trace_row(std::ostream& os, const Network& net, const TraceRecord& row) {
  os << row.slot << ',' << row.activation.bitstring();
  for (std::int64_t r : row.received) os << ',' << r;
  for (NodeId v = 0; v < net.node_count(); ++v)
    if (v != net.source()) os << ',' << row.min_deficit[v];
  for (NodeId v = 0; v < net.node_count(); ++v)
    if (v != net.source()) os << ',' << row.pulls[v];
  os << '\n';
}

inline void write_packets_csv(std::ostream& os, const RunMetrics& m) {
  os << "packet_id,arrival_slot,full_delivery_slot,delay\n";
  for (std::size_t i = 0; i < m.packets.size(); ++i) {
    const PacketRecord& p = m.packets[i];
    os << (i + 1) << ',' << p.arrival_slot << ',' << p.full_delivery_slot << ',';
    if (p.full_delivery_slot >= 0) os << (p.full_delivery_slot - p.arrival_slot);
    os << '\n';
  }
}

inline nlohmann::json to_json(const Network& net, const RunMetrics& m) {
  nlohmann::json out;
  out["policy"] = m.policy;
  out["lambda"] = m.lambda;
  out["seed"] = m.seed;
  out["slots"] = m.slots;
  out["total_arrivals"] = m.total_arrivals;
  nlohmann::json nodes = nlohmann::json::array();
  for (NodeId v = 0; v < net.node_count(); ++v)
    nodes.push_back({{"node", net.name(v)},
                     {"received", m.final_received[v]},
                     {"rate", m.rates[v]},
                     {"mean_offered", m.mean_offered[v]}});
  out["nodes"] = std::move(nodes);
  out["min_rate"] = m.min_rate;
  out["average_delay"] = m.average_delay ? nlohmann::json(*m.average_delay) : nlohmann::json(nullptr);
  out["delivered"] = m.delivered;
  out["undelivered"] = m.undelivered;
  out["max_sum_deficit"] = m.max_sum_deficit;
  out["deadlock"] = m.deadlock;
  out["deadlock_slot"] = m.deadlock_slot;
  out["invariant_violations"] = {{"neighbor_bound", m.invariants.neighbor_bound},
                                 {"eligible_set", m.invariants.eligible_set},
                                 {"in_order", m.invariants.in_order},
                                 {"deficit_dynamics", m.invariants.deficit_dynamics},
                                 {"telescoping", m.invariants.telescoping},
                                 {"conservation", m.invariants.conservation},
                                 {"infeasible_activation", m.invariants.infeasible_activation},
                                 {"checked_slots", m.invariants.checked_slots}};
  return out;
}

}  // namespace bcast
