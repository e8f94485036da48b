#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bcast/error.hpp"
#include "bcast/interference.hpp"
#include "bcast/network.hpp"
#include "bcast/rational.hpp"

namespace bcast {

enum class GraphMode { Dag, General };

/// A network together with its interference model and optional trees.
struct Scenario {
  std::string name;
  Network network{{"r"}, 0, {}};
  InterferenceModel model = InterferenceModel::Primary;
  std::optional<std::vector<std::vector<EdgeId>>> activations;  // explicit model only
  std::vector<std::vector<EdgeId>> trees;
  GraphMode mode = GraphMode::Dag;

  std::vector<Arborescence> arborescences() const {
    std::vector<Arborescence> out;
    for (const auto& t : trees) {
      Arborescence a{t};
      std::sort(a.edges.begin(), a.edges.end());
      out.push_back(std::move(a));
    }
    return out;
  }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

inline ActivationSet make_activation_set(const Scenario& sc, std::size_t cap = 50000) {
  return build_activation_set(sc.network, sc.model, sc.activations, cap);
}

namespace detail {

inline Network network_from(const std::vector<std::string>& names,
                            const std::vector<std::tuple<std::size_t, std::size_t, long>>& edges) {
  std::vector<Edge> list;
  for (auto [from, to, cap] : edges) list.push_back({from, to, Rational(cap)});
  return Network(names, 0, std::move(list));
}

}  // namespace detail

inline std::vector<std::string> builtin_names() { return {"k4_unit", "fig5", "dag10", "cycle4"}; }

inline Scenario builtin(std::string_view name) {
  Scenario sc;
  sc.name = std::string(name);
  if (name == "k4_unit" || name == "fig5") {
    const long big = name == "fig5" ? 3 : 1;
    const long mid = name == "fig5" ? 2 : 1;
    sc.network = detail::network_from(
        {"r", "a", "b", "c"}, {{0, 1, big}, {0, 2, 1}, {0, 3, 1}, {1, 2, mid}, {1, 3, 1}, {2, 3, 1}});
    return sc;
  }
  if (name == "dag10") {
    std::vector<std::string> names;
    for (int i = 1; i <= 10; ++i) names.push_back(std::to_string(i));
    std::vector<std::tuple<std::size_t, std::size_t, long>> edges;
    for (std::size_t i = 0; i < 10; ++i)
      for (std::size_t j = i + 1; j < 10; ++j) edges.emplace_back(i, j, static_cast<long>(9 - i));
    sc.network = detail::network_from(names, edges);
    return sc;
  }
  if (name == "cycle4") {
    sc.network = detail::network_from(
        {"r", "a", "b", "c"}, {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}, {1, 2, 1}, {2, 3, 1}, {3, 1, 1}});
    sc.model = InterferenceModel::None;
    sc.mode = GraphMode::General;
    return sc;
  }
  throw Error(ErrorCode::UnknownScenario, "unknown builtin scenario '" + std::string(name) + "'");
}

/// Every invariant the scenario violates; empty when valid.
inline std::vector<std::string> scenario_violations(const Scenario& sc) {
  std::vector<std::string> out;
  const Network& net = sc.network;
  if (sc.mode == GraphMode::Dag) {
    if (auto cycle = find_cycle(net)) {
      std::string text;
      for (NodeId v : *cycle) text += (text.empty() ? "" : "->") + net.name(v);
      out.push_back("graph has a directed cycle " + text);
    } else {
      if (net.in_degree(net.source()) > 0) out.push_back("source has incoming edges");
      for (NodeId v = 0; v < net.node_count(); ++v)
        if (v != net.source() && net.in_degree(v) == 0)
          out.push_back("node " + net.name(v) + " has no incoming edges");
    }
  }
  if (sc.model == InterferenceModel::Explicit && !sc.activations)
    out.push_back("explicit interference needs an activation list");
  if (sc.model != InterferenceModel::Explicit && sc.activations)
    out.push_back("activation list given for a non-explicit model");
  if (sc.activations)
    for (std::size_t i = 0; i < sc.activations->size(); ++i)
      for (EdgeId e : (*sc.activations)[i])
        if (e >= net.edge_count())
          out.push_back("activation " + std::to_string(i) + " refers to unknown edge " + std::to_string(e));
  for (std::size_t k = 0; k < sc.trees.size(); ++k) {
    bool in_range = std::all_of(sc.trees[k].begin(), sc.trees[k].end(),
                                [&](EdgeId e) { return e < net.edge_count(); });
    Arborescence a{sc.trees[k]};
    std::sort(a.edges.begin(), a.edges.end());
    if (!in_range || !is_arborescence(net, a))
      out.push_back("tree " + std::to_string(k) + " is not a spanning arborescence");
  }
  return out;
}

inline void validate_scenario(const Scenario& sc) {
  const auto problems = scenario_violations(sc);
  if (problems.empty()) return;
  std::string message = "scenario '" + sc.name + "' is invalid:";
  for (const auto& p : problems) message += "\n  - " + p;
  throw Error(ErrorCode::ValidationError, message);
}

namespace detail {

inline std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

[[noreturn]] inline void field_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::ParseError, field + ": " + what);
}

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) field_error(where.empty() ? key : where + "." + key, "missing");
  return *it;
}

inline std::vector<EdgeId> index_list(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array()) field_error(field, "expected an array of edge indices");
  std::vector<EdgeId> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_unsigned())
      field_error(field + "[" + std::to_string(i) + "]", "expected a nonnegative integer");
    out.push_back(j[i].get<EdgeId>());
  }
  return out;
}

}  // namespace detail

/// Parses the scenario document. Edge endpoints may be node names or indices.
inline Scenario scenario_from_json(std::string_view text, std::string name = "scenario") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError,
                "malformed JSON at " + detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1));
  }
  if (!doc.is_object()) detail::field_error("(root)", "expected an object");

  Scenario sc;
  sc.name = doc.contains("name") && doc["name"].is_string() ? doc["name"].get<std::string>() : std::move(name);

  const auto& nodes = detail::require(doc, "nodes", "");
  if (!nodes.is_array() || nodes.empty()) detail::field_error("nodes", "expected a nonempty array of names");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!nodes[i].is_string()) detail::field_error("nodes[" + std::to_string(i) + "]", "expected a string");
    names.push_back(nodes[i].get<std::string>());
  }

  std::vector<std::string> violations;
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t j = i + 1; j < names.size(); ++j)
      if (names[i] == names[j]) violations.push_back("duplicate node name '" + names[i] + "'");

  auto resolve = [&](const nlohmann::json& ref, const std::string& field) -> std::optional<NodeId> {
    if (ref.is_string()) {
      const auto s = ref.get<std::string>();
      for (NodeId v = 0; v < names.size(); ++v)
        if (names[v] == s) return v;
      violations.push_back(field + " refers to unknown node '" + s + "'");
      return std::nullopt;
    }
    if (ref.is_number_unsigned()) {
      const auto v = ref.get<NodeId>();
      if (v < names.size()) return v;
      violations.push_back(field + " refers to unknown node index " + std::to_string(v));
      return std::nullopt;
    }
    detail::field_error(field, "expected a node name or index");
  };

  const auto source = resolve(detail::require(doc, "source", ""), "source");

  const auto& edges = detail::require(doc, "edges", "");
  if (!edges.is_array()) detail::field_error("edges", "expected an array");
  std::vector<Edge> list;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const std::string where = "edges[" + std::to_string(e) + "]";
    if (!edges[e].is_object()) detail::field_error(where, "expected an object");
    const auto from = resolve(detail::require(edges[e], "from", where), where + ".from");
    const auto to = resolve(detail::require(edges[e], "to", where), where + ".to");
    Rational cap = 1;
    if (auto it = edges[e].find("capacity"); it != edges[e].end()) {
      if (it->is_number_integer()) {
        cap = Rational(it->get<long>());
      } else if (it->is_string()) {
        try {
          cap = parse_rational(it->get<std::string>());
        } catch (const Error&) {
          detail::field_error(where + ".capacity", "expected \"num/den\", got \"" + it->get<std::string>() + "\"");
        }
      } else {
        detail::field_error(where + ".capacity", "expected an integer or a \"num/den\" string");
      }
    }
    if (sgn(cap) < 0) violations.push_back(where + " has negative capacity");
    if (from && to && *from == *to) violations.push_back(where + " is a self-loop");
    list.push_back({from.value_or(0), to.value_or(0), cap});
  }

  if (auto it = doc.find("interference"); it != doc.end()) {
    if (!it->is_object()) detail::field_error("interference", "expected an object");
    const auto& model = detail::require(*it, "model", "interference");
    if (!model.is_string()) detail::field_error("interference.model", "expected a string");
    try {
      sc.model = parse_model(model.get<std::string>());
    } catch (const Error&) {
      detail::field_error("interference.model", "expected primary, none or explicit");
    }
    if (auto acts = it->find("activations"); acts != it->end()) {
      if (!acts->is_array()) detail::field_error("interference.activations", "expected an array");
      std::vector<std::vector<EdgeId>> lists;
      for (std::size_t i = 0; i < acts->size(); ++i)
        lists.push_back(detail::index_list((*acts)[i], "interference.activations[" + std::to_string(i) + "]"));
      sc.activations = std::move(lists);
    }
  }

  if (auto it = doc.find("trees"); it != doc.end()) {
    if (!it->is_array()) detail::field_error("trees", "expected an array");
    for (std::size_t k = 0; k < it->size(); ++k)
      sc.trees.push_back(detail::index_list((*it)[k], "trees[" + std::to_string(k) + "]"));
  }

  if (auto it = doc.find("mode"); it != doc.end()) {
    const std::string mode = it->is_string() ? it->get<std::string>() : "";
    if (mode == "dag") sc.mode = GraphMode::Dag;
    else if (mode == "general") sc.mode = GraphMode::General;
    else detail::field_error("mode", "expected \"dag\" or \"general\"");
  }

  if (list.empty() && names.size() > 1) violations.push_back("network with several nodes has no edges");
  if (!violations.empty()) {
    std::string message = "scenario '" + sc.name + "' is invalid:";
    for (const auto& v : violations) message += "\n  - " + v;
    throw Error(ErrorCode::ValidationError, message);
  }
  sc.network = Network(std::move(names), *source, std::move(list));
  validate_scenario(sc);
  return sc;
}

/// Canonical form: endpoints by name, integer capacities as numbers, others
/// as "num/den" strings.
inline nlohmann::ordered_json scenario_to_json(const Scenario& sc) {
  const Network& net = sc.network;
  nlohmann::ordered_json out;
  out["name"] = sc.name;
  out["mode"] = sc.mode == GraphMode::Dag ? "dag" : "general";
  out["nodes"] = net.names();
  out["source"] = net.name(net.source());
  auto& edges = out["edges"] = nlohmann::ordered_json::array();
  for (const Edge& e : net.edges()) {
    nlohmann::ordered_json edge;
    edge["from"] = net.name(e.from);
    edge["to"] = net.name(e.to);
    if (is_integer(e.capacity)) edge["capacity"] = to_int64(e.capacity);
    else edge["capacity"] = to_fraction_string(e.capacity);
    edges.push_back(std::move(edge));
  }
  nlohmann::ordered_json interference;
  interference["model"] = std::string(model_name(sc.model));
  if (sc.activations) interference["activations"] = *sc.activations;
  out["interference"] = std::move(interference);
  if (!sc.trees.empty()) out["trees"] = sc.trees;
  return out;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open scenario file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string stem = path;
  if (auto slash = stem.find_last_of('/'); slash != std::string::npos) stem = stem.substr(slash + 1);
  if (auto dot = stem.rfind('.'); dot != std::string::npos && dot > 0) stem = stem.substr(0, dot);
  return scenario_from_json(buffer.str(), stem);
}

inline void save_scenario(const Scenario& sc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write scenario file " + path);
  out << scenario_to_json(sc).dump(2) << '\n';
}

/// Tree list file: either [[edge indices], ...] or {"trees": [[...], ...]}.
inline std::vector<Arborescence> load_tree_file(const std::string& path, const Network& net) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open tree file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError,
                "malformed JSON in " + path + " at " + detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1));
  }
  const nlohmann::json& list = doc.is_object() ? detail::require(doc, "trees", "") : doc;
  if (!list.is_array()) detail::field_error("trees", "expected an array");
  std::vector<Arborescence> trees;
  for (std::size_t k = 0; k < list.size(); ++k) {
    Arborescence a{detail::index_list(list[k], "trees[" + std::to_string(k) + "]")};
    std::sort(a.edges.begin(), a.edges.end());
    const bool in_range = std::all_of(a.edges.begin(), a.edges.end(),
                                      [&](EdgeId e) { return e < net.edge_count(); });
    if (!in_range || !is_arborescence(net, a))
      throw Error(ErrorCode::InvalidTree, "trees[" + std::to_string(k) + "] is not a spanning arborescence");
    trees.push_back(std::move(a));
  }
  return trees;
}

/// "builtin:NAME" or a path to a scenario file.
inline Scenario resolve_scenario(std::string_view ref) {
  constexpr std::string_view prefix = "builtin:";
  if (ref.starts_with(prefix)) return builtin(ref.substr(prefix.size()));
  return load_scenario(std::string(ref));
}

}  // namespace bcast
