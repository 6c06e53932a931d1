#include "qres/reservoir.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

namespace qres {

std::string edge_key(const Edge& e) { return std::to_string(e.i) + "-" + std::to_string(e.j); }

Edge parse_edge_key(const std::string& key) {
  const auto dash = key.find('-');
  if (dash == std::string::npos || dash == 0 || dash + 1 == key.size()) {
    throw ValidationError("malformed edge key '" + key + "' (expected \"i-j\")");
  }
  try {
    std::size_t used_i = 0;
    std::size_t used_j = 0;
    const std::string a = key.substr(0, dash);
    const std::string b = key.substr(dash + 1);
    Edge e{std::stoi(a, &used_i), std::stoi(b, &used_j)};
    if (used_i != a.size() || used_j != b.size()) throw std::invalid_argument(key);
    return e;
  } catch (const std::logic_error&) {
    throw ValidationError("malformed edge key '" + key + "' (expected \"i-j\")");
  }
}

ConnectivityGraph::ConnectivityGraph(int num_sites, std::vector<Edge> edges) : num_sites_(num_sites) {
  if (num_sites < 1) throw ValidationError("graph needs at least one site");
  std::set<Edge> seen;
  for (Edge e : edges) {
    if (e.i == e.j) throw ValidationError("self-loop on site " + std::to_string(e.i));
    if (e.i < 0 || e.j < 0 || e.i >= num_sites || e.j >= num_sites) {
      throw ValidationError("edge " + edge_key(e) + " references a site outside [0, " +
                            std::to_string(num_sites) + ")");
    }
    if (e.i > e.j) std::swap(e.i, e.j);
    if (!seen.insert(e).second) throw ValidationError("duplicate edge " + edge_key(e));
  }
  edges_.assign(seen.begin(), seen.end());
}

int ConnectivityGraph::degree(int site) const {
  return static_cast<int>(
      std::count_if(edges_.begin(), edges_.end(), [site](const Edge& e) { return e.i == site || e.j == site; }));
}

bool ConnectivityGraph::contains(Edge e) const {
  if (e.i > e.j) std::swap(e.i, e.j);
  return std::binary_search(edges_.begin(), edges_.end(), e);
}

bool ConnectivityGraph::is_connected() const {
  std::vector<int> parent(num_sites_);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  int components = num_sites_;
  for (const Edge& e : edges_) {
    const int a = find(e.i);
    const int b = find(e.j);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

ConnectivityGraph full_connectivity(int n_sites) {
  if (n_sites < 2) throw ValidationError("full connectivity needs at least 2 sites");
  std::vector<Edge> edges;
  for (int i = 0; i < n_sites; ++i)
    for (int j = i + 1; j < n_sites; ++j) edges.push_back({i, j});
  return ConnectivityGraph(n_sites, std::move(edges));
}

ConnectivityGraph kawasaki_subgraph() { return ConnectivityGraph(6, {{0, 1}, {1, 2}, {1, 3}, {3, 4}, {4, 5}}); }

void validate(const TFIMParams& params, const ConnectivityGraph& graph) {
  if (!(params.evolution_time > 0.0)) throw ValidationError("evolution time must be positive");
  if (params.couplings.size() != graph.edges().size()) {
    throw ValidationError("coupling count " + std::to_string(params.couplings.size()) +
                          " does not match edge count " + std::to_string(graph.edges().size()));
  }
  for (const Edge& e : graph.edges()) {
    if (!params.couplings.contains(e)) throw ValidationError("edge " + edge_key(e) + " has no coupling");
  }
}

std::string to_string(EvolutionBackend b) { return b == EvolutionBackend::Exact ? "exact" : "trotter"; }

EvolutionBackend parse_backend(const std::string& tag) {
  if (tag == "exact") return EvolutionBackend::Exact;
  if (tag == "trotter") return EvolutionBackend::TrotterOneStep;
  throw ValidationError("unknown evolution backend '" + tag + "' (expected exact|trotter)");
}

nlohmann::json to_json(const ReservoirSpec& spec) {
  nlohmann::json edges = nlohmann::json::array();
  for (const Edge& e : spec.graph.edges()) edges.push_back({e.i, e.j});
  nlohmann::json couplings = nlohmann::json::object();
  for (const auto& [e, j] : spec.params.couplings) couplings[edge_key(e)] = j;
  return {
      {"num_sites", spec.graph.num_sites()},
      {"edges", edges},
      {"couplings", couplings},
      {"h", spec.params.field},
      {"T", spec.params.evolution_time},
      {"backend", to_string(spec.backend)},
      {"seed", spec.seed},
  };
}

ReservoirSpec reservoir_from_json(const nlohmann::json& j) {
  try {
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) edges.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
    ConnectivityGraph graph(j.at("num_sites").get<int>(), std::move(edges));
    TFIMParams params;
    for (const auto& [key, value] : j.at("couplings").items()) {
      Edge e = parse_edge_key(key);
      if (e.i > e.j) std::swap(e.i, e.j);
      if (!params.couplings.emplace(e, value.get<double>()).second) {
        throw ValidationError("duplicate coupling for edge " + key);
      }
    }
    params.field = j.at("h").get<double>();
    params.evolution_time = j.at("T").get<double>();
    validate(params, graph);
    return {std::move(graph), std::move(params), parse_backend(j.at("backend").get<std::string>()),
            j.value("seed", std::uint64_t{0})};
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed reservoir document: ") + e.what());
  }
}

}  // namespace qres
