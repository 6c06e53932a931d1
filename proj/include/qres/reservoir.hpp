#pragma once

// Transverse-field Ising reservoirs
//
//   H = sum_{(i,j) in E} J_ij X_i X_j + h sum_i Z_i
//
// evolved either exactly, U = exp(-i H T), or with the one-step Trotter circuit
//
//   U = [prod_i RZ_i(2 h T)] [prod_{(i,j)} RXX_ij(2 J_ij T)]
//
// where RZ(t) = exp(-i t Z / 2) and RXX(t) = exp(-i t XX / 2).

#include <compare>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "qres/quantum_core.hpp"

namespace qres {

struct Edge {
  int i = 0;
  int j = 0;
  auto operator<=>(const Edge&) const = default;
};

/// "i-j" key used in serialized coupling maps.
std::string edge_key(const Edge& e);
Edge parse_edge_key(const std::string& key);

/// Undirected graph on `num_sites` sites. Edges are stored normalized (i < j)
/// and sorted lexicographically.
class ConnectivityGraph {
 public:
  ConnectivityGraph(int num_sites, std::vector<Edge> edges);

  int num_sites() const { return num_sites_; }
  const std::vector<Edge>& edges() const { return edges_; }
  int degree(int site) const;
  bool is_connected() const;
  bool contains(Edge e) const;

  friend bool operator==(const ConnectivityGraph&, const ConnectivityGraph&) = default;

 private:
  int num_sites_;
  std::vector<Edge> edges_;
};

/// All C(n, 2) pairs.
ConnectivityGraph full_connectivity(int n_sites);

/// Six-qubit heavy-hex patch {(0,1),(1,2),(1,3),(3,4),(4,5)}.
ConnectivityGraph kawasaki_subgraph();

struct TFIMParams {
  std::map<Edge, double> couplings;
  double field = 5.0;
  double evolution_time = 1.0;
};

/// Throws ValidationError unless every graph edge has exactly one coupling and T > 0.
void validate(const TFIMParams& params, const ConnectivityGraph& graph);

inline constexpr double kCouplingBound = 5.0;
inline constexpr double kDefaultField = 5.0;

/// J_ij i.i.d. uniform on [-5, 5], drawn in sorted edge order.
template <typename Rng>
TFIMParams sample_couplings(const ConnectivityGraph& graph, double h, double T, Rng& rng) {
  std::uniform_real_distribution<double> coupling(-kCouplingBound, kCouplingBound);
  TFIMParams p;
  p.field = h;
  p.evolution_time = T;
  for (const Edge& e : graph.edges()) p.couplings.emplace(e, coupling(rng));
  validate(p, graph);
  return p;
}

enum class EvolutionBackend { Exact, TrotterOneStep };

std::string to_string(EvolutionBackend b);
EvolutionBackend parse_backend(const std::string& tag);

/// A fully specified reservoir, sufficient for exact replay.
struct ReservoirSpec {
  ConnectivityGraph graph;
  TFIMParams params;
  EvolutionBackend backend = EvolutionBackend::TrotterOneStep;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const ReservoirSpec& spec);
ReservoirSpec reservoir_from_json(const nlohmann::json& j);

template <typename Real = double>
CMatrix<Real> hamiltonian_matrix(const TFIMParams& params, const ConnectivityGraph& graph) {
  validate(params, graph);
  const int n = graph.num_sites();
  const Eigen::Index d = Eigen::Index{1} << n;
  CMatrix<Real> h = CMatrix<Real>::Zero(d, d);
  for (const auto& [edge, j] : params.couplings) {
    const Eigen::Index mask = qubit_mask(edge.i, n) | qubit_mask(edge.j, n);
    for (Eigen::Index b = 0; b < d; ++b) h(b ^ mask, b) += static_cast<Real>(j);
  }
  for (Eigen::Index b = 0; b < d; ++b) {
    Real z = 0;
    for (int k = 0; k < n; ++k) z += basis_bit(b, k, n) ? Real(-1) : Real(1);
    h(b, b) += static_cast<Real>(params.field) * z;
  }
  return h;
}

/// exp(-i H t) for Hermitian H, via eigendecomposition.
template <typename Real = double>
UnitaryT<Real> hermitian_exponential(const CMatrix<Real>& h, Real t) {
  Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("Hamiltonian eigendecomposition failed");
  const auto& v = es.eigenvectors();
  CVector<Real> phases(h.rows());
  for (Eigen::Index k = 0; k < h.rows(); ++k) phases(k) = std::polar(Real(1), -es.eigenvalues()(k) * t);
  return UnitaryT<Real>(v * phases.asDiagonal() * v.adjoint());
}

template <typename Real = double>
UnitaryT<Real> exact_unitary(const TFIMParams& params, const ConnectivityGraph& graph,
                             double fraction = 1.0) {
  return hermitian_exponential<Real>(hamiltonian_matrix<Real>(params, graph),
                                     static_cast<Real>(fraction * params.evolution_time));
}

namespace detail {

// Left-multiply `m` in place by RXX(theta) on qubits (i, j).
template <typename Real>
void left_apply_rxx(CMatrix<Real>& m, int i, int j, int n, Real theta) {
  const Eigen::Index mask = qubit_mask(i, n) | qubit_mask(j, n);
  const Real c = std::cos(theta / 2);
  const std::complex<Real> ms(0, -std::sin(theta / 2));
  for (Eigen::Index b = 0; b < m.rows(); ++b) {
    const Eigen::Index p = b ^ mask;
    if (p < b) continue;
    for (Eigen::Index col = 0; col < m.cols(); ++col) {
      const std::complex<Real> lo = m(b, col);
      const std::complex<Real> hi = m(p, col);
      m(b, col) = c * lo + ms * hi;
      m(p, col) = c * hi + ms * lo;
    }
  }
}

template <typename Real>
CVector<Real> rz_layer_diagonal(int n, Real theta) {
  const Eigen::Index d = Eigen::Index{1} << n;
  CVector<Real> diag(d);
  for (Eigen::Index b = 0; b < d; ++b) {
    Real z = 0;
    for (int k = 0; k < n; ++k) z += basis_bit(b, k, n) ? Real(-1) : Real(1);
    diag(b) = std::polar(Real(1), -theta / 2 * z);
  }
  return diag;
}

}  // namespace detail

/// One-step Trotter circuit with every angle scaled by `fraction`.
template <typename Real = double>
UnitaryT<Real> trotter_unitary(const TFIMParams& params, const ConnectivityGraph& graph,
                               double fraction = 1.0) {
  validate(params, graph);
  const int n = graph.num_sites();
  const Eigen::Index d = Eigen::Index{1} << n;
  const Real t = static_cast<Real>(fraction * params.evolution_time);
  CMatrix<Real> u = CMatrix<Real>::Identity(d, d);
  // Rightmost factor acts first; edges applied in ascending (i, j) order.
  for (const auto& [edge, j] : params.couplings) {
    detail::left_apply_rxx<Real>(u, edge.i, edge.j, n, Real(2) * static_cast<Real>(j) * t);
  }
  u = detail::rz_layer_diagonal<Real>(n, Real(2) * static_cast<Real>(params.field) * t).asDiagonal() * u;
  return UnitaryT<Real>(std::move(u));
}

/// Evolution to time fraction * T on the chosen backend.
template <typename Real = double>
UnitaryT<Real> fractional_unitary(const TFIMParams& params, const ConnectivityGraph& graph,
                                  double fraction, EvolutionBackend backend) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw DomainError("evolution fraction " + std::to_string(fraction) + " is outside (0, 1]");
  }
  return backend == EvolutionBackend::Exact ? exact_unitary<Real>(params, graph, fraction)
                                            : trotter_unitary<Real>(params, graph, fraction);
}

template <typename Real = double>
UnitaryT<Real> reservoir_unitary(const ReservoirSpec& spec, double fraction = 1.0) {
  return fractional_unitary<Real>(spec.params, spec.graph, fraction, spec.backend);
}

}  // namespace qres
