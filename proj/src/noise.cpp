#include "qres/noise.hpp"

#include <algorithm>
#include <sstream>

namespace qres {

namespace {

void check_probability(double p, double hi, const char* name) {
  if (!(p >= 0.0 && p <= hi)) {
    std::ostringstream msg;
    msg << name << " = " << p << " is outside [0, " << hi << "]";
    throw DomainError(msg.str());
  }
}

void depolarize_inplace(CMatrix<double>& rho, int qubit, int n, double p) {
  if (p == 0.0) return;
  const Eigen::Index m = qubit_mask(qubit, n);
  const Eigen::Index d = rho.rows();
  for (Eigen::Index a = 0; a < d; ++a) {
    if (a & m) continue;
    for (Eigen::Index b = 0; b < d; ++b) {
      if (b & m) continue;
      // Diagonal block in the target qubit mixes; off-diagonal block shrinks.
      const std::complex<double> avg = 0.5 * (rho(a, b) + rho(a | m, b | m));
      rho(a, b) = (1.0 - p) * rho(a, b) + p * avg;
      rho(a | m, b | m) = (1.0 - p) * rho(a | m, b | m) + p * avg;
      rho(a, b | m) *= (1.0 - p);
      rho(a | m, b) *= (1.0 - p);
    }
  }
}

void xx_rotate_inplace(CMatrix<double>& rho, int i, int j, int n, double theta) {
  const Eigen::Index mask = qubit_mask(i, n) | qubit_mask(j, n);
  const double c = std::cos(theta / 2);
  const double s = std::sin(theta / 2);
  const std::complex<double> mis(0, -s);
  const std::complex<double> pis(0, s);
  const Eigen::Index d = rho.rows();
  // rows: G rho
  for (Eigen::Index a = 0; a < d; ++a) {
    const Eigen::Index pa = a ^ mask;
    if (pa < a) continue;
    for (Eigen::Index col = 0; col < d; ++col) {
      const std::complex<double> lo = rho(a, col);
      const std::complex<double> hi = rho(pa, col);
      rho(a, col) = c * lo + mis * hi;
      rho(pa, col) = c * hi + mis * lo;
    }
  }
  // columns: (G rho) G^dagger
  for (Eigen::Index b = 0; b < d; ++b) {
    const Eigen::Index pb = b ^ mask;
    if (pb < b) continue;
    for (Eigen::Index row = 0; row < d; ++row) {
      const std::complex<double> lo = rho(row, b);
      const std::complex<double> hi = rho(row, pb);
      rho(row, b) = c * lo + pis * hi;
      rho(row, pb) = c * hi + pis * lo;
    }
  }
}

}  // namespace

NoiseParams NoiseParams::effective() const {
  if (enabled) return *this;
  return NoiseParams{false, 0.0, 0.0, 0.0};
}

bool NoiseParams::active() const {
  const NoiseParams e = effective();
  return e.depolarizing_1q > 0.0 || e.depolarizing_2q > 0.0 || e.readout_flip > 0.0;
}

void validate(const NoiseParams& noise) {
  check_probability(noise.depolarizing_1q, 1.0, "depolarizing_1q");
  check_probability(noise.depolarizing_2q, 1.0, "depolarizing_2q");
  check_probability(noise.readout_flip, 0.5, "readout_flip");
}

nlohmann::json to_json(const NoiseParams& noise) {
  return {{"enabled", noise.enabled},
          {"depolarizing_1q", noise.depolarizing_1q},
          {"depolarizing_2q", noise.depolarizing_2q},
          {"readout_flip", noise.readout_flip}};
}

NoiseParams noise_from_json(const nlohmann::json& j) {
  NoiseParams n;
  n.enabled = j.value("enabled", n.enabled);
  n.depolarizing_1q = j.value("depolarizing_1q", n.depolarizing_1q);
  n.depolarizing_2q = j.value("depolarizing_2q", n.depolarizing_2q);
  n.readout_flip = j.value("readout_flip", n.readout_flip);
  return n;
}

MixedState apply_depolarizing(const MixedState& rho, double p, std::span<const int> qubits) {
  check_probability(p, 1.0, "depolarizing probability");
  CMatrix<double> m = rho.matrix();
  for (int q : qubits) {
    detail::check_qubit(q, rho.num_qubits());
    depolarize_inplace(m, q, rho.num_qubits(), p);
  }
  return MixedState(std::move(m));
}

double apply_readout_flip(double exact, double p_r) {
  check_probability(p_r, 0.5, "readout flip probability");
  if (!(std::abs(exact) <= 1.0 + StateTolerance<double>::norm)) {
    throw DomainError("expectation value " + std::to_string(exact) + " is outside [-1, 1]");
  }
  return (1.0 - 2.0 * p_r) * exact;
}

NoisyEvolution::NoisyEvolution(const ReservoirSpec& spec, double fraction, const NoiseParams& noise)
    : num_qubits_(spec.graph.num_sites()) {
  validate(noise);
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw DomainError("evolution fraction " + std::to_string(fraction) + " is outside (0, 1]");
  }
  validate(spec.params, spec.graph);
  const NoiseParams eff = noise.effective();
  const double t = fraction * spec.params.evolution_time;
  auto edge_noise = [&](const Edge& e) {
    if (eff.depolarizing_2q > 0.0) {
      steps_.push_back(Depolarize{e.i, eff.depolarizing_2q});
      steps_.push_back(Depolarize{e.j, eff.depolarizing_2q});
    }
  };
  auto site_noise = [&] {
    if (eff.depolarizing_1q > 0.0)
      for (int q = 0; q < num_qubits_; ++q) steps_.push_back(Depolarize{q, eff.depolarizing_1q});
  };
  if (spec.backend == EvolutionBackend::TrotterOneStep) {
    for (const auto& [edge, j] : spec.params.couplings) {
      steps_.push_back(XXRotation{edge.i, edge.j, 2.0 * j * t});
      edge_noise(edge);
    }
    steps_.push_back(ZLayer{detail::rz_layer_diagonal<double>(num_qubits_, 2.0 * spec.params.field * t)});
    site_noise();
  } else {
    steps_.push_back(DenseUnitary{exact_unitary<double>(spec.params, spec.graph, fraction).matrix()});
    for (const Edge& e : spec.graph.edges()) edge_noise(e);
    site_noise();
  }
}

std::size_t NoisyEvolution::channel_count() const {
  return static_cast<std::size_t>(
      std::count_if(steps_.begin(), steps_.end(), [](const Step& s) { return std::holds_alternative<Depolarize>(s); }));
}

void NoisyEvolution::apply_inplace(CMatrix<double>& rho) const {
  for (const Step& step : steps_) {
    std::visit(
        [&](const auto& op) {
          using Op = std::decay_t<decltype(op)>;
          if constexpr (std::is_same_v<Op, DenseUnitary>) {
            rho = (op.u * rho * op.u.adjoint()).eval();
          } else if constexpr (std::is_same_v<Op, XXRotation>) {
            xx_rotate_inplace(rho, op.i, op.j, num_qubits_, op.theta);
          } else if constexpr (std::is_same_v<Op, ZLayer>) {
            rho = op.diagonal.asDiagonal() * rho * op.diagonal.conjugate().asDiagonal();
          } else {
            depolarize_inplace(rho, op.qubit, num_qubits_, op.p);
          }
        },
        step);
  }
  rho = (0.5 * (rho + rho.adjoint())).eval();
}

MixedState NoisyEvolution::apply(const MixedState& rho) const {
  if (rho.num_qubits() != num_qubits_) throw DimensionError("state/channel qubit count mismatch");
  CMatrix<double> m = rho.matrix();
  apply_inplace(m);
  return MixedState(std::move(m));
}

}  // namespace qres
