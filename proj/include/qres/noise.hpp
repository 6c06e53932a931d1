#pragma once

// Parametric noise layer: per-gate depolarizing channels attached to the
// reservoir circuit plus a symmetric readout flip on measured expectations.

#include <span>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qres/quantum_core.hpp"
#include "qres/reservoir.hpp"

namespace qres {

struct NoiseParams {
  bool enabled = false;
  double depolarizing_1q = 0.001;
  double depolarizing_2q = 0.01;
  double readout_flip = 0.01;

  /// Probabilities actually applied: all zero when disabled.
  NoiseParams effective() const;
  bool active() const;
};

void validate(const NoiseParams& noise);
nlohmann::json to_json(const NoiseParams& noise);
NoiseParams noise_from_json(const nlohmann::json& j);

/// (1-p) rho + p (I/2 (x) Tr_q rho), applied to each listed qubit in turn.
MixedState apply_depolarizing(const MixedState& rho, double p, std::span<const int> qubits);

/// Symmetric bit-flip contraction of a Z expectation: (1 - 2 p_r) * exact.
double apply_readout_flip(double exact, double p_r);

/// Gate-level channel for one (possibly fractional) reservoir evolution.
class NoisyEvolution {
 public:
  struct DenseUnitary { CMatrix<double> u; };
  struct XXRotation { int i, j; double theta; };
  struct ZLayer { CVector<double> diagonal; };
  struct Depolarize { int qubit; double p; };
  using Step = std::variant<DenseUnitary, XXRotation, ZLayer, Depolarize>;

  /// Trotter backend: each RXX followed by 2q depolarizing on both qubits, then
  /// the RZ layer followed by 1q depolarizing on every qubit. Exact backend: the
  /// dense propagator followed by the same channel pattern.
  NoisyEvolution(const ReservoirSpec& spec, double fraction, const NoiseParams& noise);

  MixedState apply(const MixedState& rho) const;
  /// In-place variant on a raw density matrix.
  void apply_inplace(CMatrix<double>& rho) const;

  int num_qubits() const { return num_qubits_; }
  const std::vector<Step>& steps() const { return steps_; }
  std::size_t channel_count() const;

 private:
  int num_qubits_;
  std::vector<Step> steps_;
};

}  // namespace qres
