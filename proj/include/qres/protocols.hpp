#pragma once

// Restarting QRC and time-delayed QELM drivers.
//
// Both protocols produce a StateMatrix whose row for timestep t holds the Z
// expectations of every site at the N_V multiplexed evolution times
// tau_n = n T / N_V, laid out column-major in (n, k): column (n - 1) * K + k.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qres/noise.hpp"
#include "qres/quantum_core.hpp"
#include "qres/reservoir.hpp"

namespace qres {

enum class Protocol { QRC, TDQELM };

std::string to_string(Protocol p);
Protocol parse_protocol(const std::string& tag);

/// How the restarting protocol is simulated. Every restart t replays inputs
/// 0..t from |0...0>; with SharedPrefix the replayed prefix is computed once
/// and reused, which performs the identical floating-point operations and
/// therefore yields bit-identical features. FullRestart literally re-simulates
/// every restart and exists as the reference path.
enum class ReplayMode { SharedPrefix, FullRestart };

std::string to_string(ReplayMode m);
ReplayMode parse_replay_mode(const std::string& tag);

/// Ordered, strictly increasing input delays; delay d_k feeds qubit k.
class DelayTaps {
 public:
  explicit DelayTaps(std::vector<int> taps);
  static DelayTaps narma_default() { return DelayTaps({0, 1, 2, 9, 10, 11}); }

  const std::vector<int>& values() const { return taps_; }
  int size() const { return static_cast<int>(taps_.size()); }
  int max() const { return taps_.back(); }

 private:
  std::vector<int> taps_;
};

struct ProtocolConfig {
  Protocol protocol = Protocol::TDQELM;
  int n_virtual = 1;
  /// nullopt: exact expectation values.
  std::optional<std::int64_t> n_shots;
  NoiseParams noise;
  ReplayMode replay = ReplayMode::SharedPrefix;
  /// Run the O(dim^3) positivity check on every simulated density matrix.
  bool validate_states = false;
  std::uint64_t shot_seed = 0;
};

void validate(const ProtocolConfig& config);

struct StateMatrix {
  Eigen::MatrixXd values;
  /// Timestep index of row 0; rows are consecutive timesteps.
  std::int64_t first_t = 0;
  int n_virtual = 1;
  int n_observables = 0;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  /// "v<n>_q<k>" with n in 1..N_V and k in 0..K-1.
  std::string column_name(Eigen::Index col) const;
};

struct ExecutionLedger {
  std::uint64_t encodings = 0;
  std::uint64_t evolutions = 0;
  /// Measured circuits: one per multiplexed time per timestep.
  std::uint64_t circuit_runs = 0;

  ExecutionLedger& operator+=(const ExecutionLedger& other);
  friend bool operator==(const ExecutionLedger&, const ExecutionLedger&) = default;
};

nlohmann::json to_json(const ExecutionLedger& ledger);

struct ProtocolRun {
  StateMatrix states;
  ExecutionLedger ledger;
  /// Warm-up timesteps that produced no feature row.
  std::int64_t skipped_steps = 0;
};

/// Precomputed evolutions at the N_V multiplexed times for one reservoir.
class MultiplexedEvolution {
 public:
  MultiplexedEvolution(const ReservoirSpec& spec, int n_virtual, const NoiseParams& noise = {});

  int n_virtual() const { return n_virtual_; }
  int num_qubits() const { return num_qubits_; }
  int feature_count() const { return num_qubits_ * n_virtual_; }
  bool noisy() const { return !channels_.empty(); }

  /// Exact features of an encoded, not yet evolved state.
  Eigen::VectorXd features(const PureState& psi) const;
  Eigen::VectorXd features(const MixedState& rho) const;

  /// Full evolution time T.
  MixedState advance(const MixedState& rho) const;

  /// Fast paths for the re-injected state |e(s)><e(s)| (x) reduced, where
  /// `reduced` lives on qubits 1..N-1.
  Eigen::VectorXd features_injected(const CMatrix<double>& reduced, double s) const;
  CMatrix<double> advance_injected(const CMatrix<double>& reduced, double s) const;

 private:
  Eigen::VectorXd features_from_probabilities(const Eigen::VectorXd& stacked_probs) const;
  CMatrix<double> injected_matrix(const CMatrix<double>& reduced, double s) const;

  int num_qubits_;
  int n_virtual_;
  Eigen::MatrixXd z_signs_;
  // (N_V * dim) x dim: block n holds the propagator to tau_{n+1}.
  CMatrix<double> stacked_;
  CMatrix<double> full_;
  std::vector<NoisyEvolution> channels_;
};

/// Exact multiplexed features of `state` (before evolution).
Eigen::VectorXd measure_multiplexed(const PureState& state, const ReservoirSpec& reservoir,
                                    const ProtocolConfig& config);
Eigen::VectorXd measure_multiplexed(const MixedState& state, const ReservoirSpec& reservoir,
                                    const ProtocolConfig& config);

ProtocolRun qrc_run(std::span<const double> inputs, const ReservoirSpec& reservoir,
                    const ProtocolConfig& config);

ProtocolRun tdqelm_run(std::span<const double> inputs, const DelayTaps& taps, const ReservoirSpec& reservoir,
                       const ProtocolConfig& config);

/// Reservoir evolutions the protocol needs for M timesteps.
std::uint64_t predicted_cost(Protocol protocol, std::int64_t m);

}  // namespace qres
