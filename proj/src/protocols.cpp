#include "qres/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qres {

std::string to_string(Protocol p) { return p == Protocol::QRC ? "qrc" : "tdqelm"; }

Protocol parse_protocol(const std::string& tag) {
  if (tag == "qrc") return Protocol::QRC;
  if (tag == "tdqelm") return Protocol::TDQELM;
  throw ValidationError("unknown protocol '" + tag + "' (expected qrc|tdqelm)");
}

std::string to_string(ReplayMode m) { return m == ReplayMode::SharedPrefix ? "shared_prefix" : "full_restart"; }

ReplayMode parse_replay_mode(const std::string& tag) {
  if (tag == "shared_prefix") return ReplayMode::SharedPrefix;
  if (tag == "full_restart") return ReplayMode::FullRestart;
  throw ValidationError("unknown replay mode '" + tag + "' (expected shared_prefix|full_restart)");
}

DelayTaps::DelayTaps(std::vector<int> taps) : taps_(std::move(taps)) {
  if (taps_.empty()) throw ValidationError("delay taps must not be empty");
  if (taps_.front() < 0) throw ValidationError("delay taps must be non-negative");
  for (std::size_t i = 1; i < taps_.size(); ++i) {
    if (taps_[i] <= taps_[i - 1]) throw ValidationError("delay taps must be strictly increasing");
  }
}

void validate(const ProtocolConfig& config) {
  if (config.n_virtual < 1) throw ValidationError("n_virtual must be at least 1");
  if (config.n_shots && *config.n_shots < 1) throw ValidationError("n_shots must be at least 1");
  validate(config.noise);
}

std::string StateMatrix::column_name(Eigen::Index col) const {
  const Eigen::Index n = col / n_observables + 1;
  const Eigen::Index k = col % n_observables;
  return "v" + std::to_string(n) + "_q" + std::to_string(k);
}

ExecutionLedger& ExecutionLedger::operator+=(const ExecutionLedger& other) {
  encodings += other.encodings;
  evolutions += other.evolutions;
  circuit_runs += other.circuit_runs;
  return *this;
}

nlohmann::json to_json(const ExecutionLedger& ledger) {
  return {{"encodings", ledger.encodings}, {"evolutions", ledger.evolutions}, {"circuit_runs", ledger.circuit_runs}};
}

MultiplexedEvolution::MultiplexedEvolution(const ReservoirSpec& spec, int n_virtual, const NoiseParams& noise)
    : num_qubits_(spec.graph.num_sites()), n_virtual_(n_virtual), z_signs_(z_sign_table<double>(num_qubits_)) {
  if (n_virtual < 1) throw ValidationError("n_virtual must be at least 1");
  validate(noise);
  const Eigen::Index d = Eigen::Index{1} << num_qubits_;
  const bool gate_noise = noise.effective().depolarizing_1q > 0.0 || noise.effective().depolarizing_2q > 0.0;
  if (gate_noise) {
    for (int n = 1; n <= n_virtual; ++n) {
      channels_.emplace_back(spec, static_cast<double>(n) / n_virtual, noise);
    }
    return;
  }
  stacked_.resize(d * n_virtual, d);
  for (int n = 1; n <= n_virtual; ++n) {
    // n / N_V exactly 1 for the last block, so it equals the full propagator.
    stacked_.middleRows((n - 1) * d, d) = reservoir_unitary<double>(spec, static_cast<double>(n) / n_virtual).matrix();
  }
  full_ = stacked_.bottomRows(d);
}

Eigen::VectorXd MultiplexedEvolution::features_from_probabilities(const Eigen::VectorXd& stacked_probs) const {
  const Eigen::Index d = z_signs_.rows();
  const Eigen::Map<const Eigen::MatrixXd> probs(stacked_probs.data(), d, n_virtual_);
  // K x N_V, column-major storage is already in (n, k) feature order.
  Eigen::MatrixXd f = z_signs_.transpose() * probs;
  return Eigen::Map<const Eigen::VectorXd>(f.data(), f.size());
}

Eigen::VectorXd MultiplexedEvolution::features(const PureState& psi) const {
  if (psi.num_qubits() != num_qubits_) throw DimensionError("state/reservoir qubit count mismatch");
  if (noisy()) return features(MixedState::from_pure(psi));
  return features_from_probabilities((stacked_ * psi.amplitudes()).cwiseAbs2());
}

Eigen::VectorXd MultiplexedEvolution::features(const MixedState& rho) const {
  if (rho.num_qubits() != num_qubits_) throw DimensionError("state/reservoir qubit count mismatch");
  const Eigen::Index d = rho.dim();
  Eigen::VectorXd probs(d * n_virtual_);
  if (noisy()) {
    for (int n = 0; n < n_virtual_; ++n) {
      CMatrix<double> m = rho.matrix();
      channels_[n].apply_inplace(m);
      probs.segment(n * d, d) = m.diagonal().real();
    }
  } else {
    const CMatrix<double> a = stacked_ * rho.matrix();
    probs = a.cwiseProduct(stacked_.conjugate()).rowwise().sum().real();
  }
  return features_from_probabilities(probs);
}

MixedState MultiplexedEvolution::advance(const MixedState& rho) const {
  if (rho.num_qubits() != num_qubits_) throw DimensionError("state/reservoir qubit count mismatch");
  if (noisy()) return channels_.back().apply(rho);
  return evolve(rho, Unitary(full_));
}

CMatrix<double> MultiplexedEvolution::injected_matrix(const CMatrix<double>& reduced, double s) const {
  const Eigen::Index h = reduced.rows();
  const double e0 = std::sqrt(1.0 - s);
  const double e1 = std::sqrt(s);
  CMatrix<double> out(2 * h, 2 * h);
  out.topLeftCorner(h, h) = (e0 * e0) * reduced;
  out.topRightCorner(h, h) = (e0 * e1) * reduced;
  out.bottomLeftCorner(h, h) = (e1 * e0) * reduced;
  out.bottomRightCorner(h, h) = (e1 * e1) * reduced;
  return out;
}

Eigen::VectorXd MultiplexedEvolution::features_injected(const CMatrix<double>& reduced, double s) const {
  const Eigen::Index h = reduced.rows();
  if (2 * h != z_signs_.rows()) throw DimensionError("reduced state has the wrong dimension");
  if (noisy()) {
    const CMatrix<double> rho = injected_matrix(reduced, s);
    Eigen::VectorXd probs(2 * h * n_virtual_);
    for (int n = 0; n < n_virtual_; ++n) {
      CMatrix<double> m = rho;
      channels_[n].apply_inplace(m);
      probs.segment(n * 2 * h, 2 * h) = m.diagonal().real();
    }
    return features_from_probabilities(probs);
  }
  // With rho = |e><e| (x) R and real e, S rho S^dagger has diagonal
  // rowsum((W R) .* conj(W)) where W = e0 S[:, :h] + e1 S[:, h:].
  const CMatrix<double> w = std::sqrt(1.0 - s) * stacked_.leftCols(h) + std::sqrt(s) * stacked_.rightCols(h);
  const CMatrix<double> wr = w * reduced;
  return features_from_probabilities(wr.cwiseProduct(w.conjugate()).rowwise().sum().real());
}

CMatrix<double> MultiplexedEvolution::advance_injected(const CMatrix<double>& reduced, double s) const {
  const Eigen::Index h = reduced.rows();
  if (2 * h != z_signs_.rows()) throw DimensionError("reduced state has the wrong dimension");
  if (noisy()) {
    CMatrix<double> rho = injected_matrix(reduced, s);
    channels_.back().apply_inplace(rho);
    return rho;
  }
  const CMatrix<double> w = std::sqrt(1.0 - s) * full_.leftCols(h) + std::sqrt(s) * full_.rightCols(h);
  CMatrix<double> out = w * reduced * w.adjoint();
  return (0.5 * (out + out.adjoint())).eval();
}

namespace {

void check_inputs(std::span<const double> inputs) {
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    if (!(inputs[t] >= 0.0 && inputs[t] <= 1.0)) {
      std::ostringstream msg;
      msg << "input " << inputs[t] << " at timestep " << t << " is outside [0, 1]";
      throw DomainError(msg.str());
    }
  }
}

// Readout flip then shot sampling, applied row by row in timestep order.
class FeatureRecorder {
 public:
  explicit FeatureRecorder(const ProtocolConfig& config)
      : flip_(config.noise.effective().readout_flip), shots_(config.n_shots), rng_(config.shot_seed) {}

  void record(const Eigen::VectorXd& exact, Eigen::MatrixXd& out, Eigen::Index row) {
    for (Eigen::Index c = 0; c < exact.size(); ++c) {
      double v = std::clamp(exact(c), -1.0, 1.0);
      if (flip_ > 0.0) v = apply_readout_flip(v, flip_);
      if (shots_) v = sample_expect_z(v, *shots_, rng_);
      out(row, c) = v;
    }
  }

 private:
  double flip_;
  std::optional<std::int64_t> shots_;
  std::mt19937_64 rng_;
};

CMatrix<double> trace_first(const CMatrix<double>& rho) {
  const Eigen::Index h = rho.rows() / 2;
  return rho.topLeftCorner(h, h) + rho.bottomRightCorner(h, h);
}

void check_state(const CMatrix<double>& rho) { check_positive(MixedState(rho)); }

}  // namespace

Eigen::VectorXd measure_multiplexed(const PureState& state, const ReservoirSpec& reservoir,
                                    const ProtocolConfig& config) {
  validate(config);
  return MultiplexedEvolution(reservoir, config.n_virtual, config.noise).features(state);
}

Eigen::VectorXd measure_multiplexed(const MixedState& state, const ReservoirSpec& reservoir,
                                    const ProtocolConfig& config) {
  validate(config);
  return MultiplexedEvolution(reservoir, config.n_virtual, config.noise).features(state);
}

ProtocolRun qrc_run(std::span<const double> inputs, const ReservoirSpec& reservoir, const ProtocolConfig& config) {
  validate(config);
  check_inputs(inputs);
  const int n = reservoir.graph.num_sites();
  if (n < 2) throw ValidationError("the restarting protocol needs at least 2 qubits");
  const MultiplexedEvolution evo(reservoir, config.n_virtual, config.noise);
  const auto m = static_cast<Eigen::Index>(inputs.size());
  const Eigen::Index h = Eigen::Index{1} << (n - 1);

  ProtocolRun run;
  run.states.values.resize(m, evo.feature_count());
  run.states.n_virtual = config.n_virtual;
  run.states.n_observables = n;
  FeatureRecorder recorder(config);
  // Restart t re-encodes and re-evolves inputs 0..t.
  auto charge_restart = [&](Eigen::Index t) {
    run.ledger.encodings += static_cast<std::uint64_t>(t + 1);
    run.ledger.evolutions += static_cast<std::uint64_t>(t + 1);
    run.ledger.circuit_runs += static_cast<std::uint64_t>(config.n_virtual);
  };

  CMatrix<double> ground = CMatrix<double>::Zero(h, h);
  ground(0, 0) = 1.0;

  // One replay step: inject s_t into the reduced state and evolve for time T.
  auto step = [&](const CMatrix<double>& reduced, double s) {
    CMatrix<double> rho = evo.advance_injected(reduced, s);
    if (config.validate_states) check_state(rho);
    return trace_first(rho);
  };

  if (config.replay == ReplayMode::SharedPrefix) {
    CMatrix<double> reduced = ground;
    for (Eigen::Index t = 0; t < m; ++t) {
      recorder.record(evo.features_injected(reduced, inputs[t]), run.states.values, t);
      charge_restart(t);
      if (t + 1 < m) reduced = step(reduced, inputs[t]);
    }
  } else {
    for (Eigen::Index t = 0; t < m; ++t) {
      CMatrix<double> reduced = ground;
      for (Eigen::Index r = 0; r < t; ++r) reduced = step(reduced, inputs[r]);
      recorder.record(evo.features_injected(reduced, inputs[t]), run.states.values, t);
      charge_restart(t);
    }
  }
  return run;
}

ProtocolRun tdqelm_run(std::span<const double> inputs, const DelayTaps& taps, const ReservoirSpec& reservoir,
                       const ProtocolConfig& config) {
  validate(config);
  check_inputs(inputs);
  const int n = reservoir.graph.num_sites();
  if (taps.size() != n) {
    throw ValidationError("tap count " + std::to_string(taps.size()) + " does not match qubit count " +
                          std::to_string(n));
  }
  const auto m = static_cast<std::int64_t>(inputs.size());
  if (m < taps.max() + 1) {
    throw ValidationError("input sequence of length " + std::to_string(m) + " yields no feature rows for max tap " +
                          std::to_string(taps.max()));
  }
  const MultiplexedEvolution evo(reservoir, config.n_virtual, config.noise);
  const std::int64_t first = taps.max();
  const std::int64_t rows = m - first;

  ProtocolRun run;
  run.skipped_steps = first;
  run.states.first_t = first;
  run.states.values.resize(rows, evo.feature_count());
  run.states.n_virtual = config.n_virtual;
  run.states.n_observables = n;
  FeatureRecorder recorder(config);

  const auto& delays = taps.values();
  for (std::int64_t t = first; t < m; ++t) {
    // Newest input (tap 0) on qubit 0.
    PureState psi = encode_single(inputs[t - delays[0]]);
    for (std::size_t q = 1; q < delays.size(); ++q) psi = tensor(psi, encode_single(inputs[t - delays[q]]));
    if (config.validate_states && evo.noisy()) check_positive(evo.advance(MixedState::from_pure(psi)));
    recorder.record(evo.features(psi), run.states.values, t - first);
    run.ledger.encodings += 1;
    run.ledger.evolutions += 1;
    run.ledger.circuit_runs += static_cast<std::uint64_t>(config.n_virtual);
  }
  return run;
}

std::uint64_t predicted_cost(Protocol protocol, std::int64_t m) {
  if (m < 1) throw DomainError("sequence length must be at least 1");
  const auto mu = static_cast<std::uint64_t>(m);
  return protocol == Protocol::QRC ? mu * (mu + 1) / 2 : mu;
}

}  // namespace qres
