#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "qres/noise.hpp"
#include "qres/protocols.hpp"

using namespace qres;
using cd = std::complex<double>;

namespace {

MixedState random_mixed(int n, std::mt19937_64& rng) {
  const Eigen::Index dim = Eigen::Index(1) << n;
  std::normal_distribution<double> g;
  CMatrix<double> a(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) a(i, j) = cd(g(rng), g(rng));
  CMatrix<double> rho = a * a.adjoint();
  rho /= rho.trace();
  return MixedState((rho + rho.adjoint()).eval() / 2.0);
}

oracle::CM pauli_y() {
  oracle::CM m(2, 2);
  m << 0, cd(0, -1), cd(0, 1), 0;
  return m;
}

// (1-p) rho + p/4 sum_P P_q rho P_q.
oracle::CM twirl(const oracle::CM& rho, int q, int n, double p) {
  oracle::CM sum = oracle::CM::Zero(rho.rows(), rho.cols());
  for (const auto& s : {oracle::pauli_i(), oracle::pauli_x(), pauli_y(), oracle::pauli_z()}) {
    const auto op = oracle::embed(n, q, s);
    sum += op * rho * op.adjoint();
  }
  return (1 - p) * rho + p / 4 * sum;
}

oracle::CM noisy_trotter_oracle(const oracle::CM& rho_in, const ReservoirSpec& spec, double fraction,
                                const NoiseParams& noise) {
  const int n = spec.graph.num_sites();
  const double t = spec.params.evolution_time * fraction;
  oracle::CM rho = rho_in;
  for (const auto& [e, j] : spec.params.couplings) {
    const auto g = oracle::pauli_rotation(oracle::embed2(n, e.i, e.j, oracle::pauli_x(), oracle::pauli_x()), 2 * j * t);
    rho = g * rho * g.adjoint();
    rho = twirl(rho, e.i, n, noise.depolarizing_2q);
    rho = twirl(rho, e.j, n, noise.depolarizing_2q);
  }
  for (int q = 0; q < n; ++q) {
    const auto g = oracle::pauli_rotation(oracle::embed(n, q, oracle::pauli_z()), 2 * spec.params.field * t);
    rho = g * rho * g.adjoint();
  }
  for (int q = 0; q < n; ++q) rho = twirl(rho, q, n, noise.depolarizing_1q);
  return rho;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / rx.size();
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / ry.size();
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

ReservoirSpec random_spec(int n, std::uint64_t seed, EvolutionBackend backend) {
  auto g = full_connectivity(n);
  std::mt19937_64 rng(seed);
  auto p = sample_couplings(g, 5.0, 1.0, rng);
  return ReservoirSpec{std::move(g), std::move(p), backend, seed};
}

}  // namespace

TEST_CASE("depolarizing channel examples") {
  std::mt19937_64 rng(1);
  const auto rho = random_mixed(3, rng);
  const int all[] = {0, 1, 2};
  CHECK((apply_depolarizing(rho, 0.0, all).matrix() - rho.matrix()).cwiseAbs().maxCoeff() < 1e-15);

  const int first[] = {0};
  const auto mixed = apply_depolarizing(MixedState::zero(2), 1.0, first);
  CHECK(std::abs(expect_z(mixed, 0)) < 1e-15);
  CHECK(std::abs(expect_z(mixed, 1) - 1.0) < 1e-15);

  auto state = MixedState::zero(1);
  const double p = 0.07;
  for (int k = 1; k <= 25; ++k) {
    state = apply_depolarizing(state, p, first);
    CHECK(std::abs(expect_z(state, 0) - std::pow(1 - p, k)) < 1e-12);
  }

  CHECK_THROWS_AS(apply_depolarizing(rho, -0.1, all), DomainError);
  CHECK_THROWS_AS(apply_depolarizing(rho, 1.1, all), DomainError);
  const int bad[] = {3};
  CHECK_THROWS_AS(apply_depolarizing(rho, 0.1, bad), DimensionError);
}

TEST_CASE("depolarizing matches the Pauli twirl and preserves state invariants") {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 1 + rep % 3;
    const auto rho = random_mixed(n, rng);
    const int q[] = {rep % n};
    const double p = 0.1 * (rep + 1) / 2;
    const auto out = apply_depolarizing(rho, p, q);
    CHECK((out.matrix() - twirl(rho.matrix(), q[0], n, p)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(out.matrix().trace() - cd(1, 0)) < 1e-10);
    CHECK_NOTHROW(check_positive(out));
  }
}

TEST_CASE("readout flip") {
  CHECK(apply_readout_flip(0.37, 0.0) == 0.37);
  CHECK(apply_readout_flip(0.8, 0.5) == 0.0);
  CHECK(apply_readout_flip(-1.0, 0.5) == 0.0);
  CHECK(apply_readout_flip(1.0, 0.01) == doctest::Approx(0.98).epsilon(1e-15));
  CHECK_THROWS_AS(apply_readout_flip(0.1, 0.6), DomainError);
  CHECK_THROWS_AS(apply_readout_flip(0.1, -0.01), DomainError);
  CHECK_THROWS_AS(apply_readout_flip(1.2, 0.01), DomainError);
}

TEST_CASE("noise params") {
  NoiseParams n;
  CHECK_FALSE(n.enabled);
  CHECK(n.depolarizing_1q == 0.001);
  CHECK(n.depolarizing_2q == 0.01);
  CHECK(n.readout_flip == 0.01);
  CHECK(n.effective().depolarizing_2q == 0.0);
  CHECK_FALSE(n.active());
  n.enabled = true;
  CHECK(n.effective().depolarizing_2q == 0.01);
  CHECK(n.active());
  n.readout_flip = 0.7;
  CHECK_THROWS_AS(validate(n), DomainError);
  const auto back = noise_from_json(to_json(NoiseParams{true, 0.002, 0.02, 0.03}));
  CHECK(back.enabled);
  CHECK(back.depolarizing_1q == 0.002);
  CHECK(back.depolarizing_2q == 0.02);
  CHECK(back.readout_flip == 0.03);
}

TEST_CASE("noisy trotter evolution matches a gate-by-gate oracle") {
  const auto spec = random_spec(3, 4, EvolutionBackend::TrotterOneStep);
  const NoiseParams noise{true, 0.02, 0.05, 0.0};
  std::mt19937_64 rng(8);
  const auto rho = random_mixed(3, rng);
  for (double f : {1.0, 0.25}) {
    const NoisyEvolution ev(spec, f, noise);
    CHECK(ev.channel_count() == 2 * spec.graph.edges().size() + 3);
    const auto out = ev.apply(rho);
    CHECK((out.matrix() - noisy_trotter_oracle(rho.matrix(), spec, f, noise)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_NOTHROW(check_positive(out));
  }
}

TEST_CASE("noise-free channel equals unitary evolution") {
  for (auto backend : {EvolutionBackend::Exact, EvolutionBackend::TrotterOneStep}) {
    const auto spec = random_spec(3, 6, backend);
    std::mt19937_64 rng(3);
    const auto rho = random_mixed(3, rng);
    const NoisyEvolution ev(spec, 0.5, NoiseParams{});
    const auto u = oracle::unitary(spec, 0.5);
    CHECK((ev.apply(rho).matrix() - u * rho.matrix() * u.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("exact backend applies the same channel pattern after the dense unitary") {
  const auto spec = random_spec(3, 10, EvolutionBackend::Exact);
  const NoiseParams noise{true, 0.01, 0.03, 0.0};
  std::mt19937_64 rng(12);
  const auto rho = random_mixed(3, rng);
  const auto u = oracle::unitary(spec);
  oracle::CM expected = u * rho.matrix() * u.adjoint();
  for (const auto& e : spec.graph.edges()) {
    expected = twirl(expected, e.i, 3, noise.depolarizing_2q);
    expected = twirl(expected, e.j, 3, noise.depolarizing_2q);
  }
  for (int q = 0; q < 3; ++q) expected = twirl(expected, q, 3, noise.depolarizing_1q);
  CHECK((NoisyEvolution(spec, 1.0, noise).apply(rho).matrix() - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("restarting protocol accumulates deviation while TD-QELM stays flat") {
  const int n = 4, m = 40, seeds = 10;
  std::vector<double> qrc_dev(m, 0.0), td_dev;
  const std::vector<int> taps{0, 1, 2, 3};
  const int td_rows = m - taps.back();
  td_dev.assign(td_rows, 0.0);
  for (int seed = 0; seed < seeds; ++seed) {
    const auto spec = random_spec(n, 100 + seed, EvolutionBackend::TrotterOneStep);
    std::mt19937_64 rng(500 + seed);
    std::uniform_real_distribution<double> u(0, 0.2);
    std::vector<double> s(m);
    for (auto& v : s) v = u(rng);
    ProtocolConfig clean;
    clean.protocol = Protocol::QRC;
    ProtocolConfig noisy = clean;
    noisy.noise = NoiseParams{true, 0.001, 0.01, 0.0};
    const auto a = qrc_run(s, spec, clean).states.values;
    const auto b = qrc_run(s, spec, noisy).states.values;
    for (int t = 0; t < m; ++t) qrc_dev[t] += (a.row(t) - b.row(t)).cwiseAbs().mean() / seeds;

    clean.protocol = noisy.protocol = Protocol::TDQELM;
    const auto c = tdqelm_run(s, DelayTaps(taps), spec, clean).states.values;
    const auto d = tdqelm_run(s, DelayTaps(taps), spec, noisy).states.values;
    for (int t = 0; t < td_rows; ++t) td_dev[t] += (c.row(t) - d.row(t)).cwiseAbs().mean() / seeds;
  }
  std::vector<double> tq(m), tt(td_rows);
  std::iota(tq.begin(), tq.end(), 0.0);
  std::iota(tt.begin(), tt.end(), 0.0);
  const double rho_qrc = spearman(tq, qrc_dev);
  const double rho_td = spearman(tt, td_dev);
  INFO("spearman qrc " << rho_qrc << " tdqelm " << rho_td);
  CHECK(rho_qrc > 0.0);
  CHECK(std::abs(rho_td) < 0.4);
}
