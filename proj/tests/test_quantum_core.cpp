#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qres/quantum_core.hpp"

using namespace qres;
using cd = std::complex<double>;

namespace {

CVector<double> random_vector(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CVector<double> v(dim);
  for (auto& a : v) a = cd(g(rng), g(rng));
  return v / v.norm();
}

MixedState random_mixed(int n, std::mt19937_64& rng) {
  const Eigen::Index dim = Eigen::Index(1) << n;
  std::normal_distribution<double> g;
  CMatrix<double> a(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) a(i, j) = cd(g(rng), g(rng));
  CMatrix<double> rho = a * a.adjoint();
  rho /= rho.trace();
  rho = (rho + rho.adjoint()).eval() / 2.0;
  return MixedState(rho);
}

Unitary random_unitary(int n, std::mt19937_64& rng) {
  const Eigen::Index dim = Eigen::Index(1) << n;
  std::normal_distribution<double> g;
  CMatrix<double> a(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) a(i, j) = cd(g(rng), g(rng));
  Eigen::HouseholderQR<CMatrix<double>> qr(a);
  return Unitary(qr.householderQ() * CMatrix<double>::Identity(dim, dim));
}

MixedState bell() {
  CVector<double> v = CVector<double>::Zero(4);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  return MixedState::from_pure(PureState(v));
}

}  // namespace

TEST_CASE("encode_single boundaries and symmetry") {
  CHECK(encode_single(0.0)[0] == cd(1, 0));
  CHECK(encode_single(0.0)[1] == cd(0, 0));
  CHECK(encode_single(1.0)[0] == cd(0, 0));
  CHECK(encode_single(1.0)[1] == cd(1, 0));
  const auto half = encode_single(0.5);
  CHECK(std::abs(half[0] - 1 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(half[1] - 1 / std::sqrt(2.0)) < 1e-15);
}

TEST_CASE("encode_single names the rejected value") {
  try {
    encode_single(1.5);
    FAIL("no exception");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("1.5") != std::string::npos);
  }
  CHECK_THROWS_AS(encode_single(-0.01), DomainError);
  CHECK_THROWS_AS(encode_single(std::nan("")), DomainError);
}

TEST_CASE("tensor puts the first factor on the high bit") {
  const auto zero = encode_single(0.0), one = encode_single(1.0);
  const auto z1 = tensor(zero, one);
  CHECK(z1.dim() == 4);
  CHECK(std::abs(z1[1] - cd(1, 0)) < 1e-15);
  CHECK(std::abs(z1[0]) + std::abs(z1[2]) + std::abs(z1[3]) < 1e-15);

  const auto plus0 = tensor(encode_single(0.5), zero);
  CHECK(std::abs(plus0[0] - 1 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(plus0[2] - 1 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(plus0[1]) + std::abs(plus0[3]) < 1e-15);

  const auto p = tensor(encode_single(0.3), encode_single(0.7));
  const double expected[4] = {std::sqrt(0.21), std::sqrt(0.49), std::sqrt(0.09), std::sqrt(0.21)};
  for (int i = 0; i < 4; ++i) CHECK(std::abs(p[i] - expected[i]) < 1e-12);
}

TEST_CASE("partial trace examples against explicit summation") {
  CHECK_THROWS_AS(partial_trace_first(MixedState::zero(1)), DimensionError);

  const auto b = partial_trace_first(bell());
  CHECK((b.matrix() - CMatrix<double>::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((b.matrix() - oracle::trace_first(bell().matrix())).cwiseAbs().maxCoeff() < 1e-15);

  CVector<double> ghz = CVector<double>::Zero(8);
  ghz(0) = ghz(7) = 1 / std::sqrt(2.0);
  const auto g = partial_trace_first(MixedState::from_pure(PureState(ghz)));
  CMatrix<double> expected = CMatrix<double>::Zero(4, 4);
  expected(0, 0) = expected(3, 3) = 0.5;
  CHECK((g.matrix() - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("partial trace undoes tensoring with any first factor") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const auto sigma = random_mixed(1, rng);
    const auto tau = random_mixed(1 + rep % 3, rng);
    const auto r = partial_trace_first(tensor(sigma, tau));
    CHECK((r.matrix() - tau.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("inject_and_trace") {
  const auto g = inject_and_trace(MixedState::zero(2), 0.0);
  CHECK((g.matrix() - MixedState::zero(2).matrix()).cwiseAbs().maxCoeff() < 1e-15);

  for (double s : {0.0, 0.2, 0.9}) {
    const auto out = inject_and_trace(bell(), s);
    const auto expected = tensor(MixedState::from_pure(encode_single(s)), MixedState(CMatrix<double>::Identity(2, 2) / 2.0));
    CHECK((out.matrix() - expected.matrix()).cwiseAbs().maxCoeff() < 1e-15);
  }

  std::mt19937_64 rng(5);
  const auto sigma = random_mixed(1, rng), tau = random_mixed(2, rng);
  const auto out = inject_and_trace(tensor(sigma, tau), 0.37);
  const auto expected = tensor(MixedState::from_pure(encode_single(0.37)), tau);
  CHECK((out.matrix() - expected.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(out.matrix().trace() - cd(1, 0)) < 1e-10);
}

TEST_CASE("state invariants are enforced") {
  CVector<double> v(2);
  v << 1, 1;
  CHECK_THROWS_AS(PureState{v}, StateCorruptionError);
  CHECK_THROWS_AS(MixedState{CMatrix<double>::Identity(2, 2)}, StateCorruptionError);
  CMatrix<double> nh = CMatrix<double>::Identity(2, 2) / 2.0;
  nh(0, 1) = 0.3;
  CHECK_THROWS_AS(MixedState{nh}, StateCorruptionError);
  CHECK_THROWS_AS(MixedState{CMatrix<double>::Identity(3, 3) / 3.0}, DimensionError);
  CMatrix<double> neg = CMatrix<double>::Zero(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  CHECK_THROWS_AS(check_positive(MixedState(neg)), StateCorruptionError);
  CHECK_NOTHROW(check_positive(bell()));
  CHECK_THROWS_AS(Unitary{CMatrix<double>::Identity(2, 2) * 2.0}, NumericalError);
}

TEST_CASE("evolve") {
  std::mt19937_64 rng(3);
  const PureState psi(random_vector(8, rng));
  const auto same = evolve(psi, Unitary::identity(3));
  CHECK((same.amplitudes() - psi.amplitudes()).norm() < 1e-15);

  CMatrix<double> x(2, 2);
  x << 0, 1, 1, 0;
  const auto flipped = evolve(PureState::zero(1), Unitary(x));
  CHECK(std::abs(flipped[1] - cd(1, 0)) < 1e-15);

  for (int rep = 0; rep < 10; ++rep) {
    const auto u = random_unitary(4, rng);
    const PureState p(random_vector(16, rng));
    CHECK(std::abs(evolve(p, u).amplitudes().norm() - 1) < 1e-10);
    const auto rho = random_mixed(3, rng);
    const auto out = evolve(rho, random_unitary(3, rng));
    CHECK(std::abs(out.matrix().trace() - cd(1, 0)) < 1e-10);
    CHECK((out.matrix() - out.matrix().adjoint()).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK_THROWS_AS(evolve(PureState::zero(2), Unitary::identity(3)), DimensionError);
}

TEST_CASE("expect_z") {
  for (int k = 0; k < 4; ++k) CHECK(expect_z(PureState::zero(4), k) == doctest::Approx(1.0));
  const auto s = tensor(encode_single(0.0), encode_single(1.0));
  CHECK(expect_z(s, 0) == doctest::Approx(1.0));
  CHECK(expect_z(s, 1) == doctest::Approx(-1.0));
  for (double v : {0.0, 0.13, 0.5, 1.0}) CHECK(std::abs(expect_z(encode_single(v), 0) - (1 - 2 * v)) < 1e-15);
  CHECK_THROWS_AS(expect_z(PureState::zero(2), 2), DimensionError);
  CHECK_THROWS_AS(expect_z(PureState::zero(2), -1), DimensionError);
}

TEST_CASE("pure and mixed expectations agree with a Pauli oracle") {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 1 + rep % 4;
    const PureState psi(random_vector(Eigen::Index(1) << n, rng));
    const auto rho = MixedState::from_pure(psi);
    const auto zp = expect_z_all(psi);
    const auto zm = expect_z_all(rho);
    for (int k = 0; k < n; ++k) {
      CHECK(std::abs(zp(k) - zm(k)) < 1e-10);
      CHECK(std::abs(zm(k) - oracle::z_expect(rho.matrix(), k, n)) < 1e-12);
    }
  }
}

TEST_CASE("sample_expect_z degenerate cases and errors") {
  std::mt19937_64 rng(1);
  CHECK(sample_expect_z(1.0, 8192, rng) == 1.0);
  CHECK(sample_expect_z(-1.0, 8192, rng) == -1.0);
  CHECK_THROWS_AS(sample_expect_z(0.0, 0, rng), DomainError);
  CHECK_THROWS_AS(sample_expect_z(1.5, 10, rng), DomainError);
  std::mt19937_64 a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(sample_expect_z(0.3, 100, a) == sample_expect_z(0.3, 100, b));
}

TEST_CASE("sample_expect_z converges to the exact value") {
  std::mt19937_64 rng(2024);
  const double exact = 0.4;
  const int repeats = 100000;
  double sum = 0;
  for (int i = 0; i < repeats; ++i) sum += sample_expect_z(exact, 100, rng);
  const double sigma = std::sqrt((1 - exact * exact) / 100.0);
  CHECK(std::abs(sum / repeats - exact) < 3 * sigma / std::sqrt(double(repeats)));
}
