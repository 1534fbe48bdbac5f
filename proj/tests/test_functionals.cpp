#include "doctest.h"
#include "oracles.hpp"

#include "dmfkit/functionals.hpp"

using namespace dmfkit;

namespace {

constexpr double kSelf = 1.1283791670955126;  // 2/sqrt(pi)

IntegralSet unit_set(double Z) {
  BasisSpec s;
  s.count = 1;
  s.alpha0 = 1.0;
  s.Z = Z;
  return build_even_tempered(s);
}

Eigen::MatrixXd one(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

}  // namespace

TEST_CASE("kind names") {
  for (FunctionalKind k : kAllKinds) CHECK(parse_functional(to_string(k)) == k);
  CHECK_FALSE(parse_functional("pbe").has_value());
  CHECK(exchange_functions(FunctionalKind::ca).size() == 2);
}

TEST_CASE("Coulomb and exchange maps on one Gaussian") {
  const IntegralSet set = unit_set(1.0);
  CHECK(coulomb_matrix(set, one(1.0))(0, 0) == doctest::Approx(kSelf).epsilon(1e-14));
  CHECK(exchange_map(set, one(1.0))(0, 0) == doctest::Approx(kSelf).epsilon(1e-14));
  CHECK(exchange_energy(set, one(1.0)) == doctest::Approx(0.5641895835477563).epsilon(1e-14));
  CHECK(coulomb_matrix(set, one(0.0)).isZero());
  CHECK(exchange_map(set, one(0.0)).isZero());
  CHECK_THROWS_AS(coulomb_matrix(set, Eigen::MatrixXd::Zero(2, 2)), std::invalid_argument);
  CHECK_THROWS_AS(exchange_map(set, Eigen::MatrixXd::Zero(2, 2)), std::invalid_argument);
}

TEST_CASE("energy components on one Gaussian") {
  const IntegralSet set = unit_set(1.0);
  for (FunctionalKind k : kAllKinds) {
    const EnergyBreakdown e = energy(set, DensityMatrix(one(1.0)), k);
    CHECK(e.one_body == doctest::Approx(1.5 - 1.5957691216057308).epsilon(1e-13));
    CHECK(e.direct == doctest::Approx(0.5641895835477563).epsilon(1e-13));
    CHECK(e.exchange_x == doctest::Approx(0.5641895835477563).epsilon(1e-13));
    CHECK(e.exchange_hole == 0.0);
    CHECK(e.total == doctest::Approx(-0.0957691216057308).epsilon(1e-12));
  }

  const IntegralSet free = unit_set(0.0);
  const DensityMatrix half(one(0.5));
  const EnergyBreakdown hf = energy(free, half, FunctionalKind::hf);
  const EnergyBreakdown ca = energy(free, half, FunctionalKind::ca);
  const EnergyBreakdown mu = energy(free, half, FunctionalKind::mueller);
  CHECK(hf.one_body == doctest::Approx(0.75));
  CHECK(hf.direct == doctest::Approx(0.125 * kSelf).epsilon(1e-14));
  CHECK(hf.exchange_x == doctest::Approx(0.125 * kSelf).epsilon(1e-14));
  CHECK(mu.exchange_x == doctest::Approx(0.25 * kSelf).epsilon(1e-14));
  CHECK(ca.exchange_hole == doctest::Approx(0.125 * kSelf).epsilon(1e-14));
  CHECK(hf.total == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(ca.total == doctest::Approx(0.75 - 0.125 * kSelf).epsilon(1e-14));
  CHECK(ca.total == doctest::Approx(0.608953).epsilon(1e-6));
  CHECK(mu.total == doctest::Approx(ca.total).epsilon(1e-14));
}

TEST_CASE("spin factors for q = 2") {
  BasisSpec s;
  s.count = 1;
  s.alpha0 = 1.0;
  s.Z = 2.0;
  s.q = 2;
  const IntegralSet set = build_even_tempered(s);
  const EnergyBreakdown e = energy(set, DensityMatrix(one(1.0)), FunctionalKind::hf);
  // Two electrons in one orbital: 2h + (11|11).
  CHECK(e.total == doctest::Approx(2.0 * (1.5 - 2.0 * 1.5957691216057308) + kSelf).epsilon(1e-13));
  CHECK(e.direct == doctest::Approx(2.0 * kSelf).epsilon(1e-13));
  CHECK(e.exchange_x == doctest::Approx(kSelf).epsilon(1e-13));
}

TEST_CASE("structural identities") {
  const IntegralSet set = build_even_tempered(builtin_basis(6, 2.0, 1));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd a = oracle::interior_point(6, 100 + t);
    const Eigen::MatrixXd b = oracle::interior_point(6, 200 + t);
    CHECK((coulomb_matrix(set, a + b) - coulomb_matrix(set, a) - coulomb_matrix(set, b)).norm() <= 1e-12);
    const Eigen::MatrixXd K = exchange_map(set, a);
    CHECK((K - K.transpose()).norm() <= 1e-12);

    // Positivity on arbitrary symmetric matrices with norm up to 10.
    Eigen::MatrixXd d(6, 6);
    for (int i = 0; i < 36; ++i) d(i) = nd(rng);
    d = 0.5 * (d + d.transpose());
    d *= 10.0 / d.norm();
    CHECK(exchange_energy(set, d) >= -1e-10);

    // A normalized orbital: self-exchange equals self-direct.
    Eigen::VectorXd phi(6);
    for (int i = 0; i < 6; ++i) phi(i) = nd(rng);
    phi.normalize();
    const Eigen::MatrixXd P = phi * phi.transpose();
    CHECK(exchange_energy(set, P) == doctest::Approx(direct_energy(set, P)).epsilon(1e-12));
  }
}

TEST_CASE("energy invariants and feasibility") {
  const IntegralSet set = build_even_tempered(builtin_basis(6, 2.0, 2));
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const DensityMatrix g = random_feasible(6, 1.0, seed);
    for (FunctionalKind k : kAllKinds) {
      const EnergyBreakdown e = energy(set, g, k);
      CHECK(std::abs(e.total - (e.one_body + e.direct - e.exchange_x - e.exchange_hole)) <= 1e-12);
      CHECK(e.direct >= 0.0);
      CHECK(e.exchange_x >= -1e-10);
      CHECK(e.exchange_hole >= -1e-10);
    }
  }
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(6, 6);
  bad(0, 0) = 1.0 + 1e-6;
  CHECK_THROWS_AS(energy(set, DensityMatrix(bad), FunctionalKind::hf), InfeasibleDensity);
  CHECK_THROWS_AS(gradient(set, DensityMatrix(bad), FunctionalKind::ca), InfeasibleDensity);
  bad(0, 0) = 1.0 + 1e-9;
  CHECK_NOTHROW(energy(set, DensityMatrix(bad), FunctionalKind::mueller));
  CHECK_THROWS_AS(energy(set, DensityMatrix(Eigen::MatrixXd::Zero(3, 3)), FunctionalKind::hf),
                  std::invalid_argument);
}

TEST_CASE("gradients match central differences") {
  const IntegralSet set = build_even_tempered(builtin_basis(6, 2.0, 2));
  for (FunctionalKind k : kAllKinds) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Eigen::MatrixXd g = oracle::interior_point(6, seed);
      const Eigen::MatrixXd G = gradient(set, DensityMatrix(g), k);
      const Eigen::MatrixXd F = oracle::fd_gradient(set, g, k);
      CAPTURE(to_string(k));
      CHECK((G - F).norm() <= 1e-6 * F.norm());
      CHECK((G - G.transpose()).norm() == 0.0);
    }
  }
}

TEST_CASE("HF gradient is the Fock matrix; no interaction leaves h") {
  const IntegralSet set = build_even_tempered(builtin_basis(5, 3.0, 1));
  const Eigen::MatrixXd g = oracle::interior_point(5, 9);
  const Eigen::MatrixXd fock = set.h + coulomb_matrix(set, g) - exchange_map(set, g);
  CHECK((gradient(set, DensityMatrix(g), FunctionalKind::hf) - fock).norm() <= 1e-12);
  const IntegralSet free = set.without_interaction();
  for (FunctionalKind k : kAllKinds) CHECK((gradient(free, DensityMatrix(g), k) - free.h).norm() <= 1e-12);
}

TEST_CASE("idempotent collapse") {
  const IntegralSet set = build_even_tempered(builtin_basis(8, 2.0, 2));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    const Eigen::MatrixXd U = random_orthogonal(8, rng);
    const int k = 1 + static_cast<int>(seed % 4);
    const DensityMatrix P(U.leftCols(k) * U.leftCols(k).transpose());
    const double hf = energy(set, P, FunctionalKind::hf).total;
    CHECK(std::abs(energy(set, P, FunctionalKind::mueller).total - hf) <= 1e-10);
    CHECK(std::abs(energy(set, P, FunctionalKind::ca).total - hf) <= 1e-10);
  }
}
