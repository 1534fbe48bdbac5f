#include "doctest.h"
#include "oracles.hpp"

#include "dmfkit/rdm.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <Eigen/Eigenvalues>

using namespace dmfkit;

namespace {

Eigen::MatrixXd diag(std::initializer_list<double> v) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) d(i++) = x;
  return d.asDiagonal();
}

Eigen::MatrixXd random_projector(int n, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Eigen::MatrixXd U = random_orthogonal(n, rng);
  return U.leftCols(k) * U.leftCols(k).transpose();
}

Eigen::MatrixXd random_symmetric(int n, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> nd(0.0, scale);
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = nd(rng);
  return 0.5 * (A + A.transpose());
}

}  // namespace

TEST_CASE("spectral function values") {
  CHECK(spectral_value(SpectralFunction::sqrt_hole, 0.0) == 0.0);
  CHECK(spectral_value(SpectralFunction::sqrt_hole, 1.0) == 0.0);
  CHECK(spectral_value(SpectralFunction::sqrt, -1e-13) == 0.0);
  CHECK(spectral_value(SpectralFunction::identity, 1.0 + 1e-13) == 1.0);
  CHECK(divided_difference(SpectralFunction::sqrt, 0.0, 0.0) == kDividedDifferenceCap);
  CHECK(divided_difference(SpectralFunction::sqrt, 0.25, 0.25) == doctest::Approx(1.0));
  CHECK(divided_difference(SpectralFunction::sqrt_hole, 0.3, 0.6) ==
        doctest::Approx((std::sqrt(0.3 * 0.7) - std::sqrt(0.6 * 0.4)) / (0.3 - 0.6)));
  CHECK(divided_difference(SpectralFunction::sqrt_hole, 0.5, 0.5) == doctest::Approx(0.0));
}

TEST_CASE("density matrix construction") {
  CHECK_THROWS_AS(DensityMatrix(Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
  Eigen::MatrixXd asym = diag({0.5, 0.5});
  asym(0, 1) = 1e-6;
  CHECK_THROWS_AS(DensityMatrix{asym}, std::invalid_argument);
  const DensityMatrix g(diag({0.7, 0.2, 0.9}));
  CHECK(g.eigenvalues()(0) == doctest::Approx(0.2));
  CHECK(g.eigenvalues()(2) == doctest::Approx(0.9));
  CHECK(g.trace() == doctest::Approx(1.8));
  CHECK(g.is_feasible());
  CHECK_FALSE(DensityMatrix(diag({1.1, 0.0})).is_feasible());
}

TEST_CASE("matrix functions") {
  const Eigen::MatrixXd P = random_projector(6, 3, 11);
  CHECK((apply_function(DensityMatrix(P), SpectralFunction::sqrt) - P).norm() <= 1e-12);
  CHECK(apply_function(DensityMatrix(P), SpectralFunction::sqrt_hole).norm() <= 1e-7);
  CHECK((apply_function(DensityMatrix(diag({0.25, 0.25})), SpectralFunction::sqrt) - diag({0.5, 0.5})).norm() <=
        1e-15);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int n = 2 + static_cast<int>(seed % 11);
    const DensityMatrix g = random_feasible(n, n, seed);
    const Eigen::MatrixXd r = apply_function(g, SpectralFunction::sqrt);
    CHECK((r * r - g.matrix()).norm() <= 1e-10);
    for (auto f : {SpectralFunction::sqrt, SpectralFunction::sqrt_hole}) {
      const Eigen::MatrixXd fg = apply_function(g, f);
      CHECK((fg * g.matrix() - g.matrix() * fg).norm() <= 1e-10);
    }
  }
}

TEST_CASE("Frechet derivative") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd H = random_symmetric(5, rng, 1.0);
  const DensityMatrix g(oracle::interior_point(5, 3));
  CHECK((frechet_apply(g, SpectralFunction::identity, H) - H).norm() == 0.0);
  CHECK((frechet_apply(DensityMatrix(diag({0.25, 0.25})), SpectralFunction::sqrt, H.topLeftCorner(2, 2)) -
         H.topLeftCorner(2, 2))
            .norm() <= 1e-14);

  // First-order remainder shrinks quadratically.
  for (auto f : {SpectralFunction::sqrt, SpectralFunction::sqrt_hole}) {
    double prev = 0.0;
    for (double t : {1e-3, 1e-4}) {
      const Eigen::MatrixXd step = apply_function(DensityMatrix(g.matrix() + t * H), f) - apply_function(g, f);
      const double rem = (step - t * frechet_apply(g, f, H)).norm();
      CHECK(rem <= 50.0 * t * t);
      if (prev > 0.0) CHECK(rem <= prev * 0.02);
      prev = rem;
    }
    const Eigen::MatrixXd H2 = random_symmetric(5, rng, 1.0);
    const double lhs = H.cwiseProduct(frechet_apply(g, f, H2)).sum();
    const double rhs = frechet_apply(g, f, H).cwiseProduct(H2).sum();
    CHECK(std::abs(lhs - rhs) <= 1e-10);
  }
}

TEST_CASE("projection examples") {
  CHECK((project_feasible(diag({1.2, 0.5, -0.3}), 3.0).matrix() - diag({1.0, 0.5, 0.0})).norm() <= 1e-14);
  const Eigen::MatrixXd third = project_feasible(diag({0.8, 0.8, 0.8}), 2.0).matrix();
  CHECK((third - diag({2.0 / 3, 2.0 / 3, 2.0 / 3})).norm() <= 1e-12);
  const Eigen::MatrixXd feasible = diag({0.1, 0.4, 0.3});
  CHECK((project_feasible(feasible, 2.0).matrix() - feasible).norm() <= 1e-15);
  CHECK(project_feasible(diag({0.9, 0.9, 0.9}), 1.0).trace() <= 1.0 + 1e-14);
}

TEST_CASE("projection matches Dykstra oracle and is idempotent") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> budget(0.3, 4.5);
  for (int t = 0; t < 40; ++t) {
    const int n = 2 + t % 3;
    const Eigen::MatrixXd A = random_symmetric(n, rng, 1.0) + 0.5 * Eigen::MatrixXd::Identity(n, n);
    const double N = budget(rng);
    const DensityMatrix P = project_feasible(A, N);
    CAPTURE(t);
    CHECK((P.matrix() - oracle::dykstra_projection(A, N)).norm() <= 1e-6);
    CHECK((project_feasible(P.matrix(), N).matrix() - P.matrix()).norm() <= 1e-10);
    CHECK(P.trace() <= N + 1e-10);
    CHECK(P.is_feasible(1e-12));
  }
}

TEST_CASE("random feasible points") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const DensityMatrix g = random_feasible(7, 2.5, seed);
    CHECK(g.is_feasible(1e-10));
    CHECK(g.trace() <= 2.5 + 1e-10);
  }
  CHECK(random_feasible(5, 2.0, 42).matrix() == random_feasible(5, 2.0, 42).matrix());
  CHECK(random_feasible(5, 2.0, 42).matrix() != random_feasible(5, 2.0, 43).matrix());
  CHECK_THROWS_AS(random_feasible(0, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(random_feasible(3, 0.0, 1), std::invalid_argument);
}

TEST_CASE("unconstrained random spectra are uniform") {
  constexpr int kBins = 20;
  constexpr int kDraws = 100000;
  std::vector<double> counts(kBins, 0.0);
  for (int s = 0; s < kDraws; ++s) {
    const DensityMatrix g = random_feasible(2, 2.0, static_cast<std::uint64_t>(s));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.matrix(), Eigen::EigenvaluesOnly);
    for (int i = 0; i < 2; ++i) counts[std::min(kBins - 1, static_cast<int>(es.eigenvalues()(i) * kBins))] += 1.0;
  }
  const double expected = 2.0 * kDraws / kBins;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  const double critical = boost::math::quantile(boost::math::chi_squared(kBins - 1), 0.99);
  CHECK(chi2 <= critical);
}
