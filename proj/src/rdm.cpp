#include "dmfkit/rdm.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace dmfkit {

std::string_view to_string(SpectralFunction f) {
  switch (f) {
    case SpectralFunction::identity: return "identity";
    case SpectralFunction::sqrt: return "sqrt";
    case SpectralFunction::sqrt_hole: return "sqrt_hole";
  }
  return "?";
}

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

double cap(double v) { return std::clamp(v, -kDividedDifferenceCap, kDividedDifferenceCap); }

}  // namespace

double spectral_value(SpectralFunction f, double x) {
  x = clamp01(x);
  switch (f) {
    case SpectralFunction::identity: return x;
    case SpectralFunction::sqrt: return std::sqrt(x);
    case SpectralFunction::sqrt_hole: return std::sqrt(x * (1.0 - x));
  }
  return 0.0;
}

double divided_difference(SpectralFunction f, double a, double b) {
  a = clamp01(a);
  b = clamp01(b);
  switch (f) {
    case SpectralFunction::identity:
      return 1.0;
    case SpectralFunction::sqrt: {
      // (sqrt a - sqrt b)/(a - b) = 1/(sqrt a + sqrt b)
      const double s = std::sqrt(a) + std::sqrt(b);
      return s > 0.0 ? cap(1.0 / s) : kDividedDifferenceCap;
    }
    case SpectralFunction::sqrt_hole: {
      // (g(a) - g(b))/(a - b) = (1 - a - b)/(g(a) + g(b)) for g = sqrt(x(1-x))
      const double s = spectral_value(f, a) + spectral_value(f, b);
      if (s > 0.0) return cap((1.0 - a - b) / s);
      if (a != b) return 0.0;
      return a == 0.0 ? kDividedDifferenceCap : -kDividedDifferenceCap;
    }
  }
  return 0.0;
}

DensityMatrix::DensityMatrix(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("density matrix must be square");
  if (m.size() > 0) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw std::invalid_argument("density matrix must be symmetric");
  }
  m_ = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_);
  lambda_ = es.eigenvalues();
  U_ = es.eigenvectors();
  if (lambda_.size() == 0) return;
  // Solver roundoff near the bounds would otherwise be amplified by sqrt.
  const double snap = 16.0 * static_cast<double>(lambda_.size()) * std::numeric_limits<double>::epsilon() *
                      std::max(1.0, lambda_.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < lambda_.size(); ++i) {
    if (std::abs(lambda_(i)) <= snap) lambda_(i) = 0.0;
    if (std::abs(1.0 - lambda_(i)) <= snap) lambda_(i) = 1.0;
  }
}

DensityMatrix DensityMatrix::from_spectrum(const Eigen::VectorXd& occupations, const Eigen::MatrixXd& U) {
  const Eigen::Index n = occupations.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return occupations(a) < occupations(b); });
  DensityMatrix g;
  g.lambda_.resize(n);
  g.U_.resize(U.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    g.lambda_(i) = occupations(order[i]);
    g.U_.col(i) = U.col(order[i]);
  }
  const Eigen::MatrixXd m = g.U_ * g.lambda_.asDiagonal() * g.U_.transpose();
  g.m_ = 0.5 * (m + m.transpose());
  return g;
}

bool DensityMatrix::is_feasible(double tol) const {
  if (lambda_.size() == 0) return true;
  return lambda_.minCoeff() >= -tol && lambda_.maxCoeff() <= 1.0 + tol;
}

Eigen::MatrixXd apply_function(const DensityMatrix& g, SpectralFunction f) {
  Eigen::VectorXd fl = g.eigenvalues().unaryExpr([f](double x) { return spectral_value(f, x); });
  const Eigen::MatrixXd& U = g.eigenvectors();
  const Eigen::MatrixXd out = U * fl.asDiagonal() * U.transpose();
  return 0.5 * (out + out.transpose());
}

Eigen::MatrixXd frechet_apply(const DensityMatrix& g, SpectralFunction f, const Eigen::MatrixXd& H) {
  if (f == SpectralFunction::identity) return H;
  const Eigen::MatrixXd& U = g.eigenvectors();
  const Eigen::VectorXd& lambda = g.eigenvalues();
  Eigen::MatrixXd Ht = U.transpose() * H * U;
  for (Eigen::Index a = 0; a < Ht.rows(); ++a)
    for (Eigen::Index b = 0; b < Ht.cols(); ++b) Ht(a, b) *= divided_difference(f, lambda(a), lambda(b));
  return U * Ht * U.transpose();
}

Eigen::VectorXd project_occupations(const Eigen::VectorXd& lambda, double budget) {
  auto shifted = [&](double nu) {
    return lambda.unaryExpr([nu](double x) { return clamp01(x - nu); }).eval();
  };
  Eigen::VectorXd out = shifted(0.0);
  if (out.sum() <= budget) return out;

  // sum_i clamp(lambda_i - nu, 0, 1) is nonincreasing in nu; keep hi on the feasible side.
  double lo = 0.0;
  double hi = lambda.maxCoeff();
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (shifted(mid).sum() > budget)
      lo = mid;
    else
      hi = mid;
  }
  out = shifted(hi);

  // Closed-form shift on the bracketed active set makes the trace exact.
  double free_sum = 0.0;
  int free_count = 0;
  int saturated = 0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (out(i) >= 1.0)
      ++saturated;
    else if (out(i) > 0.0) {
      free_sum += lambda(i);
      ++free_count;
    }
  }
  if (free_count > 0) {
    const double nu = (free_sum + saturated - budget) / free_count;
    if (std::abs(nu - hi) <= 1e-9) {
      const Eigen::VectorXd refined = shifted(nu);
      if (refined.sum() <= budget + 1e-14 * std::max(1.0, budget)) out = refined;
    }
  }
  return out;
}

DensityMatrix project_feasible(const Eigen::MatrixXd& A, double budget) {
  if (A.rows() != A.cols()) throw std::invalid_argument("projection input must be square");
  const Eigen::MatrixXd sym = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  return DensityMatrix::from_spectrum(project_occupations(es.eigenvalues(), budget), es.eigenvectors());
}

Eigen::MatrixXd random_orthogonal(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd G(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) G(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (R(j, j) < 0.0) Q.col(j) *= -1.0;
  return Q;
}

DensityMatrix random_feasible(int n, double budget, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!(budget > 0.0)) throw std::invalid_argument("particle budget must be positive");
  std::mt19937_64 rng(seed);
  const Eigen::MatrixXd U = random_orthogonal(n, rng);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Eigen::VectorXd lambda(n);
  for (int i = 0; i < n; ++i) lambda(i) = uniform(rng);
  return DensityMatrix::from_spectrum(project_occupations(lambda, budget), U);
}

}  // namespace dmfkit
