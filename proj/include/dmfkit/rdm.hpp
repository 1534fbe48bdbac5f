#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string_view>

namespace dmfkit {

// Spectral functions entering the exchange terms: x, sqrt(x), sqrt(x(1-x)).
enum class SpectralFunction { identity, sqrt, sqrt_hole };

std::string_view to_string(SpectralFunction f);

// Divided differences are capped at this magnitude (f'(0) is infinite for sqrt).
inline constexpr double kDividedDifferenceCap = 1e8;

// f(clamp(x, 0, 1)).
double spectral_value(SpectralFunction f, double x);

// First divided difference f[a,b], f[a,a] = f'(a), arguments clamped to [0,1].
double divided_difference(SpectralFunction f, double a, double b);

// Real symmetric one-particle density matrix (spatial, spin-restricted) with
// its eigendecomposition computed once at construction.
class DensityMatrix {
 public:
  DensityMatrix() = default;

  // Throws std::invalid_argument if m is not square and symmetric within 1e-12.
  // Eigenvalues within 16 n eps of 0 or 1 are taken as exactly 0 or 1.
  explicit DensityMatrix(const Eigen::MatrixXd& m);

  // U diag(occupations) U^T with U orthogonal; the given spectrum is kept as the cache.
  static DensityMatrix from_spectrum(const Eigen::VectorXd& occupations, const Eigen::MatrixXd& U);

  int n() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  const Eigen::VectorXd& eigenvalues() const { return lambda_; }  // ascending
  const Eigen::MatrixXd& eigenvectors() const { return U_; }
  double trace() const { return m_.trace(); }

  bool is_feasible(double tol = 1e-10) const;

 private:
  Eigen::MatrixXd m_;
  Eigen::VectorXd lambda_;
  Eigen::MatrixXd U_;
};

// U f(lambda) U^T.
Eigen::MatrixXd apply_function(const DensityMatrix& g, SpectralFunction f);

// Directional derivative Df(g)[H] by the Daleckii-Krein rule.
Eigen::MatrixXd frechet_apply(const DensityMatrix& g, SpectralFunction f, const Eigen::MatrixXd& H);

// Frobenius-nearest matrix with spectrum in [0,1] and trace <= budget.
DensityMatrix project_feasible(const Eigen::MatrixXd& A, double budget);

// Eigenvalue part of project_feasible: clamp, then shift by nu found by bisection
// when the clamped sum exceeds the budget.
Eigen::VectorXd project_occupations(const Eigen::VectorXd& lambda, double budget);

// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, sign-fixed).
Eigen::MatrixXd random_orthogonal(int n, std::mt19937_64& rng);

// Random eigenvectors, i.i.d. uniform [0,1] eigenvalues, then projected.
DensityMatrix random_feasible(int n, double budget, std::uint64_t seed);

}  // namespace dmfkit
