#pragma once

#include "dmfkit/functionals.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace dmfkit {

// sqrt(l m) - l m - sqrt(l(1-l) m(1-m)); nonnegative on [0,1]^2.
// Throws std::domain_error outside [0,1].
double lemma_gap(double lambda, double mu);

// Volume of the intersection of two balls of radius r whose centers are d apart.
double ball_intersection_volume(double r, double d);

struct QuadratureSpec {
  double rmax_factor = 64.0;  // upper limit R_max = rmax_factor * d
  unsigned max_depth = 20;
  double tolerance = 1e-15;
};

// (1/pi) int_{d/2}^inf r^-5 vol(r, d) dr, which equals 1/d.
// Adaptive Gauss-Kronrod on [d/2, R_max], exact tail beyond. Throws for d <= 0.
double fdl_reconstruct(double d, const QuadratureSpec& spec = {});

struct LensEstimate {
  double volume = 0.0;
  double standard_error = 0.0;
};

// Hit-or-miss estimate of ball_intersection_volume(r, d) from points in the bounding box.
LensEstimate monte_carlo_lens(double r, double d, std::uint64_t samples, std::uint64_t seed);

struct Failure {
  std::string fingerprint;
  double margin = 0.0;
};

// A suite may combine checks with different native tolerances; each slack s
// with native tolerance t is stored as s * tolerance / t so that
// passed == (worst_margin >= -tolerance) for the whole report.
struct VerificationReport {
  std::string suite;
  std::uint64_t trials = 0;
  double worst_margin = 0.0;
  double tolerance = 0.0;
  std::vector<Failure> failures;  // first kMaxListedFailures only
  std::uint64_t failure_count = 0;
  std::uint64_t seed = 0;
  bool passed = true;
  nlohmann::json details = nlohmann::json::object();

  static constexpr std::size_t kMaxListedFailures = 20;

  VerificationReport(std::string name, double tol, std::uint64_t seed_);

  // `fingerprint` is a string or a callable producing one; callables run only on failure.
  template <class F>
  bool check(double slack, double native_tol, F&& fingerprint) {
    const double margin = scaled(slack, native_tol);
    if (tally(margin)) return true;
    if constexpr (std::is_invocable_v<F>)
      note_failure(fingerprint(), margin);
    else
      note_failure(std::string(fingerprint), margin);
    return false;
  }
  template <class F>
  bool check(double slack, F&& fingerprint) {
    return check(slack, tolerance, std::forward<F>(fingerprint));
  }

  nlohmann::json to_json() const;

 private:
  double scaled(double slack, double native_tol) const;
  bool tally(double margin);
  void note_failure(std::string fingerprint, double margin);
};

// Random pairs plus a grid x grid lattice, and the diagonal equality case.
VerificationReport lemma_suite(std::uint64_t trials, std::uint64_t seed, int grid = 2000);

// Reconstruction at d in {0.1, 0.5, 1, 2, 10} and a Monte Carlo lens check.
VerificationReport fdl_suite(std::uint64_t seed, std::uint64_t mc_samples = 10'000'000);

// Pair-matrix positivity and tensor symmetry of each set.
VerificationReport psd_suite(const std::vector<IntegralSet>& sets);

// Default psd targets: helium builtin bases with n in {4, 8, 12}.
std::vector<IntegralSet> builtin_psd_sets();

// E_M <= E_CA <= E_HF and X[g] + X[sqrt(g(1-g))] <= X[sqrt g] on random feasible
// points with particle budget N, plus idempotent and near-boundary points.
VerificationReport sandwich_suite(const IntegralSet& set, double N, std::uint64_t trials, std::uint64_t seed);

inline constexpr double kLemmaTolerance = 1e-15;
inline constexpr double kFdlTolerance = 1e-8;
inline constexpr double kPsdTolerance = 1e-10;
inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kSandwichTolerance = 1e-10;
inline constexpr double kMonteCarloSigmas = 3.0;

// Lowest singlet eigenvalue of the two-electron Hamiltonian on the symmetric
// spatial pair space. Requires q == 2 and n <= kFci2MaxBasis.
double fci2_energy(const IntegralSet& set);

inline constexpr int kFci2MaxBasis = 20;

}  // namespace dmfkit
