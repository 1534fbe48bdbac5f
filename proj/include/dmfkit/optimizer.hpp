#pragma once

#include "dmfkit/functionals.hpp"

#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace dmfkit {

struct MinimizeOptions {
  double tol_step = 1e-8;     // Frobenius norm of an accepted step
  double tol_energy = 1e-10;  // |dE| / max(1, |E|)
  int max_iter = 5000;
  double step0 = 1.0;
  double backtrack = 0.5;
  double armijo = 1e-4;
  std::uint64_t seed = 0;
  int starts = 3;  // random starts, in addition to the aufbau start
  // Extra starting matrices, projected onto the feasible set before use.
  std::vector<Eigen::MatrixXd> warm_starts;

  void validate() const;  // throws std::invalid_argument
};

struct MinimizeResult {
  DensityMatrix gamma;
  EnergyBreakdown energy;
  int iterations = 0;
  bool converged = false;
  std::vector<double> energy_trace;
  Eigen::VectorXd occupations;  // descending
  bool active_trace = false;    // q tr g = N within 1e-8
  double trace = 0.0;           // q tr g, electrons
  int best_start = 0;           // 0 = aufbau, 1..starts random, then warm starts
  std::vector<double> start_energies;
};

class MinimizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Projected gradient descent with Armijo backtracking over
// {0 <= g <= 1, q tr g <= N}; best of all starts.
MinimizeResult minimize(const IntegralSet& set, double N, FunctionalKind kind, const MinimizeOptions& opts);

// Single descent from `start` (projected first); no multistart.
MinimizeResult minimize_from(const IntegralSet& set, double N, FunctionalKind kind, const MinimizeOptions& opts,
                             const DensityMatrix& start);

// Fills the N/q lowest eigenvectors of h (the last one fractionally if needed).
DensityMatrix aufbau_start(const IntegralSet& set, double N);

struct OrderedMinima {
  MinimizeResult hf;
  MinimizeResult ca;
  MinimizeResult mueller;

  const MinimizeResult& get(FunctionalKind kind) const;
};

// Minimizes HF, then CA warm-started from the HF minimizer, then Mueller
// warm-started from the CA minimizer.
OrderedMinima minimize_ordered(const IntegralSet& set, double N, const MinimizeOptions& opts);

// Runs only the chain needed to reach `kind` and returns its result.
MinimizeResult minimize_chained(const IntegralSet& set, double N, FunctionalKind kind,
                                const MinimizeOptions& opts);

struct ZScanRow {
  int Z = 0;
  FunctionalKind kind = FunctionalKind::hf;
  double energy = 0.0;
  bool converged = false;
  double trace = 0.0;
  int iterations = 0;
  bool ordering_ok = true;
};

inline constexpr double kOrderingTol = 1e-8;

// Neutral atoms N = Z; `basis_for` supplies the basis for each Z.
std::vector<ZScanRow> zscan(const std::vector<FunctionalKind>& kinds, const std::vector<int>& Zlist,
                            const std::function<BasisSpec(int)>& basis_for, const MinimizeOptions& opts);

void write_zscan_csv(const std::vector<ZScanRow>& rows, std::ostream& out);

}  // namespace dmfkit
