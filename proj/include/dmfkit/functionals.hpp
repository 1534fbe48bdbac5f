#pragma once

#include "dmfkit/integrals.hpp"
#include "dmfkit/rdm.hpp"

#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace dmfkit {

enum class FunctionalKind { hf, mueller, ca };

inline constexpr FunctionalKind kAllKinds[] = {FunctionalKind::hf, FunctionalKind::mueller,
                                               FunctionalKind::ca};

std::string_view to_string(FunctionalKind kind);
std::optional<FunctionalKind> parse_functional(std::string_view name);

// Spectral functions whose exchange forms are subtracted for a kind:
// HF {x}, Mueller {sqrt x}, CA {x, sqrt(x(1-x))}.
std::vector<SpectralFunction> exchange_functions(FunctionalKind kind);

// All components in Hartree, spin factors included.
struct EnergyBreakdown {
  double one_body = 0.0;       // q tr(h g)
  double direct = 0.0;         // D
  double exchange_x = 0.0;     // X[g] (HF, CA) or X[sqrt g] (Mueller)
  double exchange_hole = 0.0;  // X[sqrt(g(1-g))], CA only
  double total = 0.0;
};

class InfeasibleDensity : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Eigenvalues outside [-kEnergyFeasibilityTol, 1 + kEnergyFeasibilityTol] are rejected.
inline constexpr double kEnergyFeasibilityTol = 1e-8;

// J(g)_ij = q^2 sum_kl (ij|kl) g_lk, so that D = 1/2 <g, J(g)>.
Eigen::MatrixXd coulomb_matrix(const IntegralSet& set, const Eigen::MatrixXd& g);

// K(d)_ij = q sum_kl (ik|lj) d_kl, so that X[d] = 1/2 <d, K(d)>.
Eigen::MatrixXd exchange_map(const IntegralSet& set, const Eigen::MatrixXd& d);

double direct_energy(const IntegralSet& set, const Eigen::MatrixXd& g);
double exchange_energy(const IntegralSet& set, const Eigen::MatrixXd& d);

EnergyBreakdown energy(const IntegralSet& set, const DensityMatrix& g, FunctionalKind kind);

// Frobenius gradient over symmetric matrices:
// q h + J(g) - sum_f Df(g)[K(f(g))].
Eigen::MatrixXd gradient(const IntegralSet& set, const DensityMatrix& g, FunctionalKind kind);

}  // namespace dmfkit
