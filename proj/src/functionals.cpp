#include "dmfkit/functionals.hpp"

#include <cstdio>
#include <string>

namespace dmfkit {

std::string_view to_string(FunctionalKind kind) {
  switch (kind) {
    case FunctionalKind::hf: return "hf";
    case FunctionalKind::mueller: return "mueller";
    case FunctionalKind::ca: return "ca";
  }
  return "?";
}

std::optional<FunctionalKind> parse_functional(std::string_view name) {
  for (FunctionalKind k : kAllKinds)
    if (to_string(k) == name) return k;
  return std::nullopt;
}

std::vector<SpectralFunction> exchange_functions(FunctionalKind kind) {
  switch (kind) {
    case FunctionalKind::hf: return {SpectralFunction::identity};
    case FunctionalKind::mueller: return {SpectralFunction::sqrt};
    case FunctionalKind::ca: return {SpectralFunction::identity, SpectralFunction::sqrt_hole};
  }
  return {};
}

namespace {

void check_dims(const IntegralSet& set, const Eigen::MatrixXd& m) {
  if (m.rows() != set.n() || m.cols() != set.n())
    throw std::invalid_argument("matrix dimension " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + " does not match basis size " +
                                std::to_string(set.n()));
}

void check_feasible(const IntegralSet& set, const DensityMatrix& g) {
  check_dims(set, g.matrix());
  if (!g.is_feasible(kEnergyFeasibilityTol)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "density matrix spectrum [%.3e, %.3e] leaves [0,1]",
                  g.eigenvalues().minCoeff(), g.eigenvalues().maxCoeff());
    throw InfeasibleDensity(buf);
  }
}

}  // namespace

Eigen::MatrixXd coulomb_matrix(const IntegralSet& set, const Eigen::MatrixXd& g) {
  check_dims(set, g);
  const int n = set.n();
  const double factor = static_cast<double>(set.q * set.q);
  Eigen::MatrixXd J(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) acc += set.eri(i, j, k, l) * g(l, k);
      J(i, j) = factor * acc;
    }
  return J;
}

Eigen::MatrixXd exchange_map(const IntegralSet& set, const Eigen::MatrixXd& d) {
  check_dims(set, d);
  const int n = set.n();
  const double factor = static_cast<double>(set.q);
  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) acc += set.eri(i, k, l, j) * d(k, l);
      K(i, j) = factor * acc;
    }
  return K;
}

double direct_energy(const IntegralSet& set, const Eigen::MatrixXd& g) {
  return 0.5 * g.cwiseProduct(coulomb_matrix(set, g)).sum();
}

double exchange_energy(const IntegralSet& set, const Eigen::MatrixXd& d) {
  return 0.5 * d.cwiseProduct(exchange_map(set, d)).sum();
}

EnergyBreakdown energy(const IntegralSet& set, const DensityMatrix& g, FunctionalKind kind) {
  check_feasible(set, g);
  EnergyBreakdown e;
  e.one_body = set.q * set.h.cwiseProduct(g.matrix()).sum();
  e.direct = direct_energy(set, g.matrix());
  switch (kind) {
    case FunctionalKind::hf:
      e.exchange_x = exchange_energy(set, g.matrix());
      break;
    case FunctionalKind::mueller:
      e.exchange_x = exchange_energy(set, apply_function(g, SpectralFunction::sqrt));
      break;
    case FunctionalKind::ca:
      e.exchange_x = exchange_energy(set, g.matrix());
      e.exchange_hole = exchange_energy(set, apply_function(g, SpectralFunction::sqrt_hole));
      break;
  }
  e.total = e.one_body + e.direct - e.exchange_x - e.exchange_hole;
  return e;
}

Eigen::MatrixXd gradient(const IntegralSet& set, const DensityMatrix& g, FunctionalKind kind) {
  check_feasible(set, g);
  Eigen::MatrixXd grad = set.q * set.h + coulomb_matrix(set, g.matrix());
  for (SpectralFunction f : exchange_functions(kind)) {
    const Eigen::MatrixXd K = exchange_map(set, apply_function(g, f));
    grad -= frechet_apply(g, f, K);
  }
  return 0.5 * (grad + grad.transpose());
}

}  // namespace dmfkit
