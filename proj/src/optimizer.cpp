#include "dmfkit/optimizer.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace dmfkit {

void MinimizeOptions::validate() const {
  if (!(tol_step > 0.0) || !(tol_energy > 0.0)) throw std::invalid_argument("tolerances must be positive");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
  if (!(step0 > 0.0)) throw std::invalid_argument("step0 must be positive");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw std::invalid_argument("backtrack must lie in (0,1)");
  if (!(armijo > 0.0 && armijo < 1.0)) throw std::invalid_argument("armijo must lie in (0,1)");
  if (starts < 1) throw std::invalid_argument("starts must be >= 1");
}

namespace {

constexpr int kMaxBacktracks = 60;
constexpr double kMinStep = 1e-10;
constexpr double kMaxStep = 1e10;

struct Descent {
  DensityMatrix gamma;
  EnergyBreakdown energy;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;
};

double frob(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return a.cwiseProduct(b).sum(); }

EnergyBreakdown checked_energy(const IntegralSet& set, const DensityMatrix& g, FunctionalKind kind,
                               int iteration) {
  EnergyBreakdown e = energy(set, g, kind);
  if (!std::isfinite(e.total))
    throw MinimizeError("non-finite " + std::string(to_string(kind)) + " energy at iteration " +
                        std::to_string(iteration));
  return e;
}

struct Iterate {
  Eigen::MatrixXd x;  // coordinates the descent runs in
  DensityMatrix gamma;
  Eigen::VectorXd spectrum;  // eigenvalues of x (angle coordinates only)
  Eigen::MatrixXd basis;
};

// Plain coordinates: x = gamma.
class DensityCoordinates {
 public:
  DensityCoordinates(const IntegralSet& set, double budget, FunctionalKind kind)
      : set_(set), budget_(budget), kind_(kind) {}

  Iterate from_gamma(const DensityMatrix& g) const { return {g.matrix(), g, {}, {}}; }

  Iterate project(const Eigen::MatrixXd& y) const {
    DensityMatrix g = project_feasible(y, budget_);
    Eigen::MatrixXd x = g.matrix();
    return {std::move(x), std::move(g), {}, {}};
  }

  Eigen::MatrixXd gradient(const Iterate& it) const { return dmfkit::gradient(set_, it.gamma, kind_); }

 private:
  const IntegralSet& set_;
  double budget_;
  FunctionalKind kind_;
};

// Square-root coordinates: gamma = A^2 with 0 <= A <= 1 and tr A^2 <= budget.
// X[sqrt gamma] = X[A] is a smooth quadratic form in A, which removes the
// infinite slope of sqrt at zero occupation.
class RootCoordinates {
 public:
  RootCoordinates(const IntegralSet& set, double budget, FunctionalKind kind)
      : set_(set), budget_(budget), kind_(kind) {}

  Iterate from_gamma(const DensityMatrix& g) const {
    const Eigen::VectorXd a = g.eigenvalues().unaryExpr([](double x) { return std::sqrt(std::clamp(x, 0.0, 1.0)); });
    return make(a, g.eigenvectors());
  }

  Iterate project(const Eigen::MatrixXd& y) const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (y + y.transpose()));
    return make(project_roots(es.eigenvalues()), es.eigenvectors());
  }

  Eigen::MatrixXd gradient(const Iterate& it) const {
    const Eigen::MatrixXd& A = it.x;
    const Eigen::MatrixXd& g = it.gamma.matrix();
    Eigen::MatrixXd base = set_.q * set_.h + coulomb_matrix(set_, g);
    Eigen::MatrixXd grad = A * base + base * A;
    for (SpectralFunction f : exchange_functions(kind_)) {
      switch (f) {
        case SpectralFunction::identity: {
          const Eigen::MatrixXd K = exchange_map(set_, g);
          grad -= A * K + K * A;
          break;
        }
        case SpectralFunction::sqrt:
          grad -= exchange_map(set_, A);
          break;
        case SpectralFunction::sqrt_hole:
          throw std::logic_error("square-root coordinates do not support the hole term");
      }
    }
    return 0.5 * (grad + grad.transpose());
  }

 private:
  Iterate make(const Eigen::VectorXd& a, const Eigen::MatrixXd& U) const {
    Eigen::MatrixXd x = U * a.asDiagonal() * U.transpose();
    x = 0.5 * (x + x.transpose());
    return {std::move(x), DensityMatrix::from_spectrum(a.cwiseProduct(a), U), {}, {}};
  }

  // Euclidean projection of root eigenvalues onto {0 <= a <= 1, sum a^2 <= budget}:
  // a = clamp(y / (1 + mu), 0, 1) with mu >= 0 found by bisection.
  Eigen::VectorXd project_roots(const Eigen::VectorXd& y) const {
    auto scaled = [&](double mu) {
      return y.unaryExpr([mu](double v) { return std::clamp(v / (1.0 + mu), 0.0, 1.0); }).eval();
    };
    Eigen::VectorXd a = scaled(0.0);
    if (a.squaredNorm() <= budget_) return a;
    double lo = 0.0;
    double hi = 1.0;
    while (scaled(hi).squaredNorm() > budget_) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (scaled(mid).squaredNorm() > budget_)
        lo = mid;
      else
        hi = mid;
    }
    return scaled(hi);
  }

  const IntegralSet& set_;
  double budget_;
  FunctionalKind kind_;
};

// Angle coordinates: gamma = sin^2(Theta) with spectrum of Theta in [0, pi/2].
// sqrt(gamma) = sin(Theta) and sqrt(gamma(1-gamma)) = sin(2 Theta)/2 are smooth
// at both ends of the occupation range.
class AngleCoordinates {
 public:
  AngleCoordinates(const IntegralSet& set, double budget, FunctionalKind kind)
      : set_(set), budget_(budget), kind_(kind) {}

  Iterate from_gamma(const DensityMatrix& g) const {
    const Eigen::VectorXd theta =
        g.eigenvalues().unaryExpr([](double x) { return std::asin(std::sqrt(std::clamp(x, 0.0, 1.0))); });
    return make(theta, g.eigenvectors());
  }

  Iterate project(const Eigen::MatrixXd& y) const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (y + y.transpose()));
    return make(project_angles(es.eigenvalues()), es.eigenvectors());
  }

  Eigen::MatrixXd gradient(const Iterate& it) const {
    const Eigen::MatrixXd& U = it.basis;
    const Eigen::VectorXd& th = it.spectrum;
    const Eigen::MatrixXd& g = it.gamma.matrix();
    Eigen::MatrixXd occupation_part = set_.q * set_.h + coulomb_matrix(set_, g);
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(g.rows(), g.cols());
    for (SpectralFunction f : exchange_functions(kind_)) {
      switch (f) {
        case SpectralFunction::identity:
          occupation_part -= exchange_map(set_, g);
          break;
        case SpectralFunction::sqrt: {
          const Eigen::VectorXd s = th.array().sin();
          grad -= pullback(U, th, exchange_map(set_, U * s.asDiagonal() * U.transpose()), dd_sin);
          break;
        }
        case SpectralFunction::sqrt_hole: {
          const Eigen::VectorXd s = 0.5 * (2.0 * th.array()).sin();
          grad -= pullback(U, th, exchange_map(set_, U * s.asDiagonal() * U.transpose()), dd_half_sin2);
          break;
        }
      }
    }
    grad += pullback(U, th, occupation_part, dd_sin2);
    return 0.5 * (grad + grad.transpose());
  }

 private:
  static double sinc(double x) { return std::abs(x) < 1e-4 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }
  static double dd_sin2(double a, double b) { return std::sin(a + b) * sinc(a - b); }
  static double dd_sin(double a, double b) { return std::cos(0.5 * (a + b)) * sinc(0.5 * (a - b)); }
  static double dd_half_sin2(double a, double b) { return std::cos(a + b) * sinc(a - b); }

  template <class DD>
  static Eigen::MatrixXd pullback(const Eigen::MatrixXd& U, const Eigen::VectorXd& th, const Eigen::MatrixXd& C,
                                  DD dd) {
    Eigen::MatrixXd Ct = U.transpose() * C * U;
    for (Eigen::Index i = 0; i < Ct.rows(); ++i)
      for (Eigen::Index j = 0; j < Ct.cols(); ++j) Ct(i, j) *= dd(th(i), th(j));
    return U * Ct * U.transpose();
  }

  Iterate make(const Eigen::VectorXd& theta, const Eigen::MatrixXd& U) const {
    Eigen::MatrixXd x = U * theta.asDiagonal() * U.transpose();
    x = 0.5 * (x + x.transpose());
    const Eigen::VectorXd occ = theta.array().sin().square();
    return {std::move(x), DensityMatrix::from_spectrum(occ, U), theta, U};
  }

  // argmin over [0, pi/2] of (t - y)^2 + mu sin^2 t.
  static double penalized_angle(double y, double mu) {
    const double c = std::clamp(y, 0.0, kHalfPi);
    if (mu == 0.0 || c == 0.0) return c;
    auto phi = [&](double t) { return (t - y) * (t - y) + mu * std::sin(t) * std::sin(t); };
    auto dphi = [&](double t) { return 2.0 * (t - y) + mu * std::sin(2.0 * t); };
    double lo = 0.0;
    double hi = c;
    if (mu > 1.0) {
      // Possibly nonconvex: bracket the best grid point first.
      constexpr int kGrid = 64;
      int best = 0;
      double best_val = phi(0.0);
      for (int i = 1; i <= kGrid; ++i) {
        const double v = phi(c * i / kGrid);
        if (v < best_val) {
          best_val = v;
          best = i;
        }
      }
      lo = c * std::max(best - 1, 0) / kGrid;
      hi = c * std::min(best + 1, kGrid) / kGrid;
      if (dphi(lo) >= 0.0) return lo;
      if (dphi(hi) <= 0.0) return hi;
    }
    // Safeguarded Newton on dphi = 0 inside [lo, hi], dphi(lo) < 0 < dphi(hi).
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 100; ++it) {
      const double d = dphi(t);
      if (d == 0.0) return t;
      (d > 0.0 ? hi : lo) = t;
      const double curvature = 2.0 + 2.0 * mu * std::cos(2.0 * t);
      double next = curvature > 0.0 ? t - d / curvature : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - t) <= 1e-16 || hi - lo <= 1e-16) return next;
      t = next;
    }
    return t;
  }

  Eigen::VectorXd project_angles(const Eigen::VectorXd& y) const {
    auto at = [&](double mu) { return y.unaryExpr([mu](double v) { return penalized_angle(v, mu); }).eval(); };
    auto load = [](const Eigen::VectorXd& th) { return th.array().sin().square().sum(); };
    Eigen::VectorXd th = at(0.0);
    if (load(th) <= budget_) return th;
    double lo = 0.0;
    double hi = 1.0;
    while (load(at(hi)) > budget_) hi *= 2.0;
    for (int it = 0; it < 100 && hi - lo > 1e-13 * (1.0 + hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (load(at(mid)) > budget_)
        lo = mid;
      else
        hi = mid;
    }
    return at(hi);
  }

  static constexpr double kHalfPi = 1.5707963267948966;

  const IntegralSet& set_;
  double budget_;
  FunctionalKind kind_;
};

template <class Coordinates>
Descent descend(const IntegralSet& set, FunctionalKind kind, const MinimizeOptions& opts,
                const Coordinates& coords, const DensityMatrix& start) {
  Descent run;
  Iterate cur = coords.from_gamma(start);
  run.energy = checked_energy(set, cur.gamma, kind, 0);
  run.trace.push_back(run.energy.total);
  Eigen::MatrixXd G = coords.gradient(cur);
  double t = opts.step0;
  double last_dE = std::numeric_limits<double>::infinity();

  for (int k = 1; k <= opts.max_iter; ++k) {
    const double E = run.energy.total;
    const double noise = 1e-14 * std::max(1.0, std::abs(E));
    bool accepted = false;
    Iterate cand;
    EnergyBreakdown ec;
    Eigen::MatrixXd dx;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      cand = coords.project(cur.x - t * G);
      dx = cand.x - cur.x;
      ec = checked_energy(set, cand.gamma, kind, k);
      if (ec.total <= E + opts.armijo * frob(G, dx) + noise) {
        accepted = true;
        break;
      }
      t *= opts.backtrack;
    }
    if (!accepted) {
      // No decrease at any trial step: stationary up to round-off.
      run.converged = last_dE <= opts.tol_energy * std::max(1.0, std::abs(E));
      break;
    }

    const double step = (cand.gamma.matrix() - cur.gamma.matrix()).norm();
    last_dE = std::abs(E - ec.total);
    cur = std::move(cand);
    run.energy = ec;
    run.trace.push_back(ec.total);
    run.iterations = k;

    if (step < opts.tol_step && last_dE <= opts.tol_energy * std::max(1.0, std::abs(ec.total))) {
      run.converged = true;
      break;
    }

    // Barzilai-Borwein trial step for the next iteration.
    Eigen::MatrixXd Gnew = coords.gradient(cur);
    const double sy = frob(dx, Gnew - G);
    t = sy > 0.0 ? dx.squaredNorm() / sy : t / opts.backtrack;
    t = std::clamp(t, kMinStep, kMaxStep);
    G = std::move(Gnew);
  }
  run.gamma = std::move(cur.gamma);
  return run;
}

// HF runs in plain coordinates. Mueller and CA carry sqrt-type singularities
// at the occupation bounds and run in coordinates where their energies are smooth.
Descent descend(const IntegralSet& set, double budget, FunctionalKind kind, const MinimizeOptions& opts,
                const DensityMatrix& start) {
  switch (kind) {
    case FunctionalKind::mueller:
      return descend(set, kind, opts, RootCoordinates(set, budget, kind), start);
    case FunctionalKind::ca:
      return descend(set, kind, opts, AngleCoordinates(set, budget, kind), start);
    case FunctionalKind::hf:
      break;
  }
  return descend(set, kind, opts, DensityCoordinates(set, budget, kind), start);
}

}  // namespace

MinimizeResult minimize_from(const IntegralSet& set, double N, FunctionalKind kind, const MinimizeOptions& opts,
                             const DensityMatrix& start) {
  opts.validate();
  const double budget = N / set.q;
  Descent run = descend(set, budget, kind, opts, project_feasible(start.matrix(), budget));
  MinimizeResult result;
  result.start_energies.push_back(run.energy.total);
  result.gamma = std::move(run.gamma);
  result.energy = run.energy;
  result.iterations = run.iterations;
  result.converged = run.converged;
  result.energy_trace = std::move(run.trace);
  result.occupations = result.gamma.eigenvalues().reverse();
  result.trace = set.q * result.gamma.trace();
  result.active_trace = std::abs(result.trace - N) <= 1e-8;
  return result;
}

DensityMatrix aufbau_start(const IntegralSet& set, double N) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(set.h);
  double remaining = N / set.q;
  Eigen::VectorXd occ = Eigen::VectorXd::Zero(set.n());
  for (int i = 0; i < set.n() && remaining > 0.0; ++i) {
    occ(i) = std::min(1.0, remaining);
    remaining -= occ(i);
  }
  return DensityMatrix::from_spectrum(occ, es.eigenvectors());
}

MinimizeResult minimize(const IntegralSet& set, double N, FunctionalKind kind, const MinimizeOptions& opts) {
  opts.validate();
  if (!(N > 0.0) || N > set.q * set.n() + 1e-12) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "particle number N=%g outside (0, q*n] = (0, %d]", N, set.q * set.n());
    throw std::invalid_argument(buf);
  }
  const double budget = N / set.q;

  std::vector<DensityMatrix> starts;
  starts.push_back(aufbau_start(set, N));
  for (int s = 1; s <= opts.starts; ++s)
    starts.push_back(random_feasible(set.n(), budget, opts.seed * 7919ULL + static_cast<std::uint64_t>(s)));
  for (const auto& w : opts.warm_starts) {
    if (w.rows() != set.n() || w.cols() != set.n())
      throw std::invalid_argument("warm start dimension does not match basis");
    starts.push_back(project_feasible(w, budget));
  }

  MinimizeResult result;
  bool have_best = false;
  result.start_energies.reserve(starts.size());
  for (std::size_t s = 0; s < starts.size(); ++s) {
    Descent run = descend(set, budget, kind, opts, starts[s]);
    result.start_energies.push_back(run.energy.total);
    if (!have_best || run.energy.total < result.energy.total) {
      have_best = true;
      result.gamma = std::move(run.gamma);
      result.energy = run.energy;
      result.iterations = run.iterations;
      result.converged = run.converged;
      result.energy_trace = std::move(run.trace);
      result.best_start = static_cast<int>(s);
    }
  }
  result.occupations = result.gamma.eigenvalues().reverse();
  result.trace = set.q * result.gamma.trace();
  result.active_trace = std::abs(result.trace - N) <= 1e-8;
  return result;
}

const MinimizeResult& OrderedMinima::get(FunctionalKind kind) const {
  switch (kind) {
    case FunctionalKind::hf: return hf;
    case FunctionalKind::ca: return ca;
    case FunctionalKind::mueller: return mueller;
  }
  return hf;
}

OrderedMinima minimize_ordered(const IntegralSet& set, double N, const MinimizeOptions& opts) {
  OrderedMinima out;
  out.hf = minimize(set, N, FunctionalKind::hf, opts);
  MinimizeOptions chained = opts;
  chained.warm_starts.push_back(out.hf.gamma.matrix());
  out.ca = minimize(set, N, FunctionalKind::ca, chained);
  chained.warm_starts.push_back(out.ca.gamma.matrix());
  out.mueller = minimize(set, N, FunctionalKind::mueller, chained);
  return out;
}

MinimizeResult minimize_chained(const IntegralSet& set, double N, FunctionalKind kind,
                                const MinimizeOptions& opts) {
  if (kind == FunctionalKind::hf) return minimize(set, N, kind, opts);
  MinimizeOptions chained = opts;
  const MinimizeResult hf = minimize(set, N, FunctionalKind::hf, opts);
  chained.warm_starts.push_back(hf.gamma.matrix());
  MinimizeResult ca = minimize(set, N, FunctionalKind::ca, chained);
  if (kind == FunctionalKind::ca) return ca;
  chained.warm_starts.push_back(ca.gamma.matrix());
  return minimize(set, N, FunctionalKind::mueller, chained);
}

std::vector<ZScanRow> zscan(const std::vector<FunctionalKind>& kinds, const std::vector<int>& Zlist,
                            const std::function<BasisSpec(int)>& basis_for, const MinimizeOptions& opts) {
  if (Zlist.empty()) throw std::invalid_argument("empty Z range");
  std::vector<ZScanRow> rows;
  for (int Z : Zlist) {
    const IntegralSet set = build_even_tempered(basis_for(Z));
    const OrderedMinima minima = minimize_ordered(set, Z, opts);
    const bool ordered = minima.mueller.energy.total <= minima.ca.energy.total + kOrderingTol &&
                         minima.ca.energy.total <= minima.hf.energy.total + kOrderingTol;
    for (FunctionalKind kind : kinds) {
      const MinimizeResult& r = minima.get(kind);
      rows.push_back({Z, kind, r.energy.total, r.converged, r.trace, r.iterations, ordered});
    }
  }
  return rows;
}

void write_zscan_csv(const std::vector<ZScanRow>& rows, std::ostream& out) {
  out << "Z,kind,energy_ha,converged,trace,iterations,ordering_ok\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%s,%.12f,%s,%.10f,%d,%s\n", r.Z, std::string(to_string(r.kind)).c_str(),
                  r.energy, r.converged ? "true" : "false", r.trace, r.iterations,
                  r.ordering_ok ? "true" : "false");
    out << buf;
  }
}

}  // namespace dmfkit
