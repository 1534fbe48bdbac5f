#include "dmfkit/verify.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>

namespace dmfkit {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();

std::string fmt(const char* f, double a, double b) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

}  // namespace

double lemma_gap(double lambda, double mu) {
  if (!(lambda >= 0.0 && lambda <= 1.0 && mu >= 0.0 && mu <= 1.0))
    throw std::domain_error(fmt("lemma_gap arguments (%.17g, %.17g) outside [0,1]", lambda, mu));
  return std::sqrt(lambda * mu) - lambda * mu - std::sqrt(lambda * (1.0 - lambda) * mu * (1.0 - mu));
}

double ball_intersection_volume(double r, double d) {
  if (!(r > 0.0) || !(d >= 0.0)) throw std::domain_error("ball_intersection_volume needs r > 0, d >= 0");
  if (d >= 2.0 * r) return 0.0;
  const double w = 2.0 * r - d;
  return kPi / 12.0 * (4.0 * r + d) * w * w;
}

double fdl_reconstruct(double d, const QuadratureSpec& spec) {
  if (!(d > 0.0)) throw std::domain_error("fdl_reconstruct needs d > 0");
  // r^-5 vol(r,d)/pi with vol expanded as (pi/12)(16 r^3 - 12 d r^2 + d^3).
  auto integrand = [d](double r) {
    const double u = 1.0 / r;
    return (16.0 * u * u - 12.0 * d * u * u * u + d * d * d * u * u * u * u * u) / 12.0;
  };
  const double R = spec.rmax_factor * d;
  const double body = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, 0.5 * d, R, spec.max_depth, spec.tolerance);
  const double tail = (16.0 / R - 6.0 * d / (R * R) + d * d * d / (4.0 * R * R * R * R)) / 12.0;
  return body + tail;
}

LensEstimate monte_carlo_lens(double r, double d, std::uint64_t samples, std::uint64_t seed) {
  if (!(r > 0.0) || !(d >= 0.0) || d >= 2.0 * r || samples < 2)
    throw std::domain_error("monte_carlo_lens needs 0 <= d < 2r and at least two samples");
  // The lens lies in x in [d - r, r], |y|, |z| <= sqrt(r^2 - d^2/4).
  const double a = std::sqrt(r * r - 0.25 * d * d);
  const double box = (2.0 * r - d) * 4.0 * a * a;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(d - r, r), uyz(-a, a);
  std::uint64_t hits = 0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    const double x = ux(rng), y = uyz(rng), z = uyz(rng);
    const double t = y * y + z * z;
    if (x * x + t <= r * r && (x - d) * (x - d) + t <= r * r) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(samples);
  return {box * p, box * std::sqrt(p * (1.0 - p) / static_cast<double>(samples - 1))};
}

VerificationReport::VerificationReport(std::string name, double tol, std::uint64_t seed_)
    : suite(std::move(name)), worst_margin(std::numeric_limits<double>::infinity()), tolerance(tol), seed(seed_) {}

double VerificationReport::scaled(double slack, double native_tol) const {
  return std::isnan(slack) ? -std::numeric_limits<double>::infinity() : slack * tolerance / native_tol;
}

bool VerificationReport::tally(double margin) {
  ++trials;
  worst_margin = std::min(worst_margin, margin);
  return margin >= -tolerance;
}

void VerificationReport::note_failure(std::string fingerprint, double margin) {
  passed = false;
  ++failure_count;
  if (failures.size() < kMaxListedFailures) failures.push_back({std::move(fingerprint), margin});
}

nlohmann::json VerificationReport::to_json() const {
  nlohmann::json fs = nlohmann::json::array();
  for (const auto& f : failures) fs.push_back({{"fingerprint", f.fingerprint}, {"margin", f.margin}});
  return {{"suite", suite},
          {"trials", trials},
          {"worst_margin", trials == 0 ? 0.0 : worst_margin},
          {"tolerance", tolerance},
          {"failures", fs},
          {"failure_count", failure_count},
          {"seed", seed},
          {"passed", passed},
          {"details", details}};
}

VerificationReport lemma_suite(std::uint64_t trials, std::uint64_t seed, int grid) {
  VerificationReport rep("lemma", kLemmaTolerance, seed);
  double min_gap = std::numeric_limits<double>::infinity();
  double diag_worst = 0.0;
  auto pair = [&](double l, double m) {
    const double g = lemma_gap(l, m);
    min_gap = std::min(min_gap, g);
    rep.check(g, [&] { return fmt("lambda=%.17g mu=%.17g", l, m); });
  };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::uint64_t t = 0; t < trials; ++t) {
    const double l = unit(rng);
    pair(l, unit(rng));
  }
  if (grid >= 2) {
    for (int i = 0; i < grid; ++i) {
      const double l = static_cast<double>(i) / (grid - 1);
      for (int j = 0; j < grid; ++j) pair(l, static_cast<double>(j) / (grid - 1));
      // Equality case of the Schwarz step.
      const double g = std::abs(lemma_gap(l, l));
      diag_worst = std::max(diag_worst, g);
      rep.check(-g, [&] { return fmt("diagonal lambda=%.17g mu=%.17g", l, l); });
    }
  }
  rep.details = {{"random_pairs", trials},
                 {"grid", grid},
                 {"min_gap", min_gap},
                 {"max_abs_diagonal_gap", diag_worst}};
  return rep;
}

VerificationReport fdl_suite(std::uint64_t seed, std::uint64_t mc_samples) {
  VerificationReport rep("fdl", kFdlTolerance, seed);
  nlohmann::json points = nlohmann::json::array();
  double worst_rel = 0.0;
  for (double d : {0.1, 0.5, 1.0, 2.0, 10.0}) {
    const double v = fdl_reconstruct(d);
    const double rel = std::abs(v * d - 1.0);
    worst_rel = std::max(worst_rel, rel);
    points.push_back({{"d", d}, {"value", v}, {"relative_error", rel}});
    rep.check(-rel, fmt("d=%.17g value=%.17g", d, v));
  }
  // Homogeneity of degree -1.
  const double s = 10.0;
  const double hom = std::abs(fdl_reconstruct(s * 1.0) * s / fdl_reconstruct(1.0) - 1.0);
  rep.check(-hom, fmt("scaling s=%.17g relative=%.17g", s, hom));

  const double r = 1.0, d = 1.0;
  const double exact = ball_intersection_volume(r, d);
  const LensEstimate mc = monte_carlo_lens(r, d, mc_samples, seed);
  const double z = std::abs(mc.volume - exact) / mc.standard_error;
  rep.check(-z, kMonteCarloSigmas, fmt("lens r=1 d=1 estimate=%.17g stderr=%.17g", mc.volume, mc.standard_error));

  rep.details = {{"points", points},
                 {"max_relative_error", worst_rel},
                 {"scaling_relative_error", hom},
                 {"lens",
                  {{"r", r},
                   {"d", d},
                   {"exact", exact},
                   {"monte_carlo", mc.volume},
                   {"standard_error", mc.standard_error},
                   {"samples", mc_samples},
                   {"z", z}}}};
  return rep;
}

std::vector<IntegralSet> builtin_psd_sets() {
  std::vector<IntegralSet> sets;
  for (int n : {4, 8, 12}) sets.push_back(build_even_tempered(builtin_basis(n, 2.0, 2)));
  return sets;
}

VerificationReport psd_suite(const std::vector<IntegralSet>& sets) {
  VerificationReport rep("psd", kPsdTolerance, 0);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& set : sets) {
    const double lo = set.min_pair_eigenvalue();
    const double eri_sym = set.eri.symmetry_error();
    const double h_sym = set.h_symmetry_error();
    rep.check(lo, "min pair eigenvalue " + set.provenance);
    rep.check(-eri_sym, kSymmetryTolerance, "eri symmetry " + set.provenance);
    rep.check(-h_sym, kSymmetryTolerance, "h symmetry " + set.provenance);
    rows.push_back({{"provenance", set.provenance},
                    {"n", set.n()},
                    {"min_pair_eigenvalue", lo},
                    {"eri_symmetry_error", eri_sym},
                    {"h_symmetry_error", h_sym}});
  }
  rep.details = {{"sets", rows}};
  return rep;
}

VerificationReport sandwich_suite(const IntegralSet& set, double N, std::uint64_t trials, std::uint64_t seed) {
  if (!(N > 0.0)) throw std::invalid_argument("sandwich suite needs a positive particle number");
  VerificationReport rep("sandwich", kSandwichTolerance, seed);
  const int n = set.n();
  const double budget = N / set.q;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> seeds;

  double worst_order = std::numeric_limits<double>::infinity();
  double worst_exchange = std::numeric_limits<double>::infinity();
  double worst_collapse = 0.0;

  auto ordered = [&](const DensityMatrix& g, const std::string& tag) {
    const EnergyBreakdown hf = energy(set, g, FunctionalKind::hf);
    const EnergyBreakdown ca = energy(set, g, FunctionalKind::ca);
    const EnergyBreakdown mu = energy(set, g, FunctionalKind::mueller);
    const double scale = 1.0 + std::abs(hf.total);
    const double m1 = (ca.total - mu.total) / scale;
    const double m2 = (hf.total - ca.total) / scale;
    const double m3 = (mu.exchange_x - ca.exchange_x - ca.exchange_hole) / scale;
    worst_order = std::min({worst_order, m1, m2});
    worst_exchange = std::min(worst_exchange, m3);
    rep.check(m1, [&] { return tag + " E_CA - E_M"; });
    rep.check(m2, [&] { return tag + " E_HF - E_CA"; });
    rep.check(m3, [&] { return tag + " exchange"; });
    return std::array<double, 3>{hf.total, ca.total, mu.total};
  };

  for (std::uint64_t t = 0; t < trials; ++t) {
    const std::uint64_t s = seeds(rng);
    ordered(random_feasible(n, budget, s), "random seed=" + std::to_string(s));
  }

  const std::uint64_t extra = std::max<std::uint64_t>(10, trials / 10);
  const int max_rank = std::min(n, static_cast<int>(std::floor(budget + 1e-12)));
  for (std::uint64_t t = 0; t < extra && max_rank >= 1; ++t) {
    const std::uint64_t s = seeds(rng);
    std::mt19937_64 local(s);
    const int k = 1 + static_cast<int>(local() % static_cast<std::uint64_t>(max_rank));
    Eigen::VectorXd occ = Eigen::VectorXd::Zero(n);
    occ.head(k).setOnes();
    const DensityMatrix p = DensityMatrix::from_spectrum(occ, random_orthogonal(n, local));
    const std::string tag = "projector rank=" + std::to_string(k) + " seed=" + std::to_string(s);
    const auto e = ordered(p, tag);
    const double spread = std::max(std::abs(e[1] - e[0]), std::abs(e[2] - e[0]));
    worst_collapse = std::max(worst_collapse, spread);
    rep.check(-spread, tag + " collapse");
  }

  for (std::uint64_t t = 0; t < extra; ++t) {
    const std::uint64_t s = seeds(rng);
    std::mt19937_64 local(s);
    Eigen::VectorXd occ(n);
    int high = 0;
    for (int i = 0; i < n; ++i) {
      const bool up = (local() & 1U) && high + 1 <= budget;
      high += up;
      occ(i) = up ? 1.0 - 1e-12 : 1e-12;
    }
    ordered(DensityMatrix::from_spectrum(occ, random_orthogonal(n, local)),
            "boundary seed=" + std::to_string(s));
  }

  rep.details = {{"provenance", set.provenance},
                 {"n", n},
                 {"N", N},
                 {"q", set.q},
                 {"random_points", trials},
                 {"projector_points", max_rank >= 1 ? extra : 0},
                 {"boundary_points", extra},
                 {"worst_ordering_margin", worst_order},
                 {"worst_exchange_margin", worst_exchange},
                 {"max_projector_spread_ha", worst_collapse}};
  return rep;
}

double fci2_energy(const IntegralSet& set) {
  if (set.q != 2) throw std::invalid_argument("two-electron singlet FCI needs q = 2");
  const int n = set.n();
  if (n < 1 || n > kFci2MaxBasis)
    throw std::invalid_argument("two-electron FCI supports 1 <= n <= " + std::to_string(kFci2MaxBasis));

  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) pairs.emplace_back(i, j);

  // Product-space element <ab|H|cd> with electron 1 in a->c and electron 2 in b->d.
  auto product = [&](int a, int b, int c, int d) {
    return (b == d ? set.h(a, c) : 0.0) + (a == c ? set.h(b, d) : 0.0) + set.eri(a, c, b, d);
  };
  const int m = static_cast<int>(pairs.size());
  Eigen::MatrixXd H(m, m);
  for (int p = 0; p < m; ++p) {
    const auto [i, j] = pairs[p];
    const double np = 1.0 / std::sqrt(2.0 * (i == j ? 2.0 : 1.0));
    for (int r = 0; r < m; ++r) {
      const auto [k, l] = pairs[r];
      const double nr = 1.0 / std::sqrt(2.0 * (k == l ? 2.0 : 1.0));
      H(p, r) = 2.0 * np * nr * (product(i, j, k, l) + product(i, j, l, k));
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace dmfkit
