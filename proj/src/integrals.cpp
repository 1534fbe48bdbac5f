#include "dmfkit/integrals.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace dmfkit {

std::vector<double> BasisSpec::exponents() const {
  std::vector<double> out(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) out[i] = alpha0 * std::pow(beta, i);
  return out;
}

void BasisSpec::validate() const {
  if (count < 1) throw std::invalid_argument("basis count must be >= 1");
  if (!(alpha0 > 0.0) || !std::isfinite(alpha0))
    throw std::invalid_argument("basis alpha0 must be positive");
  if (count > 1 && !(beta > 1.0)) throw std::invalid_argument("basis beta must exceed 1");
  if (!(Z >= 0.0) || !std::isfinite(Z)) throw std::invalid_argument("nuclear charge Z must be >= 0");
  if (q != 1 && q != 2) throw std::invalid_argument("q must be 1 or 2");
}

std::string BasisSpec::tag() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "even:%d,%.17g,%.17g Z=%.17g q=%d", count, alpha0, beta, Z, q);
  return buf;
}

BasisSpec parse_basis(const std::string& text) {
  constexpr std::string_view prefix = "even:";
  if (text.rfind(prefix, 0) != 0)
    throw std::invalid_argument("basis must look like even:count,alpha0,beta");
  std::stringstream ss(text.substr(prefix.size()));
  std::string field;
  std::vector<std::string> fields;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (fields.size() != 3)
    throw std::invalid_argument("basis must look like even:count,alpha0,beta");
  BasisSpec spec;
  try {
    std::size_t pos = 0;
    spec.count = std::stoi(fields[0], &pos);
    if (pos != fields[0].size()) throw std::invalid_argument(fields[0]);
    spec.alpha0 = std::stod(fields[1], &pos);
    if (pos != fields[1].size()) throw std::invalid_argument(fields[1]);
    spec.beta = std::stod(fields[2], &pos);
    if (pos != fields[2].size()) throw std::invalid_argument(fields[2]);
  } catch (const std::logic_error&) {
    throw std::invalid_argument("malformed basis specification '" + text + "'");
  }
  return spec;
}

BasisSpec builtin_basis(int count, double Z, int q) {
  BasisSpec spec;
  spec.count = count;
  spec.alpha0 = 0.05;
  spec.beta = count > 1 ? std::pow(1200.0, 1.0 / (count - 1)) : 2.0;
  spec.Z = Z;
  spec.q = q;
  return spec;
}

ParseError::ParseError(int line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

void EriTensor::set_symmetric(int i, int j, int k, int l, double v) {
  (*this)(i, j, k, l) = v;
  (*this)(j, i, k, l) = v;
  (*this)(i, j, l, k) = v;
  (*this)(j, i, l, k) = v;
  (*this)(k, l, i, j) = v;
  (*this)(l, k, i, j) = v;
  (*this)(k, l, j, i) = v;
  (*this)(l, k, j, i) = v;
}

Eigen::MatrixXd EriTensor::pair_matrix() const {
  const int m = n_ * n_;
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      data_.data(), m, m);
}

double EriTensor::symmetry_error() const {
  double worst = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k)
        for (int l = 0; l < n_; ++l) {
          const double v = (*this)(i, j, k, l);
          worst = std::max({worst, std::abs(v - (*this)(j, i, k, l)),
                            std::abs(v - (*this)(i, j, l, k)),
                            std::abs(v - (*this)(k, l, i, j))});
        }
  return worst;
}

IntegralSet::IntegralSet(int n, double Z_, int q_)
    : h(Eigen::MatrixXd::Zero(n, n)), eri(n), Z(Z_), q(q_), n_hint(static_cast<int>(std::lround(Z_))) {}

double IntegralSet::min_pair_eigenvalue() const {
  if (n() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(eri.pair_matrix(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

double IntegralSet::h_symmetry_error() const {
  return n() == 0 ? 0.0 : (h - h.transpose()).cwiseAbs().maxCoeff();
}

IntegralSet IntegralSet::without_interaction() const {
  IntegralSet out = *this;
  std::fill(out.eri.data().begin(), out.eri.data().end(), 0.0);
  out.provenance += " [eri zeroed]";
  return out;
}

namespace {

template <class T>
T overlap_t(T a, T b) {
  return std::pow(T(2) * std::sqrt(a * b) / (a + b), T(1.5));
}

template <class T>
T kinetic_t(T a, T b) {
  return T(3) * a * b / (a + b) * overlap_t(a, b);
}

template <class T>
T inverse_r_t(T a, T b) {
  return T(2) * std::sqrt((a + b) / std::numbers::pi_v<T>) * overlap_t(a, b);
}

template <class T>
T repulsion_t(T a, T b, T c, T d) {
  const T p = a + b;
  const T r = c + d;
  return overlap_t(a, b) * overlap_t(c, d) * T(2) / std::sqrt(std::numbers::pi_v<T>) * std::sqrt(p * r / (p + r));
}

}  // namespace

namespace gaussian {

double overlap(double a, double b) { return overlap_t(a, b); }
double kinetic(double a, double b) { return kinetic_t(a, b); }
double inverse_r(double a, double b) { return inverse_r_t(a, b); }
double repulsion(double a, double b, double c, double d) { return repulsion_t(a, b, c, d); }

}  // namespace gaussian

// S^{-1/2} amplifies roundoff by up to 1/s_min^2 on the pair matrix, so the
// transform runs in extended precision and is rounded to double at the end.
IntegralSet build_even_tempered(const BasisSpec& spec) {
  using Real = long double;
  using MatrixR = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  spec.validate();
  const int n = spec.count;
  std::vector<Real> alpha(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) alpha[i] = static_cast<Real>(spec.alpha0) * std::pow(static_cast<Real>(spec.beta), i);

  MatrixR S(n, n), T(n, n), U(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      S(i, j) = overlap_t(alpha[i], alpha[j]);
      T(i, j) = kinetic_t(alpha[i], alpha[j]);
      U(i, j) = inverse_r_t(alpha[i], alpha[j]);
    }

  Eigen::SelfAdjointEigenSolver<MatrixR> es(S);
  const auto& s = es.eigenvalues();
  const double condition = static_cast<double>(s(n - 1) / s(0));
  if (!(s(0) > 0) || condition > kMaxOverlapCondition) {
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "near-linear dependence in %s: overlap condition number %.3e exceeds %.0e",
                  spec.tag().c_str(), condition, kMaxOverlapCondition);
    throw BasisError(buf);
  }
  const MatrixR X = es.eigenvectors() * s.cwiseInverse().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();

  IntegralSet set(n, spec.Z, spec.q);
  set.provenance = spec.tag();
  const MatrixR h = X.transpose() * (T - static_cast<Real>(spec.Z) * U) * X;
  set.h = (0.5L * (h + h.transpose())).cast<double>();

  // (X (x) X)^T M (X (x) X) on the pair matrix.
  const int m = n * n;
  MatrixR M(m, m), W(m, m);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r)
        for (int t = 0; t < n; ++t) {
          M(p * n + q, r * n + t) = repulsion_t(alpha[p], alpha[q], alpha[r], alpha[t]);
          W(p * n + q, r * n + t) = X(p, r) * X(q, t);
        }
  const MatrixR Mo = W.transpose() * M * W;

  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l <= k; ++l) {
          if (i * n + j < k * n + l) continue;
          const Real v = (Mo(i * n + j, k * n + l) + Mo(j * n + i, k * n + l) +
                          Mo(i * n + j, l * n + k) + Mo(j * n + i, l * n + k) +
                          Mo(k * n + l, i * n + j) + Mo(l * n + k, i * n + j) +
                          Mo(k * n + l, j * n + i) + Mo(l * n + k, j * n + i)) /
                         8;
          set.eri.set_symmetric(i, j, k, l, static_cast<double>(v));
        }
  return set;
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

long parse_int(const std::string& tok, int line) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(tok, &pos);
    if (pos == tok.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw ParseError(line, "expected integer, got '" + tok + "'");
}

double parse_real(const std::string& tok, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos == tok.size() && std::isfinite(v)) return v;
  } catch (const std::logic_error&) {
  }
  throw ParseError(line, "expected real number, got '" + tok + "'");
}

}  // namespace

IntegralSet parse_interchange(std::istream& in, const std::string& provenance) {
  enum class Section { header, none, one_body, two_body };
  Section section = Section::header;
  IntegralSet set;
  std::string line;
  int lineno = 0;

  auto index = [&](const std::string& tok) {
    const long v = parse_int(tok, lineno);
    if (v < 1 || v > set.n())
      throw ParseError(lineno, "index " + tok + " out of range for n=" + std::to_string(set.n()));
    return static_cast<int>(v - 1);
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens[0][0] == '#') continue;

    if (section == Section::header) {
      if (tokens.size() != 4) throw ParseError(lineno, "missing header 'n Z q N_hint'");
      const long n = parse_int(tokens[0], lineno);
      if (n < 1 || n > 256) throw ParseError(lineno, "basis dimension n out of range");
      const double Z = parse_real(tokens[1], lineno);
      const long q = parse_int(tokens[2], lineno);
      if (q != 1 && q != 2) throw ParseError(lineno, "q must be 1 or 2");
      set = IntegralSet(static_cast<int>(n), Z, static_cast<int>(q));
      set.n_hint = static_cast<int>(parse_int(tokens[3], lineno));
      set.provenance = provenance;
      section = Section::none;
      continue;
    }
    if (tokens.size() == 1 && tokens[0] == "H") {
      section = Section::one_body;
      continue;
    }
    if (tokens.size() == 1 && tokens[0] == "ERI") {
      section = Section::two_body;
      continue;
    }
    if (section == Section::one_body) {
      if (tokens.size() != 3) throw ParseError(lineno, "expected 'i j value' in H section");
      const int i = index(tokens[0]);
      const int j = index(tokens[1]);
      const double v = parse_real(tokens[2], lineno);
      set.h(i, j) = v;
      set.h(j, i) = v;
    } else if (section == Section::two_body) {
      if (tokens.size() != 5) throw ParseError(lineno, "expected 'i j k l value' in ERI section");
      const int i = index(tokens[0]);
      const int j = index(tokens[1]);
      const int k = index(tokens[2]);
      const int l = index(tokens[3]);
      set.eri.set_symmetric(i, j, k, l, parse_real(tokens[4], lineno));
    } else {
      throw ParseError(lineno, "data outside of an H or ERI section");
    }
  }
  if (section == Section::header) throw ParseError(lineno, "missing header 'n Z q N_hint'");
  return set;
}

IntegralSet load_interchange(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open integral file " + path.string());
  return parse_interchange(in, path.string());
}

void write_interchange(const IntegralSet& set, std::ostream& out) {
  const int n = set.n();
  char buf[128];
  std::string prov = set.provenance;
  std::replace(prov.begin(), prov.end(), '\n', ' ');
  out << "# dmfkit integral interchange\n";
  out << "# provenance: " << prov << "\n";
  std::snprintf(buf, sizeof buf, "%d %.17g %d %d\n", n, set.Z, set.q, set.n_hint);
  out << buf << "H\n";
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      if (set.h(i, j) == 0.0) continue;
      std::snprintf(buf, sizeof buf, "%d %d %.16e\n", i + 1, j + 1, set.h(i, j));
      out << buf;
    }
  out << "ERI\n";
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = i; k < n; ++k)
        for (int l = k; l < n; ++l) {
          if (k == i && l < j) continue;
          const double v = set.eri(i, j, k, l);
          if (v == 0.0) continue;
          std::snprintf(buf, sizeof buf, "%d %d %d %d %.16e\n", i + 1, j + 1, k + 1, l + 1, v);
          out << buf;
        }
}

void save_interchange(const IntegralSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write integral file " + path.string());
  write_interchange(set, out);
  out.flush();
  if (!out) throw std::runtime_error("I/O error while writing " + path.string());
}

}  // namespace dmfkit
