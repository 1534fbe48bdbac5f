#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace dmfkit {

// Single-center even-tempered s-type Gaussian basis: exponents alpha0 * beta^i.
struct BasisSpec {
  int count = 10;
  double alpha0 = 0.05;
  double beta = 2.2;
  double Z = 1.0;
  int q = 1;  // spin states per particle

  std::vector<double> exponents() const;
  void validate() const;  // throws std::invalid_argument
  std::string tag() const;
};

// Parses "even:count,alpha0,beta". Z and q are left at their defaults.
BasisSpec parse_basis(const std::string& text);

// Default even-tempered basis of the given size spanning [0.05, ~60] bohr^-2.
BasisSpec builtin_basis(int count, double Z, int q);

class BasisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

// Dense (ij|kl) tensor in chemists' notation, row-major over (i,j,k,l).
class EriTensor {
 public:
  EriTensor() = default;
  explicit EriTensor(int n) : n_(n), data_(static_cast<std::size_t>(n) * n * n * n, 0.0) {}

  int n() const { return n_; }
  double operator()(int i, int j, int k, int l) const { return data_[index(i, j, k, l)]; }
  double& operator()(int i, int j, int k, int l) { return data_[index(i, j, k, l)]; }

  // Writes v into all eight symmetry images of (ij|kl).
  void set_symmetric(int i, int j, int k, int l, double v);

  // M_{(ij),(kl)} = (ij|kl) as an n^2 x n^2 matrix.
  Eigen::MatrixXd pair_matrix() const;

  // Largest deviation from 8-fold permutational symmetry.
  double symmetry_error() const;

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  std::size_t index(int i, int j, int k, int l) const {
    return ((static_cast<std::size_t>(i) * n_ + j) * n_ + k) * n_ + l;
  }

  int n_ = 0;
  std::vector<double> data_;
};

// One- and two-electron integrals in an orthonormal basis (Hartree units).
struct IntegralSet {
  IntegralSet() = default;
  IntegralSet(int n, double Z, int q);

  int n() const { return static_cast<int>(h.rows()); }
  double min_pair_eigenvalue() const;
  double h_symmetry_error() const;
  IntegralSet without_interaction() const;

  Eigen::MatrixXd h;  // 1/2 p^2 - Z/|x|
  EriTensor eri;
  double Z = 0.0;
  int q = 1;
  int n_hint = 0;  // electron count recorded in interchange headers
  std::string provenance;
};

// Closed-form integrals between normalized concentric s-Gaussians
// g_a(r) = (2a/pi)^{3/4} exp(-a r^2).
namespace gaussian {
double overlap(double a, double b);
double kinetic(double a, double b);
double inverse_r(double a, double b);  // <a|1/r|b>
double repulsion(double a, double b, double c, double d);  // (ab|cd)
}  // namespace gaussian

inline constexpr double kMaxOverlapCondition = 1e10;

// Builds h and (ij|kl) in the symmetrically orthonormalized basis.
// Throws BasisError when the overlap condition number exceeds kMaxOverlapCondition.
IntegralSet build_even_tempered(const BasisSpec& spec);

IntegralSet load_interchange(const std::filesystem::path& path);
IntegralSet parse_interchange(std::istream& in, const std::string& provenance);
void save_interchange(const IntegralSet& set, const std::filesystem::path& path);
void write_interchange(const IntegralSet& set, std::ostream& out);

}  // namespace dmfkit
