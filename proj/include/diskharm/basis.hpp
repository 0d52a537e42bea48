#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

namespace dh {

enum class BoundaryCondition { Neumann, Dirichlet };

std::string to_string(BoundaryCondition bc);
/// Accepts "neumann" or "dirichlet" (case-insensitive).
BoundaryCondition parse_boundary_condition(const std::string& name);

/// First `count` admissible roots of J'_m (Neumann) or J_m (Dirichlet) in
/// ascending order. For (m = 0, Neumann) the list starts with the constant
/// mode root 0.
std::vector<double> find_eigenvalues(int m, int count, BoundaryCondition bc);

/// Factor N such that N J_m(l rho) e^{i m phi} has unit L2 norm on the disk.
double normalization(int m, double l, BoundaryCondition bc);

/// Eigenvalues l(m)_k and normalizations N_m^k for 0 <= m <= k <= k_max.
class EigenTable {
 public:
  EigenTable(int k_max, BoundaryCondition bc);

  [[nodiscard]] int k_max() const { return k_max_; }
  [[nodiscard]] BoundaryCondition bc() const { return bc_; }
  /// Zero when m > k.
  [[nodiscard]] double l(int m, int k) const;
  [[nodiscard]] double N(int m, int k) const;

 private:
  void check(int m, int k) const;

  int k_max_;
  BoundaryCondition bc_;
  std::vector<std::vector<double>> l_;  // l_[m][k - m]
  std::vector<std::vector<double>> n_;
};

/// D_m^k(rho, phi) = N_m^k J_m(l(m)_k rho) e^{i m phi}; negative m through
/// D_{-m}^k = (-1)^m conj(D_m^k).
std::complex<double> eval_basis(const EigenTable& table, int k, int m, double rho, double phi);

struct Wavelengths {
  double radial = 0.0;
  double angular = 0.0;
};

/// Radial and angular wavelengths of degree k on a cap of half-axes (a, b, c).
Wavelengths wavelengths(int k, double a, double b, double c);

/// CSV `m,k,l,N` with 15 significant digits.
void write_eigen_table_csv(const EigenTable& table, std::ostream& out);

}  // namespace dh
