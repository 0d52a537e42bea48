#include "diskharm/basis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "diskharm/bessel.hpp"
#include "diskharm/error.hpp"

namespace dh {

namespace {

constexpr double kPi = 3.14159265358979323846;

double boundary_function(int m, double x, BoundaryCondition bc) {
  return bc == BoundaryCondition::Neumann ? bessel_j_prime(m, x) : bessel_j(m, x);
}

// Muller iteration safeguarded by the sign-change bracket [lo, hi].
double refine_root(int m, double lo, double hi, BoundaryCondition bc) {
  auto f = [&](double x) { return boundary_function(m, x, bc); };
  double flo = f(lo);
  double x0 = lo;
  double x1 = hi;
  double x2 = 0.5 * (lo + hi);
  double f0 = flo;
  double f1 = f(hi);
  double f2 = f(x2);
  double best = std::abs(f0) < std::abs(f1) ? x0 : x1;
  double fbest = std::min(std::abs(f0), std::abs(f1));
  const double a0 = lo;
  const double b0 = hi;
  double width = hi - lo;
  bool force_bisect = false;

  for (int iter = 0; iter < 100; ++iter) {
    if (std::abs(f2) < fbest) {
      fbest = std::abs(f2);
      best = x2;
    }
    if (fbest < 1e-13) return best;
    if ((f2 < 0) == (flo < 0)) {
      lo = x2;
      flo = f2;
    } else {
      hi = x2;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return best;

    double x3 = 0.5 * (lo + hi);
    if (!force_bisect) {
      const double h1 = x1 - x0;
      const double h2 = x2 - x1;
      if (h1 != 0.0 && h2 != 0.0 && h1 + h2 != 0.0) {
        const double d1 = (f1 - f0) / h1;
        const double d2 = (f2 - f1) / h2;
        const double a = (d2 - d1) / (h2 + h1);
        const double b = a * h2 + d2;
        const double disc = b * b - 4.0 * a * f2;
        if (disc >= 0.0) {
          const double sq = std::sqrt(disc);
          const double den = std::abs(b + sq) > std::abs(b - sq) ? b + sq : b - sq;
          if (den != 0.0) {
            const double cand = x2 - 2.0 * f2 / den;
            if (cand > lo && cand < hi) x3 = cand;
          }
        }
      }
    }
    const double new_width = hi - lo;
    force_bisect = !force_bisect && new_width > 0.5 * width;
    width = new_width;

    x0 = x1;
    f0 = f1;
    x1 = x2;
    f1 = f2;
    x2 = x3;
    f2 = f(x3);
  }
  if (fbest < 1e-12) return best;
  std::ostringstream msg;
  msg.precision(17);
  msg << "root refinement did not converge for m = " << m << " on bracket [" << a0 << ", " << b0 << "]";
  throw NumericError(msg.str());
}

}  // namespace

std::string to_string(BoundaryCondition bc) {
  return bc == BoundaryCondition::Neumann ? "neumann" : "dirichlet";
}

BoundaryCondition parse_boundary_condition(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "neumann") return BoundaryCondition::Neumann;
  if (s == "dirichlet") return BoundaryCondition::Dirichlet;
  throw std::invalid_argument("unknown boundary condition '" + name + "'");
}

std::vector<double> find_eigenvalues(int m, int count, BoundaryCondition bc) {
  if (m < 0) throw std::invalid_argument("find_eigenvalues: negative order");
  if (count < 1) throw std::invalid_argument("find_eigenvalues: count must be >= 1");
  std::vector<double> roots;
  roots.reserve(count);
  if (m == 0 && bc == BoundaryCondition::Neumann) roots.push_back(0.0);

  // All positive roots of J_m and J'_m (m >= 1) exceed m.
  constexpr double kStep = kPi / 8.0;
  double x = std::max(static_cast<double>(m), 0.5);
  double fx = boundary_function(m, x, bc);
  while (static_cast<int>(roots.size()) < count) {
    const double xn = x + kStep;
    const double fn = boundary_function(m, xn, bc);
    if (fn == 0.0) {
      roots.push_back(xn);
    } else if ((fx < 0) != (fn < 0) && fx != 0.0) {
      roots.push_back(refine_root(m, x, xn, bc));
    }
    x = xn;
    fx = fn;
  }

  // Consecutive roots of J'_m bracket an extremum sign flip of J_m and vice
  // versa; a skipped root would break the alternation.
  const std::size_t first = (m == 0 && bc == BoundaryCondition::Neumann) ? 1 : 0;
  for (std::size_t i = first + 1; i < roots.size(); ++i) {
    const double a = bc == BoundaryCondition::Neumann ? bessel_j(m, roots[i - 1]) : bessel_j_prime(m, roots[i - 1]);
    const double b = bc == BoundaryCondition::Neumann ? bessel_j(m, roots[i]) : bessel_j_prime(m, roots[i]);
    if ((a < 0) == (b < 0)) {
      throw NumericError("eigenvalue scan missed a root for m = " + std::to_string(m) + " near " +
                         std::to_string(roots[i]));
    }
  }
  if (roots.size() > first + 1) {
    const double span = roots.back() - roots[first];
    if (static_cast<double>(roots.size() - first - 1) > span / kPi + 1.0) {
      throw NumericError("eigenvalue scan found more roots than the asymptotic density allows for m = " +
                         std::to_string(m));
    }
  }
  return roots;
}

double normalization(int m, double l, BoundaryCondition bc) {
  if (l == 0.0) {
    if (m == 0 && bc == BoundaryCondition::Neumann) return 1.0 / std::sqrt(kPi);
    throw NumericError("normalization: l = 0 gives a degenerate basis for m = " + std::to_string(m));
  }
  if (bc == BoundaryCondition::Neumann) {
    return 1.0 / (bessel_j(m, l) * std::sqrt(kPi * (1.0 - static_cast<double>(m) * m / (l * l))));
  }
  return 1.0 / (bessel_j_prime(m, l) * std::sqrt(kPi));
}

EigenTable::EigenTable(int k_max, BoundaryCondition bc) : k_max_(k_max), bc_(bc) {
  if (k_max < 0) throw std::invalid_argument("EigenTable: k_max must be >= 0");
  l_.resize(k_max + 1);
  n_.resize(k_max + 1);
  for (int m = 0; m <= k_max; ++m) {
    l_[m] = find_eigenvalues(m, k_max - m + 1, bc);
    n_[m].resize(l_[m].size());
    for (std::size_t i = 0; i < l_[m].size(); ++i) n_[m][i] = normalization(m, l_[m][i], bc);
  }
}

void EigenTable::check(int m, int k) const {
  if (m < 0 || k < 0 || k > k_max_) {
    throw std::out_of_range("EigenTable: (m, k) = (" + std::to_string(m) + ", " + std::to_string(k) +
                            ") outside table with k_max = " + std::to_string(k_max_));
  }
}

double EigenTable::l(int m, int k) const {
  check(m, k);
  return m > k ? 0.0 : l_[m][k - m];
}

double EigenTable::N(int m, int k) const {
  check(m, k);
  return m > k ? 0.0 : n_[m][k - m];
}

std::complex<double> eval_basis(const EigenTable& table, int k, int m, double rho, double phi) {
  const int am = std::abs(m);
  if (k < 0 || k > table.k_max() || am > k) {
    throw std::out_of_range("eval_basis: (k, m) = (" + std::to_string(k) + ", " + std::to_string(m) +
                            ") out of range");
  }
  const double radial = table.N(am, k) * bessel_j(am, table.l(am, k) * rho);
  const std::complex<double> d(radial * std::cos(am * phi), radial * std::sin(am * phi));
  if (m >= 0) return d;
  return (am % 2 == 0 ? 1.0 : -1.0) * std::conj(d);
}

Wavelengths wavelengths(int k, double a, double b, double c) {
  if (k <= 0) throw std::invalid_argument("wavelengths: undefined for k = 0");
  Wavelengths w;
  w.radial = 2.0 * std::sqrt(a * a + b * b + c * c) / (k - 0.25);
  w.angular = 2.0 * kPi / k * std::sqrt(0.5 * (a * a + b * b));
  return w;
}

void write_eigen_table_csv(const EigenTable& table, std::ostream& out) {
  out << "m,k,l,N\n";
  char buf[128];
  for (int m = 0; m <= table.k_max(); ++m) {
    for (int k = m; k <= table.k_max(); ++k) {
      std::snprintf(buf, sizeof(buf), "%d,%d,%.15g,%.15g\n", m, k, table.l(m, k), table.N(m, k));
      out << buf;
    }
  }
}

}  // namespace dh
