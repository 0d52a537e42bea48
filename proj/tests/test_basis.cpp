#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/bessel_prime.hpp>

#include "diskharm/basis.hpp"
#include "diskharm/bessel.hpp"
#include "diskharm/error.hpp"

using namespace dh;

namespace {

struct Ref {
  int m;
  double x;
  double j;
  double jp;
};

// 30-digit reference values.
const Ref kRefs[] = {
    {0, 0.001, 0.999999750000015625, -0.00049999993750000261457},
    {0, 2.5, -0.048383776468197996327, -0.49709410246427403801},
    {1, 3.8317, 2.4045590431036320809e-6, -0.40276002323903539801},
    {2, 10.0, 0.25463031368512062253, -0.0074533165681626878366},
    {5, 0.5, 8.053627241357474086e-6, 0.00008020020395071285598},
    {10, 30.0, -0.12987689399858876819, -0.068351103137354133064},
    {30, 25.0, 0.0118090261242690162, 0.0082819626485637302855},
    {45, 80.0, -0.088811575674357941093, -0.033641616444083089165},
    {70, 60.0, 0.0014363860523361676319, 0.00089299317213665596585},
    {3, 500.0, -0.010199473891695384945, 0.034203644177963659746},
    {0, 1234.5, -0.013550379618035721909, -0.01821750833739249827},
    {90, 95.0, 0.13784347714433119049, -0.01756727474595652823},
    {1, 7000.0, -0.002394259804463548306, 0.0092312706901732448403},
    {60, 20.0, 2.2809263887335596395e-23, 6.4584197695818231085e-23},
};

double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Roots of f on (from, to) by a fine sign scan and bisection.
std::vector<double> scan_roots(const std::function<double(double)>& f, double from, double to, int count) {
  std::vector<double> roots;
  const double step = 1e-2;
  double a = from;
  double fa = f(a);
  while (a < to && static_cast<int>(roots.size()) < count) {
    const double b = a + step;
    const double fb = f(b);
    if ((fa < 0) != (fb < 0)) roots.push_back(bisect(f, a, b));
    a = b;
    fa = fb;
  }
  return roots;
}

double boost_jp(int m, double x) { return boost::math::cyl_bessel_j_prime(m, x); }

double quadrature_norm(int m, double l, double n) {
  auto integrand = [&](double r) {
    const double v = n * boost::math::cyl_bessel_j(m, l * r);
    return v * v * r;
  };
  return 2.0 * M_PI * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, 1.0, 15, 1e-14);
}

}  // namespace

TEST_CASE("bessel values against high-precision references") {
  for (const Ref& r : kRefs) {
    CAPTURE(r.m);
    CAPTURE(r.x);
    const double scale = std::max(std::abs(r.j), 1e-300);
    if (std::abs(r.j) < 1e-10) {
      CHECK(std::abs(bessel_j(r.m, r.x) - r.j) <= 1e-10 * scale);
      CHECK(std::abs(bessel_j_prime(r.m, r.x) - r.jp) <= 1e-10 * std::abs(r.jp));
    } else {
      CHECK(std::abs(bessel_j(r.m, r.x) - r.j) <= 2e-13);
      CHECK(std::abs(bessel_j_prime(r.m, r.x) - r.jp) <= 2e-13);
    }
  }
}

TEST_CASE("bessel trivial values") {
  CHECK(bessel_j(0, 0.0) == 1.0);
  CHECK(bessel_j(1, 0.0) == 0.0);
  CHECK(bessel_j_prime(0, 0.0) == 0.0);
  CHECK(bessel_j_prime(1, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(bessel_j(3, -2.0) == doctest::Approx(-bessel_j(3, 2.0)).epsilon(1e-15));
  CHECK(bessel_j(4, -2.0) == doctest::Approx(bessel_j(4, 2.0)).epsilon(1e-15));
}

TEST_CASE("bessel zeros by bisection") {
  const double j01 = bisect([](double x) { return bessel_j(0, x); }, 2.0, 3.0);
  CHECK(std::abs(j01 - 2.404825557695773) < 1e-12);
  CHECK(std::abs(bessel_j(0, 2.404825557695773)) < 1e-12);
  const double j11 = bisect([](double x) { return boost::math::cyl_bessel_j(1, x); }, 3.0, 4.5);
  CHECK(std::abs(bessel_j_prime(0, j11)) < 1e-10);
  CHECK(std::abs(bessel_j_prime(0, 3.8317059702)) < 1e-10);
}

TEST_CASE("bessel agrees with an independent implementation over a random sweep") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> logx(-3.0, 3.5);
  std::uniform_int_distribution<int> order(0, 90);
  double worst = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const int m = order(rng);
    const double x = std::pow(10.0, logx(rng));
    const double ref = boost::math::cyl_bessel_j(m, x);
    const double err = std::abs(bessel_j(m, x) - ref) / std::max(1.0, std::abs(ref)) ;
    worst = std::max(worst, err);
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("first eigenvalues match a bracketing oracle") {
  const auto n0 = find_eigenvalues(0, 3, BoundaryCondition::Neumann);
  REQUIRE(n0.size() == 3);
  CHECK(n0[0] == 0.0);
  const double oracle0 = scan_roots([](double x) { return boost_jp(0, x); }, 0.5, 10.0, 1).at(0);
  CHECK(std::abs(n0[1] - oracle0) < 1e-9);
  CHECK(std::abs(n0[1] - 3.8317059702) < 1e-9);

  const auto n1 = find_eigenvalues(1, 1, BoundaryCondition::Neumann);
  const double oracle1 = scan_roots([](double x) { return boost_jp(1, x); }, 0.5, 10.0, 1).at(0);
  CHECK(std::abs(n1.at(0) - oracle1) < 1e-9);
  CHECK(std::abs(n1.at(0) - 1.8411837813) < 1e-9);
}

TEST_CASE("neumann roots over many orders match the scan oracle") {
  for (int m : {0, 1, 2, 5, 12, 25}) {
    const int count = 25;
    const auto roots = find_eigenvalues(m, count, BoundaryCondition::Neumann);
    const auto oracle = scan_roots([m](double x) { return boost_jp(m, x); }, std::max(0.5, m * 0.9), 200.0,
                                   m == 0 ? count - 1 : count);
    const std::size_t offset = m == 0 ? 1 : 0;
    REQUIRE(oracle.size() + offset == roots.size());
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      CAPTURE(m);
      CAPTURE(i);
      CHECK(std::abs(roots[i + offset] - oracle[i]) < 1e-9);
    }
  }
}

TEST_CASE("dirichlet roots match tabulated bessel zeros") {
  for (int m : {0, 1, 3, 10, 40}) {
    const auto roots = find_eigenvalues(m, 30, BoundaryCondition::Dirichlet);
    for (int s = 1; s <= 30; ++s) {
      CAPTURE(m);
      CAPTURE(s);
      CHECK(std::abs(roots[s - 1] - boost::math::cyl_bessel_j_zero(static_cast<double>(m), s)) < 1e-9);
    }
  }
}

TEST_CASE("neumann m = 0 roots approach k pi + pi / 4") {
  const auto roots = find_eigenvalues(0, 80, BoundaryCondition::Neumann);
  double prev = 1e9;
  for (int k = 10; k < 80; ++k) {
    const double d = std::abs(roots[k] - (k * M_PI + M_PI / 4.0));
    CHECK(d < prev);
    prev = d;
  }
  CHECK(prev < 2e-3);
}

TEST_CASE("eigenvalue spacing tends to pi") {
  EigenTable table(70, BoundaryCondition::Neumann);
  for (int m = 0; m <= 8; ++m) {
    for (int k = std::max(20, m + 1); k <= 70; ++k) {
      CAPTURE(m);
      CAPTURE(k);
      CHECK(std::abs(table.l(m, k) - table.l(m, k - 1) - M_PI) < 0.05);
    }
  }
}

TEST_CASE("normalization constants integrate to one") {
  CHECK(normalization(0, 0.0, BoundaryCondition::Neumann) == doctest::Approx(1.0 / std::sqrt(M_PI)).epsilon(1e-15));
  CHECK(std::abs(normalization(0, 0.0, BoundaryCondition::Neumann) - 0.56418958) < 1e-8);
  const double l0 = find_eigenvalues(0, 2, BoundaryCondition::Neumann)[1];
  CHECK(std::abs(quadrature_norm(0, l0, normalization(0, l0, BoundaryCondition::Neumann)) - 1.0) < 1e-10);
  const double l2 = find_eigenvalues(2, 1, BoundaryCondition::Neumann)[0];
  CHECK(std::abs(quadrature_norm(2, l2, normalization(2, l2, BoundaryCondition::Neumann)) - 1.0) < 1e-10);
  for (int m : {0, 3, 17}) {
    const auto ls = find_eigenvalues(m, 6, BoundaryCondition::Dirichlet);
    for (double l : ls) {
      CHECK(std::abs(quadrature_norm(m, l, normalization(m, l, BoundaryCondition::Dirichlet)) - 1.0) < 1e-10);
    }
  }
  CHECK_THROWS_AS(normalization(2, 0.0, BoundaryCondition::Neumann), NumericError);
  CHECK_THROWS_AS(normalization(0, 0.0, BoundaryCondition::Dirichlet), NumericError);
}

TEST_CASE("eigen table layout") {
  EigenTable table(10, BoundaryCondition::Neumann);
  CHECK(table.l(0, 0) == 0.0);
  CHECK(table.l(3, 2) == 0.0);
  CHECK(table.N(3, 2) == 0.0);
  CHECK(std::abs(table.l(1, 1) - 1.8411837813) < 1e-9);
  CHECK(std::abs(table.l(0, 1) - 3.8317059702) < 1e-9);
  CHECK_THROWS_AS(static_cast<void>(table.l(0, 11)), std::out_of_range);
  CHECK_THROWS_AS(static_cast<void>(table.l(-1, 3)), std::out_of_range);
  for (int m = 0; m <= 10; ++m) {
    for (int k = m + 1; k <= 10; ++k) CHECK(table.l(m, k) > table.l(m, k - 1));
  }

  std::ostringstream csv;
  write_eigen_table_csv(table, csv);
  CHECK(csv.str().rfind("m,k,l,N\n", 0) == 0);
}

TEST_CASE("basis evaluation identities") {
  EigenTable table(12, BoundaryCondition::Neumann);
  CHECK(eval_basis(table, 0, 0, 0.3, 1.1).real() == doctest::Approx(1.0 / std::sqrt(M_PI)).epsilon(1e-14));
  CHECK(eval_basis(table, 0, 0, 0.9, 4.0).imag() == 0.0);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const int k = static_cast<int>(u(rng) * 12.999);
    const int m = static_cast<int>(u(rng) * (k + 0.999));
    const double rho = u(rng);
    const double phi = 2.0 * M_PI * u(rng);
    const auto pos = eval_basis(table, k, m, rho, phi);
    const auto neg = eval_basis(table, k, -m, rho, phi);
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    CHECK(std::abs(neg - sign * std::conj(pos)) < 1e-15);
  }
}

TEST_CASE("basis is orthonormal on a tensor quadrature grid") {
  const int kmax = 6;
  const int nr = 512;
  const int nphi = 512;
  EigenTable table(kmax, BoundaryCondition::Neumann);
  // Midpoint rule in rho and phi; the separable sums equal the full grid sum.
  std::vector<std::vector<double>> radial((kmax + 1) * (kmax + 1));
  for (int k = 0; k <= kmax; ++k) {
    for (int m = 0; m <= k; ++m) {
      auto& r = radial[k * (kmax + 1) + m];
      r.resize(nr);
      for (int i = 0; i < nr; ++i) {
        const double rho = (i + 0.5) / nr;
        r[i] = table.N(m, k) * bessel_j(m, table.l(m, k) * rho);
      }
    }
  }
  double worst = 0.0;
  for (int k = 0; k <= kmax; ++k) {
    for (int m = -k; m <= k; ++m) {
      for (int k2 = 0; k2 <= kmax; ++k2) {
        for (int m2 = -k2; m2 <= k2; ++m2) {
          std::complex<double> ang = 0.0;
          for (int j = 0; j < nphi; ++j) {
            const double phi = 2.0 * M_PI * (j + 0.5) / nphi;
            ang += std::polar(1.0, (m - m2) * phi);
          }
          ang *= 2.0 * M_PI / nphi;
          const auto& r1 = radial[k * (kmax + 1) + std::abs(m)];
          const auto& r2 = radial[k2 * (kmax + 1) + std::abs(m2)];
          double rad = 0.0;
          for (int i = 0; i < nr; ++i) rad += r1[i] * r2[i] * (i + 0.5) / nr;
          rad /= nr;
          const double sign = ((m < 0 && m % 2 != 0) != (m2 < 0 && m2 % 2 != 0)) ? -1.0 : 1.0;
          const std::complex<double> g = sign * rad * ang;
          const double expect = (k == k2 && m == m2) ? 1.0 : 0.0;
          worst = std::max(worst, std::abs(g - expect));
        }
      }
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("wavelengths") {
  const auto w = wavelengths(1, 1.0, 0.0, 0.0);
  CHECK(w.radial == doctest::Approx(8.0 / 3.0).epsilon(1e-15));
  CHECK(w.angular == doctest::Approx(2.0 * M_PI * std::sqrt(0.5)).epsilon(1e-15));
  CHECK(wavelengths(10, 1.0, 2.0, 3.0).angular == doctest::Approx(2.0 * wavelengths(20, 1.0, 2.0, 3.0).angular));
  const double a = 601.77 / 2.0;
  const double b = 512.18 / 2.0;
  const double c = 176.97;
  const auto mw = wavelengths(50, a, b, c);
  CHECK(mw.radial == doctest::Approx(2.0 * std::sqrt(a * a + b * b + c * c) / 49.75).epsilon(1e-14));
  CHECK(mw.angular == doctest::Approx(2.0 * M_PI / 50.0 * std::sqrt((a * a + b * b) / 2.0)).epsilon(1e-14));
}

TEST_CASE("boundary condition names") {
  CHECK(parse_boundary_condition("Neumann") == BoundaryCondition::Neumann);
  CHECK(parse_boundary_condition("dirichlet") == BoundaryCondition::Dirichlet);
  CHECK(to_string(BoundaryCondition::Neumann) == "neumann");
  CHECK_THROWS_AS(parse_boundary_condition("robin"), std::invalid_argument);
}
