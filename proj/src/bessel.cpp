#include "diskharm/bessel.hpp"

#include <cmath>
#include <stdexcept>

namespace dh {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInvSqrt2 = 0.70710678118654752440;

double power_series(int m, double x) {
  const double h = 0.5 * x;
  double lead = 1.0;
  for (int i = 1; i <= m; ++i) lead *= h / i;
  const double q = -h * h;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * (m + k));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return lead * sum;
}

// Hankel asymptotic expansion, valid for x >> m^2.
double hankel(int m, double x) {
  const double mu = 4.0 * m * m;
  double p = 1.0;
  double q = 0.0;
  double term = 1.0;
  double prev = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) / (8.0 * k * x);
    if (std::abs(term) > std::abs(prev) || term == 0.0) break;
    switch (k % 4) {
      case 1: q += term; break;
      case 2: p -= term; break;
      case 3: q -= term; break;
      default: p += term; break;
    }
    if (std::abs(term) < 1e-17 * (std::abs(p) + std::abs(q))) break;
    prev = term;
  }
  // chi = x - (2m + 1) pi / 4; expand cos/sin of the phase offset exactly.
  static constexpr double kCos[8] = {1, kInvSqrt2, 0, -kInvSqrt2, -1, -kInvSqrt2, 0, kInvSqrt2};
  static constexpr double kSin[8] = {0, kInvSqrt2, 1, kInvSqrt2, 0, -kInvSqrt2, -1, -kInvSqrt2};
  const int octant = (2 * m + 1) % 8;
  const double c0 = kCos[octant];
  const double s0 = kSin[octant];
  const double cx = std::cos(x);
  const double sx = std::sin(x);
  const double cos_chi = cx * c0 + sx * s0;
  const double sin_chi = sx * c0 - cx * s0;
  return std::sqrt(2.0 / (kPi * x)) * (p * cos_chi - q * sin_chi);
}

// Miller backward recurrence normalized by J_0 + 2 sum J_2k = 1.
double miller(int m, double x) {
  const double top = std::max(static_cast<double>(m), x);
  int n_start = static_cast<int>(top + 30.0 + 10.0 * std::cbrt(top));
  n_start += n_start % 2;
  constexpr double kBig = 1e250;
  constexpr double kSmall = 1e-250;
  const double two_over_x = 2.0 / x;
  double above = 0.0;
  double cur = 1.0;
  double result = n_start == m ? cur : 0.0;
  double sum = 2.0 * cur;
  for (int n = n_start; n > 0; --n) {
    const double below = n * two_over_x * cur - above;
    above = cur;
    cur = below;
    if (std::abs(cur) > kBig) {
      cur *= kSmall;
      above *= kSmall;
      result *= kSmall;
      sum *= kSmall;
    }
    const int idx = n - 1;
    if (idx == m) result = cur;
    if (idx % 2 == 0) sum += idx == 0 ? cur : 2.0 * cur;
  }
  return result / sum;
}

double forward(int m, double x) {
  double prev = hankel(0, x);
  double cur = hankel(1, x);
  if (m == 0) return prev;
  const double two_over_x = 2.0 / x;
  for (int n = 1; n < m; ++n) {
    const double next = n * two_over_x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace

double bessel_j(int m, double x) {
  if (m < 0) throw std::invalid_argument("bessel_j: negative order");
  if (x < 0.0) return (m % 2 == 0 ? 1.0 : -1.0) * bessel_j(m, -x);
  if (x == 0.0) return m == 0 ? 1.0 : 0.0;
  if (0.25 * x * x < m + 1.0) return power_series(m, x);
  if (x <= 25.0) return miller(m, x);
  if (x > 0.5 * m * m) return hankel(m, x);
  if (m < x) return forward(m, x);
  return miller(m, x);
}

double bessel_j_prime(int m, double x) {
  if (m < 0) throw std::invalid_argument("bessel_j_prime: negative order");
  if (m == 0) return -bessel_j(1, x);
  return 0.5 * (bessel_j(m - 1, x) - bessel_j(m + 1, x));
}

}  // namespace dh
