#pragma once

namespace dh {

/// Bessel function of the first kind J_m(x) for integer order m >= 0.
/// Negative x is handled by parity.
double bessel_j(int m, double x);

/// dJ_m/dx, from J'_0 = -J_1 and J'_m = (J_{m-1} - J_{m+1}) / 2.
double bessel_j_prime(int m, double x);

}  // namespace dh
