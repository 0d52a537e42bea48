#include "diskharm/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <json.hpp>

#include "diskharm/bessel.hpp"
#include "diskharm/error.hpp"

namespace dh {

namespace {

using Eigen::MatrixXd;

// Column layout of the real design matrix: order 0 first, then a cosine and a
// sine block of K - m + 1 columns for every order m >= 1.
struct Packing {
  explicit Packing(int k) : K(k), cos_off(k + 1), sin_off(k + 1, -1) {
    int off = 0;
    for (int m = 0; m <= k; ++m) {
      cos_off[m] = off;
      off += k - m + 1;
      if (m > 0) {
        sin_off[m] = off;
        off += k - m + 1;
      }
    }
    cols = off;
  }
  [[nodiscard]] int width(int m) const { return K - m + 1; }

  int K;
  std::vector<int> cos_off;
  std::vector<int> sin_off;
  int cols = 0;
};

// Vertices grouped by identical radius.
struct Rings {
  std::vector<double> radius;
  std::vector<int> begin;  // size radius.size() + 1, into order
  std::vector<int> order;
};

Rings group_rings(std::span<const Vec2> pts) {
  Rings r;
  std::vector<double> rho(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) rho[i] = pts[i].norm();
  r.order.resize(pts.size());
  std::iota(r.order.begin(), r.order.end(), 0);
  std::stable_sort(r.order.begin(), r.order.end(), [&](int a, int b) { return rho[a] < rho[b]; });
  for (std::size_t i = 0; i < r.order.size(); ++i) {
    const double x = rho[r.order[i]];
    if (r.radius.empty() || x != r.radius.back()) {
      r.radius.push_back(x);
      r.begin.push_back(static_cast<int>(i));
    }
  }
  r.begin.push_back(static_cast<int>(r.order.size()));
  return r;
}

// R[m](ring, k - m) = N_m^k J_m(l(m)_k rho_ring) for rings [r0, r1).
std::vector<MatrixXd> radial_block(const EigenTable& table, int K, const Rings& rings, std::size_t r0,
                                   std::size_t r1) {
  const auto nr = static_cast<Eigen::Index>(r1 - r0);
  std::vector<MatrixXd> out(K + 1);
  for (int m = 0; m <= K; ++m) {
    out[m].resize(nr, K - m + 1);
    for (int k = m; k <= K; ++k) {
      const double l = table.l(m, k);
      const double n = table.N(m, k);
      for (Eigen::Index r = 0; r < nr; ++r) out[m](r, k - m) = n * bessel_j(m, l * rings.radius[r0 + r]);
    }
  }
  return out;
}

std::complex<double> unit_phase(const Vec2& p) {
  const double r = p.norm();
  if (r == 0.0) return {1.0, 0.0};
  return {p.x() / r, p.y() / r};
}

// Real cosine/sine coefficients per order, one row per degree.
struct RealCoeffs {
  std::vector<MatrixXd> cosine;  // (K - m + 1) x 3
  std::vector<MatrixXd> sine;
};

RealCoeffs to_real(const HarmonicCoeffs& c, int K) {
  RealCoeffs rc;
  rc.cosine.resize(K + 1);
  rc.sine.resize(K + 1);
  for (int m = 0; m <= K; ++m) {
    rc.cosine[m].resize(K - m + 1, 3);
    rc.sine[m].setZero(K - m + 1, 3);
    for (int k = m; k <= K; ++k) {
      const CVec3& q = c.at(k, m);
      for (int a = 0; a < 3; ++a) {
        if (m == 0) {
          rc.cosine[m](k - m, a) = q[a].real();
        } else {
          rc.cosine[m](k - m, a) = 2.0 * q[a].real();
          rc.sine[m](k - m, a) = -2.0 * q[a].imag();
        }
      }
    }
  }
  return rc;
}

void from_real(const MatrixXd& x, const Packing& pk, HarmonicCoeffs& c) {
  for (int m = 0; m <= pk.K; ++m) {
    for (int k = m; k <= pk.K; ++k) {
      CVec3 q;
      for (int a = 0; a < 3; ++a) {
        const double alpha = x(pk.cos_off[m] + k - m, a);
        if (m == 0) {
          q[a] = {alpha, 0.0};
        } else {
          const double beta = x(pk.sin_off[m] + k - m, a);
          q[a] = {0.5 * alpha, -0.5 * beta};
        }
      }
      c.at(k, m) = q;
      if (m > 0) c.at(k, -m) = (m % 2 == 0 ? 1.0 : -1.0) * q.conjugate();
    }
  }
}

constexpr std::size_t kChunkRings = 1024;

void synthesize_into(const RealCoeffs& rc, int K, const EigenTable& table, std::span<const Vec2> pts,
                     std::vector<Vec3>& out) {
  const Rings rings = group_rings(pts);
  out.assign(pts.size(), Vec3::Zero());
  std::vector<std::complex<double>> trig(K + 1);
  for (std::size_t r0 = 0; r0 < rings.radius.size(); r0 += kChunkRings) {
    const std::size_t r1 = std::min(rings.radius.size(), r0 + kChunkRings);
    const auto R = radial_block(table, K, rings, r0, r1);
    std::vector<MatrixXd> gc(K + 1);
    std::vector<MatrixXd> gs(K + 1);
    for (int m = 0; m <= K; ++m) {
      gc[m] = R[m] * rc.cosine[m];
      if (m > 0) gs[m] = R[m] * rc.sine[m];
    }
    for (std::size_t r = r0; r < r1; ++r) {
      const auto lr = static_cast<Eigen::Index>(r - r0);
      for (int i = rings.begin[r]; i < rings.begin[r + 1]; ++i) {
        const int v = rings.order[i];
        const std::complex<double> e = unit_phase(pts[v]);
        std::complex<double> t = 1.0;
        Vec3 sum = gc[0].row(lr).transpose();
        for (int m = 1; m <= K; ++m) {
          t *= e;
          sum += t.real() * gc[m].row(lr).transpose() + t.imag() * gs[m].row(lr).transpose();
        }
        out[v] = sum;
      }
    }
  }
}

void check_table(const HarmonicCoeffs& c, const EigenTable& table) {
  if (table.bc() != c.bc) throw std::invalid_argument("eigen table boundary condition differs from coefficients");
  if (table.k_max() < c.k_max) throw std::invalid_argument("eigen table is smaller than the coefficient set");
}

MatrixXd solve_qr(std::span<const Vec3> values, std::span<const Vec2> pts, std::span<const double> w,
                  const EigenTable& table, const Packing& pk, double& condition) {
  const int K = pk.K;
  const auto n = static_cast<Eigen::Index>(pts.size());
  MatrixXd B(n, pk.cols);
  MatrixXd V(n, 3);
  const Rings rings = group_rings(pts);
  for (std::size_t r0 = 0; r0 < rings.radius.size(); r0 += kChunkRings) {
    const std::size_t r1 = std::min(rings.radius.size(), r0 + kChunkRings);
    const auto R = radial_block(table, K, rings, r0, r1);
    for (std::size_t r = r0; r < r1; ++r) {
      const auto lr = static_cast<Eigen::Index>(r - r0);
      for (int i = rings.begin[r]; i < rings.begin[r + 1]; ++i) {
        const int v = rings.order[i];
        const double sw = w.empty() ? 1.0 : std::sqrt(w[v]);
        const std::complex<double> e = unit_phase(pts[v]);
        std::complex<double> t = 1.0;
        for (int m = 0; m <= K; ++m) {
          if (m > 0) t *= e;
          for (int k = m; k <= K; ++k) {
            const double rad = sw * R[m](lr, k - m);
            B(v, pk.cos_off[m] + k - m) = rad * t.real();
            if (m > 0) B(v, pk.sin_off[m] + k - m) = rad * t.imag();
          }
        }
        V.row(v) = sw * values[v].transpose();
      }
    }
  }
  const Eigen::HouseholderQR<MatrixXd> qr(B);
  const Eigen::VectorXd diag = qr.matrixQR().diagonal().cwiseAbs();
  const double dmin = diag.minCoeff();
  condition = dmin > 0.0 ? diag.maxCoeff() / dmin : std::numeric_limits<double>::infinity();
  if (!std::isfinite(condition)) throw NumericError("least-squares design matrix is rank deficient");
  return qr.solve(V);
}

MatrixXd solve_normal(std::span<const Vec3> values, std::span<const Vec2> pts, std::span<const double> w,
                      const EigenTable& table, const Packing& pk, double& condition) {
  const int K = pk.K;
  const int J = 2 * K + 1;
  MatrixXd G = MatrixXd::Zero(pk.cols, pk.cols);
  MatrixXd rhs = MatrixXd::Zero(pk.cols, 3);
  const Rings rings = group_rings(pts);

  for (std::size_t r0 = 0; r0 < rings.radius.size(); r0 += kChunkRings) {
    const std::size_t r1 = std::min(rings.radius.size(), r0 + kChunkRings);
    const auto nr = static_cast<Eigen::Index>(r1 - r0);

    // Angular moments per ring: C(j) = sum w cos(j phi), S(j) = sum w sin(j phi),
    // and the weighted coordinate sums for the right-hand side.
    MatrixXd C = MatrixXd::Zero(nr, J);
    MatrixXd S = MatrixXd::Zero(nr, J);
    std::vector<MatrixXd> cv(K + 1, MatrixXd::Zero(nr, 3));
    std::vector<MatrixXd> sv(K + 1, MatrixXd::Zero(nr, 3));
    for (std::size_t r = r0; r < r1; ++r) {
      const auto lr = static_cast<Eigen::Index>(r - r0);
      for (int i = rings.begin[r]; i < rings.begin[r + 1]; ++i) {
        const int v = rings.order[i];
        const double wv = w.empty() ? 1.0 : w[v];
        const Eigen::RowVector3d val = wv * values[v].transpose();
        const std::complex<double> e = unit_phase(pts[v]);
        std::complex<double> t = 1.0;
        for (int j = 0; j < J; ++j) {
          C(lr, j) += wv * t.real();
          S(lr, j) += wv * t.imag();
          if (j <= K) {
            cv[j].row(lr) += t.real() * val;
            sv[j].row(lr) += t.imag() * val;
          }
          t *= e;
        }
      }
    }

    const auto R = radial_block(table, K, rings, r0, r1);
    for (int m = 0; m <= K; ++m) {
      const int nm = pk.width(m);
      rhs.block(pk.cos_off[m], 0, nm, 3).noalias() += R[m].transpose() * cv[m];
      if (m > 0) rhs.block(pk.sin_off[m], 0, nm, 3).noalias() += R[m].transpose() * sv[m];
      for (int m2 = m; m2 <= K; ++m2) {
        const int n2 = pk.width(m2);
        MatrixXd T(nr, 4 * n2);
        T.leftCols(n2) = C.col(m2 - m).asDiagonal() * R[m2];
        T.middleCols(n2, n2) = C.col(m + m2).asDiagonal() * R[m2];
        T.middleCols(2 * n2, n2) = S.col(m + m2).asDiagonal() * R[m2];
        T.rightCols(n2) = S.col(m2 - m).asDiagonal() * R[m2];
        const MatrixXd P = R[m].transpose() * T;
        const auto p1 = P.leftCols(n2);
        const auto p2 = P.middleCols(n2, n2);
        const auto p3 = P.middleCols(2 * n2, n2);
        const auto p4 = -P.rightCols(n2);  // S(m - m2) = -S(m2 - m)
        G.block(pk.cos_off[m], pk.cos_off[m2], nm, n2) += 0.5 * (p1 + p2);
        if (m > 0) G.block(pk.sin_off[m], pk.sin_off[m2], nm, n2) += 0.5 * (p1 - p2);
        if (m2 > 0) G.block(pk.cos_off[m], pk.sin_off[m2], nm, n2) += 0.5 * (p3 - p4);
        if (m > 0 && m2 > m) G.block(pk.sin_off[m], pk.cos_off[m2], nm, n2) += 0.5 * (p3 + p4);
      }
    }
  }

  const Eigen::LLT<MatrixXd, Eigen::Upper> llt(G);
  if (llt.info() != Eigen::Success) {
    throw NumericError("normal equations are not positive definite (too few or clustered vertices for k_max)");
  }
  const double rcond = llt.rcond();
  condition = rcond > 0.0 ? 1.0 / std::sqrt(rcond) : std::numeric_limits<double>::infinity();
  return llt.solve(rhs);
}

std::vector<double> dual_areas(const TriMesh& mesh, const DiskParam& param) {
  std::vector<double> w(param.size(), 0.0);
  for (const Face& f : mesh.faces) {
    const Vec2& a = param.uv[f[0]];
    const Vec2& b = param.uv[f[1]];
    const Vec2& c = param.uv[f[2]];
    const double area = 0.5 * std::abs((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
    for (int v : f) w[v] += area / 3.0;
  }
  const double mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
  for (double& x : w) x /= mean;
  return w;
}

double round15(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.15g", x);
  return std::strtod(buf, nullptr);
}

}  // namespace

HarmonicCoeffs make_coeffs(int k_max, BoundaryCondition bc) {
  if (k_max < 0) throw std::invalid_argument("k_max must be >= 0");
  HarmonicCoeffs c;
  c.k_max = k_max;
  c.bc = bc;
  c.q.assign(static_cast<std::size_t>((k_max + 1) * (k_max + 1)), CVec3::Zero());
  return c;
}

HarmonicCoeffs analyze_samples(std::span<const Vec3> values, std::span<const Vec2> disk_points,
                               std::span<const double> weights, const EigenTable& table, LsqSolver solver) {
  const int K = table.k_max();
  const std::size_t p = static_cast<std::size_t>((K + 1) * (K + 1));
  if (values.size() != disk_points.size()) throw std::invalid_argument("values and disk points differ in length");
  if (!weights.empty() && weights.size() != values.size()) throw std::invalid_argument("one weight per sample required");
  if (values.size() < p) {
    throw NumericError("underdetermined: " + std::to_string(values.size()) + " samples for " + std::to_string(p) +
                       " coefficients (k_max = " + std::to_string(K) + ")");
  }
  for (const Vec2& pt : disk_points) {
    if (!(pt.norm() <= 1.0 + 1e-9)) throw NumericError("disk point outside the unit disk");
  }

  const Packing pk(K);
  if (solver == LsqSolver::Auto) {
    const double n = static_cast<double>(values.size());
    const double cols = pk.cols;
    solver = n * cols * cols <= 1e10 ? LsqSolver::QR : LsqSolver::NormalEquations;
  }
  HarmonicCoeffs c = make_coeffs(K, table.bc());
  const MatrixXd x = solver == LsqSolver::QR ? solve_qr(values, disk_points, weights, table, pk, c.condition)
                                             : solve_normal(values, disk_points, weights, table, pk, c.condition);
  c.solver = solver == LsqSolver::QR ? "householder-qr" : "normal-equations";
  if (!x.allFinite()) throw NumericError("least-squares solution is not finite");
  from_real(x, pk, c);

  std::vector<Vec3> fit;
  synthesize_into(to_real(c, K), K, table, disk_points, fit);
  Vec3 sq = Vec3::Zero();
  for (std::size_t i = 0; i < fit.size(); ++i) sq += (fit[i] - values[i]).cwiseAbs2();
  c.residual = sq.cwiseSqrt();
  if (c.condition > 1e12) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "design matrix condition estimate %.3g exceeds 1e12", c.condition);
    c.warnings.emplace_back(buf);
  }
  return c;
}

HarmonicCoeffs analyze(const TriMesh& mesh, const DiskParam& param, const EigenTable& table,
                       const AnalyzeOptions& opts) {
  if (param.size() != mesh.vertices.size()) throw MeshError("parameterization size does not match the mesh");
  std::vector<double> w;
  if (opts.voronoi_weights) w = dual_areas(mesh, param);
  return analyze_samples(mesh.vertices, param.uv, w, table, opts.solver);
}

HarmonicCoeffs analyze(const TriMesh& mesh, const DiskParam& param, int k_max, BoundaryCondition bc,
                       const AnalyzeOptions& opts) {
  return analyze(mesh, param, EigenTable(k_max, bc), opts);
}

std::vector<Vec3> synthesize(const HarmonicCoeffs& coeffs, const EigenTable& table,
                             std::span<const Vec2> disk_points, int k_upto) {
  check_table(coeffs, table);
  if (k_upto < 0 || k_upto > coeffs.k_max) {
    throw std::invalid_argument("k_upto = " + std::to_string(k_upto) + " outside [0, " +
                                std::to_string(coeffs.k_max) + "]");
  }
  std::vector<Vec3> out;
  synthesize_into(to_real(coeffs, k_upto), k_upto, table, disk_points, out);
  return out;
}

TriMesh reconstruct(const HarmonicCoeffs& coeffs, const EigenTable& table, const DiskMesh& grid, int k_upto) {
  TriMesh out;
  out.vertices = synthesize(coeffs, table, grid.param.uv, k_upto);
  out.faces = grid.mesh.faces;
  return out;
}

HarmonicCoeffs rotate_coeffs(const HarmonicCoeffs& coeffs, const Eigen::Matrix3d& frame) {
  HarmonicCoeffs out = coeffs;
  const Eigen::Matrix3cd ft = frame.transpose().cast<std::complex<double>>();
  for (CVec3& q : out.q) q = ft * q;
  return out;
}

double FdecFit::kappa() const {
  const double half = 0.5 * (a + b);
  const double d = half * half + c * c;
  return d > 0.0 ? 4.0 * c * c / (d * d) : 0.0;
}

Eigen::Matrix3d FdecFit::frame() const {
  Eigen::Matrix3d f;
  f.col(0) = v_a;
  f.col(1) = v_b;
  f.col(2) = v_a.cross(v_b);
  return f;
}

std::string to_string(FdecMethod method) { return method == FdecMethod::Eigenproblem ? "eigenproblem" : "obb"; }

FdecFit fdec_fit(const HarmonicCoeffs& coeffs, const EigenTable& table, FdecMethod method, int k,
                 double edge_length) {
  check_table(coeffs, table);
  if (coeffs.k_max < 1) throw NumericError("degenerate FDEC: no first-degree coefficients");
  const CVec3& q1 = coeffs.at(1, 1);
  const CVec3& q0 = coeffs.at(1, 0);
  if (q1.norm() == 0.0 && q0.norm() == 0.0) throw NumericError("degenerate FDEC: first-degree coefficients are zero");

  FdecFit fit;
  fit.method = method;
  if (method == FdecMethod::Eigenproblem) {
    fit.k = 1;
    Eigen::Matrix<double, 2, 3> A;
    const double s = -table.N(1, 1) * table.l(1, 1);
    A.row(0) = s * q1.real().transpose();
    A.row(1) = s * q1.imag().transpose();
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(A * A.transpose());
    const Eigen::Vector2d ev = eig.eigenvalues().cwiseAbs();  // ascending
    if (ev[1] == 0.0) throw NumericError("degenerate FDEC: in-plane axes vanish");
    fit.a = std::sqrt(ev[1]);
    fit.b = std::sqrt(ev[0]);
    fit.v_a = (A.transpose() * eig.eigenvectors().col(1)).normalized();
    Vec3 vb = A.transpose() * eig.eigenvectors().col(0);
    vb -= vb.dot(fit.v_a) * fit.v_a;
    fit.v_b = vb.norm() > 0.0 ? vb.normalized() : fit.v_a.unitOrthogonal();
    const double l0 = table.l(0, 1);
    fit.c = 2.0 * std::abs(table.N(0, 1)) * l0 * l0 * q0.norm();
    return fit;
  }
  if (k < 1 || k > coeffs.k_max) throw std::invalid_argument("fdec_fit: reconstruction degree out of range");
  fit.k = k;
  const DiskMesh grid = uniform_disk_mesh(edge_length);
  const std::vector<Vec3> pts = synthesize(coeffs, table, grid.param.uv, k);
  const ObbFit obb = obb_fit(pts);
  fit.a = obb.half_lengths[0];
  fit.b = obb.half_lengths[1];
  fit.c = 2.0 * obb.half_lengths[2];
  fit.v_a = obb.rotation.col(0);
  fit.v_b = obb.rotation.col(1);
  return fit;
}

Descriptors descriptors(const HarmonicCoeffs& coeffs, const EigenTable& table) {
  Descriptors d;
  const int K = coeffs.k_max;
  auto amplitudes = [K](const HarmonicCoeffs& c) {
    std::vector<Vec3> amp(K + 1, Vec3::Zero());
    for (int k = 0; k <= K; ++k) {
      for (int m = -k; m <= k; ++m) amp[k] += c.at(k, m).cwiseAbs2();
      amp[k] = amp[k].cwiseSqrt();
    }
    return amp;
  };
  d.per_axis = amplitudes(coeffs);
  d.resultant.resize(K + 1);
  for (int k = 0; k <= K; ++k) d.resultant[k] = d.per_axis[k].norm();
  d.normalized.assign(K + 1, std::numeric_limits<double>::quiet_NaN());
  if (K < 1) return d;

  try {
    d.frame = fdec_fit(coeffs, table, FdecMethod::Eigenproblem).frame();
  } catch (const NumericError& e) {
    d.warnings.emplace_back(std::string(e.what()) + "; normalizing along world axes");
  }
  const std::vector<Vec3> amp = amplitudes(rotate_coeffs(coeffs, d.frame));
  const double top = amp[1].maxCoeff();
  for (int i = 0; i < 3; ++i) {
    d.axis_available[i] = amp[1][i] > 1e-12 * top && top > 0.0;
    if (!d.axis_available[i]) {
      d.warnings.emplace_back("first-degree amplitude vanishes on principal axis " + std::to_string(i) +
                              "; axis left out of the normalized descriptor");
    }
  }
  for (int k = 2; k <= K; ++k) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) {
      if (d.axis_available[i]) s += amp[k][i] * amp[k][i] / (amp[1][i] * amp[1][i]);
    }
    d.normalized[k] = std::sqrt(s);
  }
  return d;
}

void write_descriptors_csv(const Descriptors& d, std::ostream& out) {
  out << "k,Dx,Dy,Dz,D,Dnorm\n";
  char buf[256];
  for (std::size_t k = 0; k < d.per_axis.size(); ++k) {
    const Vec3& a = d.per_axis[k];
    if (std::isnan(d.normalized[k])) {
      std::snprintf(buf, sizeof(buf), "%zu,%.15g,%.15g,%.15g,%.15g,\n", k, a.x(), a.y(), a.z(), d.resultant[k]);
    } else {
      std::snprintf(buf, sizeof(buf), "%zu,%.15g,%.15g,%.15g,%.15g,%.15g\n", k, a.x(), a.y(), a.z(),
                    d.resultant[k], d.normalized[k]);
    }
    out << buf;
  }
}

void write_coeffs_json(const HarmonicCoeffs& coeffs, std::ostream& out) {
  nlohmann::ordered_json j;
  j["k_max"] = coeffs.k_max;
  j["bc"] = to_string(coeffs.bc);
  j["axes"] = {"x", "y", "z"};
  j["solver"] = coeffs.solver;
  j["condition"] = round15(coeffs.condition);
  j["residual"] = {round15(coeffs.residual.x()), round15(coeffs.residual.y()), round15(coeffs.residual.z())};
  j["warnings"] = coeffs.warnings;
  auto& list = j["coeffs"] = nlohmann::ordered_json::array();
  for (int k = 0; k <= coeffs.k_max; ++k) {
    for (int m = -k; m <= k; ++m) {
      const CVec3& q = coeffs.at(k, m);
      list.push_back({{"k", k},
                      {"m", m},
                      {"re", {round15(q[0].real()), round15(q[1].real()), round15(q[2].real())}},
                      {"im", {round15(q[0].imag()), round15(q[1].imag()), round15(q[2].imag())}}});
    }
  }
  out << j.dump(1) << '\n';
}

HarmonicCoeffs read_coeffs_json(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
    HarmonicCoeffs c = make_coeffs(j.at("k_max").get<int>(), parse_boundary_condition(j.at("bc").get<std::string>()));
    if (j.contains("solver")) c.solver = j["solver"].get<std::string>();
    for (const auto& e : j.at("coeffs")) {
      const int k = e.at("k").get<int>();
      const int m = e.at("m").get<int>();
      if (k < 0 || k > c.k_max || std::abs(m) > k) throw std::invalid_argument("coefficient index out of range");
      CVec3 q;
      for (int a = 0; a < 3; ++a) q[a] = {e.at("re").at(a).get<double>(), e.at("im").at(a).get<double>()};
      c.at(k, m) = q;
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed coefficients file: ") + e.what());
  }
}

}  // namespace dh
