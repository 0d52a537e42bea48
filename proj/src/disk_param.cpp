#include "diskharm/disk_param.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>

#include <Eigen/Sparse>

#include "diskharm/error.hpp"

namespace dh {

namespace {

constexpr double kPi = 3.14159265358979323846;

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

// Triangle f of a 3D mesh in an orthonormal frame of its own plane.
std::array<Vec2, 3> local_triangle(const TriMesh& mesh, std::size_t f) {
  const Face& t = mesh.faces[f];
  const Vec3& p0 = mesh.vertices[t[0]];
  const Vec3 d1 = mesh.vertices[t[1]] - p0;
  const Vec3 d2 = mesh.vertices[t[2]] - p0;
  const Vec3 e1 = d1.normalized();
  const Vec3 e2 = d1.cross(d2).cross(d1).normalized();
  return {Vec2(0.0, 0.0), Vec2(d1.norm(), 0.0), Vec2(d2.dot(e1), d2.dot(e2))};
}

// Gradients of the three hat functions of a counter-clockwise triangle.
std::array<Vec2, 3> hat_gradients(const std::array<Vec2, 3>& q, double& area) {
  area = signed_area(q[0], q[1], q[2]);
  std::array<Vec2, 3> g;
  for (int i = 0; i < 3; ++i) {
    const Vec2 e = q[(i + 2) % 3] - q[(i + 1) % 3];
    g[i] = Vec2(-e.y(), e.x()) / (2.0 * area);
  }
  return g;
}

std::vector<std::vector<int>> vertex_neighbours(const TriMesh& mesh) {
  std::vector<std::set<int>> sets(mesh.vertices.size());
  for (const Face& f : mesh.faces) {
    for (int c = 0; c < 3; ++c) {
      sets[f[c]].insert(f[(c + 1) % 3]);
      sets[f[c]].insert(f[(c + 2) % 3]);
    }
  }
  std::vector<std::vector<int>> out(sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) out[i].assign(sets[i].begin(), sets[i].end());
  return out;
}

std::vector<char> boundary_flags(const TriMesh& mesh, const std::vector<int>& loop) {
  std::vector<char> flags(mesh.vertices.size(), 0);
  for (int v : loop) flags[v] = 1;
  return flags;
}

// Solves K x = 0 on free vertices with pinned values elsewhere, for both
// planar coordinates.
void solve_pinned(const std::vector<Triplet>& entries, std::size_t n, const std::vector<char>& pinned,
                  std::vector<Vec2>& uv, const char* what) {
  std::vector<int> index(n, -1);
  int nfree = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!pinned[i]) index[i] = nfree++;
  }
  if (nfree == 0) return;
  std::vector<Triplet> inner;
  inner.reserve(entries.size());
  Eigen::MatrixX2d rhs = Eigen::MatrixX2d::Zero(nfree, 2);
  for (const Triplet& t : entries) {
    const int r = index[t.row()];
    if (r < 0) continue;
    const int c = index[t.col()];
    if (c >= 0) {
      inner.emplace_back(r, c, t.value());
    } else {
      rhs(r, 0) -= t.value() * uv[t.col()].x();
      rhs(r, 1) -= t.value() * uv[t.col()].y();
    }
  }
  SpMat k(nfree, nfree);
  k.setFromTriplets(inner.begin(), inner.end());
  Eigen::SimplicialLDLT<SpMat> solver(k);
  if (solver.info() != Eigen::Success) throw NumericError(std::string(what) + ": singular linear system");
  const Eigen::MatrixX2d x = solver.solve(rhs);
  if (solver.info() != Eigen::Success || !x.allFinite()) {
    throw NumericError(std::string(what) + ": linear solve failed");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (index[i] >= 0) uv[i] = x.row(index[i]).transpose();
  }
}

std::vector<double> normalized_source_areas(const TriMesh& mesh) {
  std::vector<double> a = face_areas(mesh);
  const double total = std::accumulate(a.begin(), a.end(), 0.0);
  for (double& x : a) x *= kPi / total;
  return a;
}

std::vector<double> planar_areas(const TriMesh& mesh, const std::vector<Vec2>& uv) {
  std::vector<double> a(mesh.faces.size());
  for (std::size_t f = 0; f < a.size(); ++f) {
    const Face& t = mesh.faces[f];
    a[f] = signed_area(uv[t[0]], uv[t[1]], uv[t[2]]);
  }
  return a;
}

double coefficient_of_variation(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  return std::sqrt(var / n) / mean;
}

}  // namespace

double DiskParam::phi(std::size_t i) const {
  double a = std::atan2(uv[i].y(), uv[i].x());
  if (a < 0.0) a += 2.0 * kPi;
  if (a >= 2.0 * kPi) a = 0.0;
  return a;
}

DiskParam tutte_embed(const TriMesh& mesh) {
  const std::vector<int> loop = boundary_loop(mesh);
  DiskParam p;
  p.uv.assign(mesh.vertices.size(), Vec2::Zero());
  p.is_boundary = boundary_flags(mesh, loop);

  std::vector<double> cumulative(loop.size() + 1, 0.0);
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec3& a = mesh.vertices[loop[i]];
    const Vec3& b = mesh.vertices[loop[(i + 1) % loop.size()]];
    cumulative[i + 1] = cumulative[i] + (b - a).norm();
  }
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const double t = 2.0 * kPi * cumulative[i] / cumulative.back();
    p.uv[loop[i]] = Vec2(std::cos(t), std::sin(t));
  }

  const auto nbrs = vertex_neighbours(mesh);
  std::vector<Triplet> entries;
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    if (nbrs[i].empty()) throw NumericError("tutte_embed: isolated vertex " + std::to_string(i));
    entries.emplace_back(i, i, static_cast<double>(nbrs[i].size()));
    for (int j : nbrs[i]) entries.emplace_back(i, j, -1.0);
  }
  solve_pinned(entries, mesh.vertices.size(), p.is_boundary, p.uv, "tutte_embed");
  return p;
}

std::size_t count_flipped_faces(const TriMesh& mesh, const DiskParam& param) {
  std::size_t count = 0;
  for (const Face& t : mesh.faces) {
    if (signed_area(param.uv[t[0]], param.uv[t[1]], param.uv[t[2]]) <= 0.0) ++count;
  }
  return count;
}

AreaStats area_ratio_stats(const TriMesh& mesh, const DiskParam& param) {
  const std::vector<double> src = face_areas(mesh);
  const std::vector<double> dst = planar_areas(mesh, param.uv);
  const double src_total = std::accumulate(src.begin(), src.end(), 0.0);
  double dst_total = 0.0;
  for (double a : dst) dst_total += std::abs(a);
  std::vector<double> ratio(src.size());
  std::vector<double> logs(src.size());
  AreaStats s;
  s.min_ratio = std::numeric_limits<double>::infinity();
  s.max_ratio = 0.0;
  for (std::size_t f = 0; f < src.size(); ++f) {
    ratio[f] = (src[f] / src_total) / (std::max(std::abs(dst[f]), 1e-300) / dst_total);
    logs[f] = std::log(ratio[f]);
    s.min_ratio = std::min(s.min_ratio, ratio[f]);
    s.max_ratio = std::max(s.max_ratio, ratio[f]);
  }
  s.cv = coefficient_of_variation(ratio);
  const double mean_log = std::accumulate(logs.begin(), logs.end(), 0.0) / static_cast<double>(logs.size());
  double var = 0.0;
  for (double l : logs) var += (l - mean_log) * (l - mean_log);
  s.log_std = std::sqrt(var / static_cast<double>(logs.size()));
  return s;
}

DemResult dem_flow(const TriMesh& mesh, const DiskParam& initial, const DemOptions& opts) {
  const std::size_t nv = mesh.vertices.size();
  const std::size_t nf = mesh.faces.size();
  if (initial.size() != nv) throw MeshError("dem_flow: parameterization size does not match the mesh");
  if (count_flipped_faces(mesh, initial) != 0) throw NumericError("dem_flow: initial map is not bijective");

  const std::vector<double> target = normalized_source_areas(mesh);
  std::vector<Vec2> x = initial.uv;

  double dt = opts.dt;
  if (dt <= 0.0) {
    const double h = mean_edge_length(param_as_mesh(mesh, initial));
    dt = 0.1 * h * h;
  }

  auto face_density = [&](const std::vector<Vec2>& pos, std::vector<double>& rho) {
    const std::vector<double> area = planar_areas(mesh, pos);
    rho.resize(nf);
    for (std::size_t f = 0; f < nf; ++f) rho[f] = target[f] / area[f];
    return area;
  };

  DemResult result;
  std::vector<double> rho_face;
  std::vector<double> area = face_density(x, rho_face);
  double cv = coefficient_of_variation(rho_face);
  result.param = initial;
  result.density_cv = cv;

  int iter = 0;
  for (; iter < opts.max_iters && cv >= opts.tol; ++iter) {
    // Vertex density by area-weighted averaging.
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nv));
    Eigen::VectorXd rho_v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nv));
    std::vector<Triplet> entries;
    entries.reserve(9 * nf);
    for (std::size_t f = 0; f < nf; ++f) {
      const Face& t = mesh.faces[f];
      for (int c = 0; c < 3; ++c) {
        mass[t[c]] += area[f] / 3.0;
        rho_v[t[c]] += area[f] * rho_face[f];
      }
      double a = 0.0;
      const std::array<Vec2, 3> q{x[t[0]], x[t[1]], x[t[2]]};
      const auto g = hat_gradients(q, a);
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) entries.emplace_back(t[i], t[j], dt * a * g[i].dot(g[j]));
      }
    }
    for (std::size_t i = 0; i < nv; ++i) {
      rho_v[i] /= 3.0 * mass[i];
      entries.emplace_back(i, i, mass[i]);
    }

    // One implicit diffusion step (M + dt K) rho' = M rho.
    SpMat system(static_cast<Eigen::Index>(nv), static_cast<Eigen::Index>(nv));
    system.setFromTriplets(entries.begin(), entries.end());
    Eigen::SimplicialLDLT<SpMat> solver(system);
    if (solver.info() != Eigen::Success) throw NumericError("dem_flow: diffusion system is singular");
    const Eigen::VectorXd rho = solver.solve(mass.cwiseProduct(rho_v));
    if (!rho.allFinite()) throw NumericError("dem_flow: non-finite density field");

    // Velocity -grad(rho)/rho, face gradients averaged to vertices, plus the weak
    // gradient of the raw face density.
    std::vector<Vec2> vel(nv, Vec2::Zero());
    std::vector<double> wsum(nv, 0.0);
    for (std::size_t f = 0; f < nf; ++f) {
      const Face& t = mesh.faces[f];
      double a = 0.0;
      const auto g = hat_gradients({x[t[0]], x[t[1]], x[t[2]]}, a);
      const Vec2 grad = rho[t[0]] * g[0] + rho[t[1]] * g[1] + rho[t[2]] * g[2];
      for (int c = 0; c < 3; ++c) {
        vel[t[c]] += a * grad;
        vel[t[c]] -= opts.face_correction * a * rho_face[f] * g[c];
        wsum[t[c]] += a;
      }
    }
    for (std::size_t i = 0; i < nv; ++i) {
      vel[i] = -vel[i] / (wsum[i] * rho[static_cast<Eigen::Index>(i)]);
      if (initial.is_boundary[i]) {
        const Vec2 n = x[i].normalized();
        vel[i] -= vel[i].dot(n) * n;
      }
    }

    // Advect, halving the step if any face would flip.
    std::vector<Vec2> next(nv);
    std::vector<double> next_rho;
    std::vector<double> next_area;
    double step = dt;
    bool moved = false;
    for (int attempt = 0; attempt < 30; ++attempt) {
      for (std::size_t i = 0; i < nv; ++i) {
        next[i] = x[i] + step * vel[i];
        if (initial.is_boundary[i]) next[i].normalize();
      }
      next_area = face_density(next, next_rho);
      if (std::all_of(next_area.begin(), next_area.end(), [](double a) { return a > 0.0; })) {
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
    x.swap(next);
    area.swap(next_area);
    rho_face.swap(next_rho);
    cv = coefficient_of_variation(rho_face);
    if (!std::isfinite(cv)) throw NumericError("dem_flow: non-finite density");
    if (cv < result.density_cv) {
      result.density_cv = cv;
      result.param.uv = x;
    }
  }
  result.iterations = iter;
  result.converged = result.density_cv < opts.tol;
  return result;
}

std::vector<std::complex<double>> beltrami_coefficient(const TriMesh& mesh, const DiskParam& param) {
  if (param.size() != mesh.vertices.size()) {
    throw MeshError("beltrami_coefficient: parameterization size does not match the mesh");
  }
  std::vector<std::complex<double>> mu(mesh.faces.size());
  const double scale = std::max(bbox_diagonal(param_as_mesh(mesh, param)), 1e-300);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Face& t = mesh.faces[f];
    if (std::abs(signed_area(param.uv[t[0]], param.uv[t[1]], param.uv[t[2]])) < 1e-14 * scale * scale) {
      throw NumericError("beltrami_coefficient: mapped face " + std::to_string(f) + " has zero area");
    }
    double a = 0.0;
    const auto g = hat_gradients(local_triangle(mesh, f), a);
    std::complex<double> fx = 0.0;
    std::complex<double> fy = 0.0;
    for (int c = 0; c < 3; ++c) {
      const std::complex<double> w(param.uv[t[c]].x(), param.uv[t[c]].y());
      fx += w * g[c].x();
      fy += w * g[c].y();
    }
    const std::complex<double> i(0.0, 1.0);
    const std::complex<double> fz = 0.5 * (fx - i * fy);
    const std::complex<double> fzbar = 0.5 * (fx + i * fy);
    mu[f] = fzbar / fz;
  }
  return mu;
}

DiskParam linear_beltrami_solve(const TriMesh& domain, std::span<const std::complex<double>> mu,
                                const DiskParam& pinned) {
  if (mu.size() != domain.faces.size()) throw MeshError("linear_beltrami_solve: one mu per face required");
  std::vector<Triplet> entries;
  entries.reserve(9 * domain.faces.size());
  for (std::size_t f = 0; f < domain.faces.size(); ++f) {
    const double r = mu[f].real();
    const double s = mu[f].imag();
    const double d = 1.0 - r * r - s * s;
    if (!(d > 0.0)) throw NumericError("linear_beltrami_solve: |mu| >= 1 on face " + std::to_string(f));
    const double a1 = ((r - 1.0) * (r - 1.0) + s * s) / d;
    const double a2 = -2.0 * s / d;
    const double a3 = ((1.0 + r) * (1.0 + r) + s * s) / d;
    double area = 0.0;
    const auto g = hat_gradients(local_triangle(domain, f), area);
    const Face& t = domain.faces[f];
    for (int i = 0; i < 3; ++i) {
      const Vec2 ag(a1 * g[i].x() + a2 * g[i].y(), a2 * g[i].x() + a3 * g[i].y());
      for (int j = 0; j < 3; ++j) entries.emplace_back(t[i], t[j], area * ag.dot(g[j]));
    }
  }
  DiskParam out = pinned;
  solve_pinned(entries, domain.vertices.size(), pinned.is_boundary, out.uv, "linear_beltrami_solve");
  return out;
}

DiskParam enforce_bijectivity(const TriMesh& mesh, const DiskParam& param, double cap, int* rounds) {
  if (!(cap > 0.0 && cap < 1.0)) throw std::invalid_argument("enforce_bijectivity: cap must lie in (0, 1)");
  DiskParam cur = param;
  for (int round = 0; round < 20; ++round) {
    std::vector<std::complex<double>> mu = beltrami_coefficient(mesh, cur);
    const bool flipped = count_flipped_faces(mesh, cur) != 0;
    bool capped = false;
    for (auto& m : mu) {
      if (std::abs(m) >= 1.0) {
        m = 0.0;
        capped = true;
      } else if (std::abs(m) >= cap) {
        m *= cap / std::abs(m);
        capped = true;
      }
    }
    if (!capped && !flipped) {
      if (rounds) *rounds = round;
      return cur;
    }
    cur = linear_beltrami_solve(mesh, mu, cur);
  }
  if (count_flipped_faces(mesh, cur) != 0) throw NumericError("enforce_bijectivity: flipped faces remain");
  if (rounds) *rounds = 20;
  return cur;
}

TriMesh param_as_mesh(const TriMesh& mesh, const DiskParam& param) {
  TriMesh out;
  out.faces = mesh.faces;
  out.vertices.reserve(param.size());
  for (const Vec2& p : param.uv) out.vertices.emplace_back(p.x(), p.y(), 0.0);
  return out;
}

ParamResult area_preserving_param(const TriMesh& mesh, const ParamOptions& opts) {
  validate_open_disk(mesh);
  ParamResult res;
  const DiskParam tutte = tutte_embed(mesh);
  res.stats.tutte_area = area_ratio_stats(mesh, tutte);

  const DemResult dem = dem_flow(mesh, tutte, opts.dem);
  res.stats.dem_iterations = dem.iterations;
  res.stats.dem_converged = dem.converged;
  if (!dem.converged) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "density flow stopped after %d iterations with density CV %.3g (tol %.3g)",
                  dem.iterations, dem.density_cv, opts.dem.tol);
    res.warnings.emplace_back(buf);
  }

  // The flow acts on the Tutte disk, so the repair measures distortion there.
  const TriMesh tutte_domain = param_as_mesh(mesh, tutte);
  res.param = enforce_bijectivity(tutte_domain, dem.param, opts.beltrami_cap, &res.stats.repair_rounds);

  res.stats.flipped_faces = count_flipped_faces(mesh, res.param);
  res.stats.area = area_ratio_stats(mesh, res.param);
  res.stats.angular_distortion_deg = angular_distortion(mesh, param_as_mesh(mesh, res.param));
  double max_mu = 0.0;
  for (const auto& m : beltrami_coefficient(mesh, res.param)) max_mu = std::max(max_mu, std::abs(m));
  res.stats.max_beltrami = max_mu;
  return res;
}

void write_disk_param_csv(const DiskParam& param, std::ostream& out) {
  out << "vertex,rho,phi,is_boundary\n";
  char buf[128];
  for (std::size_t i = 0; i < param.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g,%d\n", i, param.rho(i), param.phi(i),
                  param.is_boundary[i] ? 1 : 0);
    out << buf;
  }
}

}  // namespace dh
