#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "diskharm/mesh.hpp"

namespace dh {

/// Per-vertex position on the unit disk, aligned with the source mesh.
struct DiskParam {
  std::vector<Vec2> uv;
  std::vector<char> is_boundary;

  [[nodiscard]] std::size_t size() const { return uv.size(); }
  [[nodiscard]] double rho(std::size_t i) const { return uv[i].norm(); }
  /// Angle in [0, 2 pi).
  [[nodiscard]] double phi(std::size_t i) const;
};

struct DemOptions {
  double tol = 1e-2;
  int max_iters = 500;
  /// Diffusion / advection step. Non-positive selects the default.
  double dt = 0.0;
  /// Weight of the per-face density jump term in the velocity. Zero gives the
  /// plain vertex-averaged flow.
  double face_correction = 3.0;
};

struct DemResult {
  DiskParam param;
  int iterations = 0;
  double density_cv = 0.0;
  bool converged = false;
};

struct AreaStats {
  double cv = 0.0;           // coefficient of variation of normalized area ratio
  double log_std = 0.0;      // standard deviation of log(area ratio)
  double min_ratio = 0.0;
  double max_ratio = 0.0;
};

struct ParamStats {
  std::size_t flipped_faces = 0;
  AreaStats area;
  AreaStats tutte_area;
  double angular_distortion_deg = 0.0;
  double max_beltrami = 0.0;
  int dem_iterations = 0;
  bool dem_converged = false;
  int repair_rounds = 0;
};

struct ParamOptions {
  DemOptions dem;
  double beltrami_cap = 0.95;
};

struct ParamResult {
  DiskParam param;
  ParamStats stats;
  std::vector<std::string> warnings;
};

/// Boundary on the unit circle with arc-length spacing, interior vertices at
/// the uniform average of their neighbours.
DiskParam tutte_embed(const TriMesh& mesh);

/// Density-equalizing flow starting from a bijective disk map.
DemResult dem_flow(const TriMesh& mesh, const DiskParam& initial, const DemOptions& opts = {});

/// Per-face mu = f_zbar / f_z of the piecewise-linear map mesh -> param.
std::vector<std::complex<double>> beltrami_coefficient(const TriMesh& mesh, const DiskParam& param);

/// Solves div(A grad u) = div(A grad v) = 0 on `domain` where A encodes the
/// per-face Beltrami coefficient, with boundary vertices pinned to `pinned`.
DiskParam linear_beltrami_solve(const TriMesh& domain, std::span<const std::complex<double>> mu,
                                const DiskParam& pinned);

/// Caps |mu| at `cap` (phase kept), resets mu to zero on orientation-reversing
/// faces and rebuilds the map with the linear Beltrami solver until no face is
/// flipped.
DiskParam enforce_bijectivity(const TriMesh& mesh, const DiskParam& param, double cap = 0.95,
                              int* rounds = nullptr);

/// Tutte embedding, density-equalizing flow and Beltrami repair.
ParamResult area_preserving_param(const TriMesh& mesh, const ParamOptions& opts = {});

/// Number of faces with non-positive signed area in the plane.
std::size_t count_flipped_faces(const TriMesh& mesh, const DiskParam& param);

/// Statistics of Area(T) / Area(phi(T)) with both meshes scaled to equal
/// total area.
AreaStats area_ratio_stats(const TriMesh& mesh, const DiskParam& param);

/// Planar mesh with the connectivity of `mesh` and vertices at (u, v, 0).
TriMesh param_as_mesh(const TriMesh& mesh, const DiskParam& param);

/// CSV `vertex,rho,phi,is_boundary` with 12 significant digits.
void write_disk_param_csv(const DiskParam& param, std::ostream& out);

}  // namespace dh
