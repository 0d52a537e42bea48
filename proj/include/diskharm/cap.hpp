#pragma once

#include <iosfwd>

#include "diskharm/disk_mesh.hpp"
#include "diskharm/mesh.hpp"

namespace dh {

/// Spherical cap of half-angle theta_c (degrees) on a sphere of radius R.
struct CapSpec {
  double theta_c = 10.0;
  double R = 1.0;

  void validate() const;
  [[nodiscard]] double curvature() const { return 1.0 / (R * R); }
};

struct ProjectionReport {
  double theta_c = 0.0;
  double R = 0.0;
  double s_c = 0.0;
  double d_angle_deg = 0.0;
};

struct CapProjection {
  TriMesh mesh;
  ProjectionReport report;
};

/// Lambert azimuthal equal-area map of the unit sphere centred on (0, 0, -1).
Vec2 lambert_forward(const Vec3& p);
Vec3 lambert_inverse(const Vec2& p);

/// Disk radius whose inverse Lambert image has polar angle theta_c (degrees).
double disk_scale(double theta_c_deg);

/// Maps a unit-disk rough patch (vertex (x, y) = disk position, z = height)
/// onto the cap and offsets every point radially by the factor
/// 1 + sqrt(s_c) h.
CapProjection project_rough_patch(const TriMesh& patch, const CapSpec& cap);

/// Smooth cap mesh: the uniform disk mesh of `edge_length` projected with
/// zero heights.
DiskMesh cap_mesh(const CapSpec& cap, double edge_length);

void write_projection_json(const ProjectionReport& r, std::ostream& out);

}  // namespace dh
