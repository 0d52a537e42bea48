#include "diskharm/cap.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "diskharm/error.hpp"

namespace dh {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void CapSpec::validate() const {
  if (!(theta_c > 0.0 && theta_c < 90.0)) throw std::invalid_argument("theta_c must lie in (0, 90) degrees");
  if (!(R > 0.0)) throw std::invalid_argument("cap radius R must be positive");
}

Vec2 lambert_forward(const Vec3& p) {
  if (std::abs(p.squaredNorm() - 1.0) > 1e-9) throw NumericError("lambert_forward: point is not on the unit sphere");
  if (p.z() >= 1.0) throw NumericError("lambert_forward: undefined at the pole (0, 0, 1)");
  const double s = std::sqrt(2.0 / (1.0 - p.z()));
  return {s * p.x(), s * p.y()};
}

Vec3 lambert_inverse(const Vec2& p) {
  const double r2 = p.squaredNorm();
  if (r2 > 4.0) throw NumericError("lambert_inverse: point outside the disk of radius 2");
  const double s = std::sqrt(1.0 - 0.25 * r2);
  return {s * p.x(), s * p.y(), -1.0 + 0.5 * r2};
}

double disk_scale(double theta_c_deg) {
  if (!(theta_c_deg > 0.0 && theta_c_deg < 180.0)) throw std::invalid_argument("disk_scale: theta_c outside (0, 180)");
  if (theta_c_deg == 90.0) return std::sqrt(2.0);
  return std::sqrt(2.0 * (1.0 - std::cos(theta_c_deg * kPi / 180.0)));
}

CapProjection project_rough_patch(const TriMesh& patch, const CapSpec& cap) {
  cap.validate();
  const double rl = disk_scale(cap.theta_c);
  const double s_c = 2.0 * kPi * cap.R * cap.R * (1.0 - std::cos(cap.theta_c * kPi / 180.0)) / kPi;
  const double root = std::sqrt(s_c);

  CapProjection out;
  out.mesh.faces = patch.faces;
  out.mesh.vertices.reserve(patch.vertices.size());
  for (std::size_t i = 0; i < patch.vertices.size(); ++i) {
    const Vec3& v = patch.vertices[i];
    if (v.head<2>().norm() > 1.0 + 1e-9) throw NumericError("project_rough_patch: vertex outside the unit disk");
    const double factor = 1.0 + root * v.z();
    if (!(factor > 0.0)) {
      throw NumericError("self-intersecting projection: 1 + sqrt(s_c) h <= 0 at vertex " + std::to_string(i));
    }
    const Vec3 dir = lambert_inverse(rl * v.head<2>());
    out.mesh.vertices.push_back(cap.R * factor * dir);
  }
  out.report.theta_c = cap.theta_c;
  out.report.R = cap.R;
  out.report.s_c = s_c;
  if (!patch.faces.empty()) out.report.d_angle_deg = angular_distortion(patch, out.mesh);
  return out;
}

DiskMesh cap_mesh(const CapSpec& cap, double edge_length) {
  DiskMesh disk = uniform_disk_mesh(edge_length);
  disk.mesh = project_rough_patch(disk.mesh, cap).mesh;
  return disk;
}

void write_projection_json(const ProjectionReport& r, std::ostream& out) {
  nlohmann::ordered_json j;
  j["theta_c"] = r.theta_c;
  j["R"] = r.R;
  j["s_c"] = r.s_c;
  j["d_angle_deg"] = r.d_angle_deg;
  out << j.dump(1) << '\n';
}

}  // namespace dh
