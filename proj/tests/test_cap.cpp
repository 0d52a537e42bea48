#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "diskharm/cap.hpp"
#include "diskharm/error.hpp"

using namespace dh;

namespace {

double polar_angle_from_south(const Vec3& p) { return std::acos(std::clamp(-p.z() / p.norm(), -1.0, 1.0)) * 180.0 / M_PI; }

}  // namespace

TEST_CASE("lambert maps") {
  CHECK(lambert_forward(Vec3(0, 0, -1)).norm() == 0.0);
  const Vec2 eq = lambert_forward(Vec3(1, 0, 0));
  CHECK(std::abs(eq.x() - std::sqrt(2.0)) < 1e-15);
  CHECK(eq.y() == 0.0);
  CHECK((lambert_inverse(Vec2(0, 0)) - Vec3(0, 0, -1)).norm() == 0.0);
  CHECK((lambert_inverse(Vec2(std::sqrt(2.0), 0)) - Vec3(1, 0, 0)).norm() < 1e-15);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  int tested = 0;
  while (tested < 20000) {
    const Vec2 p(u(rng), u(rng));
    if (p.squaredNorm() > 3.99) continue;
    const Vec3 s = lambert_inverse(p);
    CHECK(std::abs(s.squaredNorm() - 1.0) < 1e-12);
    CHECK((lambert_forward(s) - p).norm() < 1e-12);
    const Vec3 back = lambert_inverse(lambert_forward(s));
    CHECK((back - s).norm() < 1e-12);
    ++tested;
  }

  CHECK_THROWS_AS(lambert_forward(Vec3(0, 0, 1)), NumericError);
  CHECK_THROWS_AS(lambert_forward(Vec3(0, 0, -0.9)), NumericError);
  CHECK_THROWS_AS(lambert_inverse(Vec2(2.0, 0.1)), NumericError);
}

TEST_CASE("lambert preserves area") {
  const DiskMesh disk = uniform_disk_mesh(0.004);
  for (double scale : {disk_scale(10.0), disk_scale(50.0), 1.9}) {
    TriMesh mapped = disk.mesh;
    TriMesh flat = disk.mesh;
    for (std::size_t i = 0; i < mapped.num_vertices(); ++i) {
      flat.vertices[i] = Vec3(scale * disk.mesh.vertices[i].x(), scale * disk.mesh.vertices[i].y(), 0.0);
      mapped.vertices[i] = lambert_inverse(flat.vertices[i].head<2>());
    }
    const double a0 = total_area(flat);
    const double a1 = total_area(mapped);
    CHECK(std::abs(a1 - a0) < 1e-3 * a0);
  }
}

TEST_CASE("disk scale") {
  CHECK(std::abs(disk_scale(90.0) - std::sqrt(2.0)) <= 1e-15);
  CHECK(disk_scale(10.0) == doctest::Approx(0.174311).epsilon(1e-6));
  CHECK(std::abs(disk_scale(10.0) - 2.0 * std::sin(5.0 * M_PI / 180.0)) < 1e-15);
  for (double theta : {1.0, 5.0, 10.0, 20.0, 50.0, 89.0, 120.0}) {
    CHECK(std::abs(polar_angle_from_south(lambert_inverse(Vec2(disk_scale(theta), 0))) - theta) < 1e-12);
  }
  CHECK_THROWS_AS(disk_scale(0.0), std::invalid_argument);
  CHECK_THROWS_AS(disk_scale(180.0), std::invalid_argument);
}

TEST_CASE("cap spec") {
  CHECK_NOTHROW((CapSpec{10.0, 2.0}.validate()));
  CHECK((CapSpec{10.0, 2.0}.curvature()) == 0.25);
  CHECK_THROWS_AS((CapSpec{90.0, 1.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((CapSpec{10.0, 0.0}.validate()), std::invalid_argument);
}

TEST_CASE("radial projection") {
  const DiskMesh disk = uniform_disk_mesh(0.05);
  const CapSpec cap{10.0, 0.5};

  const CapProjection smooth = project_rough_patch(disk.mesh, cap);
  const Vec3 centre(0, 0, 0);
  double max_angle = 0.0;
  for (const Vec3& v : smooth.mesh.vertices) {
    CHECK(std::abs((v - centre).norm() - 0.5) < 1e-10);
    max_angle = std::max(max_angle, polar_angle_from_south(v));
  }
  CHECK(std::abs(max_angle - 10.0) < 1e-9);
  const double s_c = 2.0 * 0.25 * (1.0 - std::cos(10.0 * M_PI / 180.0));
  CHECK(smooth.report.s_c == doctest::Approx(s_c).epsilon(1e-14));
  CHECK(smooth.report.d_angle_deg >= 0.0);

  TriMesh raised = disk.mesh;
  for (Vec3& v : raised.vertices) v.z() = 0.3;
  const CapProjection lifted = project_rough_patch(raised, cap);
  for (const Vec3& v : lifted.mesh.vertices) CHECK(std::abs(v.norm() - 0.5 * (1.0 + std::sqrt(s_c) * 0.3)) < 1e-12);

  TriMesh rough = disk.mesh;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 0.5);
  for (Vec3& v : rough.vertices) v.z() = n(rng);
  const CapProjection bumpy = project_rough_patch(rough, cap);
  for (std::size_t i = 0; i < rough.num_vertices(); ++i) {
    const Vec3 a = bumpy.mesh.vertices[i].normalized();
    const Vec3 b = smooth.mesh.vertices[i].normalized();
    CHECK((a - b).norm() < 1e-14);
  }

  TriMesh deep = disk.mesh;
  deep.vertices[3].z() = -1.0 / std::sqrt(s_c) - 1.0;
  try {
    static_cast<void>(project_rough_patch(deep, cap));
    FAIL("expected an error");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("self-intersecting projection") != std::string::npos);
  }

  TriMesh outside = disk.mesh;
  outside.vertices[0].x() = 1.5;
  CHECK_THROWS_AS(project_rough_patch(outside, cap), NumericError);
}

TEST_CASE("angular distortion grows with the cap angle") {
  const DiskMesh disk = uniform_disk_mesh(0.05);
  double prev = 0.0;
  for (double theta : {5.0, 10.0, 20.0, 50.0}) {
    const double d = project_rough_patch(disk.mesh, CapSpec{theta, 1.0}).report.d_angle_deg;
    CHECK(d > prev);
    prev = d;
  }
}

TEST_CASE("cap mesh and report json") {
  const DiskMesh m = cap_mesh(CapSpec{20.0, 1.0}, 0.1);
  CHECK(m.mesh.num_vertices() == m.param.uv.size());
  CHECK_NOTHROW(validate_open_disk(m.mesh));
  std::ostringstream out;
  write_projection_json(ProjectionReport{10.0, 1.0, 0.03, 0.5}, out);
  CHECK(out.str() == "{\n \"theta_c\": 10.0,\n \"R\": 1.0,\n \"s_c\": 0.03,\n \"d_angle_deg\": 0.5\n}\n");
}
