#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "diskharm/cap.hpp"
#include "diskharm/disk_mesh.hpp"
#include "diskharm/error.hpp"
#include "diskharm/mesh.hpp"

using namespace dh;

namespace {

TriMesh tetrahedron() {
  TriMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  m.faces = {{0, 2, 1}, {0, 1, 3}, {1, 2, 3}, {0, 3, 2}};
  return m;
}

std::string error_of(const std::string& text) {
  std::istringstream in(text);
  try {
    read_obj(in);
  } catch (const MeshError& e) {
    return e.what();
  }
  return {};
}

// Distance to a triangle by dense barycentric sampling refined locally.
double sampled_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  double best = 1e300;
  double bu = 0;
  double bv = 0;
  const int n = 200;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; i + j <= n; ++j) {
      const double u = double(i) / n;
      const double v = double(j) / n;
      const double d = (a + u * (b - a) + v * (c - a) - p).norm();
      if (d < best) {
        best = d;
        bu = u;
        bv = v;
      }
    }
  }
  double step = 1.0 / n;
  for (int it = 0; it < 60; ++it) {
    bool improved = false;
    for (int du = -1; du <= 1; ++du) {
      for (int dv = -1; dv <= 1; ++dv) {
        const double u = bu + du * step;
        const double v = bv + dv * step;
        if (u < 0 || v < 0 || u + v > 1) continue;
        const double d = (a + u * (b - a) + v * (c - a) - p).norm();
        if (d < best) {
          best = d;
          bu = u;
          bv = v;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return best;
}

}  // namespace

TEST_CASE("smallest valid obj") {
  std::istringstream in("# tri\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1\n");
  const TriMesh m = read_obj(in);
  CHECK(m.num_vertices() == 3);
  CHECK(m.num_faces() == 1);
  CHECK(m.faces[0] == Face{0, 1, 2});
}

TEST_CASE("obj negative indices") {
  std::istringstream in("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n");
  CHECK(read_obj(in).faces[0] == Face{0, 1, 2});
}

TEST_CASE("obj errors name the offending record") {
  const std::string quad = error_of("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
  CHECK(quad.find("face 0") != std::string::npos);
  CHECK(quad.find("line 5") != std::string::npos);
  CHECK(error_of("v 0 0\nf 1 2 3\n").find("line 1") != std::string::npos);
  CHECK(error_of("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 7\n").find("face 0 references vertex 6") != std::string::npos);
  CHECK(error_of("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 x\n").find("line 4") != std::string::npos);
}

TEST_CASE("ply ascii and binary") {
  const std::string header =
      "ply\nformat ascii 1.0\ncomment test\nelement vertex 3\nproperty float x\nproperty float y\n"
      "property float z\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n";
  std::istringstream ascii(header + "0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
  const TriMesh a = read_ply(ascii);
  CHECK(a.num_vertices() == 3);
  CHECK(a.faces[0] == Face{0, 1, 2});

  std::string bin =
      "ply\nformat binary_little_endian 1.0\nelement vertex 3\nproperty double x\nproperty double y\n"
      "property double z\nproperty uchar red\nelement face 1\nproperty list uchar uint vertex_indices\nend_header\n";
  const double coords[3][3] = {{0, 0, 0}, {2, 0, 0}, {0, 2, 0.5}};
  for (const auto& v : coords) {
    bin.append(reinterpret_cast<const char*>(v), sizeof(v));
    bin.push_back(static_cast<char>(200));
  }
  bin.push_back(3);
  const std::uint32_t idx[3] = {0, 1, 2};
  bin.append(reinterpret_cast<const char*>(idx), sizeof(idx));
  std::istringstream binary(bin);
  const TriMesh b = read_ply(binary);
  CHECK(b.vertices[2].z() == 0.5);
  CHECK(b.faces[0] == Face{0, 1, 2});

  std::istringstream quad(header.substr(0, header.size()) + "0 0 0\n1 0 0\n0 1 0\n4 0 1 2 0\n");
  CHECK_THROWS_AS(read_ply(quad), MeshError);
}

TEST_CASE("cap mesh survives a save and reload") {
  const DiskMesh cap = cap_mesh({10.0, 1.0}, 0.05);
  const auto path = std::filesystem::temp_directory_path() / "diskharm_cap_roundtrip.obj";
  save_obj(cap.mesh, path);
  const TriMesh back = load_mesh(path);
  std::filesystem::remove(path);
  REQUIRE(back.num_vertices() == cap.mesh.num_vertices());
  REQUIRE(back.faces == cap.mesh.faces);
  double worst = 0.0;
  for (std::size_t i = 0; i < back.num_vertices(); ++i) {
    worst = std::max(worst, (back.vertices[i] - cap.mesh.vertices[i]).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-9);
  CHECK_THROWS_AS(load_mesh("missing_file.obj"), MeshError);
  CHECK_THROWS_AS(load_mesh("mesh.stl"), MeshError);
}

TEST_CASE("boundary loops") {
  TriMesh tri;
  tri.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  tri.faces = {{0, 1, 2}};
  CHECK(boundary_loop(tri) == std::vector<int>{0, 1, 2});

  try {
    boundary_loop(tetrahedron());
    FAIL("closed mesh accepted");
  } catch (const MeshError& e) {
    CHECK(std::string(e.what()) == "not an open surface");
  }

  const DiskMesh disk = uniform_disk_mesh(0.05);
  const auto loop = boundary_loop(disk.mesh);
  CHECK(loop.size() == count_boundary_edges(disk.mesh));
  for (int v : loop) CHECK(std::abs(disk.mesh.vertices[v].head<2>().norm() - 1.0) < 1e-12);
  // Interior to the left: counter-clockwise in the plane.
  double signed_area = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec3& p = disk.mesh.vertices[loop[i]];
    const Vec3& q = disk.mesh.vertices[loop[(i + 1) % loop.size()]];
    signed_area += p.x() * q.y() - q.x() * p.y();
  }
  CHECK(signed_area > 0.0);
}

TEST_CASE("open disk validation") {
  CHECK_NOTHROW(validate_open_disk(uniform_disk_mesh(0.1).mesh));

  TriMesh annulus;
  const int n = 12;
  for (int i = 0; i < n; ++i) {
    const double t = 2 * M_PI * i / n;
    annulus.vertices.emplace_back(std::cos(t), std::sin(t), 0);
    annulus.vertices.emplace_back(2 * std::cos(t), 2 * std::sin(t), 0);
  }
  for (int i = 0; i < n; ++i) {
    const int a = 2 * i;
    const int b = 2 * ((i + 1) % n);
    annulus.faces.push_back({a, a + 1, b + 1});
    annulus.faces.push_back({a, b + 1, b});
  }
  CHECK_THROWS_AS(validate_open_disk(annulus), MeshError);

  TriMesh flipped = uniform_disk_mesh(0.2).mesh;
  std::swap(flipped.faces[3][0], flipped.faces[3][1]);
  CHECK_THROWS_AS(validate_open_disk(flipped), MeshError);

  TriMesh degenerate;
  degenerate.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)};
  degenerate.faces = {{0, 1, 2}};
  CHECK_THROWS_AS(validate_open_disk(degenerate), MeshError);

  TriMesh unused = uniform_disk_mesh(0.2).mesh;
  unused.vertices.emplace_back(5, 5, 5);
  CHECK_THROWS_AS(validate_open_disk(unused), MeshError);
}

TEST_CASE("closest point on triangle against sampling") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    const Vec3 a(g(rng), g(rng), g(rng));
    const Vec3 b(g(rng), g(rng), g(rng));
    const Vec3 c(g(rng), g(rng), g(rng));
    const Vec3 p(2 * g(rng), 2 * g(rng), 2 * g(rng));
    const double d = (closest_point_on_triangle(p, a, b, c) - p).norm();
    CHECK(d == doctest::Approx(sampled_distance(p, a, b, c)).epsilon(1e-9));
  }
}

TEST_CASE("hausdorff rmse") {
  const DiskMesh disk = uniform_disk_mesh(0.05);
  CHECK(hausdorff_rmse(disk.mesh, disk.mesh) == 0.0);

  TriMesh shifted = disk.mesh;
  const double eps = 1e-3;
  for (Vec3& v : shifted.vertices) v.z() += eps;
  CHECK(hausdorff_rmse(disk.mesh, shifted) == doctest::Approx(eps / bbox_diagonal(disk.mesh)).epsilon(1e-12));
  CHECK(hausdorff_rmse(disk.mesh, shifted, true) == doctest::Approx(eps / bbox_diagonal(disk.mesh)).epsilon(1e-12));

  // Tree search against an exhaustive scan over every triangle.
  const TriMesh ref = cap_mesh({30.0, 1.0}, 0.06).mesh;
  TriMesh probe = cap_mesh({30.0, 1.0}, 0.045).mesh;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 0.01);
  for (Vec3& v : probe.vertices) v += Vec3(g(rng), g(rng), g(rng));
  const auto fast = point_to_surface_distances(ref, probe.vertices);
  double sum = 0.0;
  for (std::size_t i = 0; i < probe.num_vertices(); ++i) {
    double best = 1e300;
    for (const Face& f : ref.faces) {
      const Vec3 q = closest_point_on_triangle(probe.vertices[i], ref.vertices[f[0]], ref.vertices[f[1]],
                                               ref.vertices[f[2]]);
      best = std::min(best, (q - probe.vertices[i]).norm());
    }
    CHECK(fast[i] == doctest::Approx(best).epsilon(1e-12));
    sum += best * best;
  }
  const double brute = std::sqrt(sum / probe.num_vertices()) / bbox_diagonal(ref);
  CHECK(std::abs(hausdorff_rmse(ref, probe) - brute) <= 1e-12 * brute);

  CHECK_THROWS_AS(hausdorff_rmse(TriMesh{}, disk.mesh), MeshError);
}

TEST_CASE("oriented bounding box") {
  std::vector<Vec3> corners;
  for (int sx : {-1, 1}) {
    for (int sy : {-1, 1}) {
      for (int sz : {-1, 1}) corners.emplace_back(sx * 1.0, sy * 2.0, sz * 3.0);
    }
  }
  const ObbFit box = obb_fit(corners);
  CHECK(box.half_lengths.x() == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(box.half_lengths.y() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(box.half_lengths.z() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(box.rotation.determinant() == doctest::Approx(1.0));

  const Eigen::Matrix3d rot =
      (Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()) * Eigen::AngleAxisd(-1.3, Vec3::UnitX())).toRotationMatrix();
  std::vector<Vec3> moved;
  for (const Vec3& c : corners) moved.push_back(rot * c + Vec3(4, -2, 9));
  const ObbFit box2 = obb_fit(moved);
  CHECK((box2.half_lengths - box.half_lengths).norm() < 1e-10);
  CHECK((box2.center - Vec3(4, -2, 9)).norm() < 1e-10);

  const TriMesh cap = cap_mesh({10.0, 1.0}, 0.02).mesh;
  const ObbFit fit = obb_fit(cap.vertices);
  for (int axis = 0; axis < 3; ++axis) {
    double lo = 1e300;
    double hi = -1e300;
    for (const Vec3& v : cap.vertices) {
      const double s = fit.rotation.col(axis).dot(v);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    CHECK(fit.half_lengths[axis] == doctest::Approx(0.5 * (hi - lo)).epsilon(1e-12));
  }
  const double s = std::sin(10.0 * M_PI / 180.0);
  CHECK(fit.half_lengths.x() == doctest::Approx(s).epsilon(1e-3));
  CHECK(fit.half_lengths.y() == doctest::Approx(s).epsilon(2e-3));
  CHECK(fit.half_lengths.z() == doctest::Approx((1 - std::cos(10.0 * M_PI / 180.0)) / 2).epsilon(1e-3));

  CHECK_THROWS_AS(obb_fit(std::vector<Vec3>{Vec3::Zero()}), NumericError);
}

TEST_CASE("angular distortion") {
  const DiskMesh disk = uniform_disk_mesh(0.05);
  CHECK(angular_distortion(disk.mesh, disk.mesh) == 0.0);
  TriMesh scaled = disk.mesh;
  for (Vec3& v : scaled.vertices) v *= 3.7;
  CHECK(angular_distortion(disk.mesh, scaled) < 1e-10);

  const CapSpec spec{10.0, 0.35};
  const TriMesh cap = cap_mesh(spec, 0.05).mesh;
  const double d = angular_distortion(disk.mesh, cap);
  // Corner angles recomputed from dot products.
  auto angle = [](const Vec3& p, const Vec3& q, const Vec3& r) {
    const Vec3 u = (q - p).normalized();
    const Vec3 v = (r - p).normalized();
    return std::acos(std::clamp(u.dot(v), -1.0, 1.0));
  };
  double sum = 0.0;
  for (const Face& f : disk.mesh.faces) {
    for (int c = 0; c < 3; ++c) {
      const int i = f[c];
      const int j = f[(c + 1) % 3];
      const int k = f[(c + 2) % 3];
      sum += std::abs(angle(disk.mesh.vertices[i], disk.mesh.vertices[j], disk.mesh.vertices[k]) -
                      angle(cap.vertices[i], cap.vertices[j], cap.vertices[k]));
    }
  }
  const double brute = sum / (3.0 * disk.mesh.num_faces()) * 180.0 / M_PI;
  CHECK(d == doctest::Approx(brute).epsilon(1e-9));
  CHECK(d < 1.0);

  TriMesh other = disk.mesh;
  other.faces.pop_back();
  CHECK_THROWS_AS(angular_distortion(disk.mesh, other), MeshError);
}

TEST_CASE("geometry helpers") {
  TriMesh tri;
  tri.vertices = {Vec3(0, 0, 0), Vec3(3, 0, 0), Vec3(0, 4, 0)};
  tri.faces = {{0, 1, 2}};
  CHECK(total_area(tri) == 6.0);
  CHECK(bbox_diagonal(tri) == 5.0);
  CHECK(mean_edge_length(tri) == doctest::Approx(4.0));
  const auto ang = corner_angles(tri, 0);
  CHECK(ang[0] == doctest::Approx(M_PI / 2));
  CHECK(ang[0] + ang[1] + ang[2] == doctest::Approx(M_PI));
}
