#include "diskharm/disk_mesh.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dh {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

DiskMesh uniform_disk_mesh(double edge_length) {
  if (!(edge_length > 0.0 && edge_length < 1.0)) {
    throw std::invalid_argument("uniform_disk_mesh: edge length must lie in (0, 1)");
  }
  const double projected = kPi / (std::sqrt(3.0) / 4.0 * edge_length * edge_length);
  if (projected > 5e6) {
    throw std::invalid_argument("uniform_disk_mesh: edge length " + std::to_string(edge_length) +
                                " gives more than 5e6 vertices");
  }
  const int rings = std::max(1, static_cast<int>(std::lround(1.0 / (edge_length * std::sqrt(3.0) / 2.0))));
  const double dr = 1.0 / rings;

  DiskMesh out;
  std::vector<int> start{0};
  std::vector<int> count{1};
  out.mesh.vertices.emplace_back(0.0, 0.0, 0.0);
  for (int i = 1; i <= rings; ++i) {
    const double r = i * dr;
    const int n = std::max(6, static_cast<int>(std::lround(2.0 * kPi * r / edge_length)));
    start.push_back(static_cast<int>(out.mesh.vertices.size()));
    count.push_back(n);
    const double shift = (i % 2) * 0.5;
    for (int j = 0; j < n; ++j) {
      const double t = 2.0 * kPi * (j + shift) / n;
      out.mesh.vertices.emplace_back(r * std::cos(t), r * std::sin(t), 0.0);
    }
  }

  auto angle = [&](int ring, int j) { return 2.0 * kPi * (j + (ring % 2) * 0.5) / count[ring]; };
  for (int j = 0; j < count[1]; ++j) out.mesh.faces.push_back({0, start[1] + j, start[1] + (j + 1) % count[1]});
  for (int i = 2; i <= rings; ++i) {
    const int p = count[i - 1];
    const int q = count[i];
    int a = 0;
    int b = 0;
    // Angles are unwrapped so both rings end one full turn after they start.
    auto inner = [&](int k) { return angle(i - 1, 0) + 2.0 * kPi * k / p; };
    auto outer = [&](int k) { return angle(i, 0) + 2.0 * kPi * k / q; };
    while (a < p || b < q) {
      const bool advance_outer = a == p || (b < q && outer(b + 1) < inner(a + 1));
      const int va = start[i - 1] + a % p;
      const int vb = start[i] + b % q;
      if (advance_outer) {
        out.mesh.faces.push_back({va, vb, start[i] + (b + 1) % q});
        ++b;
      } else {
        out.mesh.faces.push_back({va, vb, start[i - 1] + (a + 1) % p});
        ++a;
      }
    }
  }

  out.param.uv.reserve(out.mesh.vertices.size());
  for (const Vec3& v : out.mesh.vertices) out.param.uv.emplace_back(v.x(), v.y());
  out.param.is_boundary.assign(out.mesh.vertices.size(), 0);
  for (int j = 0; j < count[rings]; ++j) out.param.is_boundary[start[rings] + j] = 1;
  return out;
}

std::vector<Vec2> sunflower_points(std::size_t n) {
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  std::vector<Vec2> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::sqrt((i + 0.5) / static_cast<double>(n));
    const double t = golden * static_cast<double>(i);
    pts[i] = Vec2(r * std::cos(t), r * std::sin(t));
  }
  return pts;
}

}  // namespace dh
