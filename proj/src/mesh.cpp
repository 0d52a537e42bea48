#include "diskharm/mesh.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "diskharm/error.hpp"

namespace dh {

namespace {

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

struct EdgeInfo {
  int faces = 0;
  bool forward_seen = false;   // a->b with a < b appears in some face
  bool backward_seen = false;  // b->a appears in some face
};

// Undirected edge table keyed by (min, max).
std::unordered_map<std::uint64_t, EdgeInfo> build_edges(const TriMesh& mesh) {
  std::unordered_map<std::uint64_t, EdgeInfo> edges;
  edges.reserve(mesh.faces.size() * 2);
  for (const Face& f : mesh.faces) {
    for (int c = 0; c < 3; ++c) {
      const int a = f[c];
      const int b = f[(c + 1) % 3];
      EdgeInfo& e = edges[edge_key(std::min(a, b), std::max(a, b))];
      ++e.faces;
      (a < b ? e.forward_seen : e.backward_seen) = true;
    }
  }
  return edges;
}

}  // namespace

void check_faces(const TriMesh& mesh) {
  const auto nv = static_cast<int>(mesh.vertices.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    for (int idx : mesh.faces[f]) {
      if (idx < 0 || idx >= nv) {
        std::ostringstream msg;
        msg << "face " << f << " references vertex " << idx << " outside [0, " << nv << ")";
        throw MeshError(msg.str());
      }
    }
    const Face& t = mesh.faces[f];
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      throw MeshError("face " + std::to_string(f) + " repeats a vertex");
    }
  }
  if (mesh.faces.empty()) return;
  const double diag = bbox_diagonal(mesh);
  const double min_area = 1e-14 * diag * diag;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    if (face_area(mesh, f) < min_area) {
      throw MeshError("face " + std::to_string(f) + " is degenerate (zero area)");
    }
  }
}

std::size_t count_boundary_edges(const TriMesh& mesh) {
  const auto edges = build_edges(mesh);
  return static_cast<std::size_t>(
      std::count_if(edges.begin(), edges.end(), [](const auto& kv) { return kv.second.faces == 1; }));
}

std::vector<int> boundary_loop(const TriMesh& mesh) {
  const auto edges = build_edges(mesh);
  std::unordered_map<int, int> next;
  for (const auto& [key, info] : edges) {
    if (info.faces > 2) throw MeshError("non-manifold edge shared by more than two faces");
    if (info.faces == 2 && !(info.forward_seen && info.backward_seen)) {
      throw MeshError("inconsistent face orientation across an edge");
    }
    if (info.faces != 1) continue;
    const int lo = static_cast<int>(key >> 32);
    const int hi = static_cast<int>(key & 0xffffffffu);
    const int from = info.forward_seen ? lo : hi;
    const int to = info.forward_seen ? hi : lo;
    if (!next.emplace(from, to).second) {
      throw MeshError("non-manifold boundary vertex " + std::to_string(from));
    }
  }
  if (next.empty()) throw MeshError("not an open surface");

  // Start from the smallest boundary vertex so the result is deterministic.
  int start = std::numeric_limits<int>::max();
  for (const auto& kv : next) start = std::min(start, kv.first);

  std::vector<int> loop{start};
  int v = next.at(start);
  while (v != start) {
    if (loop.size() > next.size()) throw MeshError("broken boundary loop");
    loop.push_back(v);
    const auto it = next.find(v);
    if (it == next.end()) throw MeshError("broken boundary loop");
    v = it->second;
  }
  if (loop.size() != next.size()) throw MeshError("not single-edge genus-0 (multiple boundary loops)");
  return loop;
}

void validate_open_disk(const TriMesh& mesh) {
  if (mesh.faces.empty()) throw MeshError("mesh has no faces");
  check_faces(mesh);
  boundary_loop(mesh);

  // Connectivity over faces (union-find on vertices) and unused vertices.
  std::vector<int> parent(mesh.vertices.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<char> used(mesh.vertices.size(), 0);
  for (const Face& f : mesh.faces) {
    for (int c = 0; c < 3; ++c) {
      used[f[c]] = 1;
      parent[find(f[c])] = find(f[(c + 1) % 3]);
    }
  }
  int components = 0;
  for (std::size_t i = 0; i < parent.size(); ++i) {
    if (!used[i]) throw MeshError("vertex " + std::to_string(i) + " is not used by any face");
    if (find(static_cast<int>(i)) == static_cast<int>(i)) ++components;
  }
  if (components != 1) throw MeshError("mesh is not connected");

  const auto edges = build_edges(mesh);
  const long chi = static_cast<long>(mesh.vertices.size()) - static_cast<long>(edges.size()) +
                   static_cast<long>(mesh.faces.size());
  if (chi != 1) throw MeshError("not single-edge genus-0 (Euler characteristic " + std::to_string(chi) + ")");
}

double face_area(const TriMesh& mesh, std::size_t f) {
  const Face& t = mesh.faces[f];
  const Vec3& a = mesh.vertices[t[0]];
  return 0.5 * (mesh.vertices[t[1]] - a).cross(mesh.vertices[t[2]] - a).norm();
}

std::vector<double> face_areas(const TriMesh& mesh) {
  std::vector<double> out(mesh.faces.size());
  for (std::size_t f = 0; f < out.size(); ++f) out[f] = face_area(mesh, f);
  return out;
}

double total_area(const TriMesh& mesh) {
  double sum = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) sum += face_area(mesh, f);
  return sum;
}

double bbox_diagonal(const TriMesh& mesh) {
  if (mesh.vertices.empty()) return 0.0;
  Vec3 lo = mesh.vertices.front();
  Vec3 hi = lo;
  for (const Vec3& v : mesh.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return (hi - lo).norm();
}

double mean_edge_length(const TriMesh& mesh) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const Face& f : mesh.faces) {
    for (int c = 0; c < 3; ++c) {
      sum += (mesh.vertices[f[c]] - mesh.vertices[f[(c + 1) % 3]]).norm();
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

std::array<double, 3> corner_angles(const TriMesh& mesh, std::size_t f) {
  const Face& t = mesh.faces[f];
  std::array<double, 3> out{};
  for (int c = 0; c < 3; ++c) {
    const Vec3& p = mesh.vertices[t[c]];
    const Vec3 u = mesh.vertices[t[(c + 1) % 3]] - p;
    const Vec3 v = mesh.vertices[t[(c + 2) % 3]] - p;
    out[c] = std::atan2(u.cross(v).norm(), u.dot(v));
  }
  return out;
}

}  // namespace dh
