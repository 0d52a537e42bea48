#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "diskharm/error.hpp"
#include "diskharm/mesh.hpp"

namespace dh {

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Region classification (Ericson, Real-Time Collision Detection 5.1.5).
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + ab * (d1 / (d1 - d3));

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + ac * (d2 / (d2 - d6));

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

namespace {

struct Box {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());
  void grow(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void grow(const Box& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  [[nodiscard]] double dist2(const Vec3& p) const {
    const Vec3 d = (lo - p).cwiseMax(p - hi).cwiseMax(0.0);
    return d.squaredNorm();
  }
};

// Bounding volume hierarchy over triangles, median split on the longest axis.
class TriangleTree {
 public:
  explicit TriangleTree(const TriMesh& mesh) : mesh_(mesh) {
    order_.resize(mesh.faces.size());
    std::iota(order_.begin(), order_.end(), 0);
    centroids_.reserve(mesh.faces.size());
    for (const Face& f : mesh.faces) {
      centroids_.push_back((mesh.vertices[f[0]] + mesh.vertices[f[1]] + mesh.vertices[f[2]]) / 3.0);
    }
    nodes_.reserve(2 * mesh.faces.size() / kLeaf + 2);
    build(0, static_cast<int>(order_.size()));
  }

  [[nodiscard]] double distance(const Vec3& p) const {
    double best = std::numeric_limits<double>::infinity();
    query(0, p, best);
    return std::sqrt(best);
  }

 private:
  static constexpr int kLeaf = 4;

  struct Node {
    Box box;
    int begin = 0;
    int end = 0;
    int left = -1;
    int right = -1;
  };

  int build(int begin, int end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    Box box;
    Box cbox;
    for (int i = begin; i < end; ++i) {
      const Face& f = mesh_.faces[order_[i]];
      for (int v : f) box.grow(mesh_.vertices[v]);
      cbox.grow(centroids_[order_[i]]);
    }
    nodes_[id].box = box;
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    if (end - begin <= kLeaf) return id;

    int axis = 0;
    (cbox.hi - cbox.lo).maxCoeff(&axis);
    const int mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, [&](int a, int b) {
      const double ca = centroids_[a][axis];
      const double cb = centroids_[b][axis];
      return ca < cb || (ca == cb && a < b);
    });
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  void query(int id, const Vec3& p, double& best) const {
    const Node& node = nodes_[id];
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const Face& f = mesh_.faces[order_[i]];
        const Vec3 q = closest_point_on_triangle(p, mesh_.vertices[f[0]], mesh_.vertices[f[1]], mesh_.vertices[f[2]]);
        best = std::min(best, (q - p).squaredNorm());
      }
      return;
    }
    const double dl = nodes_[node.left].box.dist2(p);
    const double dr = nodes_[node.right].box.dist2(p);
    const int first = dl <= dr ? node.left : node.right;
    const int second = dl <= dr ? node.right : node.left;
    if (std::min(dl, dr) < best) query(first, p, best);
    if (std::max(dl, dr) < best) query(second, p, best);
  }

  const TriMesh& mesh_;
  std::vector<int> order_;
  std::vector<Vec3> centroids_;
  std::vector<Node> nodes_;
};

double directed_rms(const TriMesh& reference, const TriMesh& query) {
  const auto d = point_to_surface_distances(reference, query.vertices);
  double sum = 0.0;
  for (double x : d) sum += x * x;
  return std::sqrt(sum / static_cast<double>(d.size()));
}

}  // namespace

std::vector<double> point_to_surface_distances(const TriMesh& surface, std::span<const Vec3> points) {
  if (surface.faces.empty()) throw MeshError("distance query against a mesh without faces");
  const TriangleTree tree(surface);
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = tree.distance(points[i]);
  return out;
}

double hausdorff_rmse(const TriMesh& reference, const TriMesh& reconstructed, bool symmetric) {
  if (reference.faces.empty() || reference.vertices.empty() || reconstructed.vertices.empty()) {
    throw MeshError("hausdorff_rmse: empty mesh");
  }
  const double diag = bbox_diagonal(reference);
  if (diag <= 0.0) throw NumericError("hausdorff_rmse: reference bounding box has zero diagonal");
  double rms = directed_rms(reference, reconstructed);
  if (symmetric) {
    if (reconstructed.faces.empty()) throw MeshError("hausdorff_rmse: symmetric mode needs faces on both meshes");
    rms = std::max(rms, directed_rms(reconstructed, reference));
  }
  return rms / diag;
}

ObbFit obb_fit(std::span<const Vec3> points) {
  if (points.size() < 2) throw NumericError("obb_fit needs at least 2 points");
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Vec3& p : points) {
    const Vec3 d = p - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(points.size());

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const Eigen::Matrix3d axes = eig.eigenvectors();
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const Vec3& p : points) {
    const Vec3 local = axes.transpose() * (p - mean);
    lo = lo.cwiseMin(local);
    hi = hi.cwiseMax(local);
  }
  const Vec3 half = 0.5 * (hi - lo);
  const Vec3 mid = 0.5 * (hi + lo);

  std::array<int, 3> idx{0, 1, 2};
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return half[a] > half[b]; });

  ObbFit fit;
  for (int i = 0; i < 3; ++i) {
    fit.half_lengths[i] = half[idx[i]];
    fit.rotation.col(i) = axes.col(idx[i]);
  }
  fit.rotation.col(2) = fit.rotation.col(0).cross(fit.rotation.col(1)).normalized();
  fit.center = mean + axes * mid;
  return fit;
}

double angular_distortion(const TriMesh& source, const TriMesh& target) {
  if (source.faces != target.faces) throw MeshError("angular_distortion: face connectivity differs");
  if (source.faces.empty()) throw MeshError("angular_distortion: mesh has no faces");
  double sum = 0.0;
  for (std::size_t f = 0; f < source.faces.size(); ++f) {
    const auto a = corner_angles(source, f);
    const auto b = corner_angles(target, f);
    for (int c = 0; c < 3; ++c) sum += std::abs(b[c] - a[c]);
  }
  return sum / (3.0 * static_cast<double>(source.faces.size())) * 180.0 / M_PI;
}

}  // namespace dh
