#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dh {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;

/// Indexed triangle mesh. Faces are counter-clockwise when seen from the
/// side the surface normal points to.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  /// Optional per-vertex scalar attributes (e.g. "height").
  std::map<std::string, std::vector<double>> scalars;

  [[nodiscard]] std::size_t num_vertices() const { return vertices.size(); }
  [[nodiscard]] std::size_t num_faces() const { return faces.size(); }
};

/// Oriented bounding box from PCA. Half-lengths are sorted a >= b >= c and
/// rotation column i is the axis of half_lengths[i].
struct ObbFit {
  Vec3 half_lengths = Vec3::Zero();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Vec3 center = Vec3::Zero();
};

// ---- I/O -------------------------------------------------------------------

/// Loads a Wavefront OBJ or PLY (ascii / binary_little_endian) file.
/// Throws MeshError with a line number or face index on malformed input.
TriMesh load_mesh(const std::filesystem::path& path);
TriMesh read_obj(std::istream& in);
TriMesh read_ply(std::istream& in);

/// Writes `v x y z` / `f i j k` records with 9 significant digits.
void save_obj(const TriMesh& mesh, const std::filesystem::path& path);
void write_obj(const TriMesh& mesh, std::ostream& out);

// ---- validation and topology ----------------------------------------------

/// Index range and zero-area checks. Faces with area below
/// 1e-14 * (bbox diagonal)^2 are rejected.
void check_faces(const TriMesh& mesh);

/// Ordered boundary vertices of a single-boundary open surface. The loop
/// follows the face orientation, so the interior lies to its left.
std::vector<int> boundary_loop(const TriMesh& mesh);

/// Full check for analysis input: valid faces, manifold, connected, one
/// boundary loop and Euler characteristic 1.
void validate_open_disk(const TriMesh& mesh);

/// Number of undirected edges incident to exactly one face.
std::size_t count_boundary_edges(const TriMesh& mesh);

// ---- geometry ---------------------------------------------------------------

double face_area(const TriMesh& mesh, std::size_t f);
std::vector<double> face_areas(const TriMesh& mesh);
double total_area(const TriMesh& mesh);
double bbox_diagonal(const TriMesh& mesh);
double mean_edge_length(const TriMesh& mesh);

/// Interior angles (radians) at the three corners of face f.
std::array<double, 3> corner_angles(const TriMesh& mesh, std::size_t f);

/// Closest point on triangle (a, b, c) to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// RMS of the distances from the vertices of `reconstructed` to the surface of
/// `reference`, divided by the reference's axis-aligned bounding-box diagonal.
/// With `symmetric`, the larger of both directed values is returned.
double hausdorff_rmse(const TriMesh& reference, const TriMesh& reconstructed, bool symmetric = false);

/// Point-to-surface distance for every query point (AABB-tree accelerated).
std::vector<double> point_to_surface_distances(const TriMesh& surface, std::span<const Vec3> points);

ObbFit obb_fit(std::span<const Vec3> points);

/// Mean absolute difference of corner angles between two meshes with the same
/// connectivity, in degrees.
double angular_distortion(const TriMesh& source, const TriMesh& target);

}  // namespace dh
