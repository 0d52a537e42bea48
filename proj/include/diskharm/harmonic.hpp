#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "diskharm/basis.hpp"
#include "diskharm/disk_mesh.hpp"
#include "diskharm/disk_param.hpp"
#include "diskharm/mesh.hpp"

namespace dh {

using CVec3 = Eigen::Vector3cd;

/// Coefficients q_m^k (one complex value per Cartesian axis) stored at
/// index k^2 + k + m.
struct HarmonicCoeffs {
  int k_max = 0;
  BoundaryCondition bc = BoundaryCondition::Neumann;
  std::vector<CVec3> q;
  Vec3 residual = Vec3::Zero();   // ||B Q - V|| per axis
  double condition = 0.0;         // estimate for the design matrix B
  std::string solver;
  std::vector<std::string> warnings;

  static std::size_t index(int k, int m) { return static_cast<std::size_t>(k * k + k + m); }
  [[nodiscard]] const CVec3& at(int k, int m) const { return q.at(index(k, m)); }
  CVec3& at(int k, int m) { return q.at(index(k, m)); }
};

/// Zero coefficient set of degree k_max.
HarmonicCoeffs make_coeffs(int k_max, BoundaryCondition bc);

enum class LsqSolver { Auto, QR, NormalEquations };

struct AnalyzeOptions {
  /// Weight every vertex by its barycentric dual area on the disk.
  bool voronoi_weights = false;
  LsqSolver solver = LsqSolver::Auto;
};

/// Least-squares fit of the truncated expansion to the mesh coordinates.
HarmonicCoeffs analyze(const TriMesh& mesh, const DiskParam& param, const EigenTable& table,
                       const AnalyzeOptions& opts = {});
HarmonicCoeffs analyze(const TriMesh& mesh, const DiskParam& param, int k_max, BoundaryCondition bc,
                       const AnalyzeOptions& opts = {});

/// Fit of arbitrary samples `values` located at `disk_points` (Cartesian
/// coordinates in the unit disk). Empty `weights` means unweighted.
HarmonicCoeffs analyze_samples(std::span<const Vec3> values, std::span<const Vec2> disk_points,
                               std::span<const double> weights, const EigenTable& table,
                               LsqSolver solver = LsqSolver::Auto);

/// Real part of the truncated series sum_{k <= k_upto} q_m^k D_m^k.
std::vector<Vec3> synthesize(const HarmonicCoeffs& coeffs, const EigenTable& table,
                             std::span<const Vec2> disk_points, int k_upto);

/// Truncated reconstruction evaluated on the vertices of `grid`.
TriMesh reconstruct(const HarmonicCoeffs& coeffs, const EigenTable& table, const DiskMesh& grid, int k_upto);

/// Coefficients expressed in the frame whose columns are `frame`
/// (q' = frame^T q per (k, m)).
HarmonicCoeffs rotate_coeffs(const HarmonicCoeffs& coeffs, const Eigen::Matrix3d& frame);

struct Descriptors {
  std::vector<Vec3> per_axis;        // hat D_{k,i}
  std::vector<double> resultant;     // hat D_k
  std::vector<double> normalized;    // D_k, NaN for k <= 1
  std::array<bool, 3> axis_available{true, true, true};
  Eigen::Matrix3d frame = Eigen::Matrix3d::Identity();
  std::vector<std::string> warnings;
};

/// Rotation-invariant amplitudes and the curvature-normalized sequence in the
/// principal frame of the first-degree cap.
Descriptors descriptors(const HarmonicCoeffs& coeffs, const EigenTable& table);

/// CSV `k,Dx,Dy,Dz,D,Dnorm`.
void write_descriptors_csv(const Descriptors& d, std::ostream& out);

enum class FdecMethod { Eigenproblem, ObbAtK };

/// First-degree ellipsoidal cap: in-plane half-axes a >= b, depth c.
struct FdecFit {
  FdecMethod method = FdecMethod::ObbAtK;
  int k = 1;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  Vec3 v_a = Vec3::UnitX();
  Vec3 v_b = Vec3::UnitY();

  /// Full in-plane extent a + b (twice the mean half-axis).
  [[nodiscard]] double a_avg() const { return a + b; }
  /// Curvature of the spherical cap with half-width (a + b) / 2 and depth c.
  [[nodiscard]] double kappa() const;
  [[nodiscard]] Eigen::Matrix3d frame() const;
};

FdecFit fdec_fit(const HarmonicCoeffs& coeffs, const EigenTable& table, FdecMethod method = FdecMethod::ObbAtK,
                 int k = 5, double edge_length = 0.025);

std::string to_string(FdecMethod method);

/// JSON {k_max, bc, axes, coeffs:[{k, m, re:[3], im:[3]}]}, 15 significant digits.
void write_coeffs_json(const HarmonicCoeffs& coeffs, std::ostream& out);
HarmonicCoeffs read_coeffs_json(std::istream& in);

}  // namespace dh
