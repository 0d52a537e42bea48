#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "diskharm/basis.hpp"
#include "diskharm/disk_mesh.hpp"
#include "diskharm/harmonic.hpp"

namespace dh {

/// Isotropic power law. Wavevector magnitudes are in cycles per grid side,
/// so q_s = n / 2 is the Nyquist frequency.
struct PowerLawSpec {
  double H = 0.8;
  double q_r = 0.0;
  double q_l = 4.0;
  double q_s = 256.0;
  double rms = 1.0;
  std::uint64_t seed = 0;
  int n = 512;
  /// Physical side length; grid spacing is extent / n.
  double extent = 512.0;
  /// Multiply amplitudes by unit-power Rayleigh noise (phases are always random).
  bool rayleigh_amplitudes = false;

  void validate() const;
};

/// n x n heights, row-major (h[iy * n + ix]).
struct HeightGrid {
  int n = 0;
  double extent = 0.0;
  bool periodic = true;
  std::vector<double> h;

  [[nodiscard]] double at(int ix, int iy) const { return h[static_cast<std::size_t>(iy) * n + ix]; }
  [[nodiscard]] double spacing() const { return extent / n; }
};

double iso_power_law(double q, const PowerLawSpec& spec);

/// Fourier-filter synthesis with amplitudes sqrt(C(q)) and uniform random phases.
HeightGrid generate_surface(const PowerLawSpec& spec);

/// Largest inscribed circular patch: the grid nodes with
/// (x - c)^2 + (y - c)^2 <= r^2 for c = r = (n - 1) / 2 node spacings.
/// Vertices are (x, y, h) in physical units; disk coordinates are
/// ((x - c) / r, (y - c) / r).
DiskMesh sample_circular_patch(const HeightGrid& grid);

/// Circular patch of radius `radius_nodes` node spacings centred at node
/// (cx, cy); the disk must lie within the grid.
DiskMesh sample_circular_patch(const HeightGrid& grid, double cx, double cy, double radius_nodes);

/// Whole grid as a square patch, scaled so the square is inscribed in the
/// unit disk.
DiskMesh sample_square_patch(const HeightGrid& grid);

/// Copy of the patch scaled so its (x, y) coincide with the disk
/// coordinates; heights are scaled by the same factor.
TriMesh unit_disk_patch(const DiskMesh& patch);

enum class PsdAxis { X, Y, Z, NormalizedResultant };

PsdAxis parse_psd_axis(const std::string& name);
std::string to_string(PsdAxis axis);

struct PowerFit {
  bool valid = false;
  double slope = 0.0;
  double intercept = 0.0;
  double H = 0.0;
  int k_min = 0;
  int k_max = 0;
  int n_excluded = 0;
  int n_points = 0;
};

struct Spectrum {
  std::vector<double> lambda;  // l(0)_k
  std::vector<double> psd;
  std::vector<char> included;
  PowerFit fit;
};

/// m = 0 power spectrum |q_0^k|^2 on one axis, or the curvature-normalized
/// resultant sum_i |q'_{0,i}^k|^2 / hat D'_{1,i}^2 in the principal frame.
Spectrum psd_m0(const HarmonicCoeffs& coeffs, const EigenTable& table, PsdAxis axis);

/// Log-log least squares over k_min <= k <= k_max, leaving out points below
/// floor * (largest PSD in the range). H = -slope / 2 - 3 / 4.
Spectrum fit_hurst(const Spectrum& spectrum, int k_min, int k_max, double floor = 1e-8);

/// Ordinary least squares of log(y) on log(x).
PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

void write_spectrum_csv(const Spectrum& s, std::ostream& out);
void write_fit_json(const PowerFit& fit, std::ostream& out);

/// Writes <base>.f32 (little-endian float32, row-major), <base>.json sidecar
/// and <base>.obj.
void save_height_grid(const HeightGrid& grid, const PowerLawSpec& spec, const std::filesystem::path& base);
HeightGrid load_height_grid(const std::filesystem::path& base);

/// Full grid triangulated (vertices (x, y, h)).
TriMesh height_grid_mesh(const HeightGrid& grid);

}  // namespace dh
