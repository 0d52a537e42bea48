#include "diskharm/fractal.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

#include <fftw3.h>
#include <json.hpp>

#include "diskharm/error.hpp"

namespace dh {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Uniform double in [0, 1) from the top 53 bits; std distributions are not
// reproducible across standard libraries.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

void PowerLawSpec::validate() const {
  if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("H must lie in (0, 1)");
  if (!(q_r >= 0.0 && q_r <= q_l && q_l < q_s)) throw std::invalid_argument("require 0 <= q_r <= q_l < q_s");
  if (!(rms > 0.0)) throw std::invalid_argument("rms must be positive");
  if (n < 64 || (n & (n - 1)) != 0) throw std::invalid_argument("n must be a power of two >= 64");
  if (!(extent > 0.0)) throw std::invalid_argument("extent must be positive");
}

double iso_power_law(double q, const PowerLawSpec& spec) {
  if (q < spec.q_r || q >= spec.q_s) return 0.0;
  const double e = -2.0 * (1.0 + spec.H);
  if (q <= spec.q_l) return std::pow(spec.q_l, e);
  return std::pow(q, e);
}

HeightGrid generate_surface(const PowerLawSpec& spec) {
  spec.validate();
  const int n = spec.n;
  const int nh = n / 2 + 1;
  std::mt19937_64 rng(spec.seed);

  std::vector<std::complex<double>> spec_half(static_cast<std::size_t>(n) * nh);
  auto cell = [&](int iy, int ix) -> std::complex<double>& { return spec_half[static_cast<std::size_t>(iy) * nh + ix]; };
  for (int iy = 0; iy < n; ++iy) {
    const int fy = iy <= n / 2 ? iy : iy - n;
    for (int ix = 0; ix < nh; ++ix) {
      const double q = std::hypot(static_cast<double>(ix), static_cast<double>(fy));
      double amp = std::sqrt(iso_power_law(q, spec));
      const double phase = 2.0 * kPi * uniform01(rng);
      if (spec.rayleigh_amplitudes) amp *= std::sqrt(-std::log(1.0 - uniform01(rng)));
      cell(iy, ix) = std::polar(amp, phase);
    }
  }
  cell(0, 0) = 0.0;
  // Columns kx = 0 and kx = n/2 hold their own conjugate partners.
  for (int ix : {0, n / 2}) {
    for (int iy = n / 2 + 1; iy < n; ++iy) cell(iy, ix) = std::conj(cell(n - iy, ix));
    cell(0, ix) = cell(0, ix).real();
    cell(n / 2, ix) = cell(n / 2, ix).real();
  }

  HeightGrid grid;
  grid.n = n;
  grid.extent = spec.extent;
  grid.periodic = true;
  grid.h.resize(static_cast<std::size_t>(n) * n);
  fftw_plan plan = fftw_plan_dft_c2r_2d(n, n, reinterpret_cast<fftw_complex*>(spec_half.data()), grid.h.data(),
                                        FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  double mean = 0.0;
  for (double v : grid.h) mean += v;
  mean /= static_cast<double>(grid.h.size());
  double ss = 0.0;
  for (double& v : grid.h) {
    v -= mean;
    ss += v * v;
  }
  const double rms = std::sqrt(ss / static_cast<double>(grid.h.size()));
  if (!(rms > 0.0)) throw NumericError("generated surface is flat; check q_l and q_s");
  const double scale = spec.rms / rms;
  for (double& v : grid.h) v *= scale;
  return grid;
}

namespace {

DiskMesh patch_from_mask(const HeightGrid& grid, const std::vector<char>& inside, double cx, double cy,
                         double scale) {
  const int n = grid.n;
  const double dx = grid.spacing();
  std::vector<int> id(inside.size(), -1);
  DiskMesh out;
  auto node = [n](int ix, int iy) { return static_cast<std::size_t>(iy) * n + ix; };
  auto in = [&](int ix, int iy) { return ix >= 0 && iy >= 0 && ix < n && iy < n && inside[node(ix, iy)]; };

  std::vector<std::array<std::pair<int, int>, 3>> tris;
  for (int iy = 0; iy + 1 < n; ++iy) {
    for (int ix = 0; ix + 1 < n; ++ix) {
      const std::pair<int, int> a{ix, iy}, b{ix + 1, iy}, c{ix + 1, iy + 1}, d{ix, iy + 1};
      const bool ia = in(ix, iy), ib = in(ix + 1, iy), ic = in(ix + 1, iy + 1), id_ = in(ix, iy + 1);
      const int count = ia + ib + ic + id_;
      if (count == 4) {
        tris.push_back({a, b, c});
        tris.push_back({a, c, d});
      } else if (count == 3) {
        if (!id_) tris.push_back({a, b, c});
        if (!ia) tris.push_back({b, c, d});
        if (!ib) tris.push_back({a, c, d});
        if (!ic) tris.push_back({a, b, d});
      }
    }
  }
  // Only nodes used by a triangle become vertices, in row-major node order.
  std::vector<char> used(inside.size(), 0);
  for (const auto& t : tris) {
    for (const auto& [ix, iy] : t) used[node(ix, iy)] = 1;
  }
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      if (!used[node(ix, iy)]) continue;
      id[node(ix, iy)] = static_cast<int>(out.mesh.vertices.size());
      out.mesh.vertices.emplace_back(ix * dx, iy * dx, grid.at(ix, iy));
      out.param.uv.emplace_back((ix - cx) / scale, (iy - cy) / scale);
    }
  }
  for (const auto& t : tris) {
    out.mesh.faces.push_back({id[node(t[0].first, t[0].second)], id[node(t[1].first, t[1].second)],
                              id[node(t[2].first, t[2].second)]});
  }
  out.param.is_boundary.assign(out.mesh.vertices.size(), 0);
  for (int v : boundary_loop(out.mesh)) out.param.is_boundary[v] = 1;
  return out;
}

}  // namespace

DiskMesh sample_circular_patch(const HeightGrid& grid, double cx, double cy, double radius_nodes) {
  if (grid.n <= 1) throw std::invalid_argument("empty height grid");
  if (cx - radius_nodes < 0.0 || cy - radius_nodes < 0.0 || cx + radius_nodes > grid.n - 1 ||
      cy + radius_nodes > grid.n - 1) {
    throw std::invalid_argument("circular patch exceeds the grid");
  }
  std::vector<char> inside(static_cast<std::size_t>(grid.n) * grid.n, 0);
  const double r2 = radius_nodes * radius_nodes;
  for (int iy = 0; iy < grid.n; ++iy) {
    for (int ix = 0; ix < grid.n; ++ix) {
      const double dx = ix - cx;
      const double dy = iy - cy;
      inside[static_cast<std::size_t>(iy) * grid.n + ix] = dx * dx + dy * dy <= r2;
    }
  }
  return patch_from_mask(grid, inside, cx, cy, radius_nodes);
}

DiskMesh sample_circular_patch(const HeightGrid& grid) {
  const double c = 0.5 * (grid.n - 1);
  return sample_circular_patch(grid, c, c, c);
}

DiskMesh sample_square_patch(const HeightGrid& grid) {
  if (grid.n <= 1) throw std::invalid_argument("empty height grid");
  const double c = 0.5 * (grid.n - 1);
  std::vector<char> inside(static_cast<std::size_t>(grid.n) * grid.n, 1);
  return patch_from_mask(grid, inside, c, c, c * std::sqrt(2.0));
}

TriMesh unit_disk_patch(const DiskMesh& patch) {
  TriMesh out = patch.mesh;
  // The disk coordinates are an affine image of (x, y); recover the scale
  // from the first two vertices that differ.
  double scale = 0.0;
  for (std::size_t i = 1; i < out.vertices.size() && scale == 0.0; ++i) {
    const double d = (patch.param.uv[i] - patch.param.uv[0]).norm();
    if (d > 0.0) scale = d / (out.vertices[i].head<2>() - out.vertices[0].head<2>()).norm();
  }
  if (!(scale > 0.0)) throw MeshError("unit_disk_patch: patch has no extent");
  for (std::size_t i = 0; i < out.vertices.size(); ++i) {
    out.vertices[i] = Vec3(patch.param.uv[i].x(), patch.param.uv[i].y(), scale * patch.mesh.vertices[i].z());
  }
  return out;
}

PsdAxis parse_psd_axis(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "x") return PsdAxis::X;
  if (s == "y") return PsdAxis::Y;
  if (s == "z") return PsdAxis::Z;
  if (s == "normalized" || s == "resultant") return PsdAxis::NormalizedResultant;
  throw std::invalid_argument("unknown PSD axis '" + name + "' (x, y, z or normalized)");
}

std::string to_string(PsdAxis axis) {
  switch (axis) {
    case PsdAxis::X: return "x";
    case PsdAxis::Y: return "y";
    case PsdAxis::Z: return "z";
    default: return "normalized";
  }
}

Spectrum psd_m0(const HarmonicCoeffs& coeffs, const EigenTable& table, PsdAxis axis) {
  if (table.bc() != coeffs.bc || table.k_max() < coeffs.k_max) {
    throw std::invalid_argument("psd_m0: eigen table does not match the coefficients");
  }
  const int K = coeffs.k_max;
  Spectrum s;
  s.lambda.resize(K + 1);
  s.psd.resize(K + 1);
  s.included.assign(K + 1, 0);
  for (int k = 0; k <= K; ++k) s.lambda[k] = table.l(0, k);

  if (axis != PsdAxis::NormalizedResultant) {
    const int a = axis == PsdAxis::X ? 0 : axis == PsdAxis::Y ? 1 : 2;
    for (int k = 0; k <= K; ++k) s.psd[k] = std::norm(coeffs.at(k, 0)[a]);
    return s;
  }
  if (K < 1) throw NumericError("psd_m0: normalization needs first-degree coefficients");
  const Descriptors d = descriptors(coeffs, table);
  const HarmonicCoeffs rotated = rotate_coeffs(coeffs, d.frame);
  Vec3 first = Vec3::Zero();
  for (int m = -1; m <= 1; ++m) first += rotated.at(1, m).cwiseAbs2();
  if (!(d.axis_available[0] || d.axis_available[1] || d.axis_available[2])) {
    throw NumericError("psd_m0: zero first-degree amplitude on every axis");
  }
  for (int k = 0; k <= K; ++k) {
    double v = 0.0;
    for (int i = 0; i < 3; ++i) {
      if (d.axis_available[i]) v += std::norm(rotated.at(k, 0)[i]) / first[i];
    }
    s.psd[k] = v;
  }
  return s;
}

PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  PowerFit f;
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += std::log(x[i]);
    sy += std::log(y[i]);
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  if (!(sxx > 0.0)) throw NumericError("power-law fit needs at least two distinct abscissae");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.H = -0.5 * f.slope - 0.75;
  f.n_points = static_cast<int>(x.size());
  f.valid = true;
  return f;
}

Spectrum fit_hurst(const Spectrum& spectrum, int k_min, int k_max, double floor) {
  const int K = static_cast<int>(spectrum.psd.size()) - 1;
  if (k_min < 2) throw std::invalid_argument("fit_hurst: k_min must be >= 2");
  if (k_max > K) throw std::invalid_argument("fit_hurst: k_max exceeds the spectrum length");
  if (k_max < k_min) throw std::invalid_argument("fit_hurst: empty fit range");
  Spectrum s = spectrum;
  s.included.assign(K + 1, 0);
  double top = 0.0;
  for (int k = k_min; k <= k_max; ++k) top = std::max(top, s.psd[k]);
  std::vector<double> x, y;
  int excluded = 0;
  for (int k = k_min; k <= k_max; ++k) {
    if (s.psd[k] > 0.0 && s.psd[k] >= floor * top) {
      s.included[k] = 1;
      x.push_back(s.lambda[k]);
      y.push_back(s.psd[k]);
    } else {
      ++excluded;
    }
  }
  if (x.size() < 5) {
    throw NumericError("fit_hurst: only " + std::to_string(x.size()) + " points left after the floor; need >= 5");
  }
  s.fit = fit_power_law(x, y);
  s.fit.k_min = k_min;
  s.fit.k_max = k_max;
  s.fit.n_excluded = excluded;
  return s;
}

void write_spectrum_csv(const Spectrum& s, std::ostream& out) {
  out << "k,lambda,psd,included_in_fit\n";
  char buf[160];
  for (std::size_t k = 0; k < s.psd.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%zu,%.15g,%.15g,%d\n", k, s.lambda[k], s.psd[k], s.included[k] ? 1 : 0);
    out << buf;
  }
}

void write_fit_json(const PowerFit& fit, std::ostream& out) {
  nlohmann::ordered_json j;
  j["slope"] = fit.slope;
  j["intercept"] = fit.intercept;
  j["H"] = fit.H;
  j["k_min"] = fit.k_min;
  j["k_max"] = fit.k_max;
  j["n_excluded"] = fit.n_excluded;
  j["n_points"] = fit.n_points;
  out << j.dump(1) << '\n';
}

TriMesh height_grid_mesh(const HeightGrid& grid) {
  TriMesh m;
  const int n = grid.n;
  const double dx = grid.spacing();
  m.vertices.reserve(static_cast<std::size_t>(n) * n);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) m.vertices.emplace_back(ix * dx, iy * dx, grid.at(ix, iy));
  }
  for (int iy = 0; iy + 1 < n; ++iy) {
    for (int ix = 0; ix + 1 < n; ++ix) {
      const int a = iy * n + ix;
      m.faces.push_back({a, a + 1, a + n + 1});
      m.faces.push_back({a, a + n + 1, a + n});
    }
  }
  return m;
}

void save_height_grid(const HeightGrid& grid, const PowerLawSpec& spec, const std::filesystem::path& base) {
  static_assert(std::endian::native == std::endian::little, "height grid writer assumes a little-endian host");
  auto with_ext = [&](const char* ext) { return std::filesystem::path(base.string() + ext); };
  {
    std::ofstream out(with_ext(".f32"), std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + with_ext(".f32").string());
    std::vector<float> f(grid.h.begin(), grid.h.end());
    out.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(float)));
  }
  {
    nlohmann::ordered_json j;
    j["n"] = grid.n;
    j["extent"] = grid.extent;
    j["rms"] = spec.rms;
    j["seed"] = spec.seed;
    j["H"] = spec.H;
    j["q_r"] = spec.q_r;
    j["q_l"] = spec.q_l;
    j["q_s"] = spec.q_s;
    j["dtype"] = "float32";
    j["layout"] = "row-major h[iy * n + ix]";
    std::ofstream out(with_ext(".json"));
    out << j.dump(1) << '\n';
  }
  save_obj(height_grid_mesh(grid), with_ext(".obj"));
}

HeightGrid load_height_grid(const std::filesystem::path& base) {
  auto with_ext = [&](const char* ext) { return std::filesystem::path(base.string() + ext); };
  std::ifstream js(with_ext(".json"));
  if (!js) throw std::runtime_error("cannot open " + with_ext(".json").string());
  const nlohmann::json j = nlohmann::json::parse(js);
  HeightGrid g;
  g.n = j.at("n").get<int>();
  g.extent = j.at("extent").get<double>();
  std::ifstream in(with_ext(".f32"), std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + with_ext(".f32").string());
  std::vector<float> f(static_cast<std::size_t>(g.n) * g.n);
  if (!in.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(float)))) {
    throw std::runtime_error("height grid file is truncated");
  }
  g.h.assign(f.begin(), f.end());
  return g;
}

}  // namespace dh
