#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "diskharm/basis.hpp"
#include "diskharm/cap.hpp"
#include "diskharm/disk_mesh.hpp"
#include "diskharm/disk_param.hpp"
#include "diskharm/error.hpp"
#include "diskharm/fractal.hpp"
#include "diskharm/harmonic.hpp"
#include "diskharm/mesh.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace dh;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitMesh = 3;
constexpr int kExitNumeric = 4;

const std::vector<std::string> kCommands{"generate", "param", "analyze", "hurst", "reconstruct", "project", "pipeline"};

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read " + path.string());
  return in;
}

int thread_count() {
  if (const char* env = std::getenv("DISKHARM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

json fit_json(const PowerFit& f) {
  return json{{"slope", f.slope}, {"intercept", f.intercept}, {"H", f.H},       {"k_min", f.k_min},
              {"k_max", f.k_max}, {"n_points", f.n_points},   {"n_excluded", f.n_excluded}};
}

json area_json(const AreaStats& a) {
  return json{{"cv", a.cv}, {"log_std", a.log_std}, {"min_ratio", a.min_ratio}, {"max_ratio", a.max_ratio}};
}

json fdec_json(const FdecFit& f) {
  return json{{"method", to_string(f.method)}, {"k", f.k},     {"2a", 2.0 * f.a}, {"2b", 2.0 * f.b},
              {"c", f.c},                      {"a_avg", f.a_avg()}, {"kappa", f.kappa()}};
}

DiskParam read_disk_param_csv(const fs::path& path, std::size_t expected) {
  std::ifstream in = open_in(path);
  std::string line;
  std::getline(in, line);
  DiskParam p;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(row, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != 4) throw std::invalid_argument("malformed row in " + path.string() + ": " + line);
    p.uv.emplace_back(v[1] * std::cos(v[2]), v[1] * std::sin(v[2]));
    p.is_boundary.push_back(v[3] != 0.0 ? 1 : 0);
  }
  if (p.size() != expected) {
    throw std::invalid_argument(path.string() + " has " + std::to_string(p.size()) + " rows, mesh has " +
                                std::to_string(expected) + " vertices");
  }
  return p;
}

DiskParam planar_param(const TriMesh& mesh) {
  const std::vector<int> loop = boundary_loop(mesh);
  Vec2 centre = Vec2::Zero();
  for (int v : loop) centre += mesh.vertices[v].head<2>();
  centre /= static_cast<double>(loop.size());
  double r = 0.0;
  for (const Vec3& v : mesh.vertices) r = std::max(r, (v.head<2>() - centre).norm());
  DiskParam p;
  p.is_boundary.assign(mesh.num_vertices(), 0);
  for (int v : loop) p.is_boundary[v] = 1;
  for (const Vec3& v : mesh.vertices) p.uv.push_back((v.head<2>() - centre) / r);
  return p;
}

Spectrum read_spectrum_csv(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  std::getline(in, line);
  Spectrum s;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(row, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() < 3) throw std::invalid_argument("malformed row in " + path.string() + ": " + line);
    if (static_cast<std::size_t>(v[0]) != s.psd.size()) throw std::invalid_argument("spectrum rows must start at k = 0");
    s.lambda.push_back(v[1]);
    s.psd.push_back(v[2]);
  }
  s.included.assign(s.psd.size(), 0);
  return s;
}

// Splices values from the JSON config into argv for every option the command
// line does not already set.
std::vector<std::string> apply_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  fs::path config;
  std::string sub;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config = args[i].substr(9);
    if (sub.empty() && std::find(kCommands.begin(), kCommands.end(), args[i]) != kCommands.end()) sub = args[i];
  }
  if (config.empty()) return args;
  json j;
  try {
    j = json::parse(open_in(config));
  } catch (const json::exception& e) {
    throw std::invalid_argument("config " + config.string() + ": " + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config " + config.string() + " must be a JSON object");
  json flat = json::object();
  for (auto& [key, value] : j.items()) {
    if (!value.is_object()) flat[key] = value;
  }
  if (j.contains(sub) && j[sub].is_object()) {
    for (auto& [key, value] : j[sub].items()) flat[key] = value;
  }
  auto given = [&](const std::string& name) {
    const std::string flag = "--" + name;
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  auto scalar = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
  std::vector<std::string> extra;
  for (auto& [key, value] : flat.items()) {
    if (key == "config" || given(key)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) extra.push_back("--" + key);
    } else if (value.is_array()) {
      extra.push_back("--" + key);
      for (const json& e : value) extra.push_back(scalar(e));
    } else {
      extra.push_back("--" + key + "=" + scalar(value));
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

struct GenerateArgs {
  PowerLawSpec spec;
  fs::path out;
};

void add_generate_options(CLI::App* cmd, GenerateArgs& g, bool require_h) {
  auto* h = cmd->add_option("--H", g.spec.H, "Hurst exponent in [0, 1]");
  if (require_h) h->required();
  cmd->add_option("--ql", g.spec.q_l, "Roll-off wavevector (cycles per side)");
  cmd->add_option("--qs", g.spec.q_s, "Cut-off wavevector (cycles per side)");
  cmd->add_option("--qr", g.spec.q_r, "Lower cut-off wavevector");
  cmd->add_option("--rms", g.spec.rms, "Target rms height");
  cmd->add_option("--seed", g.spec.seed, "Random seed");
  cmd->add_option("--n", g.spec.n, "Grid size");
  cmd->add_option("--extent", g.spec.extent, "Physical side length");
  cmd->add_flag("--rayleigh", g.spec.rayleigh_amplitudes, "Rayleigh-distributed amplitudes");
}

json cmd_generate(const GenerateArgs& g) {
  g.spec.validate();
  const HeightGrid grid = generate_surface(g.spec);
  save_height_grid(grid, g.spec, g.out);
  double ss = 0.0;
  for (double v : grid.h) ss += v * v;
  return json{{"command", "generate"},
              {"grid", g.out.string() + ".f32"},
              {"sidecar", g.out.string() + ".json"},
              {"obj", g.out.string() + ".obj"},
              {"n", grid.n},
              {"seed", g.spec.seed},
              {"rms", std::sqrt(ss / grid.h.size())}};
}

struct ParamArgs {
  fs::path input;
  fs::path out;
  fs::path out_obj;
  ParamOptions opts;
};

json cmd_param(const ParamArgs& a) {
  const TriMesh mesh = load_mesh(a.input);
  validate_open_disk(mesh);
  const ParamResult r = area_preserving_param(mesh, a.opts);
  if (!a.out.empty()) {
    std::ofstream out = open_out(a.out);
    write_disk_param_csv(r.param, out);
  }
  if (!a.out_obj.empty()) save_obj(param_as_mesh(mesh, r.param), a.out_obj);
  const ParamStats& s = r.stats;
  return json{{"command", "param"},
              {"vertices", mesh.num_vertices()},
              {"faces", mesh.num_faces()},
              {"flipped_faces", s.flipped_faces},
              {"area", area_json(s.area)},
              {"tutte_area", area_json(s.tutte_area)},
              {"angular_distortion_deg", s.angular_distortion_deg},
              {"max_beltrami", s.max_beltrami},
              {"dem_iterations", s.dem_iterations},
              {"dem_converged", s.dem_converged},
              {"repair_rounds", s.repair_rounds},
              {"warnings", r.warnings}};
}

struct AnalyzeArgs {
  fs::path input;
  fs::path grid;
  fs::path param;
  bool planar = false;
  int k_max = 20;
  std::string bc = "neumann";
  std::string solver = "auto";
  bool voronoi = false;
  fs::path out;
  fs::path descriptors;
  fs::path spectrum;
  ParamOptions opts;
};

LsqSolver parse_solver(const std::string& s) {
  if (s == "auto") return LsqSolver::Auto;
  if (s == "qr") return LsqSolver::QR;
  if (s == "normal") return LsqSolver::NormalEquations;
  throw std::invalid_argument("unknown solver '" + s + "' (expected auto, qr or normal)");
}

json cmd_analyze(const AnalyzeArgs& a) {
  if (a.input.empty() == a.grid.empty()) throw std::invalid_argument("analyze needs exactly one of --input or --grid");
  if (a.k_max < 0) throw std::invalid_argument("--kmax must be non-negative");
  const BoundaryCondition bc = parse_boundary_condition(a.bc);
  json summary{{"command", "analyze"}};
  DiskMesh dm;
  if (!a.grid.empty()) {
    dm = sample_circular_patch(load_height_grid(a.grid));
    summary["param_source"] = "grid";
  } else {
    dm.mesh = load_mesh(a.input);
    validate_open_disk(dm.mesh);
    if (!a.param.empty()) {
      dm.param = read_disk_param_csv(a.param, dm.mesh.num_vertices());
      summary["param_source"] = a.param.string();
    } else if (a.planar) {
      dm.param = planar_param(dm.mesh);
      summary["param_source"] = "planar";
    } else {
      const ParamResult r = area_preserving_param(dm.mesh, a.opts);
      dm.param = r.param;
      summary["param_source"] = "area_preserving";
      summary["flipped_faces"] = r.stats.flipped_faces;
    }
  }
  const EigenTable table(a.k_max, bc);
  AnalyzeOptions ao;
  ao.voronoi_weights = a.voronoi;
  ao.solver = parse_solver(a.solver);
  const HarmonicCoeffs c = analyze(dm.mesh, dm.param, table, ao);
  if (!a.out.empty()) {
    std::ofstream out = open_out(a.out);
    write_coeffs_json(c, out);
  }
  const Descriptors d = descriptors(c, table);
  if (!a.descriptors.empty()) {
    std::ofstream out = open_out(a.descriptors);
    write_descriptors_csv(d, out);
  }
  if (!a.spectrum.empty()) {
    std::ofstream out = open_out(a.spectrum);
    write_spectrum_csv(psd_m0(c, table, PsdAxis::Z), out);
  }
  std::vector<std::string> warnings = c.warnings;
  warnings.insert(warnings.end(), d.warnings.begin(), d.warnings.end());
  summary["vertices"] = dm.mesh.num_vertices();
  summary["k_max"] = a.k_max;
  summary["bc"] = to_string(bc);
  summary["solver"] = c.solver;
  summary["condition"] = c.condition;
  summary["residual"] = {c.residual.x(), c.residual.y(), c.residual.z()};
  summary["warnings"] = warnings;
  return summary;
}

struct HurstArgs {
  fs::path coeffs;
  fs::path spectrum_in;
  fs::path grid;
  int patches = 10;
  double radius = 0.0;
  std::uint64_t seed = 0;
  int analysis_k = 70;
  int k_min = 2;
  int k_max = -1;
  std::string axis = "z";
  double floor = 1e-8;
  fs::path out;
  fs::path out_dir;
};

Spectrum fit_spectrum(const Spectrum& s, const HurstArgs& a) {
  const int top = static_cast<int>(s.psd.size()) - 1;
  return fit_hurst(s, a.k_min, a.k_max < 0 ? top : a.k_max, a.floor);
}

json cmd_hurst_batch(const HurstArgs& a) {
  const HeightGrid grid = load_height_grid(a.grid);
  if (a.patches < 1) throw std::invalid_argument("--patches must be positive");
  const double r = a.radius > 0.0 ? a.radius : grid.n / 4.0;
  const double lo = r;
  const double hi = grid.n - 1 - r;
  if (!(hi >= lo)) throw std::invalid_argument("--radius too large for the grid");
  std::mt19937_64 rng(a.seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Vec2> centres;
  for (int i = 0; i < a.patches; ++i) centres.emplace_back(std::floor(u(rng)), std::floor(u(rng)));

  const PsdAxis axis = parse_psd_axis(a.axis);
  const EigenTable table(a.analysis_k, BoundaryCondition::Neumann);
  std::vector<Spectrum> fits(centres.size());
  std::vector<std::string> errors(centres.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < centres.size(); i = next++) {
      try {
        const DiskMesh p = sample_circular_patch(grid, centres[i].x(), centres[i].y(), r);
        fits[i] = fit_spectrum(psd_m0(analyze(p.mesh, p.param, table), table, axis), a);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  const int nt = std::min<int>(thread_count(), static_cast<int>(centres.size()));
  for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) throw NumericError("patch " + std::to_string(i) + ": " + errors[i]);
  }

  json patches = json::array();
  double sum = 0.0;
  double sum_h = 0.0;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    if (!a.out_dir.empty()) {
      std::ofstream out = open_out(a.out_dir / ("patch_" + std::to_string(i) + ".csv"));
      write_spectrum_csv(fits[i], out);
    }
    json p = fit_json(fits[i].fit);
    p["cx"] = centres[i].x();
    p["cy"] = centres[i].y();
    patches.push_back(p);
    sum += fits[i].fit.slope;
    sum_h += fits[i].fit.H;
  }
  const double n = static_cast<double>(fits.size());
  const double mean = sum / n;
  double var = 0.0;
  for (const Spectrum& s : fits) var += (s.fit.slope - mean) * (s.fit.slope - mean);
  const double std_slope = fits.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  return json{{"command", "hurst"},    {"mode", "batch"},          {"radius", r},
              {"axis", to_string(axis)}, {"slope_mean", mean},     {"slope_std", std_slope},
              {"H_mean", sum_h / n},   {"patches", patches}};
}

json cmd_hurst(const HurstArgs& a) {
  const int sources = !a.coeffs.empty() + !a.spectrum_in.empty() + !a.grid.empty();
  if (sources != 1) throw std::invalid_argument("hurst needs exactly one of --coeffs, --spectrum or --grid");
  if (!a.grid.empty()) return cmd_hurst_batch(a);
  Spectrum s;
  std::string axis = "file";
  if (!a.coeffs.empty()) {
    std::ifstream in = open_in(a.coeffs);
    const HarmonicCoeffs c = read_coeffs_json(in);
    const EigenTable table(c.k_max, c.bc);
    const PsdAxis ax = parse_psd_axis(a.axis);
    s = psd_m0(c, table, ax);
    axis = to_string(ax);
  } else {
    s = read_spectrum_csv(a.spectrum_in);
  }
  const Spectrum fit = fit_spectrum(s, a);
  if (!a.out.empty()) {
    std::ofstream out = open_out(a.out);
    write_spectrum_csv(fit, out);
  }
  json summary{{"command", "hurst"}, {"axis", axis}};
  summary["fit"] = fit_json(fit.fit);
  return summary;
}

struct ReconstructArgs {
  fs::path coeffs;
  std::vector<int> ks{1};
  double edge = 0.025;
  fs::path reference;
  fs::path out_prefix;
  fs::path report;
};

json cmd_reconstruct(const ReconstructArgs& a) {
  std::ifstream in = open_in(a.coeffs);
  const HarmonicCoeffs c = read_coeffs_json(in);
  for (int k : a.ks) {
    if (k < 0 || k > c.k_max) {
      throw std::invalid_argument("k = " + std::to_string(k) + " outside [0, " + std::to_string(c.k_max) + "]");
    }
  }
  if (!(a.edge > 0.0)) throw std::invalid_argument("--edge must be positive");
  const EigenTable table(c.k_max, c.bc);
  TriMesh reference;
  if (!a.reference.empty()) reference = load_mesh(a.reference);
  const DiskMesh grid = uniform_disk_mesh(a.edge);
  json rows = json::array();
  std::ofstream report;
  if (!a.report.empty()) {
    report = open_out(a.report);
    report << "k,rmse\n";
  }
  for (int k : a.ks) {
    const TriMesh rec = reconstruct(c, table, grid, k);
    json row{{"k", k}};
    if (!a.out_prefix.empty()) {
      const fs::path path = a.out_prefix.string() + "_k" + std::to_string(k) + ".obj";
      save_obj(rec, path);
      row["obj"] = path.string();
    }
    if (!reference.vertices.empty()) {
      const double e = hausdorff_rmse(reference, rec);
      row["rmse"] = e;
      if (report) report << k << ',' << e << '\n';
    }
    rows.push_back(row);
  }
  json summary{{"command", "reconstruct"}, {"edge_length", a.edge}, {"sweep", rows}};
  if (c.k_max >= 1) summary["fdec"] = fdec_json(fdec_fit(c, table, FdecMethod::ObbAtK, 1, a.edge));
  return summary;
}

struct ProjectArgs {
  fs::path input;
  fs::path grid;
  CapSpec cap;
  double height_scale = 1.0;
  bool zero_height = false;
  fs::path out;
  fs::path report;
};

json cmd_project(const ProjectArgs& a) {
  if (a.input.empty() == a.grid.empty()) throw std::invalid_argument("project needs exactly one of --input or --grid");
  a.cap.validate();
  TriMesh patch = a.grid.empty() ? load_mesh(a.input) : unit_disk_patch(sample_circular_patch(load_height_grid(a.grid)));
  for (Vec3& v : patch.vertices) v.z() = a.zero_height ? 0.0 : v.z() * a.height_scale;
  const CapProjection p = project_rough_patch(patch, a.cap);
  if (!a.out.empty()) save_obj(p.mesh, a.out);
  if (!a.report.empty()) {
    std::ofstream out = open_out(a.report);
    write_projection_json(p.report, out);
  }
  return json{{"command", "project"},
              {"vertices", p.mesh.num_vertices()},
              {"theta_c", p.report.theta_c},
              {"R", p.report.R},
              {"s_c", p.report.s_c},
              {"d_angle_deg", p.report.d_angle_deg}};
}

struct PipelineArgs {
  GenerateArgs gen;
  fs::path out_dir;
  int k_max = 70;
  int k_min = 2;
  int fit_k_max = -1;
};

json cmd_pipeline(const PipelineArgs& a) {
  a.gen.spec.validate();
  if (a.out_dir.empty()) throw std::invalid_argument("pipeline needs --out-dir");
  fs::create_directories(a.out_dir);
  GenerateArgs g = a.gen;
  g.out = a.out_dir / "surface";
  json summary{{"command", "pipeline"}};
  summary["generate"] = cmd_generate(g);
  const HeightGrid grid = load_height_grid(g.out);
  const DiskMesh patch = sample_circular_patch(grid);
  const EigenTable table(a.k_max, BoundaryCondition::Neumann);
  const HarmonicCoeffs c = analyze(patch.mesh, patch.param, table);
  {
    std::ofstream out = open_out(a.out_dir / "coeffs.json");
    write_coeffs_json(c, out);
  }
  const Spectrum fit = fit_hurst(psd_m0(c, table, PsdAxis::Z), a.k_min, a.fit_k_max < 0 ? a.k_max : a.fit_k_max);
  {
    std::ofstream out = open_out(a.out_dir / "spectrum.csv");
    write_spectrum_csv(fit, out);
  }
  {
    std::ofstream out = open_out(a.out_dir / "fit.json");
    write_fit_json(fit.fit, out);
  }
  summary["patch_vertices"] = patch.mesh.num_vertices();
  summary["solver"] = c.solver;
  summary["fit"] = fit_json(fit.fit);
  return summary;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disk harmonic analysis of open surfaces", "dhtool"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config;
  fs::path json_out;
  app.add_option("--config", config, "JSON file of option values; flags override it");
  app.add_option("--json", json_out, "Also write the JSON summary to this file");

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Synthesize a self-affine height grid");
  add_generate_options(g, gen, true);
  g->add_option("-o,--out", gen.out, "Output base path")->required();

  ParamArgs par;
  auto* p = app.add_subcommand("param", "Area-preserving disk parameterization");
  p->add_option("-i,--input", par.input, "Open disk-like mesh (OBJ or PLY)")->required();
  p->add_option("-o,--out", par.out, "Parameterization CSV");
  p->add_option("--out-obj", par.out_obj, "Planar mesh of the parameterization");
  p->add_option("--dem-tol", par.opts.dem.tol, "Density CV tolerance");
  p->add_option("--dem-iters", par.opts.dem.max_iters, "Maximum flow iterations");
  p->add_option("--beltrami-cap", par.opts.beltrami_cap, "Beltrami magnitude cap");

  AnalyzeArgs an;
  auto* a = app.add_subcommand("analyze", "Disk harmonic coefficients and descriptors");
  a->add_option("-i,--input", an.input, "Open disk-like mesh");
  a->add_option("--grid", an.grid, "Height grid base path (inscribed circular patch)");
  a->add_option("--param", an.param, "Parameterization CSV from the param command");
  a->add_flag("--planar", an.planar, "Use the (x, y) coordinates scaled to the unit disk");
  a->add_option("--kmax", an.k_max, "Maximum degree");
  a->add_option("--bc", an.bc, "neumann or dirichlet");
  a->add_option("--solver", an.solver, "auto, qr or normal");
  a->add_flag("--voronoi", an.voronoi, "Weight vertices by dual area");
  a->add_option("-o,--out", an.out, "Coefficients JSON");
  a->add_option("--descriptors", an.descriptors, "Descriptors CSV");
  a->add_option("--spectrum", an.spectrum, "z-axis m = 0 spectrum CSV");

  HurstArgs hu;
  auto* h = app.add_subcommand("hurst", "Power-law fit of the m = 0 spectrum");
  h->add_option("--coeffs", hu.coeffs, "Coefficients JSON");
  h->add_option("--spectrum", hu.spectrum_in, "Spectrum CSV (k,lambda,psd)");
  h->add_option("--grid", hu.grid, "Height grid base path for multi-patch batch mode");
  h->add_option("--patches", hu.patches, "Number of random patches in batch mode");
  h->add_option("--radius", hu.radius, "Patch radius in node spacings (default n / 4)");
  h->add_option("--seed", hu.seed, "Seed for patch centres");
  h->add_option("--analysis-kmax", hu.analysis_k, "Degree of the per-patch analysis");
  h->add_option("--kmin", hu.k_min, "First degree in the fit");
  h->add_option("--kmax", hu.k_max, "Last degree in the fit (default: all)");
  h->add_option("--axis", hu.axis, "x, y, z or normalized");
  h->add_option("--floor", hu.floor, "Relative PSD floor");
  h->add_option("-o,--out", hu.out, "Spectrum CSV with fit mask");
  h->add_option("--out-dir", hu.out_dir, "Per-patch spectra in batch mode");

  ReconstructArgs re;
  auto* r = app.add_subcommand("reconstruct", "Truncated reconstruction and error report");
  r->add_option("--coeffs", re.coeffs, "Coefficients JSON")->required();
  r->add_option("-k,--k", re.ks, "Truncation degrees")->delimiter(',');
  r->add_option("--edge", re.edge, "Edge length of the disk mesh");
  r->add_option("--reference", re.reference, "Reference mesh for the Hausdorff RMSE");
  r->add_option("-o,--out", re.out_prefix, "Output prefix for OBJ files");
  r->add_option("--report", re.report, "CSV k,rmse");

  ProjectArgs pr;
  auto* j = app.add_subcommand("project", "Project a flat rough patch onto a spherical cap");
  j->add_option("-i,--input", pr.input, "Unit-disk patch mesh (x, y in the disk, z height)");
  j->add_option("--grid", pr.grid, "Height grid base path (inscribed circular patch)");
  j->add_option("--theta", pr.cap.theta_c, "Cap half-angle in degrees");
  j->add_option("--R", pr.cap.R, "Sphere radius");
  j->add_option("--height-scale", pr.height_scale, "Factor applied to the heights");
  j->add_flag("--zero-height", pr.zero_height, "Ignore the heights (smooth cap)");
  j->add_option("-o,--out", pr.out, "Curved OBJ");
  j->add_option("--report", pr.report, "Projection report JSON");

  PipelineArgs pi;
  auto* q = app.add_subcommand("pipeline", "generate, sample, analyze and fit in one run");
  add_generate_options(q, pi.gen, false);
  q->add_option("--out-dir", pi.out_dir, "Output directory")->required();
  q->add_option("--kmax", pi.k_max, "Analysis degree");
  q->add_option("--kmin", pi.k_min, "First degree in the fit");
  q->add_option("--fit-kmax", pi.fit_k_max, "Last degree in the fit (default --kmax)");

  try {
    std::vector<std::string> args = apply_config(argc, argv);
    args.erase(args.begin());
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    json summary;
    if (*g) summary = cmd_generate(gen);
    else if (*p) summary = cmd_param(par);
    else if (*a) summary = cmd_analyze(an);
    else if (*h) summary = cmd_hurst(hu);
    else if (*r) summary = cmd_reconstruct(re);
    else if (*j) summary = cmd_project(pr);
    else summary = cmd_pipeline(pi);
    summary["exit_code"] = kExitOk;
    const std::string text = summary.dump(1);
    std::cout << text << '\n';
    if (!json_out.empty()) open_out(json_out) << text << '\n';
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const MeshError& e) {
    std::cerr << "mesh error: " << e.what() << '\n';
    return kExitMesh;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
}
