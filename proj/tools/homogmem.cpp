// homogmem {tensor|kernel|solve|pipeline} --config PATH [--out DIR] [--force]
//          [--threads N] [--set key=value]...
//
// Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "homogmem.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Failure {
  int exit_code;
  std::string message;
};

[[noreturn]] void config_error(const std::string& msg) { throw Failure{kExitConfig, msg}; }

void check(hm_status s, const std::string& what) {
  if (s == HM_OK) return;
  const int code = (s == HM_ERR_CONVERGENCE || s == HM_ERR_INTERNAL) ? kExitNumerical : kExitConfig;
  throw Failure{code, what + ": " + hm_last_error()};
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using MeshPtr = std::unique_ptr<hm_mesh, Deleter<hm_mesh, hm_mesh_free>>;
using KernelPtr = std::unique_ptr<hm_kernel, Deleter<hm_kernel, hm_kernel_free>>;
using RunPtr = std::unique_ptr<hm_run, Deleter<hm_run, hm_run_free>>;

const json kDefaults = json::parse(R"({
  "cell": {"a": 0.4, "b": 0.2, "angle": 30.0, "d1": 1.0, "d2": 1.0, "inclusion": true},
  "mesh": {"mode": "builtin", "h": 0.0098, "n_arc": 256, "jitter": 0.0,
           "cell_msh": null, "omega_msh": null,
           "tags": {"y1": 1, "y2": 2, "omega": 3, "outer": 1, "inclusion": 2}},
  "tensor": {"tol": 1e-10},
  "kernel": {"m": 100, "epsilon": 1e-5, "fold_rho": false, "tol": 1e-9,
             "samples": {"t_min": 1e-5, "t_max": 1.0, "count": 200}},
  "macro": {"n": 100, "tau": 1e-4, "sigma": 1.0, "t_end": 0.1,
            "snapshots": [0.0, 0.01, 0.05, 0.1], "u0": "paper",
            "D": null, "kernel": null},
  "output": {"directory": "out", "formats": ["vtk", "csv"]}
})");

// Copies `user` over `base`, refusing keys the defaults do not know.
void merge(json& base, const json& user, const std::string& prefix) {
  if (!user.is_object()) config_error("config section '" + prefix + "' must be an object");
  for (const auto& [key, value] : user.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!base.contains(key)) config_error("unknown config key '" + path + "'");
    if (base[key].is_object() && key != "tags") {
      merge(base[key], value, path);
    } else {
      base[key] = value;
    }
  }
}

void apply_override(json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) config_error("--set expects key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &cfg;
  std::stringstream parts(key);
  std::string part;
  std::vector<std::string> path;
  while (std::getline(parts, part, '.')) path.push_back(part);
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (!node->is_object() || !node->contains(path[i])) config_error("unknown config key '" + key + "'");
    node = &(*node)[path[i]];
  }
  *node = value;
}

template <class T>
T get(const json& j, const char* section, const char* key) {
  try {
    return j.at(section).at(key).get<T>();
  } catch (const json::exception&) {
    config_error(std::string("config key '") + section + "." + key + "' has the wrong type");
  }
}

struct Config {
  json doc;
  hm_cell_geometry geometry{};
  bool inclusion = true;
  std::string mesh_mode;
  double h = 0.0, jitter = 0.0;
  std::size_t n_arc = 0;
  fs::path cell_msh, omega_msh;
  hm_msh_tags tags{};
  double tensor_tol = 0.0;
  std::size_t m = 0;
  double epsilon = 0.0, kernel_tol = 0.0;
  bool fold_rho = false;
  double sample_t_min = 0.0, sample_t_max = 0.0;
  std::size_t sample_count = 0;
  std::size_t omega_n = 0;
  double tau = 0.0, sigma = 0.0, t_end = 0.0;
  std::vector<double> snapshots;
  std::string u0;
  bool inline_d = false;
  double d[2][2]{};
  fs::path kernel_path;
  fs::path out_dir;
  bool vtk = false, csv = false;
};

void require_config(bool ok, const std::string& msg) {
  if (!ok) config_error(msg);
}

fs::path existing_file(const json& value, const fs::path& base, const std::string& key) {
  if (value.is_null()) return {};
  if (!value.is_string()) config_error("config key '" + key + "' must be a path");
  fs::path p = value.get<std::string>();
  if (p.is_relative()) p = base / p;
  require_config(fs::is_regular_file(p), key + ": file not found: " + p.string());
  return p;
}

Config load_config(const fs::path& path, const std::vector<std::string>& overrides, const std::string& out_flag) {
  std::ifstream in(path);
  require_config(in.good(), "cannot open config file " + path.string());
  json user = json::parse(in, nullptr, false);
  require_config(!user.is_discarded(), "config file " + path.string() + " is not valid JSON");

  Config c;
  c.doc = kDefaults;
  merge(c.doc, user, "");
  for (const auto& o : overrides) apply_override(c.doc, o);
  const json& d = c.doc;
  const fs::path base = path.parent_path();

  c.geometry = {get<double>(d, "cell", "a"), get<double>(d, "cell", "b"), get<double>(d, "cell", "angle"),
                get<double>(d, "cell", "d1"), get<double>(d, "cell", "d2")};
  c.inclusion = get<bool>(d, "cell", "inclusion");
  require_config(c.geometry.d1 > 0 && c.geometry.d2 > 0, "cell.d1 and cell.d2 must be positive");

  c.mesh_mode = get<std::string>(d, "mesh", "mode");
  require_config(c.mesh_mode == "builtin" || c.mesh_mode == "msh", "mesh.mode must be 'builtin' or 'msh'");
  c.h = get<double>(d, "mesh", "h");
  c.n_arc = get<std::size_t>(d, "mesh", "n_arc");
  c.jitter = get<double>(d, "mesh", "jitter");
  require_config(c.h > 0 && c.h <= 0.5, "mesh.h must lie in (0, 0.5]");
  require_config(c.n_arc >= 8, "mesh.n_arc must be at least 8");
  require_config(c.jitter >= 0 && c.jitter <= 0.25, "mesh.jitter must lie in [0, 0.25]");
  c.cell_msh = existing_file(d["mesh"]["cell_msh"], base, "mesh.cell_msh");
  c.omega_msh = existing_file(d["mesh"]["omega_msh"], base, "mesh.omega_msh");
  if (c.mesh_mode == "msh") require_config(!c.cell_msh.empty(), "mesh.mode 'msh' needs mesh.cell_msh");
  try {
    const auto& t = d.at("mesh").at("tags");
    c.tags = {t.at("y1").get<int>(), t.at("y2").get<int>(), t.at("omega").get<int>(), t.at("outer").get<int>(),
              t.at("inclusion").get<int>()};
  } catch (const json::exception&) {
    config_error("mesh.tags needs integer y1, y2, omega, outer, inclusion");
  }

  c.tensor_tol = get<double>(d, "tensor", "tol");
  require_config(c.tensor_tol > 0 && c.tensor_tol < 1, "tensor.tol must lie in (0, 1)");

  c.m = get<std::size_t>(d, "kernel", "m");
  c.epsilon = get<double>(d, "kernel", "epsilon");
  c.fold_rho = get<bool>(d, "kernel", "fold_rho");
  c.kernel_tol = get<double>(d, "kernel", "tol");
  require_config(c.epsilon >= 0, "kernel.epsilon must be nonnegative");
  require_config(c.kernel_tol > 0 && c.kernel_tol < 1, "kernel.tol must lie in (0, 1)");
  try {
    const auto& s = d.at("kernel").at("samples");
    c.sample_t_min = s.at("t_min").get<double>();
    c.sample_t_max = s.at("t_max").get<double>();
    c.sample_count = s.at("count").get<std::size_t>();
  } catch (const json::exception&) {
    config_error("kernel.samples needs numeric t_min, t_max, count");
  }
  require_config(c.sample_t_min > 0 && c.sample_t_max > c.sample_t_min && c.sample_count >= 2,
                 "kernel.samples needs 0 < t_min < t_max and count >= 2");

  c.omega_n = get<std::size_t>(d, "macro", "n");
  c.tau = get<double>(d, "macro", "tau");
  c.sigma = get<double>(d, "macro", "sigma");
  c.t_end = get<double>(d, "macro", "t_end");
  c.u0 = get<std::string>(d, "macro", "u0");
  require_config(c.omega_n >= 2, "macro.n must be at least 2");
  require_config(c.tau > 0, "macro.tau must be positive");
  require_config(c.sigma >= 0 && c.sigma <= 1, "macro.sigma must lie in [0, 1]");
  require_config(c.t_end >= 0, "macro.t_end must be nonnegative");
  c.snapshots = get<std::vector<double>>(d, "macro", "snapshots");
  for (double t : c.snapshots)
    require_config(t >= 0 && t <= c.t_end * (1 + 1e-12), "macro.snapshots must lie in [0, macro.t_end]");
  if (!d["macro"]["D"].is_null()) {
    try {
      const auto m = d["macro"]["D"].get<std::vector<std::vector<double>>>();
      require_config(m.size() == 2 && m[0].size() == 2 && m[1].size() == 2, "macro.D must be a 2x2 array");
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) c.d[i][j] = m[i][j];
      c.inline_d = true;
    } catch (const json::exception&) {
      config_error("macro.D must be a 2x2 array of numbers");
    }
  }
  c.kernel_path = existing_file(d["macro"]["kernel"], base, "macro.kernel");

  c.out_dir = out_flag.empty() ? fs::path(get<std::string>(d, "output", "directory")) : fs::path(out_flag);
  for (const auto& f : get<std::vector<std::string>>(d, "output", "formats")) {
    if (f == "vtk") {
      c.vtk = true;
    } else if (f == "csv") {
      c.csv = true;
    } else {
      config_error("output.formats entries must be 'vtk' or 'csv', got '" + f + "'");
    }
  }
  return c;
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw Failure{kExitConfig, "cannot write " + path.string()};
  out << doc.dump(2) << '\n';
  if (!out) throw Failure{kExitConfig, "write failed: " + path.string()};
}

class Pipeline {
 public:
  Pipeline(Config cfg, unsigned threads, bool force) : c_(std::move(cfg)), threads_(threads), force_(force) {}

  void claim(const std::vector<std::string>& names) {
    std::error_code ec;
    fs::create_directories(c_.out_dir, ec);
    if (ec) throw Failure{kExitConfig, "cannot create output directory " + c_.out_dir.string() + ": " + ec.message()};
    if (force_) return;
    for (const auto& n : names) {
      if (fs::exists(c_.out_dir / n))
        throw Failure{kExitConfig, (c_.out_dir / n).string() + " already exists (use --force to overwrite)"};
    }
  }

  void tensor() {
    const auto t0 = std::chrono::steady_clock::now();
    MeshPtr cell = cell_mesh();
    hm_tensor_result r{};
    check(hm_tensor_compute(cell.get(), &c_.geometry, c_.tensor_tol, threads_, &r), "effective tensor");
    std::size_t nv = 0, nt = 0;
    check(hm_mesh_counts(cell.get(), &nv, &nt), "mesh");

    const double tr = r.d[0][0] + r.d[1][1];
    const double det = r.d[0][0] * r.d[1][1] - r.d[0][1] * r.d[1][0];
    const double disc = std::sqrt(std::max(0.25 * tr * tr - det, 0.0));
    const json doc = {
        {"status", "ok"},
        {"D", {{r.d[0][0], r.d[0][1]}, {r.d[1][0], r.d[1][1]}}},
        {"D_raw", {{r.raw[0][0], r.raw[0][1]}, {r.raw[1][0], r.raw[1][1]}}},
        {"eigenvalues", {0.5 * tr - disc, 0.5 * tr + disc}},
        {"asymmetry", r.asymmetry},
        {"mu", {r.mu[0], r.mu[1]}},
        {"residuals", {r.residual[0], r.residual[1]}},
        {"iterations", {r.iterations[0], r.iterations[1]}},
        {"mesh", mesh_stats(nv, nt, r.y1_vertices, r.y1_triangles, r.y1_measure)},
        {"geometry", geometry_json()},
    };
    write_json(c_.out_dir / "tensor.json", doc);
    d_ = {{r.d[0][0], r.d[0][1]}, {r.d[1][0], r.d[1][1]}};
    have_d_ = true;
    timing("tensor", t0);
    std::cerr << "tensor: D = [[" << r.d[0][0] << ", " << r.d[0][1] << "], [" << r.d[1][0] << ", " << r.d[1][1]
              << "]]\n";
  }

  void kernel() {
    const auto t0 = std::chrono::steady_clock::now();
    if (!c_.inclusion) config_error("kernel: cell.inclusion is false, there is no Y2 region");
    MeshPtr cell = cell_mesh();
    hm_mesh* y2_raw = nullptr;
    check(hm_mesh_restrict(cell.get(), HM_REGION_Y2, &y2_raw), "inclusion mesh");
    MeshPtr y2(y2_raw);
    hm_kernel* raw = nullptr;
    check(hm_kernel_build(y2.get(), &c_.geometry, c_.m, c_.kernel_tol, &raw), "spectral problem");
    KernelPtr unfiltered(raw);
    hm_kernel* filtered = nullptr;
    check(hm_kernel_filter(unfiltered.get(), c_.epsilon, c_.fold_rho ? 1 : 0, &filtered), "kernel filter");
    KernelPtr k(filtered);

    const auto json_path = (c_.out_dir / "kernel.json").string();
    const auto csv_path = (c_.out_dir / "kernel_samples.csv").string();
    check(hm_kernel_write_json(k.get(), json_path.c_str()), "kernel.json");
    check(hm_kernel_write_samples(k.get(), csv_path.c_str(), c_.sample_t_min, c_.sample_t_max, c_.sample_count),
          "kernel samples");
    hm_kernel_info info{};
    check(hm_kernel_info_get(k.get(), &info), "kernel");
    if (info.r_raw < 0)
      std::cerr << "warning: remainder r was negative (" << info.r_raw << ") and has been clamped to 0\n";
    std::cerr << "kernel: m = " << info.raw_count << ", m(eps) = " << info.kept_count << ", chi(0) = " << info.chi0
              << ", r = " << info.r << ", rho = " << info.rho << '\n';
    kernel_ = std::move(k);
    timing("kernel", t0);
  }

  void solve() {
    const auto t0 = std::chrono::steady_clock::now();
    hm_macro_params p{};
    p.u0 = c_.u0.c_str();
    p.tau = c_.tau;
    p.sigma = c_.sigma;
    p.t_end = c_.t_end;
    load_tensor(p);
    load_kernel();

    MeshPtr omega;
    hm_mesh* m = nullptr;
    if (!c_.omega_msh.empty()) {
      check(hm_mesh_read_msh(c_.omega_msh.string().c_str(), &c_.tags, &m), "Omega mesh");
    } else {
      check(hm_mesh_unit_square(c_.omega_n, &m), "Omega mesh");
    }
    omega.reset(m);

    if (c_.sigma < 0.5)
      std::cerr << "warning: sigma = " << c_.sigma << " < 1/2, the scheme is only conditionally stable\n";
    hm_run* run_raw = nullptr;
    check(hm_macro_run(omega.get(), kernel_.get(), &p, c_.snapshots.data(), c_.snapshots.size(), &run_raw),
          "macro solve");
    RunPtr run(run_raw);
    hm_run_info info{};
    check(hm_run_info_get(run.get(), &info), "macro solve");

    check(hm_run_write_energy_csv(run.get(), (c_.out_dir / "energy.csv").string().c_str()), "energy.csv");
    json snaps = json::array();
    for (std::size_t i = 0; i < info.snapshot_count; ++i) {
      std::size_t step = 0;
      double t = 0.0;
      check(hm_run_snapshot(run.get(), i, &step, &t), "snapshot");
      std::ostringstream stem;
      stem << "snapshot_" << std::setw(6) << std::setfill('0') << step;
      json files = json::array();
      if (c_.vtk) {
        check(hm_run_write_snapshot_vtk(run.get(), i, (c_.out_dir / (stem.str() + ".vtk")).string().c_str()),
              "snapshot");
        files.push_back(stem.str() + ".vtk");
      }
      if (c_.csv) {
        check(hm_run_write_snapshot_csv(run.get(), i, (c_.out_dir / (stem.str() + ".csv")).string().c_str()),
              "snapshot");
        files.push_back(stem.str() + ".csv");
      }
      snaps.push_back({{"step", step}, {"t", t}, {"files", files}});
    }
    std::size_t nv = 0, nt = 0;
    check(hm_mesh_counts(omega.get(), &nv, &nt), "mesh");
    hm_kernel_info kinfo{};
    check(hm_kernel_info_get(kernel_.get(), &kinfo), "kernel");

    const json summary = {
        {"status", "ok"},
        {"E0", info.energy_initial},
        {"EN", info.energy_final},
        {"l2_0", info.l2_initial},
        {"l2_N", info.l2_final},
        {"steps", info.steps},
        {"tau", c_.tau},
        {"sigma", c_.sigma},
        {"t_end", c_.t_end},
        {"max_energy_increase", info.max_energy_increase},
        {"energy_monotone", info.max_energy_increase <= 1e-12 * info.energy_initial},
        {"stability_warning", info.stability_warning != 0},
        {"D", {{p.d[0][0], p.d[0][1]}, {p.d[1][0], p.d[1][1]}}},
        {"kernel_terms", kinfo.kept_count},
        {"r", kinfo.r},
        {"mesh", {{"vertices", nv}, {"triangles", nt}}},
        {"snapshots", snaps},
    };
    write_json(c_.out_dir / "summary.json", summary);
    timing("solve", t0);
    std::cerr << "solve: " << info.steps << " steps, E0 = " << info.energy_initial
              << ", EN = " << info.energy_final << '\n';
  }

  void write_meta(const std::string& command, const fs::path& config_path) {
    json meta = {
        {"command", command},
        {"timestamp", timestamp_utc()},
        {"version", hm_version()},
        {"threads", threads_},
        {"config_path", fs::absolute(config_path).string()},
        {"config", c_.doc},
        {"wall_time_s", timings_},
    };
    write_json(c_.out_dir / "meta.json", meta);
  }

  const fs::path& out_dir() const { return c_.out_dir; }

 private:
  MeshPtr cell_mesh() {
    hm_mesh* m = nullptr;
    if (!c_.cell_msh.empty() && c_.mesh_mode == "msh") {
      check(hm_mesh_read_msh(c_.cell_msh.string().c_str(), &c_.tags, &m), "cell mesh");
    } else if (c_.inclusion) {
      check(hm_mesh_cell(&c_.geometry, c_.h, c_.n_arc, c_.jitter, &m), "cell mesh");
    } else {
      check(hm_mesh_homogeneous_cell(c_.h, &m), "cell mesh");
    }
    return MeshPtr(m);
  }

  json mesh_stats(std::size_t nv, std::size_t nt, std::size_t y1v, std::size_t y1t, double y1_measure) const {
    json j = {{"source", c_.mesh_mode == "msh" ? c_.cell_msh.string() : "builtin"},
              {"vertices", nv},
              {"triangles", nt},
              {"y1_vertices", y1v},
              {"y1_triangles", y1t},
              {"y1_measure", y1_measure}};
    if (c_.mesh_mode == "builtin") {
      j["h"] = c_.h;
      j["n_arc"] = c_.n_arc;
      j["jitter"] = c_.jitter;
    }
    return j;
  }

  json geometry_json() const {
    return {{"a", c_.geometry.a},   {"b", c_.geometry.b},   {"angle", c_.geometry.angle_deg},
            {"d1", c_.geometry.d1}, {"d2", c_.geometry.d2}, {"inclusion", c_.inclusion}};
  }

  void load_tensor(hm_macro_params& p) {
    if (c_.inline_d) {
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) p.d[i][j] = c_.d[i][j];
      return;
    }
    if (!have_d_) {
      const auto path = c_.out_dir / "tensor.json";
      std::ifstream in(path);
      if (!in) config_error("solve needs " + path.string() + " (run 'tensor' first) or macro.D");
      const json doc = json::parse(in, nullptr, false);
      try {
        d_ = doc.at("D").get<std::vector<std::vector<double>>>();
      } catch (const json::exception&) {
        config_error(path.string() + " has no valid D");
      }
      if (d_.size() != 2 || d_[0].size() != 2 || d_[1].size() != 2) config_error(path.string() + ": D must be 2x2");
    }
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) p.d[i][j] = d_[i][j];
  }

  void load_kernel() {
    if (kernel_) return;
    const fs::path path = c_.kernel_path.empty() ? c_.out_dir / "kernel.json" : c_.kernel_path;
    if (!fs::exists(path)) config_error("solve needs " + path.string() + " (run 'kernel' first) or macro.kernel");
    hm_kernel* k = nullptr;
    check(hm_kernel_read_json(path.string().c_str(), &k), "kernel.json");
    kernel_.reset(k);
  }

  void timing(const char* stage, std::chrono::steady_clock::time_point t0) {
    timings_[stage] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  Config c_;
  unsigned threads_;
  bool force_;
  bool have_d_ = false;
  std::vector<std::vector<double>> d_;
  KernelPtr kernel_;
  json timings_ = json::object();
};

void write_error_record(const fs::path& dir, const std::string& command, const Failure& f) {
  std::error_code ec;
  if (dir.empty() || !fs::is_directory(dir, ec)) return;
  const json doc = {{"status", f.exit_code == kExitConfig ? "config_error" : "numerical_error"},
                    {"exit_code", f.exit_code},
                    {"command", command},
                    {"message", f.message}};
  std::ofstream out(dir / "error.json");
  if (out) out << doc.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Homogenized diffusion with memory: effective tensor, memory kernel and macroscale solve"};
  app.require_subcommand(1, 1);

  std::string config_path, out_dir;
  bool force = false;
  unsigned threads = 1;
  std::vector<std::string> overrides;
  for (const auto& [name, help] : std::vector<std::pair<const char*, const char*>>{
           {"tensor", "solve the cell problems and write tensor.json"},
           {"kernel", "solve the inclusion spectral problem and write kernel.json, kernel_samples.csv"},
           {"solve", "run the macroscale problem from tensor.json and kernel.json"},
           {"pipeline", "tensor, kernel and solve in sequence"}}) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output.directory)");
    sub->add_flag("--force", force, "overwrite existing outputs");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 256u));
    sub->add_option("--set", overrides, "override a config key, e.g. --set macro.sigma=0.5");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  fs::path dir_for_errors = out_dir;
  try {
    Config cfg = load_config(config_path, overrides, out_dir);
    dir_for_errors = cfg.out_dir;
    Pipeline p(std::move(cfg), threads, force);
    if (command == "tensor") {
      p.claim({"tensor.json", "meta.json"});
      p.tensor();
    } else if (command == "kernel") {
      p.claim({"kernel.json", "kernel_samples.csv", "meta.json"});
      p.kernel();
    } else if (command == "solve") {
      p.claim({"energy.csv", "summary.json", "meta.json"});
      p.solve();
    } else {
      p.claim({"tensor.json", "kernel.json", "kernel_samples.csv", "energy.csv", "summary.json", "meta.json"});
      p.tensor();
      p.kernel();
      p.solve();
    }
    p.write_meta(command, config_path);
    std::error_code ec;
    fs::remove(p.out_dir() / "error.json", ec);
    return kExitOk;
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    write_error_record(dir_for_errors, command, f);
    return f.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    write_error_record(dir_for_errors, command, {kExitNumerical, e.what()});
    return kExitNumerical;
  }
}
