#include "viewplan/experiment.hpp"

#include "viewplan/errors.hpp"
#include "viewplan/seed.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <set>
#include <thread>

namespace viewplan {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const std::map<std::string, ExperimentKind>& kind_names() {
  static const std::map<std::string, ExperimentKind> names{
      {"generate", ExperimentKind::kGenerate},
      {"optimize", ExperimentKind::kOptimize},
      {"baseline", ExperimentKind::kBaseline},
      {"evaluate", ExperimentKind::kEvaluate},
      {"regret", ExperimentKind::kRegret},
      {"compare", ExperimentKind::kCompare},
      {"sweep-input-noise", ExperimentKind::kSweepInputNoise},
      {"sweep-image-noise", ExperimentKind::kSweepImageNoise},
      {"generalize", ExperimentKind::kGeneralize},
  };
  return names;
}

// ---- config reading -------------------------------------------------------

// Typed access to one JSON object, reporting errors with the full key path.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "must be an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return node_.contains(key); }

  // Rejects keys outside `allowed`, catching typos that would otherwise be
  // silently ignored.
  void only(std::initializer_list<const char*> allowed) const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      bool known = false;
      for (const char* a : allowed) known = known || it.key() == a;
      if (!known) throw ConfigError(field(it.key()), "unknown field");
    }
  }

  Section child(const std::string& key) const { return Section(at(key), field(key)); }
  const json& at(const std::string& key) const {
    if (!node_.contains(key)) throw ConfigError(field(key), "is required");
    return node_.at(key);
  }

  double number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  double number(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_number()) throw ConfigError(field(key), "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(field(key), "must be finite");
    return d;
  }
  long long integer(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_number_integer()) throw ConfigError(field(key), "must be an integer");
    return v.get<long long>();
  }
  long long positive(const std::string& key, long long fallback) const {
    const long long v = integer(key, fallback);
    if (v < 1) throw ConfigError(field(key), "must be >= 1");
    return v;
  }
  std::uint64_t seed(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
    throw ConfigError(field(key), "must be a non-negative integer");
  }
  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_boolean()) throw ConfigError(field(key), "must be true or false");
    return v.get<bool>();
  }
  std::string string(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_string()) throw ConfigError(field(key), "must be a string");
    return v.get<std::string>();
  }
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback,
                              std::size_t exact_size = 0) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_array()) throw ConfigError(field(key), "must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number() || !std::isfinite(e.get<double>()))
        throw ConfigError(field(key), "must be an array of finite numbers");
      out.push_back(e.get<double>());
    }
    if (exact_size != 0 && out.size() != exact_size)
      throw ConfigError(field(key), "must have " + std::to_string(exact_size) + " entries");
    return out;
  }
  std::pair<double, double> range(const std::string& key, std::pair<double, double> fallback) const {
    if (!has(key)) return fallback;
    const auto v = numbers(key, {}, 2);
    if (!(v[0] < v[1])) throw ConfigError(field(key), "must satisfy lower < upper");
    return {v[0], v[1]};
  }

 private:
  const json& node_;
  std::string path_;
};

template <typename F>
void checked(const std::string& field, F&& validate) {
  try {
    validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(field, e.what());
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

SceneEntry parse_scene(const Section& s, std::size_t index, const fs::path& base) {
  s.only({"id", "plants", "seed", "ply", "points_per_plant", "ground_points", "plot_half_size"});
  SceneEntry entry;
  entry.id = s.string("id", "scene" + std::to_string(index));
  if (entry.id.empty() || entry.id.find_first_of("/\\,\"") != std::string::npos)
    throw ConfigError(s.field("id"), "must be non-empty without '/', '\\\\', ',' or quotes");
  if (s.has("ply")) {
    entry.ply = resolve(base, s.string("ply", ""));
    if (!fs::exists(*entry.ply)) throw ConfigError(s.field("ply"), "file does not exist: " + entry.ply->string());
    if (s.has("plants")) throw ConfigError(s.field("plants"), "cannot be combined with 'ply'");
    return entry;
  }
  const long long plants = s.integer("plants", -1);
  if (plants < 1) throw ConfigError(s.field("plants"), "is required and must be >= 1 (or give 'ply')");
  entry.spec = default_scene_spec(static_cast<int>(plants), s.seed("seed", 1));
  entry.spec.points_per_plant = static_cast<int>(s.integer("points_per_plant", entry.spec.points_per_plant));
  entry.spec.ground_points = static_cast<int>(s.integer("ground_points", entry.spec.ground_points));
  entry.spec.plot_half_size = s.number("plot_half_size", entry.spec.plot_half_size);
  checked(s.field("plants"), [&] { entry.spec.validate(); });
  return entry;
}

SpaceConfig parse_space(const Section& s) {
  s.only({"mode", "n_cameras", "fov_half_angle", "range_min", "range_max", "elevation", "radius",
          "position_min", "position_max", "pitch"});
  SpaceConfig c;
  const std::string mode = s.string("mode", "look-at-center");
  if (mode == "look-at-center")
    c.mode = SpaceMode::kLookAtCenter;
  else if (mode == "free-pose")
    c.mode = SpaceMode::kFreePose;
  else
    throw ConfigError(s.field("mode"), "must be 'look-at-center' or 'free-pose'");
  c.n_cameras = static_cast<std::size_t>(s.positive("n_cameras", 10));
  c.intrinsics.fov_half_angle = s.number("fov_half_angle", c.intrinsics.fov_half_angle);
  c.intrinsics.range_min = s.number("range_min", c.intrinsics.range_min);
  c.intrinsics.range_max = s.number("range_max", c.intrinsics.range_max);
  checked(s.field("fov_half_angle"), [&] { c.intrinsics.validate(); });
  std::tie(c.look_at.elevation_min, c.look_at.elevation_max) =
      s.range("elevation", {c.look_at.elevation_min, c.look_at.elevation_max});
  std::tie(c.look_at.radius_min, c.look_at.radius_max) =
      s.range("radius", {c.look_at.radius_min, c.look_at.radius_max});
  const auto pmin = s.numbers("position_min", {c.free_pose.position_min.x(), c.free_pose.position_min.y(),
                                               c.free_pose.position_min.z()}, 3);
  const auto pmax = s.numbers("position_max", {c.free_pose.position_max.x(), c.free_pose.position_max.y(),
                                               c.free_pose.position_max.z()}, 3);
  c.free_pose.position_min = Point3(pmin[0], pmin[1], pmin[2]);
  c.free_pose.position_max = Point3(pmax[0], pmax[1], pmax[2]);
  std::tie(c.free_pose.pitch_min, c.free_pose.pitch_max) =
      s.range("pitch", {c.free_pose.pitch_min, c.free_pose.pitch_max});
  // Surface limit errors at parse time.
  checked(s.field(c.mode == SpaceMode::kLookAtCenter ? "elevation" : "pitch"), [&] {
    if (c.mode == SpaceMode::kLookAtCenter)
      SearchSpace::look_at_center(c.n_cameras, Point3::Zero(), c.intrinsics, c.look_at);
    else
      SearchSpace::free_pose(c.n_cameras, Point3::Zero(), c.intrinsics, c.free_pose);
  });
  return c;
}

BoConfig parse_bo(const Section& s) {
  s.only({"t_init", "t", "kernels", "refit_every", "fit_starts", "fit_budget", "refit_starts",
          "refit_budget", "acquisition"});
  BoConfig c;
  c.t_init = static_cast<int>(s.positive("t_init", c.t_init));
  c.t = static_cast<int>(s.integer("t", c.t));
  if (s.has("kernels")) {
    const json& k = s.at("kernels");
    if (!k.is_array() || k.empty()) throw ConfigError(s.field("kernels"), "must be a non-empty array of names");
    c.kernels.clear();
    for (const auto& name : k) {
      if (!name.is_string()) throw ConfigError(s.field("kernels"), "entries must be strings");
      checked(s.field("kernels"), [&] { c.kernels.push_back(kernel_family_from_string(name.get<std::string>())); });
    }
  }
  c.refit_every = static_cast<int>(s.positive("refit_every", c.refit_every));
  c.fit_starts = static_cast<int>(s.positive("fit_starts", c.fit_starts));
  c.fit_budget = static_cast<int>(s.positive("fit_budget", c.fit_budget));
  c.refit_starts = static_cast<int>(s.positive("refit_starts", c.refit_starts));
  c.refit_budget = static_cast<int>(s.positive("refit_budget", c.refit_budget));
  if (s.has("acquisition")) {
    const Section a = s.child("acquisition");
    a.only({"n_random_candidates", "n_local_candidates", "local_scale", "n_refine_starts", "refine_steps"});
    auto& b = c.acquisition;
    b.n_random_candidates = static_cast<int>(a.positive("n_random_candidates", b.n_random_candidates));
    b.n_local_candidates = static_cast<int>(a.integer("n_local_candidates", b.n_local_candidates));
    if (b.n_local_candidates < 0) throw ConfigError(a.field("n_local_candidates"), "must be >= 0");
    b.local_scale = a.number("local_scale", b.local_scale);
    if (!(b.local_scale > 0.0)) throw ConfigError(a.field("local_scale"), "must be positive");
    b.n_refine_starts = static_cast<int>(a.positive("n_refine_starts", b.n_refine_starts));
    b.refine_steps = static_cast<int>(a.positive("refine_steps", b.refine_steps));
  }
  checked(s.field("t"), [&] { c.validate(); });
  return c;
}

NoiseSpec parse_noise(const Section& s) {
  s.only({"sigma_input", "sigma_image", "sigma_obs", "dropout_scale", "jitter_scale"});
  NoiseSpec n;
  n.sigma_input = s.number("sigma_input", n.sigma_input);
  n.sigma_image = s.number("sigma_image", n.sigma_image);
  n.sigma_obs = s.number("sigma_obs", n.sigma_obs);
  n.dropout_scale = s.number("dropout_scale", n.dropout_scale);
  n.jitter_scale = s.number("jitter_scale", n.jitter_scale);
  checked(s.field("sigma_input"), [&] { n.validate(); });
  return n;
}

OracleSettings parse_oracle(const Section& s) {
  s.only({"parallax_min_deg", "worst_case_reward", "occlusion_radius", "chamfer"});
  OracleSettings o;
  o.parallax_min = s.number("parallax_min_deg", o.parallax_min * 180.0 / kPi) * kPi / 180.0;
  if (!(o.parallax_min >= 0.0 && o.parallax_min < kPi))
    throw ConfigError(s.field("parallax_min_deg"), "must lie in [0, 180)");
  o.worst_case_reward = s.number("worst_case_reward", o.worst_case_reward);
  if (!(o.worst_case_reward <= 0.0)) throw ConfigError(s.field("worst_case_reward"), "must be <= 0");
  o.occlusion_radius = s.number("occlusion_radius", o.occlusion_radius);
  if (o.occlusion_radius < 0.0) throw ConfigError(s.field("occlusion_radius"), "must be >= 0");
  const std::string chamfer = s.string("chamfer", "euclidean");
  if (chamfer == "euclidean")
    o.chamfer = ChamferVariant::kEuclidean;
  else if (chamfer == "squared")
    o.chamfer = ChamferVariant::kSquared;
  else
    throw ConfigError(s.field("chamfer"), "must be 'euclidean' or 'squared'");
  return o;
}

DepthGridSpec parse_depth_grid(const Section& s) {
  s.only({"resolution", "x", "y", "ground_height"});
  DepthGridSpec g;
  g.resolution = static_cast<int>(s.positive("resolution", g.resolution));
  std::tie(g.x_min, g.x_max) = s.range("x", {g.x_min, g.x_max});
  std::tie(g.y_min, g.y_max) = s.range("y", {g.y_min, g.y_max});
  g.ground_height = s.number("ground_height", g.ground_height);
  checked(s.field("resolution"), [&] { g.validate(); });
  return g;
}

BaselineConfig parse_baselines(const Section& s) {
  s.only({"circle_radius", "circle_altitude", "methods", "candidates"});
  BaselineConfig b;
  b.circle_radius = s.numbers("circle_radius", b.circle_radius);
  b.circle_altitude = s.numbers("circle_altitude", b.circle_altitude);
  if (b.circle_radius.empty()) throw ConfigError(s.field("circle_radius"), "must not be empty");
  if (b.circle_altitude.empty()) throw ConfigError(s.field("circle_altitude"), "must not be empty");
  for (double r : b.circle_radius)
    if (!(r > 0.0)) throw ConfigError(s.field("circle_radius"), "entries must be positive");
  if (s.has("methods")) {
    const json& m = s.at("methods");
    if (!m.is_array()) throw ConfigError(s.field("methods"), "must be an array");
    b.methods.clear();
    for (const auto& name : m) {
      if (!name.is_string()) throw ConfigError(s.field("methods"), "entries must be strings");
      const auto n = name.get<std::string>();
      if (n != "circle" && n != "mcp" && n != "geometric-bo")
        throw ConfigError(s.field("methods"), "unknown method '" + n + "'");
      b.methods.push_back(n);
    }
  }
  if (s.has("candidates")) {
    const Section c = s.child("candidates");
    c.only({"azimuths", "elevations", "radii"});
    b.candidates.azimuths = static_cast<int>(c.positive("azimuths", b.candidates.azimuths));
    b.candidates.elevations = c.numbers("elevations", b.candidates.elevations);
    b.candidates.radii = c.numbers("radii", b.candidates.radii);
    if (b.candidates.elevations.empty() || b.candidates.radii.empty())
      throw ConfigError(c.field("radii"), "candidate grid must not be empty");
  }
  return b;
}

std::vector<VariantConfig> parse_variants(const Section& root) {
  std::vector<VariantConfig> out;
  const json& v = root.at("variants");
  if (!v.is_array()) throw ConfigError("variants", "must be an array");
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Section s(v[i], "variants[" + std::to_string(i) + "]");
    s.only({"id", "scale_jitter", "rotate", "remove"});
    VariantConfig c;
    c.id = s.string("id", "variant" + std::to_string(i));
    c.scale_jitter = s.number("scale_jitter", 0.0);
    if (!(c.scale_jitter >= 0.0 && c.scale_jitter < 1.0))
      throw ConfigError(s.field("scale_jitter"), "must lie in [0, 1)");
    c.rotate = s.boolean("rotate", false);
    for (double r : s.numbers("remove", {})) {
      if (r < 0 || r != std::floor(r)) throw ConfigError(s.field("remove"), "entries must be plant indices");
      c.remove.push_back(static_cast<std::size_t>(r));
    }
    out.push_back(std::move(c));
  }
  return out;
}

// ---- running --------------------------------------------------------------

// Runs body(i) for i in [0, n) on up to `jobs` threads. Every task runs; the
// lowest-index failure is rethrown afterwards.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::clamp(jobs, 1, 256));
  if (threads == 1 || n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(threads, n); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct LoadedScene {
  std::string id;
  Scene scene;
  fs::path ply;  // persisted reference cloud
};

// One report row together with the files it can be re-derived from.
struct ScoredRow {
  ReportRow row;
  fs::path scene_ply;
  fs::path plan;
};

class Runner {
 public:
  Runner(const ExperimentConfig& config, const RunOptions& options)
      : cfg_(config), opts_(options), out_(options.out ? *options.out : config.output_dir),
        seed_(options.seed ? *options.seed : config.seed) {}

  ExperimentResult run(ExperimentKind kind) {
    fs::create_directories(out_);
    try {
      dispatch(kind);
    } catch (const ConfigError&) {
      throw;
    } catch (const SpotCheckError&) {
      throw;
    } catch (const std::exception& e) {
      write_failure(kind, e.what());
      throw ExperimentFailed(e.what());
    }
    std::sort(result_.artifacts.begin(), result_.artifacts.end());
    return std::move(result_);
  }

 private:
  void dispatch(ExperimentKind kind) {
    switch (kind) {
      case ExperimentKind::kGenerate: return generate();
      case ExperimentKind::kOptimize: return optimize();
      case ExperimentKind::kBaseline: return compare(false);
      case ExperimentKind::kCompare: return compare(true);
      case ExperimentKind::kEvaluate: return evaluate();
      case ExperimentKind::kRegret: return regret();
      case ExperimentKind::kSweepInputNoise: return sweep_input_noise();
      case ExperimentKind::kSweepImageNoise: return sweep_image_noise();
      case ExperimentKind::kGeneralize: return generalize();
    }
  }

  void log(const std::string& line) {
    if (!opts_.log) return;
    std::lock_guard lock(log_mutex_);
    *opts_.log << line << '\n';
  }

  void write(const fs::path& rel, std::string_view contents) {
    const fs::path path = out_ / rel;
    fs::create_directories(path.parent_path());
    write_file_atomic(path, contents);
    std::lock_guard lock(artifact_mutex_);
    result_.artifacts.push_back(rel);
  }

  void write_failure(ExperimentKind kind, const std::string& what) {
    std::vector<std::string> names;
    {
      std::lock_guard lock(artifact_mutex_);
      for (const auto& a : result_.artifacts) names.push_back(a.generic_string());
    }
    std::sort(names.begin(), names.end());
    const json doc{{"kind", to_string(kind)}, {"error", what}, {"artifacts", names}};
    try {
      write_file_atomic(out_ / "failure.json", doc.dump(2) + "\n");
    } catch (const std::exception&) {
      // Nothing more can be reported if the output directory is unwritable.
    }
  }

  std::uint64_t run_seed(int k) const { return derive_seed(seed_, "run", static_cast<std::uint64_t>(k)); }

  LoadedScene load_scene(const SceneEntry& entry) {
    if (entry.ply) {
      Scene scene(entry.spec, read_ply(*entry.ply));
      return {entry.id, std::move(scene), *entry.ply};
    }
    Scene scene = canonical_scene(generate_scene(entry.spec));
    return persist_scene(entry.id, std::move(scene));
  }

  LoadedScene persist_scene(const std::string& id, Scene scene) {
    const fs::path rel = fs::path("scenes") / (id + ".ply");
    write(rel, format_ply(scene.reference()));
    return {id, std::move(scene), out_ / rel};
  }

  std::vector<LoadedScene> load_scenes() {
    if (cfg_.scenes.empty()) throw ConfigError("scenes", "at least one scene is required");
    std::vector<LoadedScene> scenes;
    for (const auto& e : cfg_.scenes) scenes.push_back(load_scene(e));
    return scenes;
  }

  SearchSpace space_for(const Scene& scene) const {
    const auto& s = cfg_.space;
    return s.mode == SpaceMode::kLookAtCenter
               ? SearchSpace::look_at_center(s.n_cameras, scene.center(), s.intrinsics, s.look_at)
               : SearchSpace::free_pose(s.n_cameras, scene.center(), s.intrinsics, s.free_pose);
  }

  std::string runtime(std::chrono::steady_clock::time_point start) const {
    if (!cfg_.record_runtime) return "";
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start);
    return format_double(std::round(ms.count() * 1000.0) / 1000.0);
  }

  // BOSfM on the reconstruction reward. A failed oracle leaves the partial
  // trace on disk before the error propagates.
  Trace run_bo(const LoadedScene& s, const SearchSpace& space, const NoiseSpec& noise, std::uint64_t seed,
               const std::string& trace_name) {
    BoConfig bo = cfg_.bo;
    bo.rng_seed = derive_seed(seed, "bosfm");
    const OracleSettings oracle = cfg_.oracle;
    const Oracle f = [&](const Vector& theta, std::uint64_t eval_seed) {
      return reward(s.scene, theta, space, noise, eval_seed, oracle);
    };
    try {
      Trace trace = run_bosfm(f, space.bounds(), bo);
      write(fs::path("traces") / (trace_name + ".csv"), format_trace_csv(trace));
      return trace;
    } catch (const BoAborted& e) {
      write(fs::path("traces") / (trace_name + ".partial.csv"), format_trace_csv(e.partial()));
      throw;
    }
  }

  ScoredRow score_and_persist(const LoadedScene& s, const ViewPlan& plan, const std::string& method,
                              std::uint64_t seed, const std::string& tag, const std::string& runtime_ms) {
    ScoredRow out;
    out.row = score_plan(s.scene, plan, cfg_.oracle, cfg_.depth_grid, method, s.id, seed);
    out.row.runtime_ms = runtime_ms;
    const std::string stem = method + "_" + s.id + (tag.empty() ? "" : "_" + tag);
    const fs::path plan_rel = fs::path("plans") / (stem + ".json");
    write(plan_rel, format_plan(plan));
    write(fs::path("recon") / (stem + ".ply"),
          format_ply(reconstruct(s.scene, plan, NoiseSpec{}, 0, cfg_.oracle)));
    out.scene_ply = s.ply;
    out.plan = out_ / plan_rel;
    return out;
  }

  void emit_report(const std::vector<ScoredRow>& rows, const std::string& name = "report.csv") {
    std::vector<ReportRow> report;
    for (const auto& r : rows) report.push_back(r.row);
    write(name, format_report_csv(report));
    spot_check(rows);
    result_.report.insert(result_.report.end(), report.begin(), report.end());
  }

  // Re-derives a few rows from the persisted scene and plan files.
  void spot_check(const std::vector<ScoredRow>& rows) {
    if (rows.empty() || cfg_.spot_checks <= 0) return;
    std::vector<std::size_t> idx(rows.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::mt19937_64 rng(derive_seed(seed_, "spot-check"));
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(std::min<std::size_t>(idx.size(), static_cast<std::size_t>(cfg_.spot_checks)));
    for (std::size_t i : idx) {
      const ScoredRow& r = rows[i];
      const Scene scene(SceneSpec{}, read_ply(r.scene_ply));
      const ReportRow again =
          score_plan(scene, read_plan(r.plan), cfg_.oracle, cfg_.depth_grid, r.row.method, r.row.scene, r.row.seed);
      if (format_double(again.cd_x100) != format_double(r.row.cd_x100) ||
          format_double(again.depth_mae) != format_double(r.row.depth_mae))
        throw SpotCheckError("spot check failed for " + r.row.method + "/" + r.row.scene + " seed " +
                             std::to_string(r.row.seed) + ": recomputed cd_x100 " + format_double(again.cd_x100) +
                             " vs reported " + format_double(r.row.cd_x100));
      log("spot check ok: " + r.row.method + "/" + r.row.scene + " seed " + std::to_string(r.row.seed));
    }
  }

  // Baseline rows for one scene. Deterministic baselines are computed once
  // and reported for every run seed so that rows pair up with BOSfM runs.
  std::vector<ScoredRow> baseline_rows(const LoadedScene& s, const std::vector<std::uint64_t>& seeds) {
    const SearchSpace space = space_for(s.scene);
    const auto& b = cfg_.baselines;
    std::vector<ScoredRow> rows;
    for (const auto& method : b.methods) {
      if (method == "circle") {
        const auto start = std::chrono::steady_clock::now();
        const CircleTuning tuned = tune_circle(cfg_.space.n_cameras, s.scene.center(), cfg_.space.intrinsics,
                                               b.circle_radius, b.circle_altitude,
                                               noise_free_scorer(s.scene, cfg_.oracle));
        const std::string rt = runtime(start);
        for (auto seed : seeds) rows.push_back(score_and_persist(s, tuned.plan, "circle", seed, "", rt));
        log("circle " + s.id + ": radius " + format_double(tuned.radius) + " altitude " +
            format_double(tuned.altitude));
      } else if (method == "mcp") {
        const auto start = std::chrono::steady_clock::now();
        const auto candidates = build_candidates(s.scene, b.candidates, cfg_.space.intrinsics);
        const ViewPlan plan = mcp_plan(candidates, cfg_.space.n_cameras);
        const std::string rt = runtime(start);
        for (auto seed : seeds) rows.push_back(score_and_persist(s, plan, "mcp", seed, "", rt));
      } else if (method == "geometric-bo") {
        std::vector<ScoredRow> geo(seeds.size());
        parallel_for(seeds.size(), opts_.jobs, [&](std::size_t k) {
          const auto start = std::chrono::steady_clock::now();
          BoConfig bo = cfg_.bo;
          bo.rng_seed = derive_seed(seeds[k], "geometric-bo");
          const Trace trace = run_geometric_bo(s.scene, space, bo, cfg_.oracle);
          const std::string tag = "r" + std::to_string(k);
          write(fs::path("traces") / ("geometric-bo_" + s.id + "_" + tag + ".csv"), format_trace_csv(trace));
          geo[k] = score_and_persist(s, best_plan(trace, space).plan, "geometric-bo", seeds[k], tag, runtime(start));
          log("geometric-bo " + s.id + " run " + std::to_string(k) + ": cd_x100 " + format_double(geo[k].row.cd_x100));
        });
        rows.insert(rows.end(), geo.begin(), geo.end());
      }
    }
    return rows;
  }

  std::vector<std::uint64_t> run_seeds() const {
    if (cfg_.runs < 1) throw ConfigError("runs", "must be >= 1");
    std::vector<std::uint64_t> seeds;
    for (int k = 0; k < cfg_.runs; ++k) seeds.push_back(run_seed(k));
    return seeds;
  }

  std::vector<ScoredRow> bosfm_rows(const LoadedScene& s, const std::vector<std::uint64_t>& seeds,
                                    const NoiseSpec& noise) {
    const SearchSpace space = space_for(s.scene);
    std::vector<ScoredRow> rows(seeds.size());
    parallel_for(seeds.size(), opts_.jobs, [&](std::size_t k) {
      const auto start = std::chrono::steady_clock::now();
      const std::string tag = "r" + std::to_string(k);
      const Trace trace = run_bo(s, space, noise, seeds[k], "bosfm_" + s.id + "_" + tag);
      rows[k] = score_and_persist(s, best_plan(trace, space).plan, "bosfm", seeds[k], tag, runtime(start));
      log("bosfm " + s.id + " run " + std::to_string(k) + ": cd_x100 " + format_double(rows[k].row.cd_x100));
    });
    return rows;
  }

  void generate() {
    for (const auto& s : load_scenes()) log("scene " + s.id + ": " + std::to_string(s.scene.reference().size()) + " points");
  }

  void optimize() {
    const auto seeds = run_seeds();
    std::vector<ScoredRow> rows;
    for (const auto& s : load_scenes()) {
      auto r = bosfm_rows(s, seeds, cfg_.noise);
      rows.insert(rows.end(), r.begin(), r.end());
    }
    emit_report(rows);
  }

  void compare(bool with_bosfm) {
    const auto seeds = run_seeds();
    std::vector<ScoredRow> rows;
    for (const auto& s : load_scenes()) {
      auto b = baseline_rows(s, seeds);
      rows.insert(rows.end(), b.begin(), b.end());
      if (with_bosfm) {
        auto r = bosfm_rows(s, seeds, cfg_.noise);
        rows.insert(rows.end(), r.begin(), r.end());
      }
    }
    emit_report(rows);
  }

  void evaluate() {
    if (!cfg_.plan_path) throw ConfigError("plan", "is required for evaluate");
    const auto scenes = load_scenes();
    const LoadedScene& s = scenes.front();
    const ViewPlan plan = read_plan(*cfg_.plan_path);
    ScoredRow row;
    row.row = score_plan(s.scene, plan, cfg_.oracle, cfg_.depth_grid, "evaluate", s.id, seed_);
    row.scene_ply = s.ply;
    row.plan = *cfg_.plan_path;
    write(fs::path("recon") / ("evaluate_" + s.id + ".ply"),
          format_ply(reconstruct(s.scene, plan, NoiseSpec{}, 0, cfg_.oracle)));
    result_.chamfer = row.row.cd_x100 / 100.0;
    emit_report({row});
  }

  void regret() {
    const auto seeds = run_seeds();
    for (const auto& s : load_scenes()) {
      const SearchSpace space = space_for(s.scene);
      std::vector<RegretRun> runs(seeds.size());
      parallel_for(seeds.size(), opts_.jobs, [&](std::size_t k) {
        const std::string tag = "r" + std::to_string(k);
        RegretRun& run = runs[k];
        run.scene = s.id;
        run.seed = seeds[k];
        run.trace = run_bo(s, space, cfg_.noise, seeds[k], "bosfm_" + s.id + "_" + tag);
        run.regret = simple_regret_curve(run.trace, cfg_.r_star);
        write(fs::path("plans") / ("bosfm_" + s.id + "_" + tag + ".json"), format_plan(best_plan(run.trace, space).plan));
        log("regret " + s.id + " run " + std::to_string(k) + ": final " + format_double(run.regret.back()));
      });
      write(fs::path("regret") / (s.id + ".csv"), format_regret_csv(runs));
      for (auto& r : runs) result_.regret.push_back(std::move(r));
    }
  }

  std::vector<SweepSummaryRow> summarize(const std::vector<SweepRow>& rows) const {
    std::vector<SweepSummaryRow> out;
    std::map<std::pair<std::string, double>, std::vector<double>> groups;
    std::vector<std::pair<std::string, double>> order;
    for (const auto& r : rows) {
      auto key = std::make_pair(r.scene, r.sigma);
      if (!groups.count(key)) order.push_back(key);
      groups[key].push_back(r.cd_x100);
    }
    for (const auto& key : order) {
      auto v = groups[key];
      SweepSummaryRow s;
      s.scene = key.first;
      s.sigma = key.second;
      s.n = v.size();
      double sum = 0.0;
      for (double x : v) sum += x;
      s.mean_cd_x100 = sum / static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - s.mean_cd_x100) * (x - s.mean_cd_x100);
      s.std_cd_x100 = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
      std::sort(v.begin(), v.end());
      const std::size_t m = v.size() / 2;
      s.median_cd_x100 = v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
      out.push_back(s);
    }
    return out;
  }

  void emit_sweep(const std::vector<SweepRow>& rows, const std::string& stem) {
    result_.sweep = rows;
    result_.summary = summarize(rows);
    write(stem + ".csv", format_sweep_csv(rows));
    write(stem + "_summary.csv", format_sweep_summary_csv(result_.summary));
  }

  const std::vector<double>& sigma_grid() const {
    if (cfg_.sigma_grid.empty()) throw ConfigError("sweep.sigma", "a non-empty sigma grid is required");
    return cfg_.sigma_grid;
  }

  void sweep_input_noise() {
    const auto seeds = run_seeds();
    const auto& grid = sigma_grid();
    std::vector<SweepRow> rows;
    for (const auto& s : load_scenes()) {
      const SearchSpace space = space_for(s.scene);
      std::vector<SweepRow> block(grid.size() * seeds.size());
      parallel_for(block.size(), opts_.jobs, [&](std::size_t i) {
        const std::size_t g = i / seeds.size(), k = i % seeds.size();
        NoiseSpec noise = cfg_.noise;
        noise.sigma_input = grid[g];
        const Trace trace = run_bo(s, space, noise, seeds[k],
                                   "bosfm_" + s.id + "_sigma" + std::to_string(g) + "_r" + std::to_string(k));
        const ReportRow r =
            score_plan(s.scene, best_plan(trace, space).plan, cfg_.oracle, cfg_.depth_grid, "bosfm", s.id, seeds[k]);
        block[i] = {s.id, grid[g], seeds[k], r.cd_x100};
        log("sweep-input-noise " + s.id + " sigma " + format_double(grid[g]) + " run " + std::to_string(k) +
            ": cd_x100 " + format_double(r.cd_x100));
      });
      rows.insert(rows.end(), block.begin(), block.end());
    }
    emit_sweep(rows, "sweep_input_noise");
  }

  std::vector<LoadedScene> variant_scenes(const LoadedScene& train) {
    std::vector<LoadedScene> out;
    for (std::size_t i = 0; i < cfg_.variants.size(); ++i) {
      const auto& v = cfg_.variants[i];
      const std::set<std::size_t> remove(v.remove.begin(), v.remove.end());
      Scene scene = canonical_scene(
          transform_scene(train.scene, v.scale_jitter, v.rotate, remove, derive_seed(seed_, "variant", i)));
      out.push_back(persist_scene(v.id, std::move(scene)));
    }
    return out;
  }

  // Best plan found on the training scene for every run seed.
  std::vector<ViewPlan> train_plans(const LoadedScene& train, const std::vector<std::uint64_t>& seeds) {
    const SearchSpace space = space_for(train.scene);
    std::vector<std::optional<ViewPlan>> plans(seeds.size());
    parallel_for(seeds.size(), opts_.jobs, [&](std::size_t k) {
      const std::string tag = "r" + std::to_string(k);
      const Trace trace = run_bo(train, space, cfg_.noise, seeds[k], "bosfm_" + train.id + "_" + tag);
      plans[k] = best_plan(trace, space).plan;
      write(fs::path("plans") / ("bosfm_" + train.id + "_" + tag + ".json"), format_plan(*plans[k]));
    });
    std::vector<ViewPlan> out;
    for (auto& p : plans) out.push_back(std::move(*p));
    return out;
  }

  void sweep_image_noise() {
    const auto seeds = run_seeds();
    const auto& grid = sigma_grid();
    if (cfg_.image_noise_repeats < 1) throw ConfigError("sweep.repeats", "must be >= 1");
    const auto scenes = load_scenes();
    const LoadedScene& train = scenes.front();
    std::vector<LoadedScene> tests;
    for (const auto& s : scenes) tests.push_back(s);
    for (auto& v : variant_scenes(train)) tests.push_back(std::move(v));
    const auto plans = train_plans(train, seeds);

    std::vector<SweepRow> rows;
    for (const auto& t : tests) {
      for (double sigma : grid) {
        for (std::size_t k = 0; k < seeds.size(); ++k) {
          NoiseSpec noise;
          noise.sigma_image = sigma;
          noise.dropout_scale = cfg_.noise.dropout_scale;
          noise.jitter_scale = cfg_.noise.jitter_scale;
          double sum = 0.0;
          for (int r = 0; r < cfg_.image_noise_repeats; ++r) {
            const auto eval_seed = derive_seed(seeds[k], "image-noise", static_cast<std::uint64_t>(r));
            sum += -100.0 * plan_reward(t.scene, plans[k], noise, eval_seed, cfg_.oracle);
          }
          rows.push_back({t.id, sigma, seeds[k], sum / cfg_.image_noise_repeats});
        }
      }
    }
    emit_sweep(rows, "sweep_image_noise");
  }

  void generalize() {
    if (cfg_.variants.empty()) throw ConfigError("variants", "generalize needs at least one variant");
    const auto seeds = run_seeds();
    const auto scenes = load_scenes();
    const LoadedScene& train = scenes.front();
    const auto variants = variant_scenes(train);
    const auto plans = train_plans(train, seeds);

    std::vector<ScoredRow> rows;
    for (std::size_t k = 0; k < seeds.size(); ++k)
      rows.push_back(score_and_persist(train, plans[k], "bosfm", seeds[k], "r" + std::to_string(k), ""));
    for (const auto& v : variants) {
      // The trained plan is used as-is: same camera poses, no knowledge of
      // the changed scene.
      for (std::size_t k = 0; k < seeds.size(); ++k)
        rows.push_back(score_and_persist(v, plans[k], "bosfm-transfer", seeds[k], "r" + std::to_string(k), ""));
      auto b = baseline_rows(v, seeds);
      rows.insert(rows.end(), b.begin(), b.end());
    }
    emit_report(rows);
  }

  const ExperimentConfig& cfg_;
  const RunOptions& opts_;
  fs::path out_;
  std::uint64_t seed_;
  ExperimentResult result_;
  std::mutex artifact_mutex_;
  std::mutex log_mutex_;
};

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [name, k] : kind_names())
    if (k == kind) return name;
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  const auto it = kind_names().find(name);
  if (it == kind_names().end()) throw ConfigError("kind", "unknown experiment kind '" + name + "'");
  return it->second;
}

ExperimentConfig parse_config(std::string_view text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("<root>", std::string("not valid JSON: ") + e.what());
  }
  const Section root(doc, "");
  root.only({"schema_version", "kind", "seed", "output_dir", "scenes", "space", "bo", "noise", "oracle",
             "depth_grid", "baselines", "runs", "r_star", "sweep", "variants", "plan", "record_runtime",
             "spot_checks"});
  ExperimentConfig c;
  const long long version = root.integer("schema_version", -1);
  if (!root.has("schema_version")) throw ConfigError("schema_version", "is required");
  if (version != 1) throw ConfigError("schema_version", "unsupported version " + std::to_string(version));
  c.schema_version = static_cast<int>(version);
  if (root.has("kind")) c.kind = experiment_kind_from_string(root.string("kind", ""));
  c.seed = root.seed("seed", 0);
  c.output_dir = resolve(base_dir, root.string("output_dir", "out"));

  if (!root.has("space")) throw ConfigError("space", "is required");
  c.space = parse_space(root.child("space"));

  if (root.has("scenes")) {
    const json& s = root.at("scenes");
    if (!s.is_array() || s.empty()) throw ConfigError("scenes", "must be a non-empty array");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < s.size(); ++i) {
      c.scenes.push_back(parse_scene(Section(s[i], "scenes[" + std::to_string(i) + "]"), i, base_dir));
      if (!ids.insert(c.scenes.back().id).second)
        throw ConfigError("scenes[" + std::to_string(i) + "].id", "duplicate scene id");
    }
  }
  if (root.has("bo")) c.bo = parse_bo(root.child("bo"));
  if (root.has("noise")) c.noise = parse_noise(root.child("noise"));
  if (root.has("oracle")) c.oracle = parse_oracle(root.child("oracle"));
  if (root.has("depth_grid")) c.depth_grid = parse_depth_grid(root.child("depth_grid"));
  if (root.has("baselines")) c.baselines = parse_baselines(root.child("baselines"));
  c.runs = static_cast<int>(root.positive("runs", c.runs));
  c.r_star = root.number("r_star", c.r_star);
  if (root.has("sweep")) {
    const Section s = root.child("sweep");
    s.only({"sigma", "repeats"});
    c.sigma_grid = s.numbers("sigma", {});
    for (double v : c.sigma_grid)
      if (v < 0.0) throw ConfigError(s.field("sigma"), "entries must be >= 0");
    c.image_noise_repeats = static_cast<int>(s.positive("repeats", c.image_noise_repeats));
  }
  if (root.has("variants")) c.variants = parse_variants(root);
  if (root.has("plan")) {
    c.plan_path = resolve(base_dir, root.string("plan", ""));
    if (!fs::exists(*c.plan_path)) throw ConfigError("plan", "file does not exist: " + c.plan_path->string());
  }
  c.record_runtime = root.boolean("record_runtime", false);
  c.spot_checks = static_cast<int>(root.integer("spot_checks", c.spot_checks));
  if (c.spot_checks < 0) throw ConfigError("spot_checks", "must be >= 0");
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ConfigError("<file>", e.what());
  }
  return parse_config(text, path.parent_path());
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  if (options.kind && config.kind && *options.kind != *config.kind)
    throw ConfigError("kind", "config declares '" + to_string(*config.kind) + "' but '" +
                                  to_string(*options.kind) + "' was requested");
  const auto kind = options.kind ? options.kind : config.kind;
  if (!kind) throw ConfigError("kind", "is required");
  if (options.jobs < 1) throw ConfigError("jobs", "must be >= 1");
  Runner runner(config, options);
  return runner.run(*kind);
}

ReportRow score_plan(const Scene& scene, const ViewPlan& plan, const OracleSettings& oracle,
                     const DepthGridSpec& grid, std::string method, std::string scene_id, std::uint64_t seed) {
  ReportRow row;
  row.method = std::move(method);
  row.scene = std::move(scene_id);
  row.seed = seed;
  const PointCloud recon = reconstruct(scene, plan, NoiseSpec{}, 0, oracle);
  row.cd_x100 = recon.empty() ? -100.0 * oracle.worst_case_reward
                              : 100.0 * chamfer_distance(scene.reference(), recon, oracle.chamfer);
  row.depth_mae = depth_mae(scene.reference(), recon, grid);
  return row;
}

Scene canonical_scene(const Scene& scene) {
  return Scene(scene.spec(), parse_ply(format_ply(scene.reference())));
}

std::string format_sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "scene,sigma,seed,cd_x100\n";
  for (const auto& r : rows)
    out += r.scene + "," + format_double(r.sigma) + "," + std::to_string(r.seed) + "," + format_double(r.cd_x100) + "\n";
  return out;
}

std::string format_sweep_summary_csv(const std::vector<SweepSummaryRow>& rows) {
  std::string out = "scene,sigma,n,mean_cd_x100,std_cd_x100,median_cd_x100\n";
  for (const auto& r : rows)
    out += r.scene + "," + format_double(r.sigma) + "," + std::to_string(r.n) + "," + format_double(r.mean_cd_x100) +
           "," + format_double(r.std_cd_x100) + "," + format_double(r.median_cd_x100) + "\n";
  return out;
}

std::string format_regret_csv(const std::vector<RegretRun>& runs) {
  std::string out = "scene,seed,iter,y,best_y,simple_regret\n";
  for (const auto& run : runs) {
    for (std::size_t i = 0; i < run.trace.size(); ++i) {
      const auto& rec = run.trace.records[i];
      out += run.scene + "," + std::to_string(run.seed) + "," + std::to_string(rec.iteration) + "," +
             format_double(rec.y) + "," + format_double(rec.best_y) + "," + format_double(run.regret[i]) + "\n";
    }
  }
  return out;
}

}  // namespace viewplan
