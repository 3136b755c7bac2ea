#pragma once

#include "viewplan/baselines.hpp"
#include "viewplan/bo.hpp"
#include "viewplan/errors.hpp"
#include "viewplan/io.hpp"
#include "viewplan/metrics.hpp"
#include "viewplan/scene.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace viewplan {

enum class ExperimentKind {
  kGenerate,
  kOptimize,
  kBaseline,
  kEvaluate,
  kRegret,
  kCompare,
  kSweepInputNoise,
  kSweepImageNoise,
  kGeneralize,
};

std::string to_string(ExperimentKind kind);
// Throws ConfigError("kind", ...) for unknown names.
ExperimentKind experiment_kind_from_string(const std::string& name);

struct SceneEntry {
  std::string id;
  SceneSpec spec;
  // When set, the reference cloud is read from this PLY instead of being
  // generated from `spec`.
  std::optional<std::filesystem::path> ply;
};

struct SpaceConfig {
  SpaceMode mode = SpaceMode::kLookAtCenter;
  std::size_t n_cameras = 10;
  Intrinsics intrinsics{};
  LookAtCenterLimits look_at{};
  FreePoseLimits free_pose{};
};

struct BaselineConfig {
  std::vector<double> circle_radius{1.5, 2.0, 2.5, 3.0};
  std::vector<double> circle_altitude{0.5, 1.0, 1.5, 2.0};
  CandidateGrid candidates{};
  std::vector<std::string> methods{"circle", "mcp", "geometric-bo"};
};

struct VariantConfig {
  std::string id;
  double scale_jitter = 0.0;
  bool rotate = false;
  std::vector<std::size_t> remove;
};

struct ExperimentConfig {
  int schema_version = 1;
  // May be left out when the caller supplies the kind.
  std::optional<ExperimentKind> kind;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  std::vector<SceneEntry> scenes;
  SpaceConfig space{};
  BoConfig bo{};
  NoiseSpec noise{};
  OracleSettings oracle{};
  DepthGridSpec depth_grid{};
  BaselineConfig baselines{};
  int runs = 5;
  double r_star = 0.0;
  std::vector<double> sigma_grid;
  int image_noise_repeats = 5;
  std::vector<VariantConfig> variants;
  std::optional<std::filesystem::path> plan_path;
  bool record_runtime = false;
  int spot_checks = 3;
};

// Parses a JSON configuration. Relative paths resolve against `base_dir`.
// Throws ConfigError naming the offending field.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunOptions {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<ExperimentKind> kind;
  int jobs = 1;
  std::ostream* log = nullptr;
};

struct SweepRow {
  std::string scene;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  double cd_x100 = 0.0;
};

struct SweepSummaryRow {
  std::string scene;
  double sigma = 0.0;
  std::size_t n = 0;
  double mean_cd_x100 = 0.0;
  double std_cd_x100 = 0.0;
  double median_cd_x100 = 0.0;
};

struct RegretRun {
  std::string scene;
  std::uint64_t seed = 0;
  Trace trace;
  std::vector<double> regret;
};

struct ExperimentResult {
  std::vector<ReportRow> report;
  std::vector<SweepRow> sweep;
  std::vector<SweepSummaryRow> summary;
  std::vector<RegretRun> regret;
  std::vector<std::filesystem::path> artifacts;
  // evaluate: chamfer distance of the stored plan.
  std::optional<double> chamfer;
};

// Thrown when an oracle or baseline fails mid-run. Artifacts written so far
// stay on disk next to failure.json.
class ExperimentFailed : public Error {
 public:
  using Error::Error;
};

// A report value recomputed from the persisted scene and plan differs from
// the value that was written.
class SpotCheckError : public Error {
 public:
  using Error::Error;
};

// Runs one experiment and writes its artifacts under the output directory.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

// Chamfer distance x100 and depth MAE of a plan's noise-free reconstruction.
// An empty reconstruction scores -100 * worst_case_reward.
ReportRow score_plan(const Scene& scene, const ViewPlan& plan, const OracleSettings& oracle,
                     const DepthGridSpec& grid, std::string method, std::string scene_id,
                     std::uint64_t seed);

// Scene whose reference cloud has been rounded through the PLY writer, so
// that scores recomputed from persisted files match exactly.
Scene canonical_scene(const Scene& scene);

std::string format_sweep_csv(const std::vector<SweepRow>& rows);
std::string format_sweep_summary_csv(const std::vector<SweepSummaryRow>& rows);
std::string format_regret_csv(const std::vector<RegretRun>& runs);

// Exit codes used by the command line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRunFailed = 3;
inline constexpr int kExitSpotCheck = 4;

}  // namespace viewplan
