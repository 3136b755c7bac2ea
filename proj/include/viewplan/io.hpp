#pragma once

#include "viewplan/bo.hpp"
#include "viewplan/geometry.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace viewplan {

// Writes `contents` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

// ASCII PLY with x/y/z float vertex properties, nine significant digits.
std::string format_ply(const PointCloud& cloud);
PointCloud parse_ply(std::string_view text);
void write_ply(const PointCloud& cloud, const std::filesystem::path& path);
PointCloud read_ply(const std::filesystem::path& path);

// JSON plan document: {"cameras": [{"position": [x,y,z], "look_dir": [x,y,z],
// "fov_half_angle": a, "range_min": r0, "range_max": r1}, ...]}.
std::string format_plan(const ViewPlan& plan);
ViewPlan parse_plan(std::string_view text);
void write_plan(const ViewPlan& plan, const std::filesystem::path& path);
ViewPlan read_plan(const std::filesystem::path& path);

// CSV with header iter,y,best_y,model_index,w_0..w_{M-1},theta_0..theta_{D-1};
// initialization rows carry model_index -1.
std::string format_trace_csv(const Trace& trace);
void write_trace_csv(const Trace& trace, const std::filesystem::path& path);

struct TraceCsvRow {
  int iteration = 0;
  double y = 0.0;
  double best_y = 0.0;
  int model_index = -1;
  std::vector<double> weights;
  std::vector<double> theta;
};
std::vector<TraceCsvRow> parse_trace_csv(std::string_view text);

struct ReportRow {
  std::string method;
  std::string scene;
  double cd_x100 = 0.0;
  double depth_mae = 0.0;
  std::uint64_t seed = 0;
  // Empty in reproducible mode.
  std::string runtime_ms;
};

std::string format_report_csv(const std::vector<ReportRow>& rows);
std::vector<ReportRow> parse_report_csv(std::string_view text);

// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

}  // namespace viewplan
