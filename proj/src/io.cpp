#include "viewplan/io.hpp"

#include "viewplan/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace viewplan {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string format_sig9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

double parse_double(std::string_view s, const char* what) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw FormatError(std::string("cannot parse ") + what + " from '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::vector<std::string_view> tokens_of(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t b = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > b) out.push_back(line.substr(b, i - b));
  }
  return out;
}

json point_json(const Point3& p) { return json::array({p.x(), p.y(), p.z()}); }

Point3 point_from_json(const json& j, const char* field) {
  if (!j.is_array() || j.size() != 3) throw FormatError(std::string("plan field '") + field + "' must be [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

void write_file_atomic(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error("failed writing '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_ply(const PointCloud& cloud) {
  std::string out = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(cloud.size()) +
                    "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  for (const auto& p : cloud) {
    out += format_sig9(p.x());
    out += ' ';
    out += format_sig9(p.y());
    out += ' ';
    out += format_sig9(p.z());
    out += '\n';
  }
  return out;
}

PointCloud parse_ply(std::string_view text) {
  const auto lines = lines_of(text);
  static constexpr std::string_view kAxes[] = {"x", "y", "z"};
  std::size_t i = 0;
  auto expect = [&](std::string_view want) {
    if (i >= lines.size() || lines[i] != want)
      throw FormatError("PLY header: expected '" + std::string(want) + "' on line " + std::to_string(i + 1));
    ++i;
  };
  expect("ply");
  expect("format ascii 1.0");
  if (i >= lines.size()) throw FormatError("PLY header: missing element vertex line");
  const auto head = tokens_of(lines[i]);
  if (head.size() != 3 || head[0] != "element" || head[1] != "vertex")
    throw FormatError("PLY header: expected 'element vertex <n>'");
  std::size_t n = 0;
  const auto res = std::from_chars(head[2].data(), head[2].data() + head[2].size(), n);
  if (res.ec != std::errc() || res.ptr != head[2].data() + head[2].size())
    throw FormatError("PLY header: bad vertex count");
  ++i;
  for (auto axis : kAxes) expect("property float " + std::string(axis));
  expect("end_header");

  std::vector<Point3> pts;
  pts.reserve(n);
  for (; i < lines.size(); ++i) {
    const auto tok = tokens_of(lines[i]);
    if (tok.empty()) continue;
    if (tok.size() != 3) throw FormatError("PLY body: line " + std::to_string(i + 1) + " is not an x y z triple");
    pts.emplace_back(parse_double(tok[0], "x"), parse_double(tok[1], "y"), parse_double(tok[2], "z"));
  }
  if (pts.size() != n)
    throw FormatError("PLY vertex count mismatch: header says " + std::to_string(n) + ", found " +
                      std::to_string(pts.size()));
  return PointCloud(std::move(pts));
}

void write_ply(const PointCloud& cloud, const fs::path& path) { write_file_atomic(path, format_ply(cloud)); }

PointCloud read_ply(const fs::path& path) { return parse_ply(read_file(path)); }

std::string format_plan(const ViewPlan& plan) {
  json cams = json::array();
  for (const auto& c : plan) {
    cams.push_back({{"position", point_json(c.position())},
                    {"look_dir", point_json(c.look_dir())},
                    {"fov_half_angle", c.fov_half_angle()},
                    {"range_min", c.range_min()},
                    {"range_max", c.range_max()}});
  }
  return json{{"cameras", cams}}.dump(2) + "\n";
}

ViewPlan parse_plan(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("plan file is not valid JSON: ") + e.what());
  }
  if (!doc.contains("cameras") || !doc["cameras"].is_array())
    throw FormatError("plan file needs a 'cameras' array");
  std::vector<CameraPose> cams;
  try {
    for (const auto& c : doc["cameras"]) {
      Intrinsics intr{c.at("fov_half_angle").get<double>(), c.at("range_min").get<double>(),
                      c.at("range_max").get<double>()};
      cams.emplace_back(point_from_json(c.at("position"), "position"),
                        point_from_json(c.at("look_dir"), "look_dir"), intr);
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("plan file: ") + e.what());
  }
  return ViewPlan(std::move(cams));
}

void write_plan(const ViewPlan& plan, const fs::path& path) { write_file_atomic(path, format_plan(plan)); }

ViewPlan read_plan(const fs::path& path) { return parse_plan(read_file(path)); }

std::string format_trace_csv(const Trace& trace) {
  std::size_t m = trace.kernels.size(), d = 0;
  if (!trace.empty()) {
    m = static_cast<std::size_t>(trace.records.front().weights.size());
    d = static_cast<std::size_t>(trace.records.front().theta.size());
  }
  std::string out = "iter,y,best_y,model_index";
  for (std::size_t i = 0; i < m; ++i) out += ",w_" + std::to_string(i);
  for (std::size_t i = 0; i < d; ++i) out += ",theta_" + std::to_string(i);
  out += '\n';
  for (const auto& r : trace.records) {
    out += std::to_string(r.iteration) + ',' + format_double(r.y) + ',' + format_double(r.best_y) + ',' +
           (r.model_index ? std::to_string(*r.model_index) : std::string("-1"));
    for (Eigen::Index i = 0; i < r.weights.size(); ++i) out += ',' + format_double(r.weights[i]);
    for (Eigen::Index i = 0; i < r.theta.size(); ++i) out += ',' + format_double(r.theta[i]);
    out += '\n';
  }
  return out;
}

void write_trace_csv(const Trace& trace, const fs::path& path) {
  write_file_atomic(path, format_trace_csv(trace));
}

std::vector<TraceCsvRow> parse_trace_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw FormatError("trace CSV is empty");
  const auto header = split(lines[0], ',');
  if (header.size() < 4 || header[0] != "iter" || header[1] != "y" || header[2] != "best_y" ||
      header[3] != "model_index")
    throw FormatError("trace CSV has an unexpected header");
  std::size_t m = 0, d = 0;
  for (std::size_t i = 4; i < header.size(); ++i) {
    if (header[i].starts_with("w_")) ++m;
    else if (header[i].starts_with("theta_")) ++d;
    else throw FormatError("trace CSV: unknown column '" + std::string(header[i]) + "'");
  }
  std::vector<TraceCsvRow> rows;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto f = split(lines[l], ',');
    if (f.size() != header.size()) throw FormatError("trace CSV: wrong field count on line " + std::to_string(l + 1));
    TraceCsvRow row;
    row.iteration = static_cast<int>(parse_double(f[0], "iter"));
    row.y = parse_double(f[1], "y");
    row.best_y = parse_double(f[2], "best_y");
    row.model_index = static_cast<int>(parse_double(f[3], "model_index"));
    for (std::size_t i = 0; i < m; ++i) row.weights.push_back(parse_double(f[4 + i], "weight"));
    for (std::size_t i = 0; i < d; ++i) row.theta.push_back(parse_double(f[4 + m + i], "theta"));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_report_csv(const std::vector<ReportRow>& rows) {
  std::string out = "method,scene,cd_x100,depth_mae,seed,runtime_ms\n";
  for (const auto& r : rows)
    out += r.method + ',' + r.scene + ',' + format_double(r.cd_x100) + ',' + format_double(r.depth_mae) + ',' +
           std::to_string(r.seed) + ',' + r.runtime_ms + '\n';
  return out;
}

std::vector<ReportRow> parse_report_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0] != "method,scene,cd_x100,depth_mae,seed,runtime_ms")
    throw FormatError("report CSV has an unexpected header");
  std::vector<ReportRow> rows;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto f = split(lines[l], ',');
    if (f.size() != 6) throw FormatError("report CSV: wrong field count on line " + std::to_string(l + 1));
    ReportRow r;
    r.method = std::string(f[0]);
    r.scene = std::string(f[1]);
    r.cd_x100 = parse_double(f[2], "cd_x100");
    r.depth_mae = parse_double(f[3], "depth_mae");
    r.seed = static_cast<std::uint64_t>(std::stoull(std::string(f[4])));
    r.runtime_ms = std::string(f[5]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace viewplan
