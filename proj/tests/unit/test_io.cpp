#include "viewplan/errors.hpp"
#include "viewplan/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <random>

using namespace viewplan;
namespace fs = std::filesystem;

TEST_SUITE("io") {

TEST_CASE("empty cloud writes zero vertices") {
  const std::string text = format_ply(PointCloud());
  CHECK(text.find("element vertex 0\n") != std::string::npos);
  CHECK(text.substr(text.size() - 11) == "end_header\n");
  CHECK(parse_ply(text).empty());
}

TEST_CASE("hand-written PLY fixture") {
  const std::string text =
      "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\n"
      "end_header\n0 0 0\n1.5 -2 3\n1e-3 4 5.25\n";
  const PointCloud c = parse_ply(text);
  REQUIRE(c.size() == 3);
  CHECK(c[1] == Point3(1.5, -2, 3));
  CHECK(c[2] == Point3(1e-3, 4, 5.25));
}

TEST_CASE("PLY round trip at printed precision") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::vector<Point3> pts;
  for (int i = 0; i < 100; ++i) pts.emplace_back(g(rng), g(rng), g(rng));
  const PointCloud once = parse_ply(format_ply(PointCloud(pts)));
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK((once[i] - pts[i]).cwiseAbs().maxCoeff() <= 1e-8 * (1 + pts[i].norm()));
  // Printing is idempotent after one round.
  CHECK(format_ply(parse_ply(format_ply(once))) == format_ply(once));
}

TEST_CASE("malformed PLY") {
  CHECK_THROWS_AS(parse_ply("plx\n"), FormatError);
  CHECK_THROWS_AS(parse_ply("ply\nformat binary_little_endian 1.0\n"), FormatError);
  const std::string head =
      "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  CHECK_THROWS_AS(parse_ply(head + "0 0 0\n"), FormatError);
  CHECK_THROWS_AS(parse_ply(head + "0 0 0\n1 2\n"), FormatError);
  CHECK_THROWS_AS(parse_ply(head + "0 0 0\n1 2 x\n"), FormatError);
}

TEST_CASE("plan JSON round trip is exact") {
  const Intrinsics intr{0.4, 0.2, 2.5};
  const ViewPlan plan({CameraPose(Point3(0.1, 0.2, 0.3), Point3(0, 0.6, 0.8), intr),
                       CameraPose(Point3(-1.0 / 3, 2, 1e-7), Point3(1, 0, 0), intr)});
  const ViewPlan back = parse_plan(format_plan(plan));
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].position() == plan[i].position());
    CHECK(back[i].look_dir() == plan[i].look_dir());
    CHECK(back[i].intrinsics() == intr);
  }
  CHECK_THROWS_AS(parse_plan("{}"), FormatError);
  CHECK_THROWS_AS(parse_plan("not json"), FormatError);
  CHECK_THROWS_AS(parse_plan(R"({"cameras":[{"position":[0,0],"look_dir":[1,0,0],"fov_half_angle":0.3,"range_min":0,"range_max":1}]})"), FormatError);
}

TEST_CASE("trace CSV header, rows and round trip") {
  Trace t;
  t.kernels = {KernelFamily::kRbfArd, KernelFamily::kMatern52};
  for (int i = 0; i < 3; ++i) {
    TraceRecord r;
    r.iteration = i - 1;
    r.theta = (Vector(2) << 0.1 * i, 1.0 / 3.0).finished();
    r.y = -1.0 / (i + 1.0) + (i == 2 ? -5 : 0);
    r.best_y = i == 0 ? r.y : std::max(t.records.back().best_y, r.y);
    r.weights = (Eigen::VectorXd(2) << 0.25, 0.75).finished();
    if (i == 2) r.model_index = 1;
    t.records.push_back(r);
  }
  const std::string csv = format_trace_csv(t);
  CHECK(csv.substr(0, csv.find('\n')) == "iter,y,best_y,model_index,w_0,w_1,theta_0,theta_1");
  const auto rows = parse_trace_csv(csv);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].model_index == -1);
  CHECK(rows[2].model_index == 1);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(rows[i].y == t.records[i].y);
    CHECK(rows[i].theta[1] == 1.0 / 3.0);
    if (i > 0) CHECK(rows[i].best_y >= rows[i - 1].best_y);
  }
}

TEST_CASE("report CSV round trip") {
  std::vector<ReportRow> rows{{"circle", "p3", 8.5, 0.01, 7, ""}, {"bosfm", "p5", 1.0 / 3, 0.0, 18446744073709551615ULL, "12.5"}};
  const std::string csv = format_report_csv(rows);
  CHECK(csv.substr(0, csv.find('\n')) == "method,scene,cd_x100,depth_mae,seed,runtime_ms");
  const auto back = parse_report_csv(csv);
  REQUIRE(back.size() == 2);
  CHECK(back[1].cd_x100 == 1.0 / 3);
  CHECK(back[1].seed == 18446744073709551615ULL);
  CHECK(back[0].runtime_ms.empty());
  CHECK(back[1].runtime_ms == "12.5");
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e300, 0.0, 123456789.0}) CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("atomic write replaces content and leaves no temp files") {
  const fs::path dir = fs::temp_directory_path() / "viewplan_io_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_file_atomic(dir / "a.txt", "one");
  write_file_atomic(dir / "a.txt", "two");
  CHECK(read_file(dir / "a.txt") == "two");
  CHECK(std::distance(fs::directory_iterator(dir), fs::directory_iterator()) == 1);
  CHECK_THROWS_AS(read_file(dir / "missing"), Error);
  fs::remove_all(dir);
}

}
