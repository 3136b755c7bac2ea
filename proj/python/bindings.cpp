#include "viewplan/acquisition.hpp"
#include "viewplan/baselines.hpp"
#include "viewplan/bo.hpp"
#include "viewplan/ensemble.hpp"
#include "viewplan/errors.hpp"
#include "viewplan/experiment.hpp"
#include "viewplan/external.hpp"
#include "viewplan/gp.hpp"
#include "viewplan/io.hpp"
#include "viewplan/metrics.hpp"
#include "viewplan/scene.hpp"
#include "viewplan/seed.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace viewplan;

namespace {

using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

PointCloud to_cloud(const Eigen::Ref<const Points>& m) {
  std::vector<Point3> pts;
  pts.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) pts.emplace_back(m(i, 0), m(i, 1), m(i, 2));
  return PointCloud(std::move(pts));
}

Points to_array(const PointCloud& cloud) {
  Points m(static_cast<Eigen::Index>(cloud.size()), 3);
  for (std::size_t i = 0; i < cloud.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = cloud[i].transpose();
  return m;
}

ChamferVariant variant_from(bool squared) { return squared ? ChamferVariant::kSquared : ChamferVariant::kEuclidean; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "View planning with ensemble-GP Bayesian optimization";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DimensionError>(m, "DimensionError", error.ptr());
  py::register_exception<DomainError>(m, "DomainError", error.ptr());
  py::register_exception<EmptyCloudError>(m, "EmptyCloudError", error.ptr());
  py::register_exception<FactorizationError>(m, "FactorizationError", error.ptr());
  py::register_exception<FormatError>(m, "FormatError", error.ptr());
  py::register_exception<AdapterError>(m, "AdapterError", error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());

  m.def("derive_seed", [](std::uint64_t parent, const std::string& label, std::uint64_t index) {
    return derive_seed(parent, label, index);
  }, py::arg("parent"), py::arg("label"), py::arg("index") = 0);

  // metrics
  m.def("chamfer_distance", [](const Eigen::Ref<const Points>& a, const Eigen::Ref<const Points>& b, bool squared) {
    return chamfer_distance(to_cloud(a), to_cloud(b), variant_from(squared));
  }, py::arg("a"), py::arg("b"), py::arg("squared") = false);
  m.def("directed_chamfer", [](const Eigen::Ref<const Points>& a, const Eigen::Ref<const Points>& b, bool squared) {
    return directed_chamfer(to_cloud(a), to_cloud(b), variant_from(squared));
  }, py::arg("source"), py::arg("target"), py::arg("squared") = false);
  py::class_<DepthGridSpec>(m, "DepthGridSpec")
      .def(py::init<>())
      .def_readwrite("resolution", &DepthGridSpec::resolution)
      .def_readwrite("x_min", &DepthGridSpec::x_min)
      .def_readwrite("x_max", &DepthGridSpec::x_max)
      .def_readwrite("y_min", &DepthGridSpec::y_min)
      .def_readwrite("y_max", &DepthGridSpec::y_max)
      .def_readwrite("ground_height", &DepthGridSpec::ground_height);
  m.def("depth_mae", [](const Eigen::Ref<const Points>& a, const Eigen::Ref<const Points>& b, const DepthGridSpec& g) {
    return depth_mae(to_cloud(a), to_cloud(b), g);
  }, py::arg("a"), py::arg("b"), py::arg("grid") = DepthGridSpec{});
  m.def("simple_regret_curve", [](const std::vector<double>& y, double r_star) {
    return simple_regret_curve(std::span<const double>(y), r_star);
  }, py::arg("observations"), py::arg("r_star") = 0.0);

  // io
  m.def("read_ply", [](const std::filesystem::path& p) { return to_array(read_ply(p)); });
  m.def("write_ply", [](const Eigen::Ref<const Points>& pts, const std::filesystem::path& p) {
    write_ply(to_cloud(pts), p);
  });

  // geometry
  py::class_<Intrinsics>(m, "Intrinsics")
      .def(py::init<>())
      .def(py::init([](double fov, double rmin, double rmax) { Intrinsics i{fov, rmin, rmax}; i.validate(); return i; }),
           py::arg("fov_half_angle"), py::arg("range_min"), py::arg("range_max"))
      .def_readwrite("fov_half_angle", &Intrinsics::fov_half_angle)
      .def_readwrite("range_min", &Intrinsics::range_min)
      .def_readwrite("range_max", &Intrinsics::range_max);
  py::class_<CameraPose>(m, "CameraPose")
      .def(py::init<const Point3&, const Point3&, const Intrinsics&>(), py::arg("position"), py::arg("look_dir"),
           py::arg("intrinsics") = Intrinsics{})
      .def_property_readonly("position", &CameraPose::position)
      .def_property_readonly("look_dir", &CameraPose::look_dir)
      .def_property_readonly("intrinsics", &CameraPose::intrinsics);
  py::class_<ViewPlan>(m, "ViewPlan")
      .def(py::init<std::vector<CameraPose>>())
      .def("__len__", &ViewPlan::size)
      .def("__getitem__", [](const ViewPlan& p, std::size_t i) {
        if (i >= p.size()) throw py::index_error();
        return p[i];
      })
      .def_property_readonly("cameras", &ViewPlan::cameras)
      .def("to_json", [](const ViewPlan& p) { return format_plan(p); })
      .def_static("from_json", [](const std::string& s) { return parse_plan(s); });
  py::class_<Bounds>(m, "Bounds")
      .def(py::init<Vector, Vector, std::vector<bool>>(), py::arg("lower"), py::arg("upper"),
           py::arg("periodic") = std::vector<bool>{})
      .def_property_readonly("lower", &Bounds::lower)
      .def_property_readonly("upper", &Bounds::upper)
      .def_property_readonly("periodic", &Bounds::periodic)
      .def("project", &Bounds::project)
      .def("contains", &Bounds::contains, py::arg("theta"), py::arg("tol") = 1e-12);
  py::class_<SearchSpace>(m, "SearchSpace")
      .def_static("look_at_center", [](std::size_t n, const Point3& c, const Intrinsics& intr,
                                       std::pair<double, double> elevation, std::pair<double, double> radius) {
        return SearchSpace::look_at_center(n, c, intr, {elevation.first, elevation.second, radius.first, radius.second});
      }, py::arg("n_cameras"), py::arg("center"), py::arg("intrinsics") = Intrinsics{},
         py::arg("elevation") = std::pair{LookAtCenterLimits{}.elevation_min, LookAtCenterLimits{}.elevation_max},
         py::arg("radius") = std::pair{LookAtCenterLimits{}.radius_min, LookAtCenterLimits{}.radius_max})
      .def_static("free_pose", [](std::size_t n, const Point3& c, const Intrinsics& intr) {
        return SearchSpace::free_pose(n, c, intr);
      }, py::arg("n_cameras"), py::arg("center"), py::arg("intrinsics") = Intrinsics{})
      .def_property_readonly("dim", &SearchSpace::dim)
      .def_property_readonly("n_cameras", &SearchSpace::n_cameras)
      .def_property_readonly("bounds", &SearchSpace::bounds)
      .def_property_readonly("center", &SearchSpace::center);
  m.def("decode_plan", &decode_plan, py::arg("theta"), py::arg("space"));
  m.def("encode_plan", &encode_plan, py::arg("plan"), py::arg("space"));
  m.def("is_visible", &is_visible, py::arg("pose"), py::arg("point"));
  m.def("parallax_angle", &parallax_angle, py::arg("c1"), py::arg("c2"), py::arg("point"));

  // scene oracle
  py::class_<Scene>(m, "Scene")
      .def_property_readonly("reference", [](const Scene& s) { return to_array(s.reference()); })
      .def_property_readonly("center", &Scene::center)
      .def_property_readonly("plant_count", [](const Scene& s) { return s.spec().plant_count(); })
      .def_static("from_points", [](const Eigen::Ref<const Points>& pts) { return Scene(SceneSpec{}, to_cloud(pts)); });
  m.def("generate_scene", [](int plants, std::uint64_t seed) { return generate_scene(default_scene_spec(plants, seed)); },
        py::arg("plants"), py::arg("seed") = 1);
  m.def("transform_scene", [](const Scene& s, double jitter, bool rotate, std::set<std::size_t> remove, std::uint64_t seed) {
    return transform_scene(s, jitter, rotate, remove, seed);
  }, py::arg("scene"), py::arg("scale_jitter") = 0.0, py::arg("rotate") = false,
     py::arg("remove") = std::set<std::size_t>{}, py::arg("seed") = 0);
  py::class_<NoiseSpec>(m, "NoiseSpec")
      .def(py::init([](double si, double sm, double so) {
        NoiseSpec n;
        n.sigma_input = si;
        n.sigma_image = sm;
        n.sigma_obs = so;
        n.validate();
        return n;
      }), py::arg("sigma_input") = 0.0, py::arg("sigma_image") = 0.0, py::arg("sigma_obs") = 0.0)
      .def_readwrite("sigma_input", &NoiseSpec::sigma_input)
      .def_readwrite("sigma_image", &NoiseSpec::sigma_image)
      .def_readwrite("sigma_obs", &NoiseSpec::sigma_obs);
  m.def("reconstruct", [](const Scene& s, const ViewPlan& p, const NoiseSpec& n, std::uint64_t seed) {
    return to_array(reconstruct(s, p, n, seed));
  }, py::arg("scene"), py::arg("plan"), py::arg("noise") = NoiseSpec{}, py::arg("seed") = 0);
  m.def("reward", [](const Scene& s, const Vector& theta, const SearchSpace& sp, const NoiseSpec& n, std::uint64_t seed) {
    return reward(s, theta, sp, n, seed);
  }, py::arg("scene"), py::arg("theta"), py::arg("space"), py::arg("noise") = NoiseSpec{}, py::arg("seed") = 0);
  m.def("plan_reward", [](const Scene& s, const ViewPlan& p, const NoiseSpec& n, std::uint64_t seed) {
    return plan_reward(s, p, n, seed);
  }, py::arg("scene"), py::arg("plan"), py::arg("noise") = NoiseSpec{}, py::arg("seed") = 0);
  m.def("geometric_coverage", [](const Scene& s, const ViewPlan& p) { return geometric_coverage(s, p); });

  // surrogate models
  py::enum_<KernelFamily>(m, "KernelFamily")
      .value("RBF_ARD", KernelFamily::kRbfArd)
      .value("MATERN52", KernelFamily::kMatern52)
      .value("PERIODIC", KernelFamily::kPeriodic)
      .def_static("from_name", [](const std::string& n) { return kernel_family_from_string(n); })
      .def_property_readonly("label", [](KernelFamily f) { return std::string(to_string(f)); });
  py::class_<KernelSpec>(m, "KernelSpec")
      .def_static("rbf_ard", &KernelSpec::rbf_ard, py::arg("lengthscales"), py::arg("signal_variance") = 1.0)
      .def_static("matern52", &KernelSpec::matern52, py::arg("lengthscale"), py::arg("signal_variance") = 1.0)
      .def_static("periodic", &KernelSpec::periodic, py::arg("lengthscale"), py::arg("period"),
                  py::arg("signal_variance") = 1.0)
      .def_readonly("family", &KernelSpec::family)
      .def_readonly("signal_variance", &KernelSpec::signal_variance)
      .def_readonly("lengthscales", &KernelSpec::lengthscales)
      .def_readonly("period", &KernelSpec::period)
      .def("__call__", [](const KernelSpec& k, const Vector& a, const Vector& b) { return kernel_eval(k, a, b); });
  m.def("gram", &gram, py::arg("kernel"), py::arg("inputs"));
  py::class_<GpModel>(m, "GpModel")
      .def(py::init<KernelSpec, double>(), py::arg("kernel"), py::arg("noise_variance"))
      .def_static("fit", &GpModel::fit, py::arg("kernel"), py::arg("noise_variance"), py::arg("inputs"),
                  py::arg("targets"))
      .def_property_readonly("jitter", &GpModel::jitter)
      .def_property_readonly("size", &GpModel::size)
      .def("predict", [](const GpModel& g, const Vector& z) {
        const auto p = g.predict(z);
        return py::make_tuple(p.mean, p.variance);
      })
      .def("predict_batch", [](const GpModel& g, const Eigen::MatrixXd& z) {
        const auto ps = g.predict_batch(z);
        Vector mean(static_cast<Eigen::Index>(ps.size())), var(static_cast<Eigen::Index>(ps.size()));
        for (std::size_t i = 0; i < ps.size(); ++i) {
          mean[static_cast<Eigen::Index>(i)] = ps[i].mean;
          var[static_cast<Eigen::Index>(i)] = ps[i].variance;
        }
        return py::make_tuple(mean, var);
      })
      .def("log_marginal_likelihood", &GpModel::log_marginal_likelihood);
  py::class_<HyperFitResult>(m, "HyperFitResult")
      .def_readonly("kernel", &HyperFitResult::kernel)
      .def_readonly("noise_variance", &HyperFitResult::noise_variance)
      .def_readonly("log_marginal_likelihood", &HyperFitResult::log_marginal_likelihood);
  m.def("fit_hyperparameters", [](const KernelSpec& k, double noise, const Eigen::MatrixXd& z, const Vector& y,
                                  std::uint64_t seed) {
    HyperFitOptions o;
    o.seed = seed;
    return fit_hyperparameters(k, noise, z, y, o);
  }, py::arg("kernel"), py::arg("noise_variance"), py::arg("inputs"), py::arg("targets"), py::arg("seed") = 0);
  m.def("bayes_weights", [](const std::vector<double>& log_evidence, const Vector& prior) {
    return bayes_weights(std::span<const double>(log_evidence), prior);
  }, py::arg("log_evidence"), py::arg("prior"));
  m.def("sample_model", &sample_model, py::arg("weights"), py::arg("seed"));
  m.def("expected_improvement", &expected_improvement, py::arg("mu"), py::arg("sigma"), py::arg("r_max"));

  // optimization
  py::class_<BoConfig>(m, "BoConfig")
      .def(py::init<>())
      .def_readwrite("t_init", &BoConfig::t_init)
      .def_readwrite("t", &BoConfig::t)
      .def_readwrite("kernels", &BoConfig::kernels)
      .def_readwrite("rng_seed", &BoConfig::rng_seed)
      .def_property("n_random_candidates", [](const BoConfig& c) { return c.acquisition.n_random_candidates; },
                    [](BoConfig& c, int v) { c.acquisition.n_random_candidates = v; })
      .def_property("n_local_candidates", [](const BoConfig& c) { return c.acquisition.n_local_candidates; },
                    [](BoConfig& c, int v) { c.acquisition.n_local_candidates = v; });
  py::class_<TraceRecord>(m, "TraceRecord")
      .def_readonly("iteration", &TraceRecord::iteration)
      .def_readonly("theta", &TraceRecord::theta)
      .def_readonly("y", &TraceRecord::y)
      .def_readonly("model_index", &TraceRecord::model_index)
      .def_readonly("weights", &TraceRecord::weights)
      .def_readonly("best_y", &TraceRecord::best_y);
  py::class_<Trace>(m, "Trace")
      .def_readonly("records", &Trace::records)
      .def("__len__", &Trace::size)
      .def("observations", &Trace::observations)
      .def("to_csv", [](const Trace& t) { return format_trace_csv(t); });
  m.def("run_bosfm", [](const std::function<double(const Vector&, std::uint64_t)>& f, const Bounds& b,
                        const BoConfig& c) {
    // The oracle calls back into Python, so keep the GIL.
    return run_bosfm(f, b, c);
  }, py::arg("oracle"), py::arg("bounds"), py::arg("config") = BoConfig{});
  m.def("optimize_scene", [](const Scene& s, const SearchSpace& sp, const BoConfig& c, const NoiseSpec& n) {
    py::gil_scoped_release release;
    return run_bosfm([&](const Vector& th, std::uint64_t seed) { return reward(s, th, sp, n, seed); }, sp.bounds(), c);
  }, py::arg("scene"), py::arg("space"), py::arg("config") = BoConfig{}, py::arg("noise") = NoiseSpec{});
  m.def("best_plan", [](const Trace& t, const SearchSpace& sp) { return best_plan(t, sp).plan; });
  m.def("init_design", &init_design, py::arg("bounds"), py::arg("n"), py::arg("seed"));

  // baselines
  m.def("circle_plan", &circle_plan, py::arg("n"), py::arg("radius"), py::arg("altitude"), py::arg("center"),
        py::arg("intrinsics") = Intrinsics{});
  m.def("tune_circle", [](const Scene& s, std::size_t n, const std::vector<double>& radii,
                          const std::vector<double>& altitudes, const Intrinsics& intr) {
    const auto t = tune_circle(n, s.center(), intr, radii, altitudes, noise_free_scorer(s));
    return py::make_tuple(t.plan, t.reward, t.radius, t.altitude);
  }, py::arg("scene"), py::arg("n"), py::arg("radius_grid") = std::vector<double>{1.5, 2.0, 2.5, 3.0},
     py::arg("altitude_grid") = std::vector<double>{0.5, 1.0, 1.5, 2.0}, py::arg("intrinsics") = Intrinsics{});
  m.def("mcp_plan", [](const Scene& s, std::size_t n, const Intrinsics& intr) {
    return mcp_plan(build_candidates(s, CandidateGrid{}, intr), n);
  }, py::arg("scene"), py::arg("n"), py::arg("intrinsics") = Intrinsics{});

  // experiments
  m.def("run_experiment", [](const std::filesystem::path& config, const std::string& kind,
                             std::optional<std::filesystem::path> out, std::optional<std::uint64_t> seed, int jobs) {
    const ExperimentConfig cfg = load_config(config);
    RunOptions o;
    if (!kind.empty()) o.kind = experiment_kind_from_string(kind);
    o.out = std::move(out);
    o.seed = seed;
    o.jobs = jobs;
    ExperimentResult r;
    {
      py::gil_scoped_release release;
      r = run_experiment(cfg, o);
    }
    std::vector<std::string> artifacts;
    for (const auto& a : r.artifacts) artifacts.push_back(a.generic_string());
    return artifacts;
  }, py::arg("config"), py::arg("kind") = "", py::arg("out") = py::none(), py::arg("seed") = py::none(),
     py::arg("jobs") = 1);
}
