#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "krigcov/config.hpp"
#include "krigcov/tune.hpp"

namespace py = pybind11;
using namespace krigcov;

namespace {

py::array_t<double> grid_values(const MissionGrid& grid, const std::vector<double>& values) {
  // (ny, nx) array: row j holds the cells of one q2 level, matching the
  // block-CSV layout.
  py::array_t<double> out({grid.ny(), grid.nx()});
  auto r = out.mutable_unchecked<2>();
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i)
      r(j, i) = values[static_cast<size_t>(grid.linear_index(i, j))];
  return out;
}

ScenarioConfig config_from_args(const std::string& path, const std::vector<std::string>& sets) {
  ConfigDoc doc;
  if (!path.empty()) doc = parse_config_file(path);
  apply_overrides(doc, sets);
  return scenario_from_config(doc);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Kernel-based kriging irradiance forecasting with dissimilarity-driven "
            "persistent coverage control";

  py::class_<MissionGrid>(m, "MissionGrid")
      .def(py::init<double, double, double, double, int, int>(), py::arg("q1_min"),
           py::arg("q1_max"), py::arg("q2_min"), py::arg("q2_max"), py::arg("nx"),
           py::arg("ny"))
      .def_property_readonly("nx", &MissionGrid::nx)
      .def_property_readonly("ny", &MissionGrid::ny)
      .def_property_readonly("cells", &MissionGrid::cells)
      .def_property_readonly("area", &MissionGrid::area)
      .def("cell_center", py::overload_cast<int, int>(&MissionGrid::cell_center, py::const_))
      .def("nearest_cell", &MissionGrid::nearest_cell)
      .def("clamp", &MissionGrid::clamp);

  py::class_<KernelParams>(m, "KernelParams")
      .def(py::init<double, double, double>(), py::arg("sigma"), py::arg("tau"),
           py::arg("beta"))
      .def_readonly("sigma", &KernelParams::sigma)
      .def_readonly("tau", &KernelParams::tau)
      .def_readonly("beta", &KernelParams::beta);

  py::class_<SpatioTemporalPoint>(m, "SpatioTemporalPoint")
      .def(py::init([](double q1, double q2, double t) {
             return SpatioTemporalPoint{q1, q2, t};
           }),
           py::arg("q1"), py::arg("q2"), py::arg("t"))
      .def_readwrite("q1", &SpatioTemporalPoint::q1)
      .def_readwrite("q2", &SpatioTemporalPoint::q2)
      .def_readwrite("t", &SpatioTemporalPoint::t);

  py::class_<SampleBuffer>(m, "SampleBuffer")
      .def(py::init<int, int>(), py::arg("window_steps"), py::arg("agents"))
      .def("push",
           [](SampleBuffer& buf, double q1, double q2, double t, double cf) {
             buf.push({q1, q2, t}, cf);
           },
           py::arg("q1"), py::arg("q2"), py::arg("t"), py::arg("cf"))
      .def_property_readonly("size", &SampleBuffer::size)
      .def_property_readonly("full", &SampleBuffer::full)
      .def_property_readonly("newest_time", &SampleBuffer::newest_time);

  m.def("kernel", &kernel, py::arg("z1"), py::arg("z2"), py::arg("params"));
  m.def("gram", &gram, py::arg("buffer"), py::arg("params"));
  m.def("cross_kernel", &cross_kernel, py::arg("z"), py::arg("buffer"), py::arg("params"));

  m.def(
      "solve_weights",
      [](const SpatioTemporalPoint& z, const SampleBuffer& buf, const KernelParams& kp) {
        const KrigingSolution sol = solve_weights(z, buf, kp);
        return py::make_tuple(sol.lambda, sol.J, sol.one_step_ahead);
      },
      py::arg("z"), py::arg("buffer"), py::arg("params"),
      "Optimal weights, dissimilarity value and the one-step-ahead flag");

  m.def(
      "predict",
      [](double q1, double q2, double t_pred, const SampleBuffer& buf, const KernelParams& kp) {
        const Prediction p = predict({q1, q2}, t_pred, buf, kp);
        return py::make_tuple(p.cf_hat, p.J, p.one_step_ahead);
      },
      py::arg("q1"), py::arg("q2"), py::arg("t_pred"), py::arg("buffer"), py::arg("params"));

  m.def(
      "dissimilarity_map",
      [](const MissionGrid& grid, double t_pred, const SampleBuffer& buf, const KernelParams& kp) {
        const DissimilarityMap map = dissimilarity_map(grid, t_pred, buf, kp);
        return grid_values(grid, map.values);
      },
      py::arg("grid"), py::arg("t_pred"), py::arg("buffer"), py::arg("params"));

  m.def(
      "dissimilarity_general",
      [](const Eigen::VectorXd& d, const Eigen::MatrixXd& D, const Eigen::VectorXd& w,
         double gamma) {
        const auto res = dissimilarity_general(d, D, w, gamma);
        return py::make_tuple(res.J, res.lambda);
      },
      py::arg("d"), py::arg("D"), py::arg("w"), py::arg("gamma") = 0.0);

  m.def(
      "synth_cloud_field",
      [](const MissionGrid& grid, int steps, uint64_t seed, const std::string& weather) {
        Weather w;
        if (weather == "standard") w = Weather::kStandard;
        else if (weather == "sunny") w = Weather::kSunny;
        else if (weather == "cloudy") w = Weather::kCloudy;
        else if (weather == "very_cloudy") w = Weather::kVeryCloudy;
        else throw std::invalid_argument("unknown weather preset: " + weather);
        const FieldSeries fs = synth_cloud_field(grid, steps, seed, w);
        py::array_t<double> out({fs.steps, grid.ny(), grid.nx()});
        auto r = out.mutable_unchecked<3>();
        for (int t = 0; t < fs.steps; ++t)
          for (int j = 0; j < grid.ny(); ++j)
            for (int i = 0; i < grid.nx(); ++i) r(t, j, i) = fs.at(t, i, j);
        return out;
      },
      py::arg("grid"), py::arg("steps"), py::arg("seed"), py::arg("weather"));

  m.def(
      "lloyd_placement",
      [](const MissionGrid& grid, int n, uint64_t seed) {
        const auto sites = lloyd_placement(grid, n, seed);
        py::array_t<double> out({static_cast<int>(sites.size()), 2});
        auto r = out.mutable_unchecked<2>();
        for (size_t i = 0; i < sites.size(); ++i) {
          r(static_cast<int>(i), 0) = sites[i].x();
          r(static_cast<int>(i), 1) = sites[i].y();
        }
        return out;
      },
      py::arg("grid"), py::arg("n"), py::arg("seed"));

  m.def("measurement", &measurement, py::arg("squared_distance"), py::arg("params"));
  m.def("penalty", &penalty, py::arg("e"));
  m.def("penalty_deriv", &penalty_deriv, py::arg("e"));

  py::class_<CoverageParams>(m, "CoverageParams")
      .def(py::init<double, double, double, double, double, double>(), py::arg("peak"),
           py::arg("radius"), py::arg("decay"), py::arg("gain"), py::arg("gain_fallback"),
           py::arg("i_ref_level"))
      .def_readonly("peak", &CoverageParams::peak)
      .def_readonly("radius", &CoverageParams::radius)
      .def_readonly("decay", &CoverageParams::decay)
      .def_readonly("gain", &CoverageParams::gain)
      .def_readonly("gain_fallback", &CoverageParams::gain_fallback)
      .def_readonly("i_ref_level", &CoverageParams::i_ref_level);

  py::class_<RunLog>(m, "RunLog")
      .def_readonly("t", &RunLog::t)
      .def_readonly("rmse", &RunLog::rmse)
      .def_readonly("in_window", &RunLog::in_window)
      .def_readonly("objective", &RunLog::objective)
      .def_readonly("mean_dissim", &RunLog::mean_dissim)
      .def_readonly("max_dissim", &RunLog::max_dissim)
      .def_readonly("agents", &RunLog::agents)
      .def_readonly("pos_q1", &RunLog::pos_q1)
      .def_readonly("pos_q2", &RunLog::pos_q2)
      .def_readonly("E", &RunLog::E)
      .def_readonly("max_dphi_dt", &RunLog::max_dphi_dt)
      .def_readonly("max_d2phi_dt2", &RunLog::max_d2phi_dt2);

  m.def(
      "run_scenario",
      [](const std::string& config_path, const std::vector<std::string>& sets) {
        return run_scenario(config_from_args(config_path, sets));
      },
      py::arg("config_path") = std::string(),
      py::arg("overrides") = std::vector<std::string>{},
      "Run a scenario from a config file plus section.key=value overrides");

  m.def(
      "tune",
      [](const std::string& config_path, const std::vector<std::string>& sets) {
        ConfigDoc doc;
        if (!config_path.empty()) doc = parse_config_file(config_path);
        apply_overrides(doc, sets);
        const TuneResult res = tune(tunespec_from_config(doc));
        return py::make_tuple(res.best, res.best_E);
      },
      py::arg("config_path") = std::string(),
      py::arg("overrides") = std::vector<std::string>{});

  m.attr("__version__") = "0.1.0";
}
