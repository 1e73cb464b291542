#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "survboost/metrics.hpp"
#include "survboost/nonparametric.hpp"
#include "survboost/survival_boost.hpp"
#include "survboost/synthetic.hpp"

namespace py = pybind11;
namespace sb = survboost;

namespace {

sb::Matrix to_matrix(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 2) throw sb::ValidationError("expected a 2d float array");
    sb::Matrix m(std::size_t(arr.shape(0)), std::size_t(arr.shape(1)));
    std::copy(arr.data(), arr.data() + m.rows * m.cols, m.data.begin());
    return m;
}

sb::Dataset make_dataset(const py::array_t<double, py::array::c_style | py::array::forcecast>& X,
                         const std::vector<double>& durations,
                         const std::vector<int>& events, int k_events) {
    return sb::Dataset::from_arrays(to_matrix(X), durations, events, k_events);
}

py::array_t<double> cif_to_array(const sb::CifMatrix& cif) {
    py::array_t<double> out({cif.n_rows, cif.grid.size(), cif.n_classes()});
    std::copy(cif.values.begin(), cif.values.end(), out.mutable_data());
    return out;
}

sb::CifMatrix cif_from_array(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& arr,
    const std::vector<double>& times) {
    if (arr.ndim() != 3)
        throw sb::ValidationError("expected predictions shaped (rows, times, classes)");
    if (std::size_t(arr.shape(1)) != times.size())
        throw sb::ValidationError("time axis does not match the time grid");
    sb::CifMatrix cif(std::size_t(arr.shape(0)), int(arr.shape(2)) - 1,
                      sb::TimeGrid(times));
    std::copy(arr.data(), arr.data() + cif.values.size(), cif.values.begin());
    return cif;
}

}  // namespace

PYBIND11_MODULE(_survboost, m) {
    m.doc() = "Gradient-boosted competing-risks models with censoring-adjusted "
              "scoring";

    py::register_exception<sb::Error>(m, "SurvboostError", PyExc_RuntimeError);

    m.def("set_num_threads", &sb::threads::set_count, py::arg("n"));

    py::class_<sb::StepFunction>(m, "StepFunction")
        .def("__call__",
             [](const sb::StepFunction& f, double t) { return f(t); })
        .def("left_limit", &sb::StepFunction::left_limit)
        .def_property_readonly("knots", &sb::StepFunction::knots)
        .def_property_readonly("values", &sb::StepFunction::values)
        .def_property_readonly("value_at_0", &sb::StepFunction::value_at_0);

    py::class_<sb::Dataset>(m, "Dataset")
        .def(py::init(&make_dataset), py::arg("X"), py::arg("durations"),
             py::arg("events"), py::arg("k_events") = -1)
        .def_readonly("k_events", &sb::Dataset::k_events)
        .def_readonly("t_max", &sb::Dataset::t_max)
        .def_readonly("durations", &sb::Dataset::durations)
        .def_readonly("events", &sb::Dataset::events)
        .def_property_readonly("n", &sb::Dataset::n)
        .def_property_readonly("features",
                               [](const sb::Dataset& d) {
                                   py::array_t<double> out(
                                       {d.n(), d.n_features()});
                                   std::copy(d.features.data.begin(),
                                             d.features.data.end(),
                                             out.mutable_data());
                                   return out;
                               })
        .def("split", [](const sb::Dataset& d, double test_fraction,
                         std::uint64_t seed) { return sb::split(d, test_fraction, seed); },
             py::arg("test_fraction") = 0.3, py::arg("seed") = 0);

    m.def("load_dataset",
          [](const std::string& path, const std::string& duration_col,
             const std::string& event_col, const std::vector<std::string>& features) {
              return sb::load_dataset(path, {duration_col, event_col, features});
          },
          py::arg("path"), py::arg("duration_col") = "duration",
          py::arg("event_col") = "event",
          py::arg("features") = std::vector<std::string>{});

    m.def("kaplan_meier",
          [](const std::vector<double>& durations, const std::vector<int>& indicator) {
              return sb::kaplan_meier(durations, indicator);
          });
    m.def("censoring_km", &sb::censoring_km);
    m.def("aalen_johansen", &sb::aalen_johansen);

    py::class_<sb::SurvivalModel>(m, "SurvivalModel")
        .def_readonly("k_events", &sb::SurvivalModel::k_events)
        .def_readonly("t_max", &sb::SurvivalModel::t_max)
        .def("predict_cif",
             [](const sb::SurvivalModel& model, const py::array_t<double>& X,
                const std::vector<double>& times, bool isotonic) {
                 const sb::Matrix features = to_matrix(X);
                 return cif_to_array(
                     sb::predict_cif(model, features, sb::TimeGrid(times), isotonic));
             },
             py::arg("X"), py::arg("times"), py::arg("isotonic") = false)
        .def("survival", [](const sb::SurvivalModel& model,
                            const std::vector<double>& x, double t) {
            return model.event_free_prob(x, t);
        })
        .def("censor_free", [](const sb::SurvivalModel& model,
                               const std::vector<double>& x, double t) {
            return model.censor_free_prob(x, t);
        })
        .def("save", &sb::save_model);

    m.def("fit",
          [](const sb::Dataset& data, double learning_rate, int rounds,
             int max_depth, int max_bins, int horizons_per_row, int feedback_period,
             double ipcw_clip, std::uint64_t seed) {
              sb::SurvivalBoostConfig config;
              config.gbt.learning_rate = learning_rate;
              config.gbt.n_rounds = rounds;
              config.gbt.max_depth = max_depth;
              config.gbt.max_bins = max_bins;
              config.censoring_gbt = config.gbt;
              config.n_horizons_per_row = horizons_per_row;
              config.feedback_period = feedback_period;
              config.ipcw_clip = ipcw_clip;
              config.seed = seed;
              config.gbt.seed = seed;
              return sb::fit(data, config);
          },
          py::arg("data"), py::arg("learning_rate") = 0.1, py::arg("rounds") = 100,
          py::arg("max_depth") = 6, py::arg("max_bins") = 255,
          py::arg("horizons_per_row") = 1, py::arg("feedback_period") = 1,
          py::arg("ipcw_clip") = 0.02, py::arg("seed") = 0);
    m.def("load_model", &sb::load_model);

    m.def("integrated_brier_score",
          [](const py::array_t<double>& cif, const std::vector<double>& times,
             const sb::Dataset& data) {
              const sb::MarginalCensoring g(sb::censoring_km(data));
              const auto report =
                  sb::integrated_brier_score(cif_from_array(cif, times), data, g);
              return py::make_tuple(report.value, report.per_event);
          },
          py::arg("cif"), py::arg("times"), py::arg("data"));

    m.def("accuracy_in_time",
          [](const py::array_t<double>& cif, const std::vector<double>& times,
             const sb::Dataset& data, double zeta) {
              return sb::accuracy_in_time(cif_from_array(cif, times), data, zeta);
          });

    m.def("c_index_at",
          [](const std::vector<double>& risk, const sb::Dataset& data, double zeta,
             int k) { return sb::c_index_at(risk, data, zeta, k); });

    py::class_<sb::SynthOracle>(m, "SynthOracle")
        .def("cif", [](const sb::SynthOracle& o, const std::vector<double>& x,
                       double zeta, int k) { return o.cif(x, zeta, k); })
        .def("survival", [](const sb::SynthOracle& o, const std::vector<double>& x,
                            double zeta) { return o.survival(x, zeta); })
        .def("censoring_survival",
             [](const sb::SynthOracle& o, const std::vector<double>& x, double zeta) {
                 return o.censoring_survival(x, zeta);
             })
        .def("save", &sb::save_oracle);
    m.def("load_oracle", &sb::load_oracle);

    m.def("generate_synthetic",
          [](std::size_t n, int events, int features, const std::string& censoring,
             double rate, std::uint64_t seed) {
              sb::SynthConfig config;
              config.n_samples = n;
              config.n_events = events;
              config.n_features = features;
              config.censoring = censoring.rfind("ind", 0) == 0
                                     ? sb::CensoringMode::independent
                                     : sb::CensoringMode::covariate_dependent;
              config.target_censoring_rate = rate;
              config.seed = seed;
              auto [data, oracle] = sb::generate(config);
              py::array_t<double> X({data.n(), data.n_features()});
              std::copy(data.features.data.begin(), data.features.data.end(),
                        X.mutable_data());
              return py::make_tuple(X, data.durations, data.events, oracle);
          },
          py::arg("n"), py::arg("events") = 1, py::arg("features") = 4,
          py::arg("censoring") = "covariate", py::arg("rate") = 0.3,
          py::arg("seed") = 0);
}
