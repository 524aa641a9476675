#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pboel/bandit.hpp"
#include "pboel/bounds.hpp"
#include "pboel/drift.hpp"
#include "pboel/harness.hpp"
#include "pboel/rng.hpp"
#include "pboel/streams.hpp"

#include <json.hpp>

#include <cstring>

namespace py = pybind11;
using nlohmann::json;

namespace {

py::tuple generate_stream_py(const std::string& spec_json) {
    const auto spec = pboel::stream_spec_from_json(json::parse(spec_json));
    const auto samples = pboel::generate(spec);
    const auto n = static_cast<py::ssize_t>(samples.size());
    const auto d = static_cast<py::ssize_t>(samples.empty() ? 0 : samples.front().features.size());
    std::vector<double> fdata;
    std::vector<int> ldata;
    fdata.reserve(static_cast<std::size_t>(n * d));
    ldata.reserve(static_cast<std::size_t>(n));
    for (const auto& s : samples) {
        fdata.insert(fdata.end(), s.features.begin(), s.features.end());
        ldata.push_back(s.label);
    }
    py::array_t<double> features(py::array::ShapeContainer{n, d});
    py::array_t<int> labels(py::array::ShapeContainer{n});
    std::memcpy(features.mutable_data(), fdata.data(), fdata.size() * sizeof(double));
    std::memcpy(labels.mutable_data(), ldata.data(), ldata.size() * sizeof(int));
    return py::make_tuple(features, labels);
}

std::string run_py(const std::string& config_json) {
    const auto config = pboel::RunConfig::from_json(json::parse(config_json));
    return pboel::run(config).to_json().dump();
}

std::string bandit_sim_py(const std::string& spec_json) {
    const auto spec = pboel::BanditSimSpec::from_json(json::parse(spec_json));
    return pboel::bandit_sim(spec).to_json().dump();
}

std::vector<double> action_distribution_py(const std::vector<double>& weights, double gamma,
                                           const pboel::AdviceMatrix& advice) {
    pboel::EnsembleState state;
    state.weights = weights;
    state.gamma = gamma;
    state.num_arms = advice.empty() ? 0 : advice.front().size();
    state.restart_period = 1;
    return pboel::compute_action_distribution(state, advice).probs;
}

int select_action_py(const std::vector<double>& probs, double gamma,
                     const std::string& principle, std::uint64_t seed) {
    pboel::ActionDistribution dist{probs, gamma};
    auto rng = pboel::make_rng(seed, 1);
    const auto p = principle == "maximum_index" ? pboel::SelectionPrinciple::maximum_index
                                                : pboel::SelectionPrinciple::random_sampling;
    return pboel::select_action(dist, p, rng);
}

}  // namespace

PYBIND11_MODULE(_pboel, m) {
    m.doc() = "Bandit-weighted online ensemble learning with runtime accuracy bounds";

    m.def("gamma_for", &pboel::gamma_for, py::arg("arms"), py::arg("experts"),
          py::arg("restart_period"),
          "Exploration rate min{1, sqrt(K ln N / [(e-1) Delta_T])}");
    m.def("regret_term", &pboel::regret_term, py::arg("horizon"), py::arg("alpha"),
          py::arg("arms"), py::arg("experts"));
    m.def("exp4_regret_term", &pboel::exp4_regret_term, py::arg("horizon"), py::arg("arms"),
          py::arg("experts"));
    m.def("batch_regret_bound", &pboel::batch_regret_bound, py::arg("restart_period"),
          py::arg("arms"), py::arg("experts"));
    m.def("hoeffding_epsilon", &pboel::DriftMonitor::epsilon_for, py::arg("n1"), py::arg("n2"),
          py::arg("delta"));

    m.def("action_distribution", &action_distribution_py, py::arg("weights"), py::arg("gamma"),
          py::arg("advice"));
    m.def("select_action", &select_action_py, py::arg("probs"), py::arg("gamma"),
          py::arg("principle"), py::arg("seed"));

    py::class_<pboel::DriftStatus>(m, "DriftStatus")
        .def_readonly("drift", &pboel::DriftStatus::drift)
        .def_readonly("cut_index", &pboel::DriftStatus::cut_index)
        .def_readonly("x_bar", &pboel::DriftStatus::x_bar)
        .def_readonly("z_bar", &pboel::DriftStatus::z_bar)
        .def_readonly("epsilon", &pboel::DriftStatus::epsilon);

    py::class_<pboel::DriftMonitor>(m, "DriftMonitor")
        .def(py::init<std::size_t, double, std::size_t>(), py::arg("capacity") = 500,
             py::arg("delta") = 1e-3, py::arg("min_segment") = 30)
        .def("observe", &pboel::DriftMonitor::observe, py::arg("value"))
        .def("reset", &pboel::DriftMonitor::reset)
        .def_property_readonly("size", &pboel::DriftMonitor::size);

    m.def("generate_stream", &generate_stream_py, py::arg("spec_json"),
          "Returns (features ndarray, labels ndarray) for a stream spec JSON string");
    m.def("run", &run_py, py::arg("config_json"),
          "Runs a full experiment; returns the summary JSON string");
    m.def("bandit_sim", &bandit_sim_py, py::arg("spec_json"),
          "Runs the standalone bandit simulation; returns the report JSON string");

#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "0.1.0";
#endif
}
