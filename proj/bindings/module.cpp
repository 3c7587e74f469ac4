#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dpt/cli.hpp"
#include "dpt/lagrangian.hpp"
#include "dpt/lp.hpp"
#include "dpt/simulator.hpp"

namespace py = pybind11;
using namespace dpt;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Optimal delay-power tradeoff solver for a single transmission queue";

    py::register_exception<Error>(m, "SolverError");

    py::class_<SystemModel>(m, "SystemModel")
        .def_property_readonly("Q", &SystemModel::Q)
        .def_property_readonly("A", &SystemModel::A)
        .def_property_readonly("S", &SystemModel::S)
        .def_property_readonly("arrival_probs",
                               [](const SystemModel& s) { return s.arrivals.probs; })
        .def_property_readonly("arrival_mean",
                               [](const SystemModel& s) { return s.arrivals.mean(); })
        .def_property_readonly("power_costs",
                               [](const SystemModel& s) { return s.power.costs; })
        .def_property_readonly("strictly_convex",
                               [](const SystemModel& s) { return s.power.strictly_convex; })
        .def("__repr__", [](const SystemModel& s) {
            return "SystemModel(Q=" + std::to_string(s.Q()) + ", A=" + std::to_string(s.A()) +
                   ", S=" + std::to_string(s.S()) + ")";
        });

    py::class_<Policy>(m, "Policy")
        .def(py::init([](Eigen::MatrixXd f) { return Policy{std::move(f)}; }), py::arg("f"))
        .def_property_readonly("f", [](const Policy& p) { return p.f; });

    py::class_<ThresholdSpec>(m, "ThresholdSpec")
        .def(py::init([](std::vector<int> thresholds, std::optional<int> mixed_index,
                         double mix_weight) {
                 return ThresholdSpec{std::move(thresholds), mixed_index, mix_weight};
             }),
             py::arg("thresholds"), py::arg("mixed_index") = std::nullopt,
             py::arg("mix_weight") = 0.0)
        .def_readonly("thresholds", &ThresholdSpec::thresholds)
        .def_readonly("mixed_index", &ThresholdSpec::mixed_index)
        .def_readonly("mix_weight", &ThresholdSpec::mix_weight)
        .def("deterministic", &ThresholdSpec::deterministic);

    py::class_<TradeoffPoint>(m, "TradeoffPoint")
        .def_readonly("power", &TradeoffPoint::power)
        .def_readonly("delay", &TradeoffPoint::delay)
        .def("__repr__", [](const TradeoffPoint& p) {
            return "TradeoffPoint(power=" + std::to_string(p.power) +
                   ", delay=" + std::to_string(p.delay) + ")";
        });

    py::class_<TradeoffCurve>(m, "TradeoffCurve")
        .def_readonly("vertices", &TradeoffCurve::vertices)
        .def_readonly("vertex_policies", &TradeoffCurve::vertex_policies)
        .def_readonly("segment_slopes", &TradeoffCurve::segment_slopes)
        .def_readonly("power_scale", &TradeoffCurve::power_scale)
        .def("__len__", &TradeoffCurve::size);

    py::class_<ConstrainedPolicy>(m, "ConstrainedPolicy")
        .def_readonly("spec", &ConstrainedPolicy::spec)
        .def_readonly("point", &ConstrainedPolicy::point);

    py::class_<StationaryDistribution>(m, "StationaryDistribution")
        .def_readonly("pi", &StationaryDistribution::pi);

    py::class_<ChainClassification>(m, "ChainClassification")
        .def_readonly("closed_classes", &ChainClassification::closed_classes)
        .def_readonly("transient_states", &ChainClassification::transient_states)
        .def_readonly("is_unichain", &ChainClassification::is_unichain);

    py::class_<PolicyIterationResult>(m, "PolicyIterationResult")
        .def_readonly("policy", &PolicyIterationResult::policy)
        .def_readonly("bias", &PolicyIterationResult::bias)
        .def_readonly("iterations", &PolicyIterationResult::iterations);

    py::class_<SimulationConfig>(m, "SimulationConfig")
        .def(py::init([](long long horizon, std::uint64_t seed, long long warmup, int batches) {
                 SimulationConfig c;
                 c.horizon = horizon;
                 c.seed = seed;
                 c.warmup = warmup;
                 c.batch_count = batches;
                 return c;
             }),
             py::arg("horizon") = 1'000'000, py::arg("seed") = 1, py::arg("warmup") = -1,
             py::arg("batches") = 20)
        .def_readwrite("horizon", &SimulationConfig::horizon)
        .def_readwrite("seed", &SimulationConfig::seed)
        .def_readwrite("warmup", &SimulationConfig::warmup)
        .def_readwrite("batch_count", &SimulationConfig::batch_count);

    py::class_<SimulationResult>(m, "SimulationResult")
        .def_readonly("empirical_power", &SimulationResult::empirical_power)
        .def_readonly("empirical_delay", &SimulationResult::empirical_delay)
        .def_readonly("half_width_power", &SimulationResult::half_width_power)
        .def_readonly("half_width_delay", &SimulationResult::half_width_delay)
        .def_readonly("slots_simulated", &SimulationResult::slots_simulated);

    py::class_<LpResult>(m, "LpResult")
        .def_readonly("delay", &LpResult::delay)
        .def_readonly("policy", &LpResult::policy);

    m.def("make_model", &make_model, py::arg("Q"), py::arg("arrival"), py::arg("power"),
          "Build and validate a queue model from raw arrays.");
    m.def(
        "feasible_actions",
        [](const SystemModel& model, int q) {
            const ActionRange r = feasible_actions(model, q);
            return std::make_pair(r.lo, r.hi);
        },
        py::arg("model"), py::arg("q"), "Inclusive feasible rate range for one state.");
    m.def("expand_threshold_policy", &expand_threshold_policy, py::arg("model"), py::arg("spec"));
    m.def(
        "is_threshold_based",
        [](const SystemModel& model, const Policy& policy) {
            const ThresholdWitness w = is_threshold_based(model, policy);
            return std::make_pair(w.threshold_based, w.thresholds);
        },
        py::arg("model"), py::arg("policy"),
        "Returns (is_threshold_based, witness_thresholds).");
    m.def("build_transition_matrix", &build_transition_matrix, py::arg("model"),
          py::arg("policy"));
    m.def("classify_chain", &classify_chain, py::arg("transition"));
    m.def("stationary_distribution", &stationary_distribution, py::arg("model"),
          py::arg("policy"));
    m.def("evaluate_policy", &evaluate_policy, py::arg("model"), py::arg("policy"));
    m.def("mix_policies", &mix_policies, py::arg("a"), py::arg("b"), py::arg("epsilon"));
    m.def("epsilon_prime", &epsilon_prime, py::arg("model"), py::arg("a"), py::arg("b"),
          py::arg("epsilon"));
    m.def("segment_slope", &segment_slope, py::arg("model"), py::arg("a"), py::arg("b"));
    m.def("initial_min_delay_spec", &initial_min_delay_spec, py::arg("model"));
    m.def("trace_curve", &trace_curve, py::arg("model"),
          "Walk the full optimal delay-power tradeoff curve.");
    m.def("policy_for_constraint", &policy_for_constraint, py::arg("model"), py::arg("curve"),
          py::arg("power_budget"));
    m.def("policy_iteration", &policy_iteration, py::arg("model"), py::arg("mu"),
          py::arg("bias_observer") = std::function<void(const Eigen::VectorXd&)>{},
          "Lagrangian policy iteration; mu in rescaled power units (max P_s = 1).");
    m.def("lp_optimal_delay", &lp_optimal_delay, py::arg("model"), py::arg("power_budget"));
    m.def("simulate", &simulate, py::arg("model"), py::arg("policy"), py::arg("config"));
    m.def("simulate_curve_points", &simulate_curve_points, py::arg("model"), py::arg("curve"),
          py::arg("power_budgets"), py::arg("config"));
}
