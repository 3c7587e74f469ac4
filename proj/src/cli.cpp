#include "dpt/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "dpt/lagrangian.hpp"
#include "dpt/lp.hpp"

namespace dpt::cli {

namespace {

using nlohmann::json;

[[noreturn]] void config_fail(const std::string& field, const std::string& why) {
    throw Error(Errc::ConfigError, "config field `" + field + "`: " + why);
}

std::vector<double> number_array(const json& j, const std::string& field) {
    if (!j.contains(field)) config_fail(field, "missing");
    const json& arr = j.at(field);
    if (!arr.is_array()) config_fail(field, "expected an array of numbers");
    std::vector<double> out;
    for (const json& v : arr) {
        if (!v.is_number()) config_fail(field, "expected an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

std::ostream& open_output(const RunManifest& manifest, std::ofstream& file) {
    if (manifest.out_path.empty()) return std::cout;
    file.open(manifest.out_path);
    if (!file) throw Error(Errc::ConfigError, "cannot open output file " + manifest.out_path);
    return file;
}

std::string join_thresholds(const std::vector<int>& thresholds) {
    std::string out;
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(thresholds[i]);
    }
    return out;
}

json curve_document(const TradeoffCurve& curve) {
    json doc;
    doc["power_scale"] = curve.power_scale;
    json vertices = json::array();
    for (std::size_t k = 0; k < curve.size(); ++k) {
        json v;
        v["vertex"] = k;
        v["power"] = curve.vertices[k].power;
        v["delay"] = curve.vertices[k].delay;
        json policies = json::array();
        for (const ThresholdSpec& spec : curve.vertex_policies[k])
            policies.push_back(spec.thresholds);
        v["policies"] = policies;
        if (k + 1 < curve.size()) v["segment_slope_to_next"] = curve.segment_slopes[k];
        vertices.push_back(std::move(v));
    }
    doc["vertices"] = vertices;
    return doc;
}

TradeoffCurve curve_from_document(const json& doc) {
    TradeoffCurve curve;
    if (!doc.contains("vertices") || !doc["vertices"].is_array())
        config_fail("vertices", "missing or not an array");
    curve.power_scale = doc.value("power_scale", 1.0);
    for (const json& v : doc["vertices"]) {
        curve.vertices.push_back(TradeoffPoint{v.at("power").get<double>(),
                                               v.at("delay").get<double>()});
        std::vector<ThresholdSpec> specs;
        for (const json& p : v.at("policies")) {
            ThresholdSpec spec;
            spec.thresholds = p.get<std::vector<int>>();
            specs.push_back(std::move(spec));
        }
        curve.vertex_policies.push_back(std::move(specs));
        if (v.contains("segment_slope_to_next"))
            curve.segment_slopes.push_back(v["segment_slope_to_next"].get<double>());
    }
    return curve;
}

SimulationConfig apply_sim_overrides(const RunManifest& manifest, SimulationConfig sim) {
    if (manifest.seed_override) sim.seed = *manifest.seed_override;
    if (manifest.horizon_override) sim.horizon = *manifest.horizon_override;
    return sim;
}

std::vector<double> grid_or_fail(const std::optional<std::vector<double>>& override_grid,
                                 const std::vector<double>& config_grid,
                                 const std::string& name) {
    const std::vector<double>& grid = override_grid ? *override_grid : config_grid;
    if (grid.empty()) config_fail(name, "empty grid");
    return grid;
}

struct ShapeCheck {
    bool ok = true;
    std::string failed_invariant;
    void require(bool condition, const std::string& name) {
        if (ok && !condition) {
            ok = false;
            failed_invariant = name;
        }
    }
};

ShapeCheck check_curve_shape(const SystemModel& model, const TradeoffCurve& curve) {
    ShapeCheck check;
    check.require(!curve.vertices.empty(), "curve nonempty");
    if (!check.ok) return check;
    const double ptol = 1e-9 * curve.power_scale;
    for (std::size_t k = 0; k + 1 < curve.size(); ++k) {
        check.require(curve.vertices[k + 1].power < curve.vertices[k].power - ptol,
                      "power strictly decreasing");
        check.require(curve.vertices[k + 1].delay >= curve.vertices[k].delay - 1e-9,
                      "delay nondecreasing");
    }
    for (std::size_t k = 0; k + 1 < curve.segment_slopes.size(); ++k)
        check.require(curve.segment_slopes[k + 1] >=
                          curve.segment_slopes[k] * (1.0 - 1e-9) - 1e-9,
                      "slopes nondecreasing (convexity)");
    check.require(std::abs(curve.vertices.front().delay - 1.0) <= 1e-9,
                  "first vertex has delay 1");
    for (std::size_t k = 0; k < curve.size() && check.ok; ++k) {
        check.require(!curve.vertex_policies[k].empty(), "vertex has a policy");
        for (const ThresholdSpec& spec : curve.vertex_policies[k]) {
            check.require(spec.deterministic(), "vertex policies deterministic");
            if (!threshold_spec_feasible(model, spec)) {
                check.require(false, "vertex policy feasible");
                break;
            }
            const Policy policy = expand_threshold_policy(model, spec);
            check.require(is_threshold_based(model, policy).threshold_based,
                          "vertex policy threshold-based");
        }
    }
    for (std::size_t k = 0; k + 1 < curve.size() && check.ok; ++k) {
        bool adjacent_ok = false;
        for (const ThresholdSpec& a : curve.vertex_policies[k]) {
            for (const ThresholdSpec& b : curve.vertex_policies[k + 1]) {
                int diffs = 0;
                bool by_one = true;
                for (std::size_t s = 0; s < a.thresholds.size(); ++s) {
                    if (a.thresholds[s] != b.thresholds[s]) {
                        ++diffs;
                        by_one = by_one && b.thresholds[s] == a.thresholds[s] + 1;
                    }
                }
                if (diffs == 1 && by_one) adjacent_ok = true;
            }
        }
        check.require(adjacent_ok, "adjacent vertices differ in one threshold by one");
    }
    return check;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    for (int precision : {15, 16, 17}) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    std::string s(buf);
    if (s.find_first_of(".eE") == std::string::npos && s.find_first_of("0123456789") != std::string::npos)
        s += ".0";
    return s;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::ConfigError, "cannot open config file " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw Error(Errc::ConfigError, std::string("config is not valid JSON: ") + e.what());
    }

    if (!doc.contains("Q")) config_fail("Q", "missing");
    if (!doc["Q"].is_number_integer()) config_fail("Q", "expected an integer");
    const int buffer = doc["Q"].get<int>();
    const std::vector<double> arrival = number_array(doc, "arrival");
    const std::vector<double> power = number_array(doc, "power");

    RunConfig config;
    try {
        config.model = make_model(buffer, arrival, power);
    } catch (const Error& e) {
        throw Error(Errc::ConfigError, std::string("model rejected: ") + e.what());
    }
    if (doc.contains("pth_grid")) config.pth_grid = number_array(doc, "pth_grid");
    if (doc.contains("mu_grid")) config.mu_grid = number_array(doc, "mu_grid");
    if (doc.contains("sim")) {
        const json& sim = doc["sim"];
        if (!sim.is_object()) config_fail("sim", "expected an object");
        config.sim.horizon = sim.value("horizon", config.sim.horizon);
        config.sim.seed = sim.value("seed", config.sim.seed);
        config.sim.warmup = sim.value("warmup", config.sim.warmup);
        config.sim.batch_count = sim.value("batches", config.sim.batch_count);
    }
    return config;
}

int cmd_curve(const RunManifest& manifest) {
    const RunConfig config = load_config(manifest.config_path);
    const TradeoffCurve curve = trace_curve(config.model);
    std::ofstream file;
    std::ostream& out = open_output(manifest, file);
    if (manifest.format == "doc") {
        out << curve_document(curve).dump(2) << "\n";
    } else {
        out << "vertex,power,delay,thresholds\n";
        for (std::size_t k = 0; k < curve.size(); ++k)
            out << k << "," << format_double(curve.vertices[k].power) << ","
                << format_double(curve.vertices[k].delay) << ","
                << join_thresholds(curve.vertex_policies[k].front().thresholds) << "\n";
    }
    return kExitOk;
}

int cmd_lp(const RunManifest& manifest) {
    const RunConfig config = load_config(manifest.config_path);
    const std::vector<double> grid = grid_or_fail(manifest.pth_override, config.pth_grid,
                                                  "pth_grid");
    std::ofstream file;
    std::ostream& out = open_output(manifest, file);
    out << "pth,delay,status\n";
    for (double pth : grid) {
        try {
            const LpResult result = lp_optimal_delay(config.model, pth);
            out << format_double(pth) << "," << format_double(result.delay) << ",optimal\n";
        } catch (const Error& e) {
            if (e.code() != Errc::InfeasibleConstraint) throw;
            out << format_double(pth) << ",,infeasible\n";
        }
    }
    if (!manifest.lp_dump_path.empty()) {
        std::ofstream dump(manifest.lp_dump_path);
        if (!dump) throw Error(Errc::ConfigError, "cannot open " + manifest.lp_dump_path);
        dump_lp(build_lp(config.model, grid.back()), dump);
    }
    return kExitOk;
}

int cmd_validate(const RunManifest& manifest) {
    const RunConfig config = load_config(manifest.config_path);
    TradeoffCurve curve;
    if (!manifest.curve_path.empty()) {
        std::ifstream in(manifest.curve_path);
        if (!in) throw Error(Errc::ConfigError, "cannot open curve file " + manifest.curve_path);
        json doc;
        try {
            in >> doc;
        } catch (const json::exception& e) {
            throw Error(Errc::ConfigError, std::string("curve doc is not valid JSON: ") + e.what());
        }
        curve = curve_from_document(doc);
    } else {
        curve = trace_curve(config.model);
    }

    std::ofstream file;
    std::ostream& out = open_output(manifest, file);
    bool pass = true;

    const ShapeCheck shape = check_curve_shape(config.model, curve);
    out << "shape," << (shape.ok ? "pass," : "fail,") << shape.failed_invariant << "\n";
    pass = pass && shape.ok;

    // Re-evaluate each vertex policy and compare with the stored point.
    double max_vertex_dev = 0.0;
    bool vertex_ok = true;
    for (std::size_t k = 0; k < curve.size(); ++k) {
        if (curve.vertex_policies[k].empty() ||
            !threshold_spec_feasible(config.model, curve.vertex_policies[k].front())) {
            vertex_ok = false;
            break;
        }
        const TradeoffPoint point = evaluate_policy(
            config.model,
            expand_threshold_policy(config.model, curve.vertex_policies[k].front()));
        max_vertex_dev = std::max(max_vertex_dev,
                                  std::abs(point.power - curve.vertices[k].power) /
                                      curve.power_scale);
        max_vertex_dev = std::max(max_vertex_dev,
                                  std::abs(point.delay - curve.vertices[k].delay));
    }
    vertex_ok = vertex_ok && max_vertex_dev <= 1e-9;
    out << "vertex_reevaluation," << (vertex_ok ? "pass" : "fail") << ",max_dev="
        << format_double(max_vertex_dev) << "\n";
    pass = pass && vertex_ok;

    // LP cross-check on a budget grid spanning the curve.
    double max_lp_dev = 0.0;
    bool lp_ok = true;
    if (!curve.vertices.empty()) {
        std::vector<double> budgets = config.pth_grid;
        if (budgets.empty()) {
            const double lo = curve.vertices.back().power;
            const double hi = curve.vertices.front().power;
            for (int i = 0; i < 7; ++i)
                budgets.push_back(lo + (hi - lo) * static_cast<double>(i) / 6.0);
        }
        for (double pth : budgets) {
            try {
                const LpResult lp = lp_optimal_delay(config.model, pth);
                const ConstrainedPolicy analytic = policy_for_constraint(config.model, curve, pth);
                max_lp_dev = std::max(max_lp_dev, std::abs(lp.delay - analytic.point.delay));
            } catch (const Error& e) {
                if (e.code() != Errc::InfeasibleConstraint) throw;
            }
        }
        lp_ok = max_lp_dev <= 1e-6;
    }
    out << "lp_agreement," << (lp_ok ? "pass" : "fail") << ",max_dev="
        << format_double(max_lp_dev) << "\n";
    pass = pass && lp_ok;

    // Simulation bracket at three budgets across the curve.
    bool sim_ok = true;
    if (curve.size() >= 1) {
        const SimulationConfig sim = apply_sim_overrides(manifest, config.sim);
        const double lo = curve.vertices.back().power;
        const double hi = curve.vertices.front().power;
        for (double frac : {0.25, 0.5, 0.75}) {
            const double pth = lo + (hi - lo) * frac;
            const ConstrainedPolicy analytic = policy_for_constraint(config.model, curve, pth);
            const SimulationResult res = simulate(
                config.model, expand_threshold_policy(config.model, analytic.spec), sim);
            if (std::abs(res.empirical_delay - analytic.point.delay) >
                3.0 * std::max(res.half_width_delay, 1e-12))
                sim_ok = false;
        }
    }
    out << "simulation_bracket," << (sim_ok ? "pass" : "fail") << ",\n";
    pass = pass && sim_ok;

    out << "overall," << (pass ? "pass" : "fail") << ",\n";
    return pass ? kExitOk : kExitValidationFailure;
}

int cmd_simulate(const RunManifest& manifest) {
    const RunConfig config = load_config(manifest.config_path);
    const std::vector<double> grid = grid_or_fail(manifest.pth_override, config.pth_grid,
                                                  "pth_grid");
    const SimulationConfig sim = apply_sim_overrides(manifest, config.sim);
    const TradeoffCurve curve = trace_curve(config.model);
    const std::vector<SimulationResult> results =
        simulate_curve_points(config.model, curve, grid, sim);

    std::ofstream file;
    std::ostream& out = open_output(manifest, file);
    out << "pth,power,delay,half_width_power,half_width_delay,slots\n";
    for (std::size_t i = 0; i < results.size(); ++i)
        out << format_double(grid[i]) << "," << format_double(results[i].empirical_power) << ","
            << format_double(results[i].empirical_delay) << ","
            << format_double(results[i].half_width_power) << ","
            << format_double(results[i].half_width_delay) << "," << results[i].slots_simulated
            << "\n";
    return kExitOk;
}

int cmd_iterate(const RunManifest& manifest) {
    const RunConfig config = load_config(manifest.config_path);
    const std::vector<double> grid = grid_or_fail(manifest.mu_override, config.mu_grid,
                                                  "mu_grid");
    const double scale = rescale_power(config.model).second;
    std::ofstream file;
    std::ostream& out = open_output(manifest, file);
    out << "mu,power,delay,thresholds\n";
    for (double mu : grid) {
        const PolicyIterationResult it = policy_iteration(config.model, mu * scale);
        const TradeoffPoint point = evaluate_policy(config.model, it.policy);
        const ThresholdWitness witness = is_threshold_based(config.model, it.policy);
        out << format_double(mu) << "," << format_double(point.power) << ","
            << format_double(point.delay) << ","
            << (witness.threshold_based ? join_thresholds(witness.thresholds) : "none") << "\n";
    }
    return kExitOk;
}

int run(const RunManifest& manifest) {
    try {
        if (manifest.subcommand == "curve") return cmd_curve(manifest);
        if (manifest.subcommand == "lp") return cmd_lp(manifest);
        if (manifest.subcommand == "validate") return cmd_validate(manifest);
        if (manifest.subcommand == "simulate") return cmd_simulate(manifest);
        if (manifest.subcommand == "iterate") return cmd_iterate(manifest);
        std::cerr << "unknown subcommand `" << manifest.subcommand << "`\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return e.code() == Errc::ConfigError ? kExitUsage : kExitValidationFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidationFailure;
    }
}

}  // namespace dpt::cli
