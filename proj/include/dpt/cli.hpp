#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dpt/simulator.hpp"

namespace dpt::cli {

/// Parsed model + run configuration (one file reproduces one figure).
struct RunConfig {
    SystemModel model;
    std::vector<double> pth_grid;
    std::vector<double> mu_grid;  // physical units, slots per joule
    SimulationConfig sim;
};

/// Loads the JSON config document; throws Error(ConfigError) naming the
/// offending field.
RunConfig load_config(const std::string& path);

struct RunManifest {
    std::string subcommand;
    std::string config_path;
    std::string out_path;  // empty: stdout
    std::string format = "csv";
    std::optional<std::vector<double>> pth_override;
    std::optional<std::vector<double>> mu_override;
    std::optional<std::uint64_t> seed_override;
    std::optional<long long> horizon_override;
    std::string curve_path;    // cmd_validate: check this curve doc instead of tracing
    std::string lp_dump_path;  // cmd_lp: also dump the last LP in triplet form
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailure = 1;
inline constexpr int kExitUsage = 2;

int run(const RunManifest& manifest);

int cmd_curve(const RunManifest& manifest);
int cmd_lp(const RunManifest& manifest);
int cmd_validate(const RunManifest& manifest);
int cmd_simulate(const RunManifest& manifest);
int cmd_iterate(const RunManifest& manifest);

/// Shortest decimal representation that parses back to the same double,
/// always carrying a decimal point or exponent.
std::string format_double(double v);

}  // namespace dpt::cli
