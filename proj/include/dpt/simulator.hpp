#pragma once

#include <cstdint>
#include <vector>

#include "dpt/vertex_walk.hpp"

namespace dpt {

struct SimulationConfig {
    long long horizon = 1'000'000;  // total slots, warmup included
    std::uint64_t seed = 1;
    long long warmup = -1;  // negative: horizon / 100
    int batch_count = 20;

    long long effective_warmup() const { return warmup >= 0 ? warmup : horizon / 100; }
};

struct SimulationResult {
    double empirical_power = 0.0;
    double empirical_delay = 0.0;
    double half_width_power = 0.0;  // 95% batch-means
    double half_width_delay = 0.0;
    long long slots_simulated = 0;
};

/// Seeded Monte-Carlo run of the buffer dynamics q <- q - s + a under the
/// policy, starting from the empty queue. Two independent sampling streams
/// (actions, arrivals) are derived from the one seed; results are bit-exact
/// reproducible for a fixed config.
SimulationResult simulate(const SystemModel& model, const Policy& policy,
                          const SimulationConfig& config);

/// Simulates the constrained policy at each power budget on the curve.
std::vector<SimulationResult> simulate_curve_points(const SystemModel& model,
                                                    const TradeoffCurve& curve,
                                                    const std::vector<double>& power_budgets,
                                                    const SimulationConfig& config);

}  // namespace dpt
