#pragma once

#include <vector>

#include "dpt/steady_state.hpp"

namespace dpt {

/// Ordered vertex list of the optimal delay-power frontier. Powers are in
/// physical units; power_scale is the factor that was divided out while the
/// walk ran (max P_s).
struct TradeoffCurve {
    std::vector<TradeoffPoint> vertices;                   // strictly decreasing power
    std::vector<std::vector<ThresholdSpec>> vertex_policies;
    std::vector<double> segment_slopes;  // (D[k+1]-D[k]) / (P[k]-P[k+1]), size vertices-1
    double power_scale = 1.0;

    std::size_t size() const { return vertices.size(); }
};

/// Thresholds q(s) = s for s < A and q(s) = Q beyond: transmit every arrival
/// as soon as possible, attaining delay exactly 1.
ThresholdSpec initial_min_delay_spec(const SystemModel& model);

/// All single-threshold increments of a deterministic spec that keep the
/// ordering and the overflow/underflow band intact.
std::vector<ThresholdSpec> candidate_successors(const SystemModel& model,
                                                const ThresholdSpec& spec);

/// Walks the frontier from the minimum-delay vertex toward minimum power,
/// picking at each step the candidate of minimum slope (ties toward larger
/// power, equal points accumulate policies).
TradeoffCurve trace_curve(const SystemModel& model);

struct ConstrainedPolicy {
    ThresholdSpec spec;
    TradeoffPoint point;
};

/// Minimum-delay policy subject to average power <= power_budget: a vertex
/// policy when the budget falls on a vertex, otherwise the one-state mix of
/// the two adjacent vertex policies hitting the budget exactly.
ConstrainedPolicy policy_for_constraint(const SystemModel& model, const TradeoffCurve& curve,
                                        double power_budget);

}  // namespace dpt
