#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dpt/model.hpp"

namespace dpt {

/// Decomposition of the policy-induced chain into closed communication
/// classes and transient states.
struct ChainClassification {
    std::vector<std::vector<int>> closed_classes;  // each sorted; ordered by smallest state
    std::vector<int> transient_states;             // sorted
    bool is_unichain = false;
};

ChainClassification classify_chain(const Eigen::MatrixXd& transition);

/// Rewrites actions outside the target class's basin until that class is the
/// only closed one. The returned policy agrees with the input on the class.
/// Throws NotAClosedClass if target_class is not closed under the policy and
/// NotReducible if no redirection can reach the basin (possible only for
/// degenerate arrival supports).
Policy reduce_to_unichain(const SystemModel& model, const Policy& policy,
                          const std::vector<int>& target_class);

struct StationaryDistribution {
    Eigen::VectorXd pi;
};

/// Solves H pi = c by dense LU with partial pivoting. Requires a unichain.
StationaryDistribution stationary_distribution(const SystemModel& model, const Policy& policy);

double average_power(const SystemModel& model, const Policy& policy,
                     const StationaryDistribution& pi);
double average_delay(const SystemModel& model, const StationaryDistribution& pi);

struct TradeoffPoint {
    double power = 0.0;
    double delay = 0.0;
};

/// Average power and delay of a feasible policy. Multichain policies are
/// evaluated on the closed class reachable from the empty queue, via the
/// unichain reduction when possible and the class-restricted chain otherwise.
TradeoffPoint evaluate_policy(const SystemModel& model, const Policy& policy);

/// Entrywise convex combination (1-epsilon) a + epsilon b.
Policy mix_policies(const Policy& a, const Policy& b, double epsilon);

/// The mixing parameter in point space corresponding to a policy-space mix of
/// two policies that differ in exactly one row.
double epsilon_prime(const SystemModel& model, const Policy& a, const Policy& b, double epsilon);

/// Slope (delay per unit power) of the segment traced by mixing two policies
/// that differ in exactly one row, computed from the inverse-system formula.
double segment_slope(const SystemModel& model, const Policy& a, const Policy& b);

}  // namespace dpt
