#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "dpt/errors.hpp"

namespace dpt {

/// Tolerance used for probability normalization checks throughout.
inline constexpr double kProbTol = 1e-12;

/// Packet arrival distribution alpha_0..alpha_A with alpha_A > 0.
/// Trailing zeros are trimmed at construction so A is the effective maximum.
struct ArrivalDistribution {
    std::vector<double> probs;

    int max_batch() const { return static_cast<int>(probs.size()) - 1; }
    double mean() const;

    static ArrivalDistribution from(std::vector<double> probs);
};

/// Per-slot transmission costs P_0..P_S, P_0 = 0, nondecreasing and convex.
struct PowerProfile {
    std::vector<double> costs;
    bool strictly_convex = false;

    int max_rate() const { return static_cast<int>(costs.size()) - 1; }
    double max_cost() const { return costs.back(); }

    static PowerProfile from(std::vector<double> costs);
};

/// One CMDP instance: buffer of size Q, i.i.d. batch arrivals, rate-capped
/// convex transmission costs.
struct SystemModel {
    int buffer_size = 0;
    ArrivalDistribution arrivals;
    PowerProfile power;

    int Q() const { return buffer_size; }
    int A() const { return arrivals.max_batch(); }
    int S() const { return power.max_rate(); }
};

/// Checks every model invariant and returns the model unchanged.
SystemModel validate_model(SystemModel model);

/// Builds and validates a model from raw arrays.
SystemModel make_model(int buffer_size, std::vector<double> arrival_probs,
                       std::vector<double> power_costs);

/// Returns a copy of the model with costs scaled so max P_s = 1, plus the
/// scale factor that restores physical units.
std::pair<SystemModel, double> rescale_power(const SystemModel& model);

/// Contiguous range of transmission rates allowed in state q; both ends
/// inclusive. Empty ranges cannot occur when S >= A.
struct ActionRange {
    int lo = 0;
    int hi = -1;

    bool contains(int s) const { return s >= lo && s <= hi; }
    int count() const { return hi - lo + 1; }
};

ActionRange feasible_actions(const SystemModel& model, int q);

/// Row-stochastic action-probability table, rows indexed by queue state
/// q = 0..Q, columns by rate s = 0..S.
struct Policy {
    Eigen::MatrixXd f;

    int states() const { return static_cast<int>(f.rows()); }
    int rates() const { return static_cast<int>(f.cols()); }
};

/// True iff rows sum to 1 and no mass sits outside the feasible action band.
bool policy_is_feasible(const SystemModel& model, const Policy& policy, double tol = kProbTol);

/// Compact threshold representation. Deterministic when mixed_index is
/// absent; otherwise state thresholds[*mixed_index] transmits *mixed_index+1
/// with probability mix_weight and *mixed_index otherwise.
struct ThresholdSpec {
    std::vector<int> thresholds;
    std::optional<int> mixed_index;
    double mix_weight = 0.0;

    bool deterministic() const { return !mixed_index.has_value(); }
};

/// Expands a threshold spec into a full policy. Throws MalformedSpec for
/// structural problems and InfeasibleThresholds when the induced actions
/// violate the overflow/underflow band.
Policy expand_threshold_policy(const SystemModel& model, const ThresholdSpec& spec);

/// Cheap check that expansion would succeed, without building the policy.
bool threshold_spec_feasible(const SystemModel& model, const ThresholdSpec& spec);

struct ThresholdWitness {
    bool threshold_based = false;
    std::vector<int> thresholds;  // valid only when threshold_based
};

/// Decides whether nondecreasing thresholds witness the policy's support
/// structure; returns the canonical (minimal) witness when they do.
ThresholdWitness is_threshold_based(const SystemModel& model, const Policy& policy);

/// Markov transition matrix induced by a policy. Column convention: entry
/// (j, i) is the probability of moving from state i to state j, so every
/// column sums to 1.
Eigen::MatrixXd build_transition_matrix(const SystemModel& model, const Policy& policy);

}  // namespace dpt
