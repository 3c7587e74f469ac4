#include "dpt/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace dpt {

const char* errc_name(Errc c) {
    switch (c) {
        case Errc::NonConvexPower: return "NonConvexPower";
        case Errc::ProbabilityNotNormalized: return "ProbabilityNotNormalized";
        case Errc::RateCapBelowArrivalMax: return "RateCapBelowArrivalMax";
        case Errc::BufferTooSmall: return "BufferTooSmall";
        case Errc::ZeroArrivalRate: return "ZeroArrivalRate";
        case Errc::StateOutOfRange: return "StateOutOfRange";
        case Errc::InfeasibleThresholds: return "InfeasibleThresholds";
        case Errc::MalformedSpec: return "MalformedSpec";
        case Errc::InfeasiblePolicy: return "InfeasiblePolicy";
        case Errc::NotUnichain: return "NotUnichain";
        case Errc::SingularSystem: return "SingularSystem";
        case Errc::NotAClosedClass: return "NotAClosedClass";
        case Errc::NotReducible: return "NotReducible";
        case Errc::PoliciesDifferInMultipleRows: return "PoliciesDifferInMultipleRows";
        case Errc::ZeroPowerDifference: return "ZeroPowerDifference";
        case Errc::NonStrictlyConvexPower: return "NonStrictlyConvexPower";
        case Errc::IterationLimitExceeded: return "IterationLimitExceeded";
        case Errc::InfeasibleConstraint: return "InfeasibleConstraint";
        case Errc::NumericalBreakdown: return "NumericalBreakdown";
        case Errc::ConfigError: return "ConfigError";
    }
    return "UnknownError";
}

double ArrivalDistribution::mean() const {
    double m = 0.0;
    for (std::size_t a = 0; a < probs.size(); ++a) m += static_cast<double>(a) * probs[a];
    return m;
}

ArrivalDistribution ArrivalDistribution::from(std::vector<double> probs) {
    if (probs.empty())
        throw Error(Errc::ProbabilityNotNormalized, "arrival distribution is empty");
    for (double p : probs)
        if (!(p >= 0.0) || !std::isfinite(p))
            throw Error(Errc::ProbabilityNotNormalized,
                        "arrival probability " + std::to_string(p) + " is not in [0,1]");
    const double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
    if (std::abs(sum - 1.0) > kProbTol)
        throw Error(Errc::ProbabilityNotNormalized,
                    "arrival probabilities sum to " + std::to_string(sum));
    while (probs.size() > 1 && probs.back() == 0.0) probs.pop_back();
    ArrivalDistribution d{std::move(probs)};
    if (d.mean() <= 0.0)
        throw Error(Errc::ZeroArrivalRate, "expected arrival batch is zero");
    return d;
}

PowerProfile PowerProfile::from(std::vector<double> costs) {
    if (costs.empty() || costs[0] != 0.0)
        throw Error(Errc::NonConvexPower, "P_0 must be present and equal to 0");
    for (double c : costs)
        if (!std::isfinite(c) || c < 0.0)
            throw Error(Errc::NonConvexPower, "cost " + std::to_string(c) + " is not finite/nonnegative");
    PowerProfile p;
    p.strictly_convex = true;
    double prev_inc = -1.0;
    for (std::size_t s = 1; s < costs.size(); ++s) {
        const double inc = costs[s] - costs[s - 1];
        if (inc < 0.0)
            throw Error(Errc::NonConvexPower, "costs decrease at rate " + std::to_string(s));
        if (s >= 2) {
            if (inc < prev_inc)
                throw Error(Errc::NonConvexPower,
                            "cost increments decrease at rate " + std::to_string(s));
            if (inc <= prev_inc) p.strictly_convex = false;
        }
        prev_inc = inc;
    }
    p.costs = std::move(costs);
    return p;
}

SystemModel validate_model(SystemModel model) {
    model.arrivals = ArrivalDistribution::from(model.arrivals.probs);
    model.power = PowerProfile::from(model.power.costs);
    if (model.S() < model.A())
        throw Error(Errc::RateCapBelowArrivalMax,
                    "S=" + std::to_string(model.S()) + " < A=" + std::to_string(model.A()));
    if (model.Q() < model.A())
        throw Error(Errc::BufferTooSmall,
                    "Q=" + std::to_string(model.Q()) + " < A=" + std::to_string(model.A()));
    return model;
}

SystemModel make_model(int buffer_size, std::vector<double> arrival_probs,
                       std::vector<double> power_costs) {
    SystemModel m;
    m.buffer_size = buffer_size;
    m.arrivals.probs = std::move(arrival_probs);
    m.power.costs = std::move(power_costs);
    return validate_model(std::move(m));
}

std::pair<SystemModel, double> rescale_power(const SystemModel& model) {
    const double scale = model.power.max_cost();
    if (scale <= 0.0) return {model, 1.0};
    SystemModel scaled = model;
    for (double& c : scaled.power.costs) c /= scale;
    return {scaled, scale};
}

ActionRange feasible_actions(const SystemModel& model, int q) {
    if (q < 0 || q > model.Q())
        throw Error(Errc::StateOutOfRange, "state " + std::to_string(q) + " outside 0.." +
                                               std::to_string(model.Q()));
    return ActionRange{std::max(0, q - (model.Q() - model.A())), std::min(model.S(), q)};
}

bool policy_is_feasible(const SystemModel& model, const Policy& policy, double tol) {
    if (policy.states() != model.Q() + 1 || policy.rates() != model.S() + 1) return false;
    for (int q = 0; q <= model.Q(); ++q) {
        const ActionRange range = feasible_actions(model, q);
        double sum = 0.0;
        for (int s = 0; s <= model.S(); ++s) {
            const double p = policy.f(q, s);
            if (!(p >= -tol) || p > 1.0 + tol) return false;
            if (!range.contains(s) && p > tol) return false;
            sum += p;
        }
        if (std::abs(sum - 1.0) > tol) return false;
    }
    return true;
}

namespace {

// Action band of a deterministic spec: s(q) is the unique s with
// q(s-1) < q <= q(s). Returns -1 when no band covers q.
int band_of(const std::vector<int>& thresholds, int q) {
    int prev = -1;
    for (std::size_t s = 0; s < thresholds.size(); ++s) {
        if (q > prev && q <= thresholds[s]) return static_cast<int>(s);
        prev = std::max(prev, thresholds[s]);
    }
    return -1;
}

void check_spec_shape(const SystemModel& model, const ThresholdSpec& spec) {
    const int S = model.S();
    if (static_cast<int>(spec.thresholds.size()) != S + 1)
        throw Error(Errc::MalformedSpec, "expected " + std::to_string(S + 1) + " thresholds, got " +
                                             std::to_string(spec.thresholds.size()));
    int prev = -1;
    for (int s = 0; s <= S; ++s) {
        const int t = spec.thresholds[s];
        if (t < -1 || t > model.Q())
            throw Error(Errc::MalformedSpec, "threshold q(" + std::to_string(s) + ")=" +
                                                 std::to_string(t) + " outside [-1, Q]");
        if (t < prev)
            throw Error(Errc::MalformedSpec, "thresholds decrease at s=" + std::to_string(s));
        prev = t;
    }
    if (spec.thresholds[S] != model.Q())
        throw Error(Errc::MalformedSpec, "q(S) must equal Q so every state has an action");
    if (spec.mixed_index) {
        const int star = *spec.mixed_index;
        if (star < 0 || star >= S)
            throw Error(Errc::MalformedSpec, "mixed index s*=" + std::to_string(star));
        if (spec.mix_weight < 0.0 || spec.mix_weight > 1.0)
            throw Error(Errc::MalformedSpec, "mix weight outside [0,1]");
        if (spec.mix_weight > 0.0 && band_of(spec.thresholds, spec.thresholds[star]) != star)
            throw Error(Errc::MalformedSpec,
                        "mixed state q(s*) is not inside the s* band (empty band)");
    }
}

}  // namespace

Policy expand_threshold_policy(const SystemModel& model, const ThresholdSpec& spec) {
    check_spec_shape(model, spec);
    const int Q = model.Q();
    const int S = model.S();
    Policy policy{Eigen::MatrixXd::Zero(Q + 1, S + 1)};
    for (int q = 0; q <= Q; ++q) {
        const int s = band_of(spec.thresholds, q);
        if (s < 0)
            throw Error(Errc::MalformedSpec, "state " + std::to_string(q) + " not covered");
        const ActionRange range = feasible_actions(model, q);
        if (!range.contains(s))
            throw Error(Errc::InfeasibleThresholds,
                        "state " + std::to_string(q) + " would transmit " + std::to_string(s));
        if (spec.mixed_index && q == spec.thresholds[*spec.mixed_index] &&
            s == *spec.mixed_index && spec.mix_weight > 0.0) {
            if (!range.contains(s + 1))
                throw Error(Errc::InfeasibleThresholds,
                            "mixed state " + std::to_string(q) + " cannot transmit " +
                                std::to_string(s + 1));
            policy.f(q, s) = 1.0 - spec.mix_weight;
            policy.f(q, s + 1) = spec.mix_weight;
        } else {
            policy.f(q, s) = 1.0;
        }
    }
    return policy;
}

bool threshold_spec_feasible(const SystemModel& model, const ThresholdSpec& spec) {
    try {
        expand_threshold_policy(model, spec);
        return true;
    } catch (const Error&) {
        return false;
    }
}

ThresholdWitness is_threshold_based(const SystemModel& model, const Policy& policy) {
    const int Q = model.Q();
    const int S = model.S();
    ThresholdWitness witness;
    if (policy.states() != Q + 1 || policy.rates() != S + 1) return witness;

    // Minimal nondecreasing thresholds dominating the support tops.
    std::vector<int> thresholds(S + 1, -1);
    int running = -1;
    for (int s = 0; s <= S; ++s) {
        int hi = -1;
        for (int q = 0; q <= Q; ++q)
            if (policy.f(q, s) > 0.0) hi = q;
        running = std::max(running, hi);
        thresholds[s] = running;
    }
    thresholds[S] = Q;  // the last band absorbs states no rate claims

    for (int s = 0; s <= S; ++s) {
        const int floor = s == 0 ? -1 : thresholds[s - 1];
        for (int q = 0; q <= Q; ++q)
            if (policy.f(q, s) > 0.0 && q < floor) return witness;
    }
    witness.threshold_based = true;
    witness.thresholds = std::move(thresholds);
    return witness;
}

Eigen::MatrixXd build_transition_matrix(const SystemModel& model, const Policy& policy) {
    if (!policy_is_feasible(model, policy))
        throw Error(Errc::InfeasiblePolicy, "policy violates the feasible action band");
    const int Q = model.Q();
    const int A = model.A();
    Eigen::MatrixXd transition = Eigen::MatrixXd::Zero(Q + 1, Q + 1);
    for (int i = 0; i <= Q; ++i) {
        for (int s = 0; s <= model.S(); ++s) {
            const double fp = policy.f(i, s);
            if (fp <= 0.0) continue;
            for (int a = 0; a <= A; ++a) {
                const int j = i - s + a;
                if (j < 0 || j > Q)
                    throw Error(Errc::InfeasiblePolicy,
                                "transition out of the buffer from state " + std::to_string(i));
                transition(j, i) += model.arrivals.probs[a] * fp;
            }
        }
    }
    return transition;
}

}  // namespace dpt
