#include "dpt/lagrangian.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace dpt {

double q_factor(const SystemModel& model, const Eigen::VectorXd& h, double mu, int q, int s) {
    if (!feasible_actions(model, q).contains(s))
        throw Error(Errc::InfeasiblePolicy, "rate " + std::to_string(s) +
                                                " is infeasible in state " + std::to_string(q));
    double value = static_cast<double>(q) + mu * model.power.costs[s];
    for (int a = 0; a <= model.A(); ++a)
        value += model.arrivals.probs[a] * (h(q - s + a) - h(a));
    return value;
}

PolicyIterationResult policy_iteration(
    const SystemModel& model, double mu,
    const std::function<void(const Eigen::VectorXd&)>& bias_observer) {
    if (!model.power.strictly_convex)
        throw Error(Errc::NonStrictlyConvexPower,
                    "policy iteration requires a strictly convex power profile");
    if (mu < 0.0) throw Error(Errc::MalformedSpec, "multiplier must be nonnegative");

    const SystemModel scaled = rescale_power(model).first;
    const int Q = scaled.Q();

    Eigen::VectorXd h(Q + 1);
    for (int q = 0; q <= Q; ++q) h(q) = static_cast<double>(q) * static_cast<double>(q);

    std::vector<int> actions(Q + 1, -1);
    std::vector<int> previous(Q + 1, -1);
    const int limit = 10 * (Q + 1) * (scaled.S() + 1);

    for (int iteration = 1; iteration <= limit; ++iteration) {
        // Improvement: argmin over feasible rates, ties to the smaller rate.
        for (int q = 0; q <= Q; ++q) {
            const ActionRange range = feasible_actions(scaled, q);
            int best_s = range.lo;
            double best_v = q_factor(scaled, h, mu, q, range.lo);
            for (int s = range.lo + 1; s <= range.hi; ++s) {
                const double v = q_factor(scaled, h, mu, q, s);
                if (v < best_v) {
                    best_v = v;
                    best_s = s;
                }
            }
            actions[q] = best_s;
        }
        // Evaluation: one-pass relative-value update from the previous bias.
        Eigen::VectorXd next(Q + 1);
        for (int q = 0; q <= Q; ++q) next(q) = q_factor(scaled, h, mu, q, actions[q]);
        const double step = (next - h).cwiseAbs().maxCoeff();
        const double scale_h = 1.0 + next.cwiseAbs().maxCoeff();
        h = std::move(next);
        if (bias_observer) bias_observer(h);

        // The policy repeating is necessary but not sufficient: early action
        // agreement can occur while the bias is still moving, so wait for the
        // relative-value update to settle too.
        if (actions == previous && step <= 1e-11 * scale_h) {
            Policy policy{Eigen::MatrixXd::Zero(Q + 1, scaled.S() + 1)};
            for (int q = 0; q <= Q; ++q) policy.f(q, actions[q]) = 1.0;
            return PolicyIterationResult{std::move(policy), std::move(h), iteration};
        }
        previous = actions;
    }
    throw Error(Errc::IterationLimitExceeded,
                "policy did not repeat within " + std::to_string(limit) + " iterations");
}

double weighted_cost(const TradeoffPoint& point, double mu) {
    return point.delay + mu * point.power;
}

std::size_t vertex_support_check(const TradeoffCurve& curve, double mu) {
    if (curve.vertices.empty())
        throw Error(Errc::InfeasibleConstraint, "empty tradeoff curve");
    std::size_t best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < curve.size(); ++k) {
        const TradeoffPoint scaled{curve.vertices[k].power / curve.power_scale,
                                   curve.vertices[k].delay};
        const double cost = weighted_cost(scaled, mu);
        if (cost < best_cost) {
            best_cost = cost;
            best = k;
        }
    }
    return best;
}

}  // namespace dpt
