#pragma once

#include <Eigen/Dense>
#include <functional>

#include "dpt/vertex_walk.hpp"

namespace dpt {

/// Relative cost of taking rate s in state q against bias h:
///   q + mu * P_s + sum_a alpha_a [h(q-s+a) - h(a)].
/// mu must be expressed in the same power units as the model passed in.
double q_factor(const SystemModel& model, const Eigen::VectorXd& h, double mu, int q, int s);

struct PolicyIterationResult {
    Policy policy;
    Eigen::VectorXd bias;
    int iterations = 0;
};

/// Policy iteration with one-pass relative-value evaluation, initialized from
/// the strictly convex bias h(q) = q^2. mu is interpreted in rescaled power
/// units (max P_s = 1); the profile must be strictly convex. The optional
/// observer sees the bias after every evaluation step.
PolicyIterationResult policy_iteration(
    const SystemModel& model, double mu,
    const std::function<void(const Eigen::VectorXd&)>& bias_observer = {});

/// D + mu * P.
double weighted_cost(const TradeoffPoint& point, double mu);

/// Index of the curve vertex minimizing the weighted cost; mu in rescaled
/// power units (converted through curve.power_scale).
std::size_t vertex_support_check(const TradeoffCurve& curve, double mu);

}  // namespace dpt
