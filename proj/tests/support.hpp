#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "dpt/lagrangian.hpp"
#include "dpt/lp.hpp"
#include "dpt/simulator.hpp"
#include "dpt/steady_state.hpp"
#include "dpt/vertex_walk.hpp"

namespace dpt::test {

// Tiny forced instance: the unique feasible policy transmits everything.
inline SystemModel t1() { return make_model(1, {0.5, 0.5}, {0.0, 1.0}); }

// Small instance with real action choice; 12 deterministic feasible policies.
inline SystemModel t2() { return make_model(4, {0.25, 0.5, 0.25}, {0.0, 1.0, 3.0}); }

// The M-PSK numerical setup: Q=100, S=3, powers in joules.
inline SystemModel mpsk(std::vector<double> arrival = {0.25, 0.25, 0.25, 0.25}) {
    return make_model(100, std::move(arrival), {0.0, 9.0e-14, 18.2e-14, 59.5e-14});
}

inline double urand(std::mt19937_64& gen, double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * (static_cast<double>(gen() >> 11) * 0x1.0p-53);
}

inline int irand(std::mt19937_64& gen, int lo, int hi) {
    return lo + static_cast<int>(gen() % static_cast<std::uint64_t>(hi - lo + 1));
}

// Strictly positive probability vector of length n.
inline std::vector<double> random_simplex(std::mt19937_64& gen, int n, double floor = 0.05) {
    std::vector<double> v(n);
    double sum = 0.0;
    for (double& x : v) {
        x = floor + urand(gen);
        sum += x;
    }
    for (double& x : v) x /= sum;
    return v;
}

// Random model with full-support arrivals and a strictly convex profile.
inline SystemModel random_model(std::mt19937_64& gen, int q_max, int a_max, int s_max) {
    const int a = irand(gen, 1, a_max);
    const int s = irand(gen, a, s_max);
    const int q = irand(gen, std::max(a, 2), q_max);
    std::vector<double> costs(s + 1, 0.0);
    double increment = urand(gen, 0.2, 1.0);
    for (int k = 1; k <= s; ++k) {
        costs[k] = costs[k - 1] + increment;
        increment += urand(gen, 0.1, 1.0);
    }
    return make_model(q, random_simplex(gen, a + 1), std::move(costs));
}

inline Policy random_deterministic_policy(std::mt19937_64& gen, const SystemModel& model) {
    Policy policy{Eigen::MatrixXd::Zero(model.Q() + 1, model.S() + 1)};
    for (int q = 0; q <= model.Q(); ++q) {
        const ActionRange range = feasible_actions(model, q);
        policy.f(q, irand(gen, range.lo, range.hi)) = 1.0;
    }
    return policy;
}

// Every feasible action gets positive probability: the chain is irreducible,
// so the policy is always unichain.
inline Policy random_full_support_policy(std::mt19937_64& gen, const SystemModel& model) {
    Policy policy{Eigen::MatrixXd::Zero(model.Q() + 1, model.S() + 1)};
    for (int q = 0; q <= model.Q(); ++q) {
        const ActionRange range = feasible_actions(model, q);
        const std::vector<double> row = random_simplex(gen, range.count(), 0.1);
        for (int s = range.lo; s <= range.hi; ++s) policy.f(q, s) = row[s - range.lo];
    }
    return policy;
}

// Independent oracle for class-restricted long-run values: power iteration on
// the restricted column-stochastic block, no LU involved.
inline TradeoffPoint restricted_point_oracle(const SystemModel& model, const Policy& policy,
                                             const std::vector<int>& cls) {
    const Eigen::MatrixXd lambda = build_transition_matrix(model, policy);
    const int m = static_cast<int>(cls.size());
    Eigen::MatrixXd sub(m, m);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) sub(r, c) = lambda(cls[r], cls[c]);
    Eigen::VectorXd pi = Eigen::VectorXd::Constant(m, 1.0 / m);
    for (int it = 0; it < 200000; ++it) {
        Eigen::VectorXd next = sub * pi;
        // Damping handles periodic classes.
        next = 0.5 * next + 0.5 * pi;
        next /= next.sum();
        const double diff = (next - pi).cwiseAbs().maxCoeff();
        pi = next;
        if (diff < 1e-15) break;
    }
    double power = 0.0;
    double mean_q = 0.0;
    for (int r = 0; r < m; ++r) {
        double row_power = 0.0;
        for (int s = 0; s <= model.S(); ++s) row_power += model.power.costs[s] * policy.f(cls[r], s);
        power += pi(r) * row_power;
        mean_q += pi(r) * cls[r];
    }
    return TradeoffPoint{power, mean_q / model.arrivals.mean()};
}

// Point cloud of every deterministic feasible policy; multichain policies
// contribute one point per closed class.
inline std::vector<TradeoffPoint> enumerate_deterministic_points(const SystemModel& model) {
    std::vector<ActionRange> ranges;
    for (int q = 0; q <= model.Q(); ++q) ranges.push_back(feasible_actions(model, q));
    std::vector<int> choice(model.Q() + 1);
    for (int q = 0; q <= model.Q(); ++q) choice[q] = ranges[q].lo;

    std::vector<TradeoffPoint> points;
    while (true) {
        Policy policy{Eigen::MatrixXd::Zero(model.Q() + 1, model.S() + 1)};
        for (int q = 0; q <= model.Q(); ++q) policy.f(q, choice[q]) = 1.0;
        const ChainClassification cls = classify_chain(build_transition_matrix(model, policy));
        for (const auto& closed : cls.closed_classes)
            points.push_back(restricted_point_oracle(model, policy, closed));

        int q = 0;
        while (q <= model.Q()) {
            if (++choice[q] <= ranges[q].hi) break;
            choice[q] = ranges[q].lo;
            ++q;
        }
        if (q > model.Q()) break;
    }
    return points;
}

// Corner points of the lower-left (Pareto) part of the convex hull, ordered
// by decreasing power. Input points need not be unique.
inline std::vector<TradeoffPoint> lower_left_hull(std::vector<TradeoffPoint> points,
                                                  double tol = 1e-9) {
    std::sort(points.begin(), points.end(), [](const TradeoffPoint& a, const TradeoffPoint& b) {
        return a.power < b.power || (a.power == b.power && a.delay < b.delay);
    });
    std::vector<TradeoffPoint> unique;
    for (const TradeoffPoint& p : points) {
        if (!unique.empty() && std::abs(p.power - unique.back().power) <= tol &&
            std::abs(p.delay - unique.back().delay) <= tol)
            continue;
        // Keep only the min-delay representative per power level.
        if (!unique.empty() && std::abs(p.power - unique.back().power) <= tol &&
            p.delay >= unique.back().delay - tol)
            continue;
        unique.push_back(p);
    }

    // Lower convex hull with power as abscissa; collinear middles dropped.
    std::vector<TradeoffPoint> hull;
    for (const TradeoffPoint& p : unique) {
        while (hull.size() >= 2) {
            const TradeoffPoint& a = hull[hull.size() - 2];
            const TradeoffPoint& b = hull[hull.size() - 1];
            const double cross =
                (b.power - a.power) * (p.delay - a.delay) - (b.delay - a.delay) * (p.power - a.power);
            if (cross <= 0.0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(p);
    }
    // Pareto part: walk from min power while delay strictly decreases.
    std::vector<TradeoffPoint> frontier{hull.front()};
    for (std::size_t i = 1; i < hull.size(); ++i) {
        if (hull[i].delay < frontier.back().delay - tol)
            frontier.push_back(hull[i]);
        else
            break;
    }
    std::reverse(frontier.begin(), frontier.end());
    return frontier;
}

inline double finite_difference_slope(const SystemModel& model, const Policy& a, const Policy& b) {
    const TradeoffPoint pa = evaluate_policy(model, a);
    const TradeoffPoint pb = evaluate_policy(model, b);
    return (pb.delay - pa.delay) / (pb.power - pa.power);
}

inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

inline bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// Checks every curve invariant; returns the name of the first violated
// invariant, empty when the curve is clean.
inline std::string curve_shape_violation(const SystemModel& model, const TradeoffCurve& curve) {
    if (curve.vertices.empty()) return "curve nonempty";
    if (std::abs(curve.vertices.front().delay - 1.0) > 1e-9) return "first vertex delay 1";
    const double ptol = 1e-9 * curve.power_scale;
    for (std::size_t k = 0; k + 1 < curve.size(); ++k) {
        if (!(curve.vertices[k + 1].power < curve.vertices[k].power - ptol))
            return "power strictly decreasing";
        if (!(curve.vertices[k + 1].delay >= curve.vertices[k].delay - 1e-9))
            return "delay nondecreasing";
    }
    for (std::size_t k = 0; k + 1 < curve.segment_slopes.size(); ++k)
        if (!(curve.segment_slopes[k + 1] >= curve.segment_slopes[k] * (1.0 - 1e-9) - 1e-9))
            return "slope sequence convex";
    for (std::size_t k = 0; k < curve.size(); ++k) {
        if (curve.vertex_policies[k].empty()) return "vertex has a policy";
        for (const ThresholdSpec& spec : curve.vertex_policies[k]) {
            if (!spec.deterministic()) return "vertex policies deterministic";
            if (!threshold_spec_feasible(model, spec)) return "vertex policy feasible";
            if (!is_threshold_based(model, expand_threshold_policy(model, spec)).threshold_based)
                return "vertex policy threshold-based";
        }
    }
    for (std::size_t k = 0; k + 1 < curve.size(); ++k) {
        bool adjacent = false;
        for (const ThresholdSpec& a : curve.vertex_policies[k])
            for (const ThresholdSpec& b : curve.vertex_policies[k + 1]) {
                int diffs = 0;
                bool by_one = true;
                for (std::size_t s = 0; s < a.thresholds.size(); ++s)
                    if (a.thresholds[s] != b.thresholds[s]) {
                        ++diffs;
                        by_one = by_one && b.thresholds[s] == a.thresholds[s] + 1;
                    }
                adjacent = adjacent || (diffs == 1 && by_one);
            }
        if (!adjacent) return "adjacent vertices differ in one threshold by one";
    }
    return {};
}

// Compares the walk's vertex set to the enumerated lower-left hull: every
// hull corner must appear among the vertices and every vertex must lie on
// the frontier polyline. Returns a description of the first mismatch.
inline std::string hull_mismatch(const SystemModel& model, const TradeoffCurve& curve,
                                 double tol = 1e-9) {
    const auto hull = lower_left_hull(enumerate_deterministic_points(model));
    for (const TradeoffPoint& corner : hull) {
        bool found = false;
        for (const TradeoffPoint& v : curve.vertices)
            found = found || (close(v.power, corner.power, tol) && close(v.delay, corner.delay, tol));
        if (!found) return "hull corner missing from the walk";
    }
    for (const TradeoffPoint& v : curve.vertices) {
        bool on_frontier = false;
        for (const TradeoffPoint& h : hull)
            if (close(v.power, h.power, tol) && close(v.delay, h.delay, tol)) on_frontier = true;
        for (std::size_t k = 0; !on_frontier && k + 1 < hull.size(); ++k) {
            const TradeoffPoint& a = hull[k];
            const TradeoffPoint& b = hull[k + 1];
            if (v.power <= a.power + tol && v.power >= b.power - tol) {
                const double t = (a.power - v.power) / (a.power - b.power);
                on_frontier = close(v.delay, (1 - t) * a.delay + t * b.delay, tol);
            }
        }
        if (!on_frontier) return "walk vertex off the enumerated frontier";
    }
    return {};
}

}  // namespace dpt::test
