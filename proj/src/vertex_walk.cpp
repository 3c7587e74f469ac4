#include "dpt/vertex_walk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace dpt {

namespace {

constexpr double kPointTol = 1e-9;  // equal-point detection, rescaled units
constexpr double kSlopeRelTol = 1e-9;

bool same_point(const TradeoffPoint& a, const TradeoffPoint& b) {
    return std::abs(a.power - b.power) <= kPointTol && std::abs(a.delay - b.delay) <= kPointTol;
}

bool slope_tie(double a, double b) {
    return std::abs(a - b) <= kSlopeRelTol * std::max(1.0, std::min(std::abs(a), std::abs(b)));
}

}  // namespace

ThresholdSpec initial_min_delay_spec(const SystemModel& model) {
    ThresholdSpec spec;
    spec.thresholds.resize(model.S() + 1);
    for (int s = 0; s <= model.S(); ++s)
        spec.thresholds[s] = s < model.A() ? s : model.Q();
    return spec;
}

std::vector<ThresholdSpec> candidate_successors(const SystemModel& model,
                                                const ThresholdSpec& spec) {
    if (!spec.deterministic())
        throw Error(Errc::MalformedSpec, "candidate enumeration expects a deterministic spec");
    std::vector<ThresholdSpec> result;
    for (int star = 0; star <= model.S(); ++star) {
        ThresholdSpec next = spec;
        next.thresholds[star] += 1;
        if (next.thresholds[star] > model.Q()) continue;
        if (star < model.S() && next.thresholds[star] > next.thresholds[star + 1]) continue;
        if (!threshold_spec_feasible(model, next)) continue;
        result.push_back(std::move(next));
    }
    return result;
}

TradeoffCurve trace_curve(const SystemModel& model) {
    const auto [scaled, scale] = rescale_power(model);

    TradeoffCurve curve;
    curve.power_scale = scale;

    std::vector<ThresholdSpec> queue{initial_min_delay_spec(scaled)};
    TradeoffPoint current = evaluate_policy(scaled, expand_threshold_policy(scaled, queue[0]));

    // Evaluations are cached per step; specs are keyed by their thresholds.
    struct Best {
        double slope = std::numeric_limits<double>::infinity();
        TradeoffPoint point;
        std::vector<ThresholdSpec> specs;
    };

    const std::size_t vertex_cap = static_cast<std::size_t>(model.Q()) * (model.S() + 1) + 2;
    double incoming_slope = 0.0;
    while (curve.size() < vertex_cap) {
        std::map<std::vector<int>, TradeoffPoint> evaluated;
        std::map<std::vector<int>, bool> at_vertex;
        for (const ThresholdSpec& s : queue) at_vertex[s.thresholds] = true;

        Best best;
        bool found = false;
        for (std::size_t i = 0; i < queue.size(); ++i) {
            for (ThresholdSpec& cand : candidate_successors(scaled, queue[i])) {
                if (at_vertex.count(cand.thresholds)) continue;
                auto it = evaluated.find(cand.thresholds);
                TradeoffPoint point;
                bool fresh = false;
                if (it == evaluated.end()) {
                    point = evaluate_policy(scaled, expand_threshold_policy(scaled, cand));
                    evaluated.emplace(cand.thresholds, point);
                    fresh = true;
                } else {
                    point = it->second;
                }
                if (same_point(point, current)) {
                    at_vertex[cand.thresholds] = true;
                    queue.push_back(std::move(cand));
                    continue;
                }
                if (!fresh) continue;  // already scored against best
                if (point.power < current.power - kPointTol &&
                    point.delay >= current.delay - kPointTol) {
                    const double slope =
                        (point.delay - current.delay) / (current.power - point.power);
                    // A slope below the incoming segment cannot belong to the
                    // convex frontier at the working tolerance; it is vertex
                    // micro-structure (buffer-tail states whose stationary
                    // mass straddles the point tolerance) and is absorbed
                    // into the current vertex. Large violations stay visible.
                    if (slope < incoming_slope * (1.0 - kSlopeRelTol) - kSlopeRelTol &&
                        current.power - point.power <= 1e-5) {
                        at_vertex[cand.thresholds] = true;
                        queue.push_back(std::move(cand));
                        continue;
                    }
                    if (!found || (!slope_tie(slope, best.slope) && slope < best.slope)) {
                        best = Best{slope, point, {cand}};
                        found = true;
                    } else if (slope_tie(slope, best.slope)) {
                        if (same_point(point, best.point)) {
                            best.specs.push_back(cand);
                        } else if (point.power > best.point.power + kPointTol) {
                            best = Best{slope, point, {cand}};
                        }
                    }
                }
            }
        }

        curve.vertices.push_back(TradeoffPoint{current.power * scale, current.delay});
        curve.vertex_policies.push_back(queue);
        if (!found) break;
        current = best.point;
        queue = std::move(best.specs);
        incoming_slope = best.slope;
    }

    curve.segment_slopes.reserve(curve.size() ? curve.size() - 1 : 0);
    for (std::size_t k = 0; k + 1 < curve.size(); ++k) {
        const TradeoffPoint& a = curve.vertices[k];
        const TradeoffPoint& b = curve.vertices[k + 1];
        curve.segment_slopes.push_back((b.delay - a.delay) / (a.power - b.power));
    }
    return curve;
}

ConstrainedPolicy policy_for_constraint(const SystemModel& model, const TradeoffCurve& curve,
                                        double power_budget) {
    if (curve.vertices.empty())
        throw Error(Errc::InfeasibleConstraint, "empty tradeoff curve");
    const double scale = curve.power_scale;
    const double budget = power_budget / scale;
    const std::size_t last = curve.size() - 1;

    const auto scaled_power = [&](std::size_t k) { return curve.vertices[k].power / scale; };

    if (budget < scaled_power(last) - kPointTol)
        throw Error(Errc::InfeasibleConstraint,
                    "budget below the minimum attainable average power");
    if (budget >= scaled_power(0))
        return ConstrainedPolicy{curve.vertex_policies[0].front(), curve.vertices[0]};

    std::size_t k = 0;
    while (k < last && budget < scaled_power(k + 1)) ++k;
    // Now power(k+1) <= budget < power(k) within tolerance.
    if (k == last || std::abs(budget - scaled_power(k + 1)) <= kPointTol)
        return ConstrainedPolicy{curve.vertex_policies[std::min(k + 1, last)].front(),
                                 curve.vertices[std::min(k + 1, last)]};

    // Interpolate between adjacent vertices: find a parent/child spec pair
    // differing in exactly one threshold by one.
    const auto& high = curve.vertex_policies[k];      // higher power
    const auto& low = curve.vertex_policies[k + 1];   // lower power
    const ThresholdSpec* parent = nullptr;
    const ThresholdSpec* child = nullptr;
    int star = -1;
    for (const ThresholdSpec& hs : high) {
        for (const ThresholdSpec& ls : low) {
            int diff_index = -1;
            int diffs = 0;
            for (std::size_t s = 0; s < hs.thresholds.size(); ++s) {
                if (hs.thresholds[s] != ls.thresholds[s]) {
                    ++diffs;
                    diff_index = static_cast<int>(s);
                }
            }
            if (diffs == 1 && ls.thresholds[diff_index] == hs.thresholds[diff_index] + 1) {
                parent = &hs;
                child = &ls;
                star = diff_index;
                break;
            }
        }
        if (parent) break;
    }
    if (!parent)
        throw Error(Errc::SingularSystem, "adjacent vertices lack a one-threshold spec pair");

    const SystemModel scaled = rescale_power(model).first;
    const Policy pol_a = expand_threshold_policy(scaled, *parent);  // high power
    const Policy pol_b = expand_threshold_policy(scaled, *child);   // low power
    const double pa = scaled_power(k);
    const double pb = scaled_power(k + 1);
    const double target_eps_prime = (pa - budget) / (pa - pb);

    // Invert the epsilon map via its one-shot coefficient: eps' at eps=0.5
    // determines h^T delta, then eps = eps' / (1 + (1 - eps') k).
    double eps = std::numeric_limits<double>::quiet_NaN();
    try {
        const double ep_half = epsilon_prime(scaled, pol_a, pol_b, 0.5);
        // ep_half = (0.5 + 0.5 k)/(1 + 0.5 k)  =>  k = (2 ep_half - 1)/(1 - ep_half)
        const double coeff = (2.0 * ep_half - 1.0) / (1.0 - ep_half);
        eps = target_eps_prime / (1.0 + (1.0 - target_eps_prime) * coeff);
    } catch (const Error&) {
        // fall through to bisection
    }
    if (!std::isfinite(eps)) {
        // Power is monotone in eps (Lemma 1 map is nondecreasing); bisect.
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            const TradeoffPoint pt =
                evaluate_policy(scaled, mix_policies(pol_a, pol_b, mid));
            (pt.power > budget ? lo : hi) = mid;
        }
        eps = 0.5 * (lo + hi);
    }
    eps = std::clamp(eps, 0.0, 1.0);

    ThresholdSpec mixed = *child;
    mixed.mixed_index = star;
    mixed.mix_weight = 1.0 - eps;  // probability of transmitting s*+1 at q(s*)

    const double delay = (1.0 - target_eps_prime) * curve.vertices[k].delay +
                         target_eps_prime * curve.vertices[k + 1].delay;
    return ConstrainedPolicy{mixed, TradeoffPoint{power_budget, delay}};
}

}  // namespace dpt
