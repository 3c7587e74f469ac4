// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Criterion 8 is a logged performance comparison, never a hard failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "../support.hpp"

using namespace dpt;

namespace {

int failures = 0;

void report(int index, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] %d %s%s%s\n", pass ? "PASS" : "FAIL", index, name.c_str(),
                detail.empty() ? "" : ": ", detail.c_str());
    if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

int main() {
    std::vector<std::pair<SystemModel, TradeoffCurve>> produced_curves;

    // 1. Minimum-delay vertex of the M-PSK instance, closed form.
    const SystemModel mpsk = test::mpsk();
    const auto walk_started = std::chrono::steady_clock::now();
    const TradeoffCurve mpsk_curve = trace_curve(mpsk);
    const double walk_seconds = seconds_since(walk_started);
    {
        const bool pass = !mpsk_curve.vertices.empty() &&
                          test::close_rel(mpsk_curve.vertices.front().power, 2.1675e-13, 1e-9) &&
                          test::close_rel(mpsk_curve.vertices.front().delay, 1.0, 1e-9);
        char detail[160];
        std::snprintf(detail, sizeof(detail),
                      "first vertex (%.6e J, %.12f), %zu vertices, %.2fs",
                      mpsk_curve.vertices.front().power, mpsk_curve.vertices.front().delay,
                      mpsk_curve.size(), walk_seconds);
        report(1, "minimum-delay vertex", pass, detail);
        produced_curves.emplace_back(mpsk, mpsk_curve);
    }

    // 2. Triple-oracle agreement on 50 random models x 10 budgets.
    {
        std::mt19937_64 gen(20250810);
        int lp_violations = 0;
        double max_lp_dev = 0.0;
        int bracketed = 0;
        int cases = 0;
        for (int trial = 0; trial < 50; ++trial) {
            const SystemModel m = test::random_model(gen, 10, 2, 3);
            const TradeoffCurve curve = trace_curve(m);
            produced_curves.emplace_back(m, curve);
            const double lo = curve.vertices.back().power;
            const double hi = curve.vertices.front().power;
            for (int i = 0; i < 10; ++i) {
                const double pth = lo + (hi - lo) * test::urand(gen);
                const ConstrainedPolicy analytic = policy_for_constraint(m, curve, pth);
                const LpResult lp = lp_optimal_delay(m, pth);
                const double dev = std::abs(analytic.point.delay - lp.delay);
                max_lp_dev = std::max(max_lp_dev, dev);
                if (dev > 1e-6) ++lp_violations;

                SimulationConfig cfg;
                cfg.horizon = 1'000'000;
                cfg.seed = 0x5eed0000ULL + static_cast<std::uint64_t>(cases);
                const SimulationResult sim =
                    simulate(m, expand_threshold_policy(m, analytic.spec), cfg);
                const double hw = std::max(sim.half_width_delay, 1e-12);
                if (std::abs(sim.empirical_delay - analytic.point.delay) <= hw &&
                    std::abs(sim.empirical_delay - lp.delay) <= hw)
                    ++bracketed;
                ++cases;
            }
        }
        const bool pass = lp_violations == 0 && bracketed >= (cases * 9) / 10;
        char detail[200];
        std::snprintf(detail, sizeof(detail),
                      "max |walk-LP| delay dev %.3e (tol 1e-6), sim bracketed %d/%d (need %d)",
                      max_lp_dev, bracketed, cases, (cases * 9) / 10);
        report(2, "triple-oracle agreement", pass, detail);
    }

    // 6 runs before 3 so its curves join the shape suite.
    std::string hull_failure;
    {
        std::mt19937_64 gen(60609);
        for (int trial = 0; trial < 50 && hull_failure.empty(); ++trial) {
            const SystemModel m = test::random_model(gen, 8, 2, 3);
            const TradeoffCurve curve = trace_curve(m);
            produced_curves.emplace_back(m, curve);
            hull_failure = test::hull_mismatch(m, curve, 1e-9);
        }
        const SystemModel t2 = test::t2();
        const TradeoffCurve t2_curve = trace_curve(t2);
        produced_curves.emplace_back(t2, t2_curve);
        if (hull_failure.empty()) hull_failure = test::hull_mismatch(t2, t2_curve, 1e-9);
    }

    // 3. Theorem 1 shape suite over every curve produced so far.
    {
        const SystemModel t1 = test::t1();
        produced_curves.emplace_back(t1, trace_curve(t1));
        std::string violation;
        for (const auto& [model, curve] : produced_curves) {
            violation = test::curve_shape_violation(model, curve);
            if (!violation.empty()) break;
        }
        char detail[120];
        std::snprintf(detail, sizeof(detail), "%zu curves checked%s%s", produced_curves.size(),
                      violation.empty() ? "" : ", violated: ", violation.c_str());
        report(3, "theorem-1 shape suite", violation.empty(), detail);
    }

    // 4. Theorem 2 suite: threshold structure and strictly convex bias.
    {
        std::mt19937_64 gen(40404);
        int threshold_failures = 0;
        int bias_failures = 0;
        for (int trial = 0; trial < 100; ++trial) {
            const SystemModel m = test::random_model(gen, 15, 3, 4);
            for (int k = 0; k < 10; ++k) {
                const double mu = std::exp(test::urand(gen, std::log(1e-2), std::log(50.0)));
                bool bias_convex = true;
                const PolicyIterationResult result =
                    policy_iteration(m, mu, [&](const Eigen::VectorXd& h) {
                        for (int q = 0; q + 2 < h.size(); ++q)
                            if (!(h(q + 2) - h(q + 1) > h(q + 1) - h(q))) bias_convex = false;
                    });
                if (!is_threshold_based(m, result.policy).threshold_based) ++threshold_failures;
                if (!bias_convex) ++bias_failures;
            }
        }
        const bool pass = threshold_failures == 0 && bias_failures == 0;
        char detail[160];
        std::snprintf(detail, sizeof(detail),
                      "1000 runs, %d non-threshold policies, %d bias convexity breaks",
                      threshold_failures, bias_failures);
        report(4, "theorem-2 suite", pass, detail);
    }

    // 5. Lemma 1 suite: collinearity, monotone epsilon', slope formula.
    {
        std::mt19937_64 gen(50505);
        int collinear_failures = 0;
        int monotone_failures = 0;
        int slope_failures = 0;
        int pairs = 0;
        while (pairs < 200) {
            const SystemModel m = test::random_model(gen, 10, 2, 3);
            Policy a = test::random_full_support_policy(gen, m);
            Policy b = a;
            const int row = test::irand(gen, 0, m.Q());
            const ActionRange range = feasible_actions(m, row);
            if (range.count() < 2) continue;
            const auto new_row = test::random_simplex(gen, range.count(), 0.1);
            for (int s = range.lo; s <= range.hi; ++s) b.f(row, s) = new_row[s - range.lo];
            const TradeoffPoint za = evaluate_policy(m, a);
            const TradeoffPoint zb = evaluate_policy(m, b);
            if (std::abs(zb.power - za.power) < 1e-4) continue;  // keep the FD oracle meaningful at 1e-9
            ++pairs;

            const double eps = test::urand(gen);
            const double ep = epsilon_prime(m, a, b, eps);
            const TradeoffPoint zm = evaluate_policy(m, mix_policies(a, b, eps));
            if (!test::close(zm.power, (1 - ep) * za.power + ep * zb.power, 1e-9) ||
                !test::close(zm.delay, (1 - ep) * za.delay + ep * zb.delay, 1e-9))
                ++collinear_failures;

            double prev = -1e-12;
            for (int k = 0; k <= 20; ++k) {
                const double e = epsilon_prime(m, a, b, k / 20.0);
                if (e < prev - 1e-12) {
                    ++monotone_failures;
                    break;
                }
                prev = e;
            }

            const double fd = test::finite_difference_slope(m, a, b);
            if (!test::close_rel(segment_slope(m, a, b), fd, 1e-9)) ++slope_failures;
        }
        const bool pass =
            collinear_failures == 0 && monotone_failures == 0 && slope_failures == 0;
        char detail[200];
        std::snprintf(detail, sizeof(detail),
                      "200 pairs: %d collinearity, %d monotonicity, %d slope-formula failures",
                      collinear_failures, monotone_failures, slope_failures);
        report(5, "lemma-1 suite", pass, detail);
    }

    report(6, "brute-force hull equivalence", hull_failure.empty(),
           hull_failure.empty() ? "51 models enumerated" : hull_failure);

    // 7. Appendix A suite: unichain reduction matches restricted values.
    {
        std::mt19937_64 gen(70707);
        int reduced = 0;
        int mismatches = 0;
        double max_dev = 0.0;
        // The fixed two-band instance plus random multichain draws.
        const SystemModel bands = make_model(4, {0.5, 0.5}, {0.0, 1.0});
        Policy band_policy{Eigen::MatrixXd::Zero(5, 2)};
        band_policy.f(0, 0) = 1.0;
        band_policy.f(1, 1) = 1.0;
        band_policy.f(2, 1) = 1.0;
        band_policy.f(3, 0) = 1.0;
        band_policy.f(4, 1) = 1.0;
        std::vector<std::pair<SystemModel, Policy>> instances{{bands, band_policy}};
        while (instances.size() < 40) {
            const SystemModel m = test::random_model(gen, 12, 2, 3);
            const Policy p = test::random_deterministic_policy(gen, m);
            if (classify_chain(build_transition_matrix(m, p)).closed_classes.size() >= 2)
                instances.emplace_back(m, p);
        }
        for (const auto& [m, p] : instances) {
            const auto cls = classify_chain(build_transition_matrix(m, p));
            for (const auto& target : cls.closed_classes) {
                const Policy r = reduce_to_unichain(m, p, target);
                const TradeoffPoint via_reduction = evaluate_policy(m, r);
                const TradeoffPoint oracle = test::restricted_point_oracle(m, p, target);
                const double dev = std::max(std::abs(via_reduction.power - oracle.power),
                                            std::abs(via_reduction.delay - oracle.delay));
                max_dev = std::max(max_dev, dev);
                if (dev > 1e-10) ++mismatches;
                ++reduced;
            }
        }
        char detail[160];
        std::snprintf(detail, sizeof(detail), "%d reductions, max dev %.3e (tol 1e-10)",
                      reduced, max_dev);
        report(7, "appendix-A reduction suite", mismatches == 0, detail);
    }

    // 8. Performance sanity: full curve vs five LP solves on the M-PSK
    // instance. Logged, not asserted.
    {
        const double lo = mpsk_curve.vertices.back().power;
        const double hi = mpsk_curve.vertices.front().power;
        const auto lp_started = std::chrono::steady_clock::now();
        for (int i = 0; i < 5; ++i)
            lp_optimal_delay(mpsk, lo + (hi - lo) * (i + 0.5) / 5.0);
        const double lp_seconds = seconds_since(lp_started);
        char detail[200];
        std::snprintf(detail, sizeof(detail),
                      "full curve %.2fs vs 5 LP solves %.2fs; faster=%s (logged, not asserted)",
                      walk_seconds, lp_seconds, walk_seconds < lp_seconds ? "yes" : "no");
        report(8, "performance sanity", true, detail);
    }

    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
