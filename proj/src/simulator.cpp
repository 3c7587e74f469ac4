#include "dpt/simulator.hpp"

#include <cmath>
#include <random>
#include <string>

namespace dpt {

namespace {

// splitmix64, used only to derive the two stream seeds from the one seed.
std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Uniform double in [0, 1) from the top 53 bits; bit-exact across platforms.
double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

int sample_cdf(const std::vector<double>& cdf, double u) {
    for (std::size_t k = 0; k + 1 < cdf.size(); ++k)
        if (u < cdf[k]) return static_cast<int>(k);
    return static_cast<int>(cdf.size()) - 1;
}

// Student-t 97.5% quantiles for df = 1..30; 1.96 past the table.
double t_quantile_975(int df) {
    static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                                   2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
                                   2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
                                   2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
    if (df <= 0) return 12.706;
    if (df <= 30) return table[df - 1];
    return 1.96;
}

double batch_half_width(const std::vector<double>& means) {
    const int k = static_cast<int>(means.size());
    double mean = 0.0;
    for (double m : means) mean += m;
    mean /= k;
    double var = 0.0;
    for (double m : means) var += (m - mean) * (m - mean);
    var /= (k - 1);
    return t_quantile_975(k - 1) * std::sqrt(var / k);
}

}  // namespace

SimulationResult simulate(const SystemModel& model, const Policy& policy,
                          const SimulationConfig& config) {
    if (!policy_is_feasible(model, policy))
        throw Error(Errc::InfeasiblePolicy, "refusing to simulate an infeasible policy");
    const long long warmup = config.effective_warmup();
    if (config.horizon <= warmup || warmup < 0)
        throw Error(Errc::ConfigError, "horizon must exceed warmup");
    if (config.batch_count < 2)
        throw Error(Errc::ConfigError, "batch-means needs at least 2 batches");

    const int Q = model.Q();
    const int S = model.S();

    std::vector<std::vector<double>> action_cdf(Q + 1, std::vector<double>(S + 1));
    for (int q = 0; q <= Q; ++q) {
        double acc = 0.0;
        for (int s = 0; s <= S; ++s) {
            acc += policy.f(q, s);
            action_cdf[q][s] = acc;
        }
    }
    std::vector<double> arrival_cdf(model.A() + 1);
    {
        double acc = 0.0;
        for (int a = 0; a <= model.A(); ++a) {
            acc += model.arrivals.probs[a];
            arrival_cdf[a] = acc;
        }
    }

    std::uint64_t derive = config.seed;
    std::mt19937_64 action_gen(splitmix64(derive));
    std::mt19937_64 arrival_gen(splitmix64(derive));

    const long long measured = config.horizon - warmup;
    const long long batch_len = measured / config.batch_count;
    if (batch_len < 1) throw Error(Errc::ConfigError, "horizon too short for the batch count");

    int q = 0;
    const auto step = [&](long long& queue_sum, double& power_sum, long long& arrivals) {
        queue_sum += q;
        const int s = sample_cdf(action_cdf[q], uniform01(action_gen));
        if (q - s < 0 || q - s > Q - model.A())
            throw Error(Errc::InfeasiblePolicy, "sampled action left the feasible band at q=" +
                                                    std::to_string(q));
        power_sum += model.power.costs[s];
        const int a = sample_cdf(arrival_cdf, uniform01(arrival_gen));
        q = q - s + a;
        if (q < 0 || q > Q)
            throw Error(Errc::InfeasiblePolicy, "buffer left [0, Q]; dynamics are broken");
        arrivals += a;
    };

    for (long long n = 0; n < warmup; ++n) {
        long long dq = 0, da = 0;
        double dp = 0.0;
        step(dq, dp, da);
    }

    std::vector<double> batch_power(config.batch_count);
    std::vector<double> batch_delay(config.batch_count);
    long long total_queue = 0, total_arrivals = 0;
    double total_power = 0.0;
    for (int b = 0; b < config.batch_count; ++b) {
        long long queue_sum = 0, arrivals = 0;
        double power_sum = 0.0;
        for (long long n = 0; n < batch_len; ++n) step(queue_sum, power_sum, arrivals);
        batch_power[b] = power_sum / static_cast<double>(batch_len);
        batch_delay[b] = arrivals > 0
                             ? static_cast<double>(queue_sum) / static_cast<double>(arrivals)
                             : 0.0;
        total_queue += queue_sum;
        total_arrivals += arrivals;
        total_power += power_sum;
    }

    const double slots = static_cast<double>(batch_len) * config.batch_count;
    SimulationResult result;
    result.slots_simulated = config.horizon;
    result.empirical_power = total_power / slots;
    result.empirical_delay =
        total_arrivals > 0 ? static_cast<double>(total_queue) / static_cast<double>(total_arrivals)
                           : 0.0;
    result.half_width_power = batch_half_width(batch_power);
    result.half_width_delay = batch_half_width(batch_delay);
    return result;
}

std::vector<SimulationResult> simulate_curve_points(const SystemModel& model,
                                                    const TradeoffCurve& curve,
                                                    const std::vector<double>& power_budgets,
                                                    const SimulationConfig& config) {
    std::vector<SimulationResult> results;
    results.reserve(power_budgets.size());
    for (double budget : power_budgets) {
        const ConstrainedPolicy constrained = policy_for_constraint(model, curve, budget);
        results.push_back(
            simulate(model, expand_threshold_policy(model, constrained.spec), config));
    }
    return results;
}

}  // namespace dpt
