#include "dpt/steady_state.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <string>

namespace dpt {

namespace {

constexpr double kEdgeTol = 1e-15;   // entries below this are structural zeros
constexpr double kPiTol = 1e-10;

// H = [1^T ; (Lambda - I) rows 0..Q-1], the normalized balance system.
Eigen::MatrixXd balance_system(const Eigen::MatrixXd& transition) {
    const Eigen::Index n = transition.rows();
    Eigen::MatrixXd h(n, n);
    h.row(0).setOnes();
    h.bottomRows(n - 1) =
        (transition - Eigen::MatrixXd::Identity(n, n)).topRows(n - 1);
    return h;
}

std::vector<std::vector<int>> adjacency(const Eigen::MatrixXd& transition) {
    const int n = static_cast<int>(transition.rows());
    std::vector<std::vector<int>> out(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (transition(j, i) > kEdgeTol) out[i].push_back(j);
    return out;
}

void dfs_order(const std::vector<std::vector<int>>& adj, int start, std::vector<char>& seen,
               std::vector<int>& order) {
    std::vector<std::pair<int, std::size_t>> stack{{start, 0}};
    seen[start] = 1;
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < adj[node].size()) {
            const int to = adj[node][next++];
            if (!seen[to]) {
                seen[to] = 1;
                stack.emplace_back(to, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
}

// States from which `targets` is reachable (targets included).
std::vector<char> reaches(const Eigen::MatrixXd& transition, const std::vector<int>& targets) {
    const int n = static_cast<int>(transition.rows());
    std::vector<char> mark(n, 0);
    std::vector<int> stack;
    for (int t : targets) {
        mark[t] = 1;
        stack.push_back(t);
    }
    while (!stack.empty()) {
        const int j = stack.back();
        stack.pop_back();
        for (int i = 0; i < n; ++i) {
            if (!mark[i] && transition(j, i) > kEdgeTol) {
                mark[i] = 1;
                stack.push_back(i);
            }
        }
    }
    return mark;
}

// Stationary distribution of the chain restricted to a closed class, by the
// same normalized-balance solve on the submatrix.
Eigen::VectorXd restricted_stationary(const Eigen::MatrixXd& transition,
                                      const std::vector<int>& cls) {
    const int m = static_cast<int>(cls.size());
    Eigen::MatrixXd sub(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) sub(a, b) = transition(cls[a], cls[b]);
    Eigen::MatrixXd h = balance_system(sub);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
    c(0) = 1.0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(h);
    Eigen::VectorXd pi = lu.solve(c);
    for (int a = 0; a < m; ++a) {
        if (pi(a) < -kPiTol)
            throw Error(Errc::SingularSystem, "negative restricted stationary probability");
        pi(a) = std::max(pi(a), 0.0);
    }
    pi /= pi.sum();
    return pi;
}

double power_of_row(const SystemModel& model, const Policy& policy, int q) {
    double p = 0.0;
    for (int s = 0; s <= model.S(); ++s) p += model.power.costs[s] * policy.f(q, s);
    return p;
}

TradeoffPoint restricted_point(const SystemModel& model, const Policy& policy,
                               const Eigen::MatrixXd& transition, const std::vector<int>& cls) {
    const Eigen::VectorXd pi = restricted_stationary(transition, cls);
    double power = 0.0;
    double mean_q = 0.0;
    for (std::size_t a = 0; a < cls.size(); ++a) {
        power += pi(static_cast<Eigen::Index>(a)) * power_of_row(model, policy, cls[a]);
        mean_q += pi(static_cast<Eigen::Index>(a)) * static_cast<double>(cls[a]);
    }
    return TradeoffPoint{power, mean_q / model.arrivals.mean()};
}

// Rows in which the two policies differ; tiny entrywise noise is ignored.
std::vector<int> differing_rows(const Policy& a, const Policy& b) {
    std::vector<int> rows;
    for (Eigen::Index q = 0; q < a.f.rows(); ++q)
        if ((a.f.row(q) - b.f.row(q)).cwiseAbs().maxCoeff() > kEdgeTol)
            rows.push_back(static_cast<int>(q));
    return rows;
}

// The single nonzero column of H_b - H_a when the policies differ in row q.
Eigen::VectorXd delta_column(const Eigen::MatrixXd& lambda_a, const Eigen::MatrixXd& lambda_b,
                             int q) {
    const Eigen::Index n = lambda_a.rows();
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
    for (Eigen::Index r = 0; r + 1 < n; ++r)
        delta(r + 1) = lambda_b(r, q) - lambda_a(r, q);
    return delta;
}

struct SingleRowPair {
    int row;
    Eigen::MatrixXd lambda_a;
    Eigen::VectorXd delta;  // column `row` of H_b - H_a
};

SingleRowPair single_row_pair(const SystemModel& model, const Policy& a, const Policy& b) {
    if (!policy_is_feasible(model, a) || !policy_is_feasible(model, b))
        throw Error(Errc::InfeasiblePolicy, "both policies must be feasible");
    const std::vector<int> rows = differing_rows(a, b);
    if (rows.size() != 1)
        throw Error(Errc::PoliciesDifferInMultipleRows,
                    "policies differ in " + std::to_string(rows.size()) + " rows");
    Eigen::MatrixXd lambda_a = build_transition_matrix(model, a);
    const Eigen::MatrixXd lambda_b = build_transition_matrix(model, b);
    if (!classify_chain(lambda_a).is_unichain)
        throw Error(Errc::NotUnichain, "the base policy of a single-row pair must be unichain");
    Eigen::VectorXd delta = delta_column(lambda_a, lambda_b, rows[0]);
    return SingleRowPair{rows[0], std::move(lambda_a), std::move(delta)};
}

}  // namespace

ChainClassification classify_chain(const Eigen::MatrixXd& transition) {
    const int n = static_cast<int>(transition.rows());
    const auto adj = adjacency(transition);
    std::vector<std::vector<int>> radj(n);
    for (int i = 0; i < n; ++i)
        for (int j : adj[i]) radj[j].push_back(i);

    // Kosaraju: forward finish order, then components on the reverse graph.
    std::vector<char> seen(n, 0);
    std::vector<int> order;
    order.reserve(n);
    for (int i = 0; i < n; ++i)
        if (!seen[i]) dfs_order(adj, i, seen, order);

    std::vector<int> component(n, -1);
    int num_components = 0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (component[*it] >= 0) continue;
        std::vector<int> stack{*it};
        component[*it] = num_components;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int u : radj[v])
                if (component[u] < 0) {
                    component[u] = num_components;
                    stack.push_back(u);
                }
        }
        ++num_components;
    }

    std::vector<char> closed(num_components, 1);
    for (int i = 0; i < n; ++i)
        for (int j : adj[i])
            if (component[j] != component[i]) closed[component[i]] = 0;

    std::vector<std::vector<int>> members(num_components);
    for (int i = 0; i < n; ++i) members[component[i]].push_back(i);

    ChainClassification cls;
    for (int c = 0; c < num_components; ++c) {
        if (closed[c])
            cls.closed_classes.push_back(members[c]);
        else
            cls.transient_states.insert(cls.transient_states.end(), members[c].begin(),
                                        members[c].end());
    }
    std::sort(cls.closed_classes.begin(), cls.closed_classes.end());
    std::sort(cls.transient_states.begin(), cls.transient_states.end());
    cls.is_unichain = cls.closed_classes.size() == 1;
    return cls;
}

Policy reduce_to_unichain(const SystemModel& model, const Policy& policy,
                          const std::vector<int>& target_class) {
    Eigen::MatrixXd transition = build_transition_matrix(model, policy);
    ChainClassification cls = classify_chain(transition);
    std::vector<int> target = target_class;
    std::sort(target.begin(), target.end());
    const bool closed = std::any_of(cls.closed_classes.begin(), cls.closed_classes.end(),
                                    [&](const std::vector<int>& c) { return c == target; });
    if (!closed)
        throw Error(Errc::NotAClosedClass, "target set is not a closed class of this chain");

    Policy reduced = policy;
    const int n = model.Q() + 1;
    for (int round = 0; round <= n; ++round) {
        const std::vector<char> basin = reaches(transition, target);
        std::vector<int> outside;
        for (int q = 0; q < n; ++q)
            if (!basin[q]) outside.push_back(q);
        if (outside.empty()) return reduced;

        bool redirected = false;
        for (int c : outside) {
            const ActionRange range = feasible_actions(model, c);
            for (int s = range.lo; s <= range.hi && !redirected; ++s) {
                for (int a = 0; a <= model.A(); ++a) {
                    if (model.arrivals.probs[a] <= 0.0) continue;
                    const int next = c - s + a;
                    if (next >= 0 && next < n && basin[next]) {
                        reduced.f.row(c).setZero();
                        reduced.f(c, s) = 1.0;
                        redirected = true;
                        break;
                    }
                }
            }
            if (redirected) break;
        }
        if (!redirected)
            throw Error(Errc::NotReducible,
                        "no state outside the basin can reach it with a feasible action");
        transition = build_transition_matrix(model, reduced);
    }
    throw Error(Errc::NotReducible, "redirection did not terminate");
}

StationaryDistribution stationary_distribution(const SystemModel& model, const Policy& policy) {
    const Eigen::MatrixXd transition = build_transition_matrix(model, policy);
    const ChainClassification cls = classify_chain(transition);
    if (!cls.is_unichain)
        throw Error(Errc::NotUnichain, "chain has " +
                                           std::to_string(cls.closed_classes.size()) +
                                           " closed classes; reduce first");

    const Eigen::Index n = transition.rows();
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    c(0) = 1.0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(balance_system(transition));
    Eigen::VectorXd pi = lu.solve(c);

    for (int q : cls.transient_states) pi(q) = 0.0;
    for (Eigen::Index q = 0; q < n; ++q) {
        if (pi(q) < -kPiTol)
            throw Error(Errc::SingularSystem,
                        "stationary probability " + std::to_string(pi(q)) + " at state " +
                            std::to_string(q));
        pi(q) = std::max(pi(q), 0.0);
    }
    pi /= pi.sum();

    if ((transition * pi - pi).cwiseAbs().maxCoeff() > kPiTol)
        throw Error(Errc::SingularSystem, "fixed-point residual above tolerance");
    return StationaryDistribution{std::move(pi)};
}

double average_power(const SystemModel& model, const Policy& policy,
                     const StationaryDistribution& pi) {
    double power = 0.0;
    for (int q = 0; q <= model.Q(); ++q) power += pi.pi(q) * power_of_row(model, policy, q);
    return power;
}

double average_delay(const SystemModel& model, const StationaryDistribution& pi) {
    double mean_q = 0.0;
    for (int q = 0; q <= model.Q(); ++q) mean_q += static_cast<double>(q) * pi.pi(q);
    return mean_q / model.arrivals.mean();
}

TradeoffPoint evaluate_policy(const SystemModel& model, const Policy& policy) {
    const Eigen::MatrixXd transition = build_transition_matrix(model, policy);
    const ChainClassification cls = classify_chain(transition);
    if (cls.is_unichain) {
        const StationaryDistribution pi = stationary_distribution(model, policy);
        return TradeoffPoint{average_power(model, policy, pi), average_delay(model, pi)};
    }
    // Closed class seen from the empty queue; smallest-state class if several.
    const std::vector<char> from_zero = [&] {
        std::vector<char> mark(transition.rows(), 0);
        std::vector<int> stack{0};
        mark[0] = 1;
        while (!stack.empty()) {
            const int i = stack.back();
            stack.pop_back();
            for (Eigen::Index j = 0; j < transition.rows(); ++j)
                if (!mark[j] && transition(j, i) > kEdgeTol) {
                    mark[j] = 1;
                    stack.push_back(static_cast<int>(j));
                }
        }
        return mark;
    }();
    const std::vector<int>* target = nullptr;
    for (const auto& c : cls.closed_classes) {
        if (from_zero[c.front()]) {
            target = &c;
            break;  // classes are ordered by smallest state
        }
    }
    if (target == nullptr)
        throw Error(Errc::NotReducible, "no closed class reachable from the empty queue");
    try {
        const Policy reduced = reduce_to_unichain(model, policy, *target);
        const StationaryDistribution pi = stationary_distribution(model, reduced);
        return TradeoffPoint{average_power(model, reduced, pi), average_delay(model, pi)};
    } catch (const Error& e) {
        if (e.code() != Errc::NotReducible) throw;
        return restricted_point(model, policy, transition, *target);
    }
}

Policy mix_policies(const Policy& a, const Policy& b, double epsilon) {
    if (a.f.rows() != b.f.rows() || a.f.cols() != b.f.cols())
        throw Error(Errc::InfeasiblePolicy, "policy shapes differ");
    if (epsilon == 0.0) return a;
    if (epsilon == 1.0) return b;
    return Policy{(1.0 - epsilon) * a.f + epsilon * b.f};
}

double epsilon_prime(const SystemModel& model, const Policy& a, const Policy& b, double epsilon) {
    if (epsilon < 0.0 || epsilon > 1.0)
        throw Error(Errc::MalformedSpec, "epsilon outside [0,1]");
    const SingleRowPair pair = single_row_pair(model, a, b);
    const Eigen::MatrixXd h = balance_system(pair.lambda_a);
    const Eigen::Index n = h.rows();
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(n);
    unit(pair.row) = 1.0;
    // Row `row` of H^{-1} is the solution of the transposed system.
    Eigen::PartialPivLU<Eigen::MatrixXd> lut(h.transpose());
    const Eigen::VectorXd hrow = lut.solve(unit);
    const double k = hrow.dot(pair.delta);
    const double denom = 1.0 + epsilon * k;
    if (std::abs(denom) < 1e-14)
        throw Error(Errc::SingularSystem, "epsilon-prime denominator vanished");
    return (epsilon + epsilon * k) / denom;
}

double segment_slope(const SystemModel& model, const Policy& a, const Policy& b) {
    const SingleRowPair pair = single_row_pair(model, a, b);
    const TradeoffPoint pa = evaluate_policy(model, a);
    const TradeoffPoint pb = evaluate_policy(model, b);
    const double scale = std::max(1.0, std::max(std::abs(pa.power), std::abs(pb.power)));
    if (std::abs(pb.power - pa.power) <= 1e-14 * scale)
        throw Error(Errc::ZeroPowerDifference, "segment endpoints share the same power");

    const Eigen::MatrixXd h = balance_system(pair.lambda_a);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(h);
    const Eigen::VectorXd v = lu.solve(pair.delta);

    double num = 0.0;
    double pv = 0.0;
    for (int q = 0; q <= model.Q(); ++q) {
        num += static_cast<double>(q) * v(q);
        pv += power_of_row(model, a, q) * v(q);
    }
    const double zeta = power_of_row(model, b, pair.row) - power_of_row(model, a, pair.row);
    return num / (model.arrivals.mean() * (pv - zeta));
}

}  // namespace dpt
