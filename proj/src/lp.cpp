#include "dpt/lp.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace dpt {

namespace {

constexpr double kReducedCostTol = 1e-9;
constexpr double kPivotTol = 1e-11;
constexpr double kFeasibilityTol = 1e-9;

}  // namespace

int LinearProgram::column_of(int q, int s) const {
    const auto it = std::lower_bound(columns.begin(), columns.end(), std::make_pair(q, s));
    if (it == columns.end() || *it != std::make_pair(q, s)) return -1;
    return static_cast<int>(it - columns.begin());
}

LinearProgram build_lp(const SystemModel& model, double power_budget) {
    const auto [scaled, scale] = rescale_power(model);
    const int Q = scaled.Q();
    const int S = scaled.S();
    const int A = scaled.A();
    const auto& alpha = scaled.arrivals.probs;

    LinearProgram lp;
    for (int q = 0; q <= Q; ++q) {
        const ActionRange range = feasible_actions(scaled, q);
        for (int s = range.lo; s <= range.hi; ++s) lp.columns.emplace_back(q, s);
    }
    lp.num_cols = static_cast<int>(lp.columns.size());

    lp.objective.resize(lp.num_cols);
    for (int j = 0; j < lp.num_cols; ++j)
        lp.objective[j] = static_cast<double>(lp.columns[j].first) / scaled.arrivals.mean();

    // Balance across the (q-1 | q) cut, one equality per q = 1..Q: upward
    // probability flow from below equals downward flow from at-or-above.
    for (int q = 1; q <= Q; ++q) {
        std::vector<double> row(lp.num_cols, 0.0);
        for (int l = std::max(0, q - A); l <= q - 1; ++l)
            for (int a = 0; a <= A; ++a)
                for (int s = 0; s <= l + a - q; ++s) {
                    const int col = lp.column_of(l, s);
                    if (col >= 0) row[col] += alpha[a];
                }
        for (int r = q; r <= std::min(q + S - 1, Q); ++r)
            for (int a = 0; a <= A; ++a)
                for (int s = std::max(0, r + a - q + 1); s <= S; ++s) {
                    const int col = lp.column_of(r, s);
                    if (col >= 0) row[col] -= alpha[a];
                }
        lp.eq_rows.push_back(std::move(row));
        lp.eq_rhs.push_back(0.0);
    }

    lp.eq_rows.emplace_back(lp.num_cols, 1.0);  // normalization
    lp.eq_rhs.push_back(1.0);

    std::vector<double> budget_row(lp.num_cols, 0.0);
    for (int j = 0; j < lp.num_cols; ++j)
        budget_row[j] = scaled.power.costs[lp.columns[j].second];
    lp.ub_rows.push_back(std::move(budget_row));
    lp.ub_rhs.push_back(power_budget / scale);
    return lp;
}

namespace {

// Revised two-phase simplex. The basis is refactorized with a fresh LU every
// iteration, so roundoff never compounds across the (heavily degenerate)
// pivot sequence of the balance rows. Entering columns follow Bland's
// smallest-index rule; ratio ties resolve toward the largest pivot and then
// the smallest basis index. Artificials never re-enter once evicted.
class RevisedSimplex {
  public:
    explicit RevisedSimplex(const LinearProgram& lp) {
        const int n = lp.num_cols;
        const int num_ub = static_cast<int>(lp.ub_rows.size());
        const int num_eq = static_cast<int>(lp.eq_rows.size());
        rows_ = num_eq + num_ub;
        structural_ = n + num_ub;  // originals then slacks

        a_ = Eigen::MatrixXd::Zero(rows_, structural_);
        b_ = Eigen::VectorXd::Zero(rows_);
        for (int i = 0; i < num_eq; ++i) {
            for (int j = 0; j < n; ++j) a_(i, j) = lp.eq_rows[i][j];
            b_(i) = lp.eq_rhs[i];
        }
        for (int i = 0; i < num_ub; ++i) {
            const int r = num_eq + i;
            for (int j = 0; j < n; ++j) a_(r, j) = lp.ub_rows[i][j];
            a_(r, n + i) = 1.0;
            b_(r) = lp.ub_rhs[i];
        }
        basis_.assign(rows_, -1);
        artificial_row_.assign(rows_, -1);
        int next_col = structural_;
        for (int i = 0; i < rows_; ++i) {
            if (b_(i) < 0.0) {
                a_.row(i) = -a_.row(i);
                b_(i) = -b_(i);
            }
            const bool slack_usable = i >= num_eq && a_(i, n + (i - num_eq)) > 0.0;
            if (slack_usable) {
                basis_[i] = n + (i - num_eq);
            } else {
                artificial_row_[i] = next_col;
                basis_[i] = next_col++;
            }
        }
        total_cols_ = next_col;
    }

    SolveStatus run(const std::vector<double>& objective, std::vector<double>& x_out,
                    double& obj_out, std::vector<int>& basis_out) {
        const bool have_artificials = total_cols_ > structural_;
        if (have_artificials) {
            Eigen::VectorXd phase1_cost = Eigen::VectorXd::Zero(total_cols_);
            for (int j = structural_; j < total_cols_; ++j) phase1_cost(j) = 1.0;
            if (!iterate(phase1_cost, /*phase1=*/true))
                throw Error(Errc::NumericalBreakdown, "phase 1 reported unbounded");
            if (artificial_mass() > kFeasibilityTol) return SolveStatus::Infeasible;
        }

        Eigen::VectorXd cost = Eigen::VectorXd::Zero(total_cols_);
        for (std::size_t j = 0; j < objective.size(); ++j) cost(static_cast<int>(j)) = objective[j];
        if (!iterate(cost, /*phase1=*/false)) return SolveStatus::Unbounded;

        const Eigen::VectorXd xb = basic_values();
        x_out.assign(structural_, 0.0);
        for (int i = 0; i < rows_; ++i)
            if (basis_[i] < structural_) x_out[basis_[i]] = std::max(0.0, xb(i));
        obj_out = 0.0;
        for (std::size_t j = 0; j < objective.size(); ++j) obj_out += objective[j] * x_out[j];
        basis_out = basis_;
        return SolveStatus::Optimal;
    }

  private:
    Eigen::VectorXd column(int j) const {
        if (j < structural_) return a_.col(j);
        Eigen::VectorXd unit = Eigen::VectorXd::Zero(rows_);
        for (int i = 0; i < rows_; ++i)
            if (artificial_row_[i] == j) unit(i) = 1.0;
        return unit;
    }

    Eigen::MatrixXd basis_matrix() const {
        Eigen::MatrixXd m(rows_, rows_);
        for (int i = 0; i < rows_; ++i) m.col(i) = column(basis_[i]);
        return m;
    }

    Eigen::VectorXd basic_values() const {
        Eigen::VectorXd xb = Eigen::PartialPivLU<Eigen::MatrixXd>(basis_matrix()).solve(b_);
        for (int i = 0; i < rows_; ++i)
            if (std::abs(xb(i)) < 1e-13) xb(i) = 0.0;
        return xb;
    }

    double artificial_mass() const {
        const Eigen::VectorXd xb = basic_values();
        double mass = 0.0;
        for (int i = 0; i < rows_; ++i)
            if (basis_[i] >= structural_) mass += std::abs(xb(i));
        return mass;
    }

    bool iterate(const Eigen::VectorXd& cost, bool phase1) {
        const long long cap = 200LL * (rows_ + total_cols_) + 5000;
        for (long long it = 0; it < cap; ++it) {
            const Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_matrix());
            Eigen::VectorXd xb = lu.solve(b_);
            for (int i = 0; i < rows_; ++i)
                if (std::abs(xb(i)) < 1e-13) xb(i) = 0.0;

            if (phase1) {
                double mass = 0.0;
                for (int i = 0; i < rows_; ++i)
                    if (basis_[i] >= structural_) mass += std::abs(xb(i));
                if (mass <= kFeasibilityTol) return true;
            }

            Eigen::VectorXd cb(rows_);
            for (int i = 0; i < rows_; ++i) cb(i) = cost(basis_[i]);
            const Eigen::VectorXd y = lu.transpose().solve(cb);

            // Bland: smallest structural index with a negative reduced cost.
            int entering = -1;
            for (int j = 0; j < structural_; ++j) {
                const double reduced = cost(j) - y.dot(a_.col(j));
                if (reduced < -kReducedCostTol) {
                    bool basic = false;
                    for (int i = 0; i < rows_; ++i) basic = basic || basis_[i] == j;
                    if (!basic) {
                        entering = j;
                        break;
                    }
                }
            }
            if (entering < 0) return true;

            const Eigen::VectorXd direction = lu.solve(a_.col(entering));
            int leaving = -1;
            double best_ratio = 0.0;
            for (int i = 0; i < rows_; ++i) {
                // A basic artificial at value zero must leave on any movement
                // (ratio 0), or it could grow back above zero.
                const bool artificial_blocker = basis_[i] >= structural_ && xb(i) == 0.0 &&
                                                std::abs(direction(i)) > kPivotTol;
                if (!artificial_blocker && !(direction(i) > kPivotTol)) continue;
                const double ratio =
                    artificial_blocker ? 0.0 : std::max(0.0, xb(i)) / direction(i);
                const double pivot_size = std::abs(direction(i));
                if (leaving < 0 || ratio < best_ratio * (1.0 - 1e-9) - 1e-15) {
                    leaving = i;
                    best_ratio = ratio;
                } else if (ratio <= best_ratio * (1.0 + 1e-9) + 1e-15) {
                    const double incumbent = std::abs(direction(leaving));
                    if (pivot_size > incumbent * (1.0 + 1e-12) ||
                        (pivot_size >= incumbent * (1.0 - 1e-12) &&
                         basis_[i] < basis_[leaving])) {
                        leaving = i;
                        best_ratio = std::min(best_ratio, ratio);
                    }
                }
            }
            if (leaving < 0) return false;  // unbounded direction
            basis_[leaving] = entering;
        }
        throw Error(Errc::NumericalBreakdown, "simplex iteration cap exceeded");
    }

    Eigen::MatrixXd a_;
    Eigen::VectorXd b_;
    std::vector<int> basis_;
    std::vector<int> artificial_row_;
    int rows_ = 0;
    int structural_ = 0;
    int total_cols_ = 0;
};

}  // namespace

SimplexSolution solve_simplex(const LinearProgram& lp) {
    RevisedSimplex simplex(lp);
    SimplexSolution solution;
    std::vector<double> x;
    double objective = 0.0;
    std::vector<int> basis;
    solution.status = simplex.run(lp.objective, x, objective, basis);
    if (solution.status == SolveStatus::Optimal) {
        x.resize(lp.num_cols);  // drop slack values
        solution.x = std::move(x);
        solution.objective = objective;
        solution.basis = std::move(basis);
    }
    return solution;
}

LpResult lp_optimal_delay(const SystemModel& model, double power_budget) {
    const LinearProgram lp = build_lp(model, power_budget);
    const SimplexSolution sol = solve_simplex(lp);
    if (sol.status == SolveStatus::Infeasible)
        throw Error(Errc::InfeasibleConstraint,
                    "no feasible occupation measure for this power budget");
    if (sol.status == SolveStatus::Unbounded)
        throw Error(Errc::NumericalBreakdown, "occupation-measure LP reported unbounded");

    const int Q = model.Q();
    const int S = model.S();
    Policy policy{Eigen::MatrixXd::Zero(Q + 1, S + 1)};
    for (int q = 0; q <= Q; ++q) {
        const ActionRange range = feasible_actions(model, q);
        double mass = 0.0;
        for (int s = range.lo; s <= range.hi; ++s) {
            const int col = lp.column_of(q, s);
            if (col >= 0) mass += std::max(0.0, sol.x[col]);
        }
        if (mass > 1e-12) {
            for (int s = range.lo; s <= range.hi; ++s) {
                const int col = lp.column_of(q, s);
                policy.f(q, s) = col >= 0 ? std::max(0.0, sol.x[col]) / mass : 0.0;
            }
        } else {
            policy.f(q, std::min(q, model.A())) = 1.0;  // zero-mass state: min-delay action
        }
    }
    return LpResult{sol.objective, std::move(policy)};
}

void dump_lp(const LinearProgram& lp, std::ostream& out) {
    out << "# occupation-measure LP, rescaled power units, minimize c^T x, x >= 0\n";
    out << "cols " << lp.num_cols << "\n";
    for (int j = 0; j < lp.num_cols; ++j)
        out << "x " << j << " " << lp.columns[j].first << " " << lp.columns[j].second << "\n";
    for (int j = 0; j < lp.num_cols; ++j)
        if (lp.objective[j] != 0.0) out << "c " << j << " " << lp.objective[j] << "\n";
    for (std::size_t i = 0; i < lp.eq_rows.size(); ++i) {
        for (int j = 0; j < lp.num_cols; ++j)
            if (lp.eq_rows[i][j] != 0.0)
                out << "eq " << i << " " << j << " " << lp.eq_rows[i][j] << "\n";
        out << "eqrhs " << i << " " << lp.eq_rhs[i] << "\n";
    }
    for (std::size_t i = 0; i < lp.ub_rows.size(); ++i) {
        for (int j = 0; j < lp.num_cols; ++j)
            if (lp.ub_rows[i][j] != 0.0)
                out << "ub " << i << " " << j << " " << lp.ub_rows[i][j] << "\n";
        out << "ubrhs " << i << " " << lp.ub_rhs[i] << "\n";
    }
}

}  // namespace dpt
