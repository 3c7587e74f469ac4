#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "dpt/steady_state.hpp"

namespace dpt {

/// Occupation-measure linear program for one power budget. Only variables
/// x_{q,s} with 0 <= q-s <= Q-A are materialized; all arithmetic is in
/// rescaled power units (max P_s = 1).
struct LinearProgram {
    int num_cols = 0;
    std::vector<std::pair<int, int>> columns;     // (q, s) per column
    std::vector<double> objective;                // minimize c^T x
    std::vector<std::vector<double>> eq_rows;     // Q balance rows then normalization
    std::vector<double> eq_rhs;
    std::vector<std::vector<double>> ub_rows;     // budget row
    std::vector<double> ub_rhs;

    int column_of(int q, int s) const;  // -1 when structurally zero
};

LinearProgram build_lp(const SystemModel& model, double power_budget);

enum class SolveStatus { Optimal, Infeasible, Unbounded };

struct SimplexSolution {
    SolveStatus status = SolveStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> x;
    std::vector<int> basis;  // column index per row, slack/artificial >= num_cols
};

/// Dense two-phase simplex with Bland's anti-cycling rule. Deterministic.
SimplexSolution solve_simplex(const LinearProgram& lp);

struct LpResult {
    double delay = 0.0;
    Policy policy;
};

/// Optimal delay for the budget plus a policy recovered from the occupation
/// measure (zero-mass states fall back to the min-delay action).
LpResult lp_optimal_delay(const SystemModel& model, double power_budget);

/// Sparse triplet text dump (objective, equality and inequality rows, bounds)
/// for external cross-checking. Format documented in the README.
void dump_lp(const LinearProgram& lp, std::ostream& out);

}  // namespace dpt
