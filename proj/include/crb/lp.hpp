#pragma once

// Small dense linear programs: maximize c'x subject to equality rows,
// less-or-equal rows and x >= 0. Two-phase tableau simplex with Bland's
// rule, meant for problems with at most a few hundred variables.

#include <string>
#include <vector>

namespace crb {

struct LinearProgram {
    int num_vars = 0;
    std::vector<double> objective;  // maximized
    std::vector<std::vector<double>> eq_rows;
    std::vector<double> eq_rhs;
    std::vector<std::vector<double>> le_rows;
    std::vector<double> le_rhs;

    explicit LinearProgram(int n = 0) : num_vars(n), objective(static_cast<std::size_t>(n), 0.0) {}
    void add_eq(std::vector<double> row, double rhs) {
        eq_rows.push_back(std::move(row));
        eq_rhs.push_back(rhs);
    }
    void add_le(std::vector<double> row, double rhs) {
        le_rows.push_back(std::move(row));
        le_rhs.push_back(rhs);
    }
};

enum class LpStatus { optimal, infeasible, unbounded, pivot_limit };

std::string to_string(LpStatus s);

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    std::vector<double> x;
    double objective = 0.0;
    int pivots = 0;
};

LpResult solve_lp(const LinearProgram& lp, double tol = 1e-9, int max_pivots = 200'000);

}  // namespace crb
