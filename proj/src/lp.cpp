#include "crb/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace crb {

std::string to_string(LpStatus s) {
    switch (s) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::infeasible: return "infeasible";
        case LpStatus::unbounded: return "unbounded";
        case LpStatus::pivot_limit: return "pivot_limit";
    }
    return "unknown";
}

namespace {

struct Tableau {
    int rows = 0;  // constraint rows; row `rows` is the objective
    int cols = 0;  // variable columns; column `cols` is the rhs
    std::vector<double> t;
    std::vector<int> basis;

    double& at(int r, int c) { return t[static_cast<std::size_t>(r) * (cols + 1) + c]; }

    void pivot(int pr, int pc) {
        const double p = at(pr, pc);
        for (int c = 0; c <= cols; ++c) at(pr, c) /= p;
        for (int r = 0; r <= rows; ++r) {
            if (r == pr) continue;
            const double f = at(r, pc);
            if (f == 0.0) continue;
            for (int c = 0; c <= cols; ++c) at(r, c) -= f * at(pr, c);
        }
        basis[static_cast<std::size_t>(pr)] = pc;
    }

    // Dantzig pricing over columns [0, allowed), switching to Bland's rule
    // after a run of degenerate pivots so cycling cannot occur.
    LpStatus run(int allowed, double tol, int& pivots, int max_pivots) {
        int degenerate = 0;
        while (true) {
            const bool bland = degenerate > 50;
            int enter = -1;
            double most = -tol;
            for (int c = 0; c < allowed; ++c)
                if (at(rows, c) < most) {
                    enter = c;
                    if (bland) break;
                    most = at(rows, c);
                }
            if (enter < 0) return LpStatus::optimal;
            int leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (int r = 0; r < rows; ++r) {
                const double a = at(r, enter);
                if (a <= tol) continue;
                const double ratio = at(r, cols) / a;
                bool take = ratio < best - tol;
                if (!take && leave >= 0 && ratio <= best + tol)
                    take = bland ? basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leave)]
                                 : a > at(leave, enter);
                if (take) {
                    best = std::min(best, ratio);
                    leave = r;
                }
            }
            if (leave < 0) return LpStatus::unbounded;
            if (++pivots > max_pivots) return LpStatus::pivot_limit;
            degenerate = best <= tol ? degenerate + 1 : 0;
            pivot(leave, enter);
        }
    }
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp, double tol, int max_pivots) {
    const int n = lp.num_vars;
    const int me = static_cast<int>(lp.eq_rows.size()), ml = static_cast<int>(lp.le_rows.size());
    if (static_cast<int>(lp.objective.size()) != n) throw std::invalid_argument("solve_lp: objective size mismatch");
    for (const auto& r : lp.eq_rows)
        if (static_cast<int>(r.size()) != n) throw std::invalid_argument("solve_lp: equality row size mismatch");
    for (const auto& r : lp.le_rows)
        if (static_cast<int>(r.size()) != n) throw std::invalid_argument("solve_lp: inequality row size mismatch");

    // Columns: x | one slack per <= row | one artificial per row that lacks a
    // feasible slack basis (equalities and <= rows with negative rhs).
    const int m = me + ml;
    std::vector<double> sign(static_cast<std::size_t>(m), 1.0);
    std::vector<int> artificial_of(static_cast<std::size_t>(m), -1);
    int num_art = 0;
    for (int r = 0; r < m; ++r) {
        const double rhs = r < me ? lp.eq_rhs[static_cast<std::size_t>(r)] : lp.le_rhs[static_cast<std::size_t>(r - me)];
        if (rhs < 0.0) sign[static_cast<std::size_t>(r)] = -1.0;
        if (r < me || rhs < 0.0) artificial_of[static_cast<std::size_t>(r)] = num_art++;
    }
    const int slack0 = n, art0 = n + ml;

    Tableau tab;
    tab.rows = m;
    tab.cols = n + ml + num_art;
    tab.t.assign(static_cast<std::size_t>(m + 1) * (tab.cols + 1), 0.0);
    tab.basis.assign(static_cast<std::size_t>(m), -1);
    for (int r = 0; r < m; ++r) {
        const double sg = sign[static_cast<std::size_t>(r)];
        const auto& row = r < me ? lp.eq_rows[static_cast<std::size_t>(r)] : lp.le_rows[static_cast<std::size_t>(r - me)];
        const double rhs = r < me ? lp.eq_rhs[static_cast<std::size_t>(r)] : lp.le_rhs[static_cast<std::size_t>(r - me)];
        for (int j = 0; j < n; ++j) tab.at(r, j) = sg * row[static_cast<std::size_t>(j)];
        if (r >= me) tab.at(r, slack0 + (r - me)) = sg;
        tab.at(r, tab.cols) = sg * rhs;
        if (const int a = artificial_of[static_cast<std::size_t>(r)]; a >= 0) {
            tab.at(r, art0 + a) = 1.0;
            tab.basis[static_cast<std::size_t>(r)] = art0 + a;
        } else {
            tab.basis[static_cast<std::size_t>(r)] = slack0 + (r - me);
        }
    }

    LpResult out;
    // Phase 1: maximize -sum(artificials).
    if (num_art > 0) {
        for (int c = art0; c < tab.cols; ++c) tab.at(m, c) = 1.0;
        for (int r = 0; r < m; ++r)
            if (tab.basis[static_cast<std::size_t>(r)] >= art0)
                for (int c = 0; c <= tab.cols; ++c) tab.at(m, c) -= tab.at(r, c);
        const auto st = tab.run(tab.cols, tol, out.pivots, max_pivots);
        if (st == LpStatus::pivot_limit) {
            out.status = st;
            return out;
        }
        if (-tab.at(m, tab.cols) > tol * std::max(1.0, static_cast<double>(m))) {
            out.status = LpStatus::infeasible;
            return out;
        }
        // Drive remaining (zero-valued) artificials out of the basis where possible.
        for (int r = 0; r < m; ++r) {
            if (tab.basis[static_cast<std::size_t>(r)] < art0) continue;
            for (int c = 0; c < art0; ++c)
                if (std::abs(tab.at(r, c)) > tol) {
                    tab.pivot(r, c);
                    break;
                }
        }
    }

    // Phase 2 objective row: -c, then eliminate basic columns.
    for (int c = 0; c <= tab.cols; ++c) tab.at(m, c) = 0.0;
    for (int j = 0; j < n; ++j) tab.at(m, j) = -lp.objective[static_cast<std::size_t>(j)];
    for (int r = 0; r < m; ++r) {
        const int b = tab.basis[static_cast<std::size_t>(r)];
        const double f = tab.at(m, b);
        if (f != 0.0)
            for (int c = 0; c <= tab.cols; ++c) tab.at(m, c) -= f * tab.at(r, c);
    }
    // Artificials still basic sit on redundant rows at value zero; they never re-enter.
    out.status = tab.run(art0, tol, out.pivots, max_pivots);
    if (out.status != LpStatus::optimal) return out;

    // The tableau accumulates rounding over many pivots; recompute the basic
    // solution from the original rows.
    Eigen::MatrixXd basis_matrix = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd rhs(m);
    for (int r = 0; r < m; ++r) {
        const double sg = sign[static_cast<std::size_t>(r)];
        const auto& row = r < me ? lp.eq_rows[static_cast<std::size_t>(r)] : lp.le_rows[static_cast<std::size_t>(r - me)];
        rhs(r) = sg * (r < me ? lp.eq_rhs[static_cast<std::size_t>(r)] : lp.le_rhs[static_cast<std::size_t>(r - me)]);
        for (int k = 0; k < m; ++k) {
            const int b = tab.basis[static_cast<std::size_t>(k)];
            if (b < n)
                basis_matrix(r, k) = sg * row[static_cast<std::size_t>(b)];
            else if (b < art0)
                basis_matrix(r, k) = (b - slack0 == r - me) ? sg : 0.0;
            else
                basis_matrix(r, k) = (artificial_of[static_cast<std::size_t>(r)] == b - art0) ? 1.0 : 0.0;
        }
    }
    const Eigen::VectorXd xb = basis_matrix.partialPivLu().solve(rhs);
    out.x.assign(static_cast<std::size_t>(n), 0.0);
    for (int r = 0; r < m; ++r) {
        const int b = tab.basis[static_cast<std::size_t>(r)];
        if (b < n) out.x[static_cast<std::size_t>(b)] = std::max(0.0, xb(r));
    }
    out.objective = 0.0;
    for (int j = 0; j < n; ++j) out.objective += lp.objective[static_cast<std::size_t>(j)] * out.x[static_cast<std::size_t>(j)];
    return out;
}

}  // namespace crb
