#include "simplex_lp.hpp"

#include <cmath>
#include <stdexcept>

namespace dynkin::detail {

namespace {
constexpr double kPivotTol = 1e-11;
}

LpSolution solve_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                    const Eigen::VectorXd& c) {
    const int m = static_cast<int>(A.rows());
    const int n = static_cast<int>(A.cols());
    const int nt = n + m;  // artificials appended

    Eigen::MatrixXd T(m, nt + 1);
    T.leftCols(n) = A;
    T.middleCols(n, m).setIdentity();
    T.col(nt) = b;
    for (int r = 0; r < m; ++r)
        if (T(r, nt) < 0.0) T.row(r) = -T.row(r);

    std::vector<int> basis(m);
    for (int r = 0; r < m; ++r) basis[r] = n + r;

    auto run = [&](const Eigen::VectorXd& cost, bool bar_artificial) {
        for (;;) {
            int enter = -1;
            for (int j = 0; j < nt; ++j) {
                if (bar_artificial && j >= n) break;
                double d = cost(j);
                for (int r = 0; r < m; ++r) d -= cost(basis[r]) * T(r, j);
                if (d < -kPivotTol) { enter = j; break; }  // Bland: first index
            }
            if (enter < 0) return;
            int leave = -1;
            double best = 0.0;
            for (int r = 0; r < m; ++r) {
                if (T(r, enter) <= kPivotTol) continue;
                double ratio = T(r, nt) / T(r, enter);
                if (leave < 0 || ratio < best - kPivotTol ||
                    (ratio < best + kPivotTol && basis[r] < basis[leave])) {
                    leave = r;
                    best = ratio;
                }
            }
            if (leave < 0) throw std::runtime_error("lp: unbounded");
            T.row(leave) /= T(leave, enter);
            for (int r = 0; r < m; ++r) {
                if (r == leave) continue;
                double f = T(r, enter);
                if (f != 0.0) T.row(r) -= f * T.row(leave);
            }
            basis[leave] = enter;
        }
    };

    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(nt);
    phase1.tail(m).setOnes();
    run(phase1, false);

    double infeas = 0.0;
    for (int r = 0; r < m; ++r)
        if (basis[r] >= n) infeas += T(r, nt);

    LpSolution sol;
    if (infeas > 1e-8) return sol;  // infeasible
    sol.feasible = true;

    // Pivot lingering zero-level artificials out where possible.
    for (int r = 0; r < m; ++r) {
        if (basis[r] < n) continue;
        for (int j = 0; j < n; ++j) {
            if (std::abs(T(r, j)) > kPivotTol) {
                T.row(r) /= T(r, j);
                for (int r2 = 0; r2 < m; ++r2) {
                    if (r2 == r) continue;
                    double f = T(r2, j);
                    if (f != 0.0) T.row(r2) -= f * T.row(r);
                }
                basis[r] = j;
                break;
            }
        }
    }

    Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(nt);
    phase2.head(n) = c;
    run(phase2, true);

    sol.x.assign(n, 0.0);
    for (int r = 0; r < m; ++r)
        if (basis[r] < n) sol.x[basis[r]] = T(r, nt);
    sol.value = 0.0;
    for (int j = 0; j < n; ++j) sol.value += c(j) * sol.x[j];
    sol.basis = basis;
    return sol;
}

}  // namespace dynkin::detail
