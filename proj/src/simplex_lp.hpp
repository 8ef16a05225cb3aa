#ifndef DYNKIN_SIMPLEX_LP_HPP
#define DYNKIN_SIMPLEX_LP_HPP

#include <Eigen/Dense>
#include <vector>

namespace dynkin::detail {

struct LpSolution {
    bool feasible = false;
    double value = 0.0;
    std::vector<double> x;
    std::vector<int> basis;
};

/// min c'x s.t. A x = b, x >= 0, dense two-phase tableau simplex with
/// Bland's rule (deterministic, terminating).
LpSolution solve_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                    const Eigen::VectorXd& c);

}  // namespace dynkin::detail

#endif
