#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

namespace qprec {

// Integer least squares over a finite real alphabet: minimize ||c - G p||^2 with
// every p entry drawn from labels. G is upper triangular with strictly positive
// diagonal, produced by the real embedding of the complex precoding subproblem,
// so ||c - G p||^2 - c'c reproduces that subproblem's quadratic form exactly.
// initial_radius restricts the search to points with objective strictly below it;
// callers that set it finite must hold a feasible point at that objective, so the
// combined result is still an exact minimizer.
struct IlsProblem {
    Eigen::MatrixXd G;
    Eigen::VectorXd c;
    std::vector<double> labels;
    double initial_radius = std::numeric_limits<double>::infinity();
};

double ils_objective(const IlsProblem& prob, const Eigen::VectorXd& p);

}  // namespace qprec
