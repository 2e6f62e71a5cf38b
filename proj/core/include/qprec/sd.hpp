#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <vector>

#include "qprec/ils.hpp"

namespace qprec {

struct SdStats {
    std::uint64_t nodes = 0;   // candidate evaluations
    std::uint64_t leaves = 0;  // improved leaves found
    double first_leaf_objective = std::numeric_limits<double>::infinity();
};

// Reusable search state; reusing one across calls avoids per-call allocation.
struct SdWorkspace {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> g_rows;
    std::vector<double> p;           // partial assignment
    std::vector<double> best;        // incumbent
    std::vector<double> xi;          // per-level residual targets
    std::vector<double> dist;        // accumulated distance entering each level
    std::vector<double> cand_err;    // per-level candidate errors, sorted ascending
    std::vector<int> cand_label;     // label indices matching cand_err
    std::vector<int> pos;            // next candidate position per level
};

// Exact depth-first Schnorr-Euchner search: initial radius infinity by default,
// children visited nearest-first per level, branches pruned once the accumulated
// distance reaches the incumbent radius, and a radius-violating candidate ends
// its whole sibling list (candidates are sorted). Equidistant labels are visited
// lower index first; equal-objective leaves keep the first one found. A finite
// prob.initial_radius prunes against it from the start; the return is empty when
// no point beats it (the caller's incumbent is then already optimal).
Eigen::VectorXd sphere_decode(const IlsProblem& prob, SdWorkspace* ws = nullptr,
                              SdStats* stats = nullptr);

// Exhaustive oracle: first minimizer in lexicographic label-index order.
// Guarded to L^dim <= 1e7.
Eigen::VectorXd brute_force_ils(const IlsProblem& prob);

}  // namespace qprec
