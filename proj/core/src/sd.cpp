#include "qprec/sd.hpp"

#include <cmath>
#include <stdexcept>

namespace qprec {

namespace {

void check_problem(const IlsProblem& prob) {
    const Eigen::Index n = prob.G.rows();
    if (prob.G.cols() != n) throw std::invalid_argument("ils: G must be square");
    if (prob.c.size() != n) throw std::invalid_argument("ils: c size mismatch");
    if (prob.labels.empty()) throw std::invalid_argument("ils: empty label alphabet");
}

}  // namespace

double ils_objective(const IlsProblem& prob, const Eigen::VectorXd& p) {
    return (prob.c - prob.G * p).squaredNorm();
}

Eigen::VectorXd sphere_decode(const IlsProblem& prob, SdWorkspace* ws, SdStats* stats) {
    check_problem(prob);
    const int n = static_cast<int>(prob.G.rows());
    const int nl = static_cast<int>(prob.labels.size());
    if (n == 0) return Eigen::VectorXd();
    for (int m = 0; m < n; ++m)
        if (!(prob.G(m, m) > 0.0))
            throw std::invalid_argument("sphere_decode: non-positive diagonal");

    SdWorkspace local;
    if (ws == nullptr) ws = &local;
    ws->g_rows = prob.G;
    ws->p.assign(n, 0.0);
    ws->best.assign(n, 0.0);
    ws->xi.assign(n, 0.0);
    ws->dist.assign(n, 0.0);
    ws->cand_err.assign(static_cast<size_t>(n) * nl, 0.0);
    ws->cand_label.assign(static_cast<size_t>(n) * nl, 0);
    ws->pos.assign(n, 0);

    const double* labels = prob.labels.data();
    std::uint64_t nodes = 0;
    std::uint64_t leaves = 0;
    double first_leaf = std::numeric_limits<double>::infinity();
    double r_opt = prob.initial_radius;
    bool found = false;

    // Nearest-first candidate order per level; stable insertion keeps the lower
    // label index in front on exact error ties.
    auto enter_level = [&](int m) {
        const double* grow = ws->g_rows.data() + static_cast<size_t>(m) * n;
        double target = prob.c(m);
        for (int j = m + 1; j < n; ++j) target -= grow[j] * ws->p[j];
        ws->xi[m] = target;
        const double gmm = grow[m];
        double* err = ws->cand_err.data() + static_cast<size_t>(m) * nl;
        int* lab = ws->cand_label.data() + static_cast<size_t>(m) * nl;
        for (int l = 0; l < nl; ++l) {
            const double e = target - gmm * labels[l];
            const double key = e * e;
            int j = l;
            while (j > 0 && err[j - 1] > key) {
                err[j] = err[j - 1];
                lab[j] = lab[j - 1];
                --j;
            }
            err[j] = key;
            lab[j] = l;
        }
        ws->pos[m] = 0;
    };

    int m = n - 1;
    ws->dist[m] = 0.0;
    enter_level(m);
    while (m < n) {
        if (ws->pos[m] >= nl) {
            ++m;  // level exhausted, back up
            continue;
        }
        const size_t slot = static_cast<size_t>(m) * nl + ws->pos[m];
        ++ws->pos[m];
        ++nodes;
        const double d_here = ws->dist[m] + ws->cand_err[slot];
        if (d_here >= r_opt) {
            ++m;  // siblings are sorted, the rest of this level fails too
            continue;
        }
        ws->p[m] = labels[ws->cand_label[slot]];
        if (m == 0) {
            r_opt = d_here;
            ws->best = ws->p;
            found = true;
            ++leaves;
            if (leaves == 1) first_leaf = d_here;
            ++m;
        } else {
            ws->dist[m - 1] = d_here;
            --m;
            enter_level(m);
        }
    }

    if (stats != nullptr) {
        stats->nodes = nodes;
        stats->leaves = leaves;
        stats->first_leaf_objective = first_leaf;
    }
    if (!found) return Eigen::VectorXd();
    return Eigen::Map<const Eigen::VectorXd>(ws->best.data(), n);
}

Eigen::VectorXd brute_force_ils(const IlsProblem& prob) {
    check_problem(prob);
    const int n = static_cast<int>(prob.G.rows());
    const int nl = static_cast<int>(prob.labels.size());
    if (n == 0) return Eigen::VectorXd();
    if (std::pow(static_cast<double>(nl), n) > 1e7)
        throw std::length_error("brute_force_ils: search space above 1e7");

    std::vector<int> idx(n, 0);
    Eigen::VectorXd p = Eigen::VectorXd::Constant(n, prob.labels[0]);
    Eigen::VectorXd best = p;
    double best_obj = ils_objective(prob, p);
    while (true) {
        int pos = n - 1;
        while (pos >= 0) {
            if (++idx[pos] < nl) {
                p(pos) = prob.labels[idx[pos]];
                break;
            }
            idx[pos] = 0;
            p(pos) = prob.labels[0];
            --pos;
        }
        if (pos < 0) break;
        const double obj = ils_objective(prob, p);
        if (obj < best_obj) {
            best_obj = obj;
            best = p;
        }
    }
    return best;
}

}  // namespace qprec
