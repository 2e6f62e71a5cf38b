#include "qprec/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "qprec/sd.hpp"

namespace qprec {

namespace {

double rate_or_zero(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& p, double q,
                    double noise_power, const Eigen::VectorXd& weights) {
    if (p.size() == 0 || p.squaredNorm() <= 0.0) return 0.0;
    return sum_rate(h, p, q, noise_power, weights);
}

}  // namespace

Eigen::MatrixXcd continuous_p3(const Eigen::MatrixXcd& H, const Eigen::VectorXd& d,
                               const Eigen::VectorXcd& beta, double q,
                               double* omega_out) {
    if (!(q > 0.0)) throw std::invalid_argument("continuous_p3: power budget <= 0");
    const Eigen::Index k_ue = H.rows();
    const Eigen::Index m_ant = H.cols();
    if (d.size() != k_ue || beta.size() != k_ue)
        throw std::invalid_argument("continuous_p3: weight/gain size mismatch");

    const P3Curve curve = p3_curve(H, d, beta);

    double omega = 0.0;
    if (curve.power(0.0) > q) {
        double lo = 0.0;
        double hi = 1.0;
        while (curve.power(hi) > q && hi < 1e300) {
            lo = hi;
            hi *= 2.0;
        }
        omega = lo;
        for (int it = 0; it < 200; ++it) {
            const double g = curve.power(omega) - q;
            if (std::abs(g) <= 1e-12 * q) break;
            if (g > 0.0)
                lo = omega;
            else
                hi = omega;
            double next = omega - g / curve.power_slope(omega);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            omega = next;
            if (hi - lo <= 1e-16 * (1.0 + omega)) break;
        }
    }

    if (omega_out != nullptr) *omega_out = omega;
    return curve.precoder(omega);
}

Eigen::MatrixXcd unaware_precoding(const Eigen::MatrixXcd& H, const WmmseConfig& cfg,
                                   const QuantizerSpec& spec, WmmseState* state_out) {
    WmmseConfig cont = cfg;
    cont.solver = SolverKind::Continuous;
    WmmseState st = run_wmmse(H, cont);
    Eigen::MatrixXcd p = quantize(st.P, spec);
    if (state_out != nullptr) *state_out = std::move(st);
    return p;
}

Eigen::MatrixXcd half_aware_precoding(const Eigen::MatrixXcd& H, const WmmseConfig& cfg,
                                      const QuantizerSpec& spec,
                                      WmmseState* state_out) {
    if (cfg.max_iterations < 1)
        throw std::invalid_argument("half_aware_precoding: need at least one iteration");
    WmmseConfig cont = cfg;
    cont.solver = SolverKind::Continuous;
    cont.max_iterations = cfg.max_iterations - 1;
    WmmseState st = run_wmmse(H, cont);

    const Eigen::VectorXd u = cfg.ue_weights.size() > 0
                                  ? cfg.ue_weights
                                  : Eigen::VectorXd::Ones(H.rows());
    SdWorkspace ws;
    IlsSolver solver = [&ws](const IlsProblem& prob) {
        return sphere_decode(prob, &ws);
    };
    const Eigen::MatrixXcd inc = quantize(st.P, spec);
    Eigen::MatrixXcd last = inc;
    auto solve_at = [&](double omega) {
        const std::vector<const Eigen::MatrixXcd*> warm{&inc, &last};
        last = solve_p5(H, st.d, st.beta, omega, spec.labels, solver, &warm);
        return last;
    };
    auto rate_of = [&](const Eigen::MatrixXcd& p) {
        return rate_or_zero(H, p, cfg.power_budget, cfg.noise_power, u);
    };
    const P3Curve curve = p3_curve(H, st.d, st.beta);
    const std::function<double(double)> power_at = [&](double omega) {
        return curve.power(omega);
    };
    BisectOptions opts;
    opts.omega_floor = default_omega_floor(H, st.d, st.beta);
    const BisectResult bis =
        bisect_omega(solve_at, rate_of, cfg.power_budget, &inc, opts, &power_at);
    st.P = bis.P;
    if (bis.omega >= 0.0) st.omega = bis.omega;
    st.iterations += 1;
    if (state_out != nullptr) *state_out = st;
    return st.P;
}

double generated_interference(const Eigen::MatrixXcd& H,
                              const Eigen::MatrixXcd& P_scaled, int k) {
    const Eigen::VectorXcd col = H * P_scaled.col(k);
    return col.squaredNorm() - std::norm(col(k));
}

Eigen::MatrixXcd heuristic_refine(const Eigen::MatrixXcd& H,
                                  const Eigen::MatrixXcd& P_unquantized,
                                  const QuantizerSpec& spec, double q,
                                  double noise_power, const Eigen::VectorXd* weights) {
    const Eigen::Index k_ue = H.rows();
    const Eigen::Index m_ant = H.cols();
    const Eigen::VectorXd u =
        weights != nullptr && weights->size() > 0 ? *weights : Eigen::VectorXd::Ones(k_ue);

    Eigen::MatrixXcd p = quantize(P_unquantized, spec);

    // Visit order: UEs by decreasing interference inflicted at the rescaled start
    // point, ties by UE index.
    std::vector<int> order(k_ue);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> gi(k_ue, 0.0);
    const double tr = p.squaredNorm();
    if (tr > 0.0) {
        const Eigen::MatrixXcd p_scaled = std::sqrt(q / tr) * p;
        for (Eigen::Index k = 0; k < k_ue; ++k)
            gi[k] = generated_interference(H, p_scaled, static_cast<int>(k));
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return gi[a] > gi[b]; });

    double best_rate = rate_or_zero(H, p, q, noise_power, u);
    for (int k : order) {
        for (Eigen::Index m = 0; m < m_ant; ++m) {
            const std::complex<double> x = P_unquantized(m, k);
            const auto [re1, re2] = two_nearest_labels(x.real(), spec);
            const auto [im1, im2] = two_nearest_labels(x.imag(), spec);
            for (int re_idx : {re1, re2}) {
                for (int im_idx : {im1, im2}) {
                    const std::complex<double> cand{spec.labels[re_idx],
                                                    spec.labels[im_idx]};
                    if (cand == p(m, k)) continue;
                    const std::complex<double> saved = p(m, k);
                    p(m, k) = cand;
                    const double rate = rate_or_zero(H, p, q, noise_power, u);
                    if (rate > best_rate) {
                        best_rate = rate;
                    } else {
                        p(m, k) = saved;
                    }
                }
            }
        }
    }
    return p;
}

}  // namespace qprec
