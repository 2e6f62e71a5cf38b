#include "qprec/wmmse.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "qprec/baselines.hpp"
#include "qprec/sd.hpp"

namespace qprec {

namespace {

constexpr double kLn2 = 0.6931471805599453;

// Power-trace guard so zero precoders yield zero noise-scaled SINR instead of 0/0.
double safe_trace(const Eigen::MatrixXcd& p) {
    return std::max(p.squaredNorm(), 1e-300);
}

double rate_or_zero(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& p, double q,
                    double noise_power, const Eigen::VectorXd& weights) {
    if (p.size() == 0 || p.squaredNorm() <= 0.0) return 0.0;
    return sum_rate(h, p, q, noise_power, weights);
}

}  // namespace

Eigen::MatrixXcd wf_init(const Eigen::MatrixXcd& H, double q, double noise_power) {
    if (!(q > 0.0)) throw std::invalid_argument("wf_init: power budget must be positive");
    const Eigen::Index k = H.rows();
    Eigen::MatrixXcd gram = H * H.adjoint();
    gram.diagonal().array() += static_cast<double>(k) * noise_power / q;
    Eigen::LLT<Eigen::MatrixXcd> llt(gram);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("wf_init: singular system (rank-deficient H with zero noise)");
    return H.adjoint() * llt.solve(Eigen::MatrixXcd::Identity(k, k));
}

double ue_sinr(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& P, int k,
               double noise_power) {
    const Eigen::RowVectorXcd hp = H.row(k) * P;
    const double signal = std::norm(hp(k));
    const double interference = hp.squaredNorm() - signal;
    return signal / (interference + noise_power);
}

std::complex<double> receiver_gain(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& P,
                                   int k, double noise_power) {
    const Eigen::RowVectorXcd hp = H.row(k) * P;
    return std::conj(hp(k)) / (hp.squaredNorm() + noise_power);
}

double mse_weight(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& P, int k,
                  double noise_power, double ue_weight) {
    return ue_weight * (1.0 + ue_sinr(H, P, k, noise_power)) / kLn2;
}

double ue_mse(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& P,
              std::complex<double> beta_k, int k, double noise_power) {
    const Eigen::RowVectorXcd hp = H.row(k) * P;
    return std::norm(beta_k) * (hp.squaredNorm() + noise_power) -
           2.0 * (beta_k * hp(k)).real() + 1.0;
}

IlsReduction reduce_all(const Eigen::MatrixXcd& H, const Eigen::VectorXd& d,
                        const Eigen::VectorXcd& beta, double omega) {
    const Eigen::Index k_ue = H.rows();
    const Eigen::Index m_ant = H.cols();
    Eigen::VectorXcd row_scale(k_ue);
    for (Eigen::Index i = 0; i < k_ue; ++i)
        row_scale(i) = std::sqrt(d(i)) * beta(i);
    const Eigen::MatrixXcd dh = row_scale.asDiagonal() * H;
    Eigen::MatrixXcd vhat = dh.adjoint() * dh;
    vhat.diagonal().array() += omega;

    // Real embedding of the Hermitian form; its Cholesky factor is the real
    // upper-triangular G the search operates on.
    Eigen::MatrixXd vr(2 * m_ant, 2 * m_ant);
    vr.topLeftCorner(m_ant, m_ant) = vhat.real();
    vr.topRightCorner(m_ant, m_ant) = -vhat.imag();
    vr.bottomLeftCorner(m_ant, m_ant) = vhat.imag();
    vr.bottomRightCorner(m_ant, m_ant) = vhat.real();
    Eigen::LLT<Eigen::MatrixXd> llt(vr);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("reduce_all: quadratic form not positive definite");

    IlsReduction red;
    red.G = llt.matrixU();
    red.c.resize(2 * m_ant, k_ue);
    Eigen::VectorXd b(2 * m_ant);
    for (Eigen::Index i = 0; i < k_ue; ++i) {
        const Eigen::VectorXcd f = d(i) * beta(i) * H.row(i).transpose();
        b.head(m_ant) = f.real();
        b.tail(m_ant) = -f.imag();
        red.c.col(i) = red.G.transpose().triangularView<Eigen::Lower>().solve(b);
    }
    return red;
}

IlsProblem reduce_to_ils(const Eigen::MatrixXcd& H, const Eigen::VectorXd& d,
                         const Eigen::VectorXcd& beta, double omega, int ue,
                         const std::vector<double>& labels) {
    IlsReduction red = reduce_all(H, d, beta, omega);
    return IlsProblem{std::move(red.G), red.c.col(ue), labels};
}

Eigen::VectorXcd real_to_complex(const Eigen::VectorXd& p_real) {
    const Eigen::Index m = p_real.size() / 2;
    Eigen::VectorXcd out(m);
    for (Eigen::Index i = 0; i < m; ++i)
        out(i) = {p_real(i), p_real(m + i)};
    return out;
}

double default_omega_floor(const Eigen::MatrixXcd& H, const Eigen::VectorXd& d,
                           const Eigen::VectorXcd& beta) {
    double scale = 0.0;
    for (Eigen::Index m = 0; m < H.cols(); ++m) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < H.rows(); ++i)
            s += d(i) * std::norm(beta(i)) * std::norm(H(i, m));
        scale = std::max(scale, s);
    }
    return 1e-3 * scale;
}

double P3Curve::power(double omega) const {
    double s = 0.0;
    for (Eigen::Index m = 0; m < lambda.size(); ++m) {
        if (row_power(m) == 0.0) continue;
        const double den = lambda(m) + omega;
        s += row_power(m) / (den * den);
    }
    return s;
}

double P3Curve::power_slope(double omega) const {
    double s = 0.0;
    for (Eigen::Index m = 0; m < lambda.size(); ++m) {
        if (row_power(m) == 0.0) continue;
        const double den = lambda(m) + omega;
        s -= 2.0 * row_power(m) / (den * den * den);
    }
    return s;
}

Eigen::MatrixXcd P3Curve::precoder(double omega) const {
    Eigen::VectorXd inv_scale(lambda.size());
    for (Eigen::Index m = 0; m < lambda.size(); ++m)
        inv_scale(m) = row_power(m) == 0.0 ? 0.0 : 1.0 / (lambda(m) + omega);
    return basis * (inv_scale.asDiagonal() * phi);
}

P3Curve p3_curve(const Eigen::MatrixXcd& H, const Eigen::VectorXd& d,
                 const Eigen::VectorXcd& beta) {
    const Eigen::Index k_ue = H.rows();
    const Eigen::Index m_ant = H.cols();
    if (d.size() != k_ue || beta.size() != k_ue)
        throw std::invalid_argument("p3_curve: weight/gain size mismatch");

    Eigen::VectorXcd row_scale(k_ue);
    for (Eigen::Index i = 0; i < k_ue; ++i) row_scale(i) = std::sqrt(d(i)) * beta(i);
    const Eigen::MatrixXcd dh = row_scale.asDiagonal() * H;
    Eigen::MatrixXcd f(m_ant, k_ue);
    for (Eigen::Index i = 0; i < k_ue; ++i)
        f.col(i) = d(i) * std::conj(beta(i)) * H.row(i).adjoint();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dh.adjoint() * dh);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("p3_curve: eigendecomposition failed");

    P3Curve curve;
    curve.basis = es.eigenvectors();
    curve.lambda = es.eigenvalues().cwiseMax(0.0);
    curve.phi = curve.basis.adjoint() * f;
    curve.row_power.resize(m_ant);
    const double thresh = curve.lambda.maxCoeff() * 1e-14;
    for (Eigen::Index m = 0; m < m_ant; ++m) {
        if (curve.lambda(m) <= thresh) curve.phi.row(m).setZero();
        curve.row_power(m) = curve.phi.row(m).squaredNorm();
    }
    return curve;
}

Eigen::MatrixXcd solve_p5(const Eigen::MatrixXcd& H, const Eigen::VectorXd& d,
                          const Eigen::VectorXcd& beta, double omega,
                          const std::vector<double>& labels, const IlsSolver& solver,
                          const std::vector<const Eigen::MatrixXcd*>* warm_starts) {
    const IlsReduction red = reduce_all(H, d, beta, omega);
    const Eigen::Index k_ue = H.rows();
    const Eigen::Index m_ant = H.cols();
    Eigen::MatrixXcd p(m_ant, k_ue);
    IlsProblem prob{red.G, Eigen::VectorXd(), labels};
    Eigen::VectorXd embedded(2 * m_ant);
    for (Eigen::Index i = 0; i < k_ue; ++i) {
        prob.c = red.c.col(i);
        prob.initial_radius = std::numeric_limits<double>::infinity();
        Eigen::VectorXd fallback;
        if (warm_starts != nullptr) {
            for (const Eigen::MatrixXcd* w : *warm_starts) {
                if (w == nullptr || w->size() == 0) continue;
                embedded.head(m_ant) = w->col(i).real();
                embedded.tail(m_ant) = w->col(i).imag();
                const double obj = (prob.c - red.G * embedded).squaredNorm();
                if (obj < prob.initial_radius) {
                    prob.initial_radius = obj;
                    fallback = embedded;
                }
            }
            // Keep points that tie the seed objective reachable.
            prob.initial_radius *= 1.0 + 1e-12;
        }
        const Eigen::VectorXd sol = solver(prob);
        p.col(i) = real_to_complex(sol.size() > 0 ? sol : fallback);
    }
    return p;
}

BisectResult bisect_omega(const std::function<Eigen::MatrixXcd(double)>& solve_at,
                          const std::function<double(const Eigen::MatrixXcd&)>& rate_of,
                          double power_budget,
                          const Eigen::MatrixXcd* incumbent, const BisectOptions& opts,
                          const std::function<double(double)>* power_at) {
    if (!(power_budget > 0.0))
        throw std::invalid_argument("bisect_omega: power budget must be positive");
    BisectResult best;
    best.omega = -1.0;  // stays -1 while the external incumbent is unbeaten
    double best_rate = -std::numeric_limits<double>::infinity();
    if (incumbent != nullptr && incumbent->size() > 0) {
        best.P = *incumbent;
        best_rate = rate_of(*incumbent);
    }
    int evals = 0;
    // Offers the candidate at omega to the incumbent and reports the power the
    // walk should steer by.
    auto consider = [&](double omega) {
        ++evals;
        const Eigen::MatrixXcd p = solve_at(omega);
        const double rate = rate_of(p);
        if (rate > best_rate) {
            best_rate = rate;
            best.omega = omega;
            best.P = p;
        }
        return power_at != nullptr ? (*power_at)(omega) : p.squaredNorm();
    };

    const double power_tol = opts.power_tol_rel * power_budget;
    const double omega_cap = 1073741824.0;  // 2^30
    const double floor = std::min(std::max(opts.omega_floor, 0.0), omega_cap);
    double lo = 0.0;
    double hi = std::max(1.0, floor);
    double power = consider(hi);
    while (power > power_budget && hi < omega_cap && evals < opts.max_evaluations) {
        hi *= 2.0;
        power = consider(hi);
    }
    bool crossing_below_floor = false;
    if (std::abs(power - power_budget) >= power_tol) {
        while (evals < opts.max_evaluations && hi - lo > opts.omega_tol) {
            double mid = 0.5 * (lo + hi);
            if (mid < floor) {
                if (hi <= floor) {
                    crossing_below_floor = true;
                    break;
                }
                mid = floor;
            }
            power = consider(mid);
            if (std::abs(power - power_budget) < power_tol) break;
            if (power > power_budget)
                lo = mid;
            else
                hi = mid;
        }
    }
    // The power crossing sits where the quadratic form is near-singular and the
    // lattice search becomes intractable, so the walk toward it has been cut
    // off. The rescaling in rate_of keeps every candidate power-feasible, so
    // spend the remaining budget probing upward instead: double omega from the
    // floor while the rate keeps improving.
    if (crossing_below_floor && floor > 0.0) {
        int stale = 0;
        double w = floor;
        while (evals < opts.max_evaluations && stale < 5 && w < omega_cap) {
            w = std::min(w * 1.5, omega_cap);
            const double before = best_rate;
            consider(w);
            stale = best_rate > before ? 0 : stale + 1;
        }
    }
    best.evaluations = evals;
    return best;
}

double sum_rate(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& P, double q,
                double noise_power, const Eigen::VectorXd& weights) {
    const double tr = P.squaredNorm();
    if (!(tr > 0.0)) throw std::invalid_argument("sum_rate: zero precoder");
    const double alpha = std::sqrt(q / tr);
    const Eigen::MatrixXcd hp = alpha * (H * P);
    double rate = 0.0;
    for (Eigen::Index k = 0; k < H.rows(); ++k) {
        const double signal = std::norm(hp(k, k));
        const double interference = hp.row(k).squaredNorm() - signal;
        const double w = weights.size() > 0 ? weights(k) : 1.0;
        rate += w * std::log2(1.0 + signal / (interference + noise_power));
    }
    return rate;
}

WmmseState run_wmmse(const Eigen::MatrixXcd& H, const WmmseConfig& cfg,
                     const IlsSolver* custom_solver) {
    const Eigen::Index k_ue = H.rows();
    if (cfg.max_iterations < 0)
        throw std::invalid_argument("run_wmmse: negative iteration cap");
    if (!(cfg.tolerance > 0.0)) throw std::invalid_argument("run_wmmse: tolerance <= 0");
    if (!(cfg.power_budget > 0.0) || !(cfg.noise_power > 0.0))
        throw std::invalid_argument("run_wmmse: power budget and noise must be positive");
    if (cfg.ue_weights.size() != 0 && cfg.ue_weights.size() != k_ue)
        throw std::invalid_argument("run_wmmse: weight count does not match UEs");

    const Eigen::VectorXd u = cfg.ue_weights.size() > 0
                                  ? cfg.ue_weights
                                  : Eigen::VectorXd::Ones(k_ue);
    const bool quantized = custom_solver != nullptr || cfg.solver != SolverKind::Continuous;
    IlsSolver solver;
    if (custom_solver != nullptr) {
        solver = *custom_solver;
    } else if (cfg.solver == SolverKind::Sd) {
        auto ws = std::make_shared<SdWorkspace>();
        solver = [ws](const IlsProblem& prob) { return sphere_decode(prob, ws.get()); };
    } else if (cfg.solver == SolverKind::Ep) {
        const EpConfig ep_cfg = cfg.ep;
        solver = [ep_cfg](const IlsProblem& prob) { return ep_solve(prob, ep_cfg); };
    }
    if (quantized && cfg.quantizer.labels.empty())
        throw std::invalid_argument("run_wmmse: quantized solver needs a label alphabet");

    const double q = cfg.power_budget;
    const double n0 = cfg.noise_power;

    WmmseState st;
    st.P = wf_init(H, q, n0);
    if (quantized && cfg.max_iterations > 1) {
        // The rate acceptance rule freezes the quantized rounds at their first
        // accepted point, so raw Wiener-filter statistics would lock in before
        // maturing. Run the continuous loop first and start the quantized
        // rounds from its final state.
        WmmseConfig pre = cfg;
        pre.solver = SolverKind::Continuous;
        pre.max_iterations = cfg.max_iterations - 1;
        st.P = run_wmmse(H, pre).P;
    }
    st.beta.resize(k_ue);
    st.d.resize(k_ue);

    double n0_bar = n0 / std::sqrt(q / safe_trace(st.P));
    auto update_stats = [&]() {
        const Eigen::MatrixXcd hp = H * st.P;
        double f = 0.0;
        for (Eigen::Index k = 0; k < k_ue; ++k) {
            const double row_power = hp.row(k).squaredNorm();
            const double den = row_power + n0_bar;
            const std::complex<double> b = std::conj(hp(k, k)) / den;
            const double signal = std::norm(hp(k, k));
            const double sinr = signal / (den - signal);
            const double dk = std::max(u(k) * (1.0 + sinr) / kLn2, 1e-12);
            const double ek =
                std::norm(b) * den - 2.0 * (b * hp(k, k)).real() + 1.0;
            st.beta(k) = b;
            st.d(k) = dk;
            f += dk * ek - std::log2(dk);
        }
        return f;
    };

    double f = update_stats();
    st.objective_trace.push_back(f);
    st.rate_trace.push_back(rate_or_zero(H, st.P, q, n0, u));

    auto rate_of = [&](const Eigen::MatrixXcd& p) {
        return rate_or_zero(H, p, q, n0, u);
    };

    for (int n = 1; n <= cfg.max_iterations; ++n) {
        if (!quantized) {
            double omega = st.omega;
            st.P = continuous_p3(H, st.d, st.beta, q, &omega);
            st.omega = omega;
        } else {
            const Eigen::MatrixXcd inc = quantize(st.P, cfg.quantizer);
            Eigen::MatrixXcd last = inc;
            auto solve_at = [&](double omega) {
                const std::vector<const Eigen::MatrixXcd*> warm{&inc, &last};
                last = solve_p5(H, st.d, st.beta, omega, cfg.quantizer.labels, solver,
                                &warm);
                return last;
            };
            const P3Curve curve = p3_curve(H, st.d, st.beta);
            const std::function<double(double)> power_at = [&](double omega) {
                return curve.power(omega);
            };
            BisectOptions opts;
            opts.omega_floor = default_omega_floor(H, st.d, st.beta);
            const BisectResult bis =
                bisect_omega(solve_at, rate_of, q, &inc, opts, &power_at);
            st.P = bis.P;
            if (bis.omega >= 0.0) st.omega = bis.omega;
        }
        n0_bar = n0 / std::sqrt(q / safe_trace(st.P));
        const double f_next = update_stats();
        st.objective_trace.push_back(f_next);
        st.rate_trace.push_back(rate_of(st.P));
        st.iterations = n;
        if (std::abs(f_next - f) <= cfg.tolerance) {
            st.converged = true;
            f = f_next;
            break;
        }
        f = f_next;
    }
    return st;
}

}  // namespace qprec
