#include "qprec/ep.hpp"

#include <cmath>
#include <stdexcept>

namespace qprec {

namespace {

int nearest_index(double x, const std::vector<double>& labels) {
    int best = 0;
    double best_dist = std::abs(x - labels[0]);
    for (int l = 1; l < static_cast<int>(labels.size()); ++l) {
        const double dist = std::abs(x - labels[l]);
        if (dist < best_dist) {
            best_dist = dist;
            best = l;
        }
    }
    return best;
}

}  // namespace

GaussianPosterior gaussian_posterior(const Eigen::MatrixXd& G, const Eigen::VectorXd& c,
                                     const Eigen::VectorXd& gamma,
                                     const Eigen::VectorXd& lambda, double sigma2) {
    if (!(sigma2 > 0.0))
        throw std::invalid_argument("gaussian_posterior: sigma2 must be positive");
    Eigen::MatrixXd a = (G.transpose() * G) / sigma2;
    a.diagonal() += lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("gaussian_posterior: precision matrix not PD");
    GaussianPosterior post;
    post.sigma = llt.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
    post.sigma = 0.5 * (post.sigma + post.sigma.transpose().eval());
    post.mu = llt.solve(G.transpose() * c / sigma2 + gamma);
    return post;
}

std::pair<double, double> cavity(double mu_m, double sigma_mm, double gamma_m,
                                 double lambda_m, double cavity_floor, bool* clamped) {
    const double den = 1.0 - sigma_mm * lambda_m;
    double v_obs;
    bool hit = false;
    if (den > 0.0) {
        v_obs = sigma_mm / den;
    } else {
        v_obs = cavity_floor;
        hit = true;
    }
    if (clamped != nullptr) *clamped = hit;
    const double p_obs = v_obs * (mu_m / sigma_mm - gamma_m);
    return {p_obs, v_obs};
}

std::pair<double, double> discrete_moments(double p_obs, double v_obs,
                                           const std::vector<double>& labels,
                                           double variance_floor) {
    if (labels.empty()) throw std::invalid_argument("discrete_moments: empty alphabet");
    if (!(v_obs > 0.0)) throw std::invalid_argument("discrete_moments: v_obs <= 0");
    const int nl = static_cast<int>(labels.size());
    double max_exp = -std::numeric_limits<double>::infinity();
    std::vector<double> exps(nl);
    for (int l = 0; l < nl; ++l) {
        const double diff = labels[l] - p_obs;
        exps[l] = -diff * diff / (2.0 * v_obs);
        max_exp = std::max(max_exp, exps[l]);
    }
    double total = 0.0;
    double mean = 0.0;
    for (int l = 0; l < nl; ++l) {
        const double w = std::exp(exps[l] - max_exp);
        total += w;
        mean += w * labels[l];
    }
    mean /= total;
    double var = 0.0;
    for (int l = 0; l < nl; ++l) {
        const double w = std::exp(exps[l] - max_exp);
        const double diff = labels[l] - mean;
        var += w * diff * diff;
    }
    var = std::max(var / total, variance_floor);
    return {mean, var};
}

std::pair<double, double> refine_prior(double v, double p_hat, double v_obs,
                                       double p_obs, double eta, double prev_lambda,
                                       double prev_gamma) {
    const double raw_lambda = 1.0 / v - 1.0 / v_obs;
    const double raw_gamma = p_hat / v - p_obs / v_obs;
    const double lambda =
        std::max((1.0 - eta) * raw_lambda + eta * prev_lambda, 1e-12);
    const double gamma = (1.0 - eta) * raw_gamma + eta * prev_gamma;
    return {lambda, gamma};
}

double estimate_variance(const Eigen::VectorXd& c, const Eigen::MatrixXd& G,
                         const Eigen::VectorXd& p_hat, double prev_sigma2,
                         double prevprev_sigma2, double variance_floor) {
    const double drift = prev_sigma2 - prevprev_sigma2;
    const double residual = (c - G * p_hat).squaredNorm();
    return std::max((residual + drift * drift) / static_cast<double>(c.size()),
                    variance_floor);
}

Eigen::VectorXd ep_solve(const IlsProblem& prob, const EpConfig& cfg,
                         EpDiagnostics* diag) {
    const int n = static_cast<int>(prob.G.rows());
    if (prob.G.cols() != n) throw std::invalid_argument("ep_solve: G must be square");
    if (prob.c.size() != n) throw std::invalid_argument("ep_solve: c size mismatch");
    if (prob.labels.empty()) throw std::invalid_argument("ep_solve: empty alphabet");
    if (!(cfg.damping >= 0.0 && cfg.damping <= 1.0))
        throw std::invalid_argument("ep_solve: damping outside [0, 1]");
    if (cfg.max_iterations < 1)
        throw std::invalid_argument("ep_solve: need at least one iteration");
    if (!(cfg.variance_floor > 0.0) || !(cfg.cavity_variance_floor > 0.0))
        throw std::invalid_argument("ep_solve: floors must be positive");

    EpDiagnostics local;
    if (diag == nullptr) diag = &local;
    *diag = EpDiagnostics{};

    const double eta = cfg.damping;
    Eigen::VectorXd lambda = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd gamma = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd p_hat = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd v_soft = Eigen::VectorXd::Ones(n);
    double sigma2 = 1.0;
    double sigma2_prev = 1.0;

    auto hard_decision = [&]() {
        Eigen::VectorXd out(n);
        for (int m = 0; m < n; ++m)
            out(m) = prob.labels[nearest_index(p_hat(m), prob.labels)];
        return out;
    };

    // Residual this small cannot be beaten by any other candidate; stop.
    const double exact_fit_gate =
        static_cast<double>(n) * cfg.variance_floor * 10.0;

    for (int t = 1; t <= cfg.max_iterations; ++t) {
        GaussianPosterior post;
        try {
            post = gaussian_posterior(prob.G, prob.c, gamma, lambda, sigma2);
        } catch (const std::runtime_error&) {
            diag->posterior_pd = false;
            break;
        }
        std::vector<double> p_obs_all(n), v_obs_all(n);
        for (int m = 0; m < n; ++m) {
            bool clamped = false;
            const auto [p_obs, v_obs] =
                cavity(post.mu(m), post.sigma(m, m), gamma(m), lambda(m),
                       cfg.cavity_variance_floor, &clamped);
            if (clamped) ++diag->cavity_clamps;
            const auto [mean, var] =
                discrete_moments(p_obs, v_obs, prob.labels, cfg.variance_floor);
            p_obs_all[m] = p_obs;
            v_obs_all[m] = v_obs;
            p_hat(m) = mean;
            v_soft(m) = var;
            ++diag->coordinate_updates;
            if (!std::isfinite(mean) || !std::isfinite(var)) diag->all_finite = false;
        }
        diag->iterations = t;
        if (!diag->all_finite) break;

        const Eigen::VectorXd hard = hard_decision();
        if ((prob.c - prob.G * hard).squaredNorm() <= exact_fit_gate) return hard;

        for (int m = 0; m < n; ++m) {
            const auto [lam, gam] =
                refine_prior(v_soft(m), p_hat(m), v_obs_all[m], p_obs_all[m], eta,
                             lambda(m), gamma(m));
            lambda(m) = lam;
            gamma(m) = gam;
        }
        if (eta < 1.0) {
            const double next = estimate_variance(prob.c, prob.G, p_hat, sigma2,
                                                  sigma2_prev, cfg.variance_floor);
            sigma2_prev = sigma2;
            sigma2 = next;
        }
    }
    return hard_decision();
}

}  // namespace qprec
