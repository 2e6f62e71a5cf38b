#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "qprec/ils.hpp"

namespace qprec {

struct EpConfig {
    int max_iterations = 10;
    double damping = 0.5;  // eta in [0, 1]; 1 freezes the state entirely
    double variance_floor = 1e-8;
    double cavity_variance_floor = 1e-8;
};

struct EpDiagnostics {
    std::uint64_t coordinate_updates = 0;
    std::uint64_t cavity_clamps = 0;  // negative cavity denominators
    int iterations = 0;
    bool posterior_pd = true;  // every posterior solve succeeded via Cholesky
    bool all_finite = true;    // no NaN/Inf appeared in any soft moment
};

struct GaussianPosterior {
    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma;
};

// Posterior of the Gaussian likelihood N(c; Gp, sigma2*I) against the diagonal
// Gaussian prior with natural parameters (gamma, lambda):
// Sigma = (G'G/sigma2 + diag(lambda))^-1, mu = Sigma*(G'c/sigma2 + gamma).
GaussianPosterior gaussian_posterior(const Eigen::MatrixXd& G, const Eigen::VectorXd& c,
                                     const Eigen::VectorXd& gamma,
                                     const Eigen::VectorXd& lambda, double sigma2);

// Per-coordinate cavity marginal: v_obs = Sigma_mm/(1 - Sigma_mm*lambda_m),
// p_obs = v_obs*(mu_m/Sigma_mm - gamma_m). A non-positive denominator clamps
// v_obs to cavity_floor and reports it through clamped.
std::pair<double, double> cavity(double mu_m, double sigma_mm, double gamma_m,
                                 double lambda_m, double cavity_floor,
                                 bool* clamped = nullptr);

// Mean and variance of the label distribution weighted by the cavity Gaussian,
// computed with max-exponent subtraction; variance floored.
std::pair<double, double> discrete_moments(double p_obs, double v_obs,
                                           const std::vector<double>& labels,
                                           double variance_floor);

// Damped natural-parameter update of one prior site; lambda clamped at 1e-12.
std::pair<double, double> refine_prior(double v, double p_hat, double v_obs,
                                       double p_obs, double eta, double prev_lambda,
                                       double prev_gamma);

// Residual-variance re-estimate over the real problem dimension, with the
// squared change of the two previous estimates as a precision-error term.
double estimate_variance(const Eigen::VectorXd& c, const Eigen::MatrixXd& G,
                         const Eigen::VectorXd& p_hat, double prev_sigma2,
                         double prevprev_sigma2, double variance_floor);

// Approximate ILS solve by expectation propagation; always returns a label vector.
// Stops early if the current hard decision already fits c to machine-zero
// residual (it cannot be improved). With damping exactly 1 the whole state,
// sigma2 included, stays frozen, so the result is the first posterior's decision.
Eigen::VectorXd ep_solve(const IlsProblem& prob, const EpConfig& cfg,
                         EpDiagnostics* diag = nullptr);

}  // namespace qprec
