#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "qprec/ep.hpp"
#include "qprec/ils.hpp"
#include "qprec/quantizer.hpp"

namespace qprec {

enum class SolverKind { Continuous, Sd, Ep };

struct WmmseConfig {
    int max_iterations = 50;
    double tolerance = 1e-4;  // on |f_n - f_{n-1}|
    SolverKind solver = SolverKind::Sd;
    Eigen::VectorXd ue_weights;  // empty means uniform
    double power_budget = 1.0;   // q
    double noise_power = 1.0;    // N0
    QuantizerSpec quantizer;     // alphabet for the sd/ep solvers
    EpConfig ep;
};

struct WmmseState {
    Eigen::MatrixXcd P;  // antennas x users
    Eigen::VectorXcd beta;
    Eigen::VectorXd d;
    double omega = 0.0;
    std::vector<double> objective_trace;  // f per iteration, starting at init
    std::vector<double> rate_trace;       // matching sum-rate evaluations
    bool converged = false;
    int iterations = 0;
};

using IlsSolver = std::function<Eigen::VectorXd(const IlsProblem&)>;

// Wiener-filter initialization H'(HH' + (K*N0/q) I)^-1.
Eigen::MatrixXcd wf_init(const Eigen::MatrixXcd& H, double q, double noise_power);

double ue_sinr(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& P, int k,
               double noise_power);

// MSE-optimal scalar receiver gain (h_k' p_k)* / (sum_i |h_k' p_i|^2 + noise).
std::complex<double> receiver_gain(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& P,
                                   int k, double noise_power);

// Rate-matching MSE weight u_k * (1 + SINR_k)/ln 2.
double mse_weight(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& P, int k,
                  double noise_power, double ue_weight);

// Detection MSE |beta|^2 (sum_i |h_k' p_i|^2 + noise) - 2 Re(beta h_k' p_k) + 1.
double ue_mse(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& P,
              std::complex<double> beta_k, int k, double noise_power);

// Shared reduction of the fixed-(beta, d, omega) precoding subproblem: one real
// Cholesky factor G for all UEs plus per-UE targets c_i (columns).
struct IlsReduction {
    Eigen::MatrixXd G;  // 2M x 2M upper triangular
    Eigen::MatrixXd c;  // 2M x K
};
IlsReduction reduce_all(const Eigen::MatrixXcd& H, const Eigen::VectorXd& d,
                        const Eigen::VectorXcd& beta, double omega);

IlsProblem reduce_to_ils(const Eigen::MatrixXcd& H, const Eigen::VectorXd& d,
                         const Eigen::VectorXcd& beta, double omega, int ue,
                         const std::vector<double>& labels);

// Stack a real label vector [Re; Im] back into a complex column.
Eigen::VectorXcd real_to_complex(const Eigen::VectorXd& p_real);

// Solve all K per-UE ILS subproblems at one multiplier value. Optional warm-start
// matrices must be alphabet-feasible; the best of them per UE seeds the search
// radius and stands in when nothing beats it, which changes cost, never the
// achieved objective.
Eigen::MatrixXcd solve_p5(const Eigen::MatrixXcd& H, const Eigen::VectorXd& d,
                          const Eigen::VectorXcd& beta, double omega,
                          const std::vector<double>& labels, const IlsSolver& solver,
                          const std::vector<const Eigen::MatrixXcd*>* warm_starts = nullptr);

// Spectral form of the continuous relaxation of the fixed-(beta, d) subproblem,
// P(omega) = (H'D'DH + omega I)^-1 F: one eigendecomposition up front makes
// power and precoder evaluations at any omega cheap. Rows of phi along
// numerically null eigendirections are zeroed so the omega = 0 endpoint stays
// finite.
struct P3Curve {
    Eigen::MatrixXcd basis;     // eigenvectors of H'D'DH
    Eigen::VectorXd lambda;     // eigenvalues clamped at zero
    Eigen::MatrixXcd phi;       // basis' * F
    Eigen::VectorXd row_power;  // squared norms of phi rows

    double power(double omega) const;        // tr(P(omega) P(omega)')
    double power_slope(double omega) const;  // d/d omega of the above
    Eigen::MatrixXcd precoder(double omega) const;
};
P3Curve p3_curve(const Eigen::MatrixXcd& H, const Eigen::VectorXd& d,
                 const Eigen::VectorXcd& beta);

struct BisectOptions {
    double power_tol_rel = 1e-3;  // on |tr(PP') - q| relative to q
    double omega_tol = 1e-8;
    int max_evaluations = 100;
    // Smallest multiplier worth evaluating. Below a small fraction of the
    // quadratic form's spectral scale the out-of-signal subspace degenerates:
    // exact enumeration cost grows exponentially while the saturated solutions
    // it yields lose sum rate, so the rate acceptance rule never keeps them.
    // When the power crossing falls below the floor the bracket walk is cut
    // off there and the leftover evaluation budget goes to a geometric sweep
    // upward from the floor that stops once the rate stalls for five rungs.
    // 0 disables the floor.
    double omega_floor = 0.0;
};

struct BisectResult {
    double omega = 0.0;
    Eigen::MatrixXcd P;
    int evaluations = 0;
};

// Conditioning floor used by the quantized solver paths: a small fraction of the
// largest diagonal entry of H'D'DH. See BisectOptions::omega_floor.
double default_omega_floor(const Eigen::MatrixXcd& H, const Eigen::VectorXd& d,
                           const Eigen::VectorXcd& beta);

// Bisection on the power multiplier: expands the bracket [0, 1] by doubling until
// the power at omega_max drops to q (cap 2^30), then bisects. Every walked omega
// gets a solve_at candidate offered to the incumbent under the rate acceptance
// rule (rate_of must be scale invariant); the incumbent is returned. Stops on
// the power tolerance, the bracket width, or the evaluation cap. The power
// steering the walk comes from power_at when given (the continuous relaxation's
// smooth curve, so the walk converges on the real crossing instead of chasing
// the solver's step function) and otherwise from the solved candidates
// themselves. A bracket collapsing under the conditioning floor triggers the
// upward sweep described at BisectOptions::omega_floor instead.
BisectResult bisect_omega(const std::function<Eigen::MatrixXcd(double)>& solve_at,
                          const std::function<double(const Eigen::MatrixXcd&)>& rate_of,
                          double power_budget,
                          const Eigen::MatrixXcd* incumbent = nullptr,
                          const BisectOptions& opts = {},
                          const std::function<double(double)>* power_at = nullptr);

// Sum rate after rescaling P to the power budget: alpha = sqrt(q/tr(PP')),
// rate = sum_k u_k log2(1 + SINR_k(alpha P, N0)). Rejects P = 0.
double sum_rate(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& P, double q,
                double noise_power, const Eigen::VectorXd& weights);

// Block-coordinate WMMSE loop. The subproblem solver comes from cfg.solver;
// tests may inject a custom ILS solver. Quantized solvers start from the
// converged continuous loop's state rather than the raw Wiener filter: the
// rate acceptance rule keeps the first accepted lattice point unless a later
// candidate strictly improves, so the alphabet-constrained rounds need mature
// receiver statistics to start from.
WmmseState run_wmmse(const Eigen::MatrixXcd& H, const WmmseConfig& cfg,
                     const IlsSolver* custom_solver = nullptr);

}  // namespace qprec
