#pragma once

#include <Eigen/Dense>

#include "qprec/quantizer.hpp"
#include "qprec/wmmse.hpp"

namespace qprec {

// Exact continuous solution of the fixed-(beta, d) precoding subproblem:
// P(omega) = (H'D*DH + omega I)^-1 H'D* sqrt(diag(d)) with omega >= 0 picked by
// bisection so tr(PP') <= q holds with complementary slackness.
Eigen::MatrixXcd continuous_p3(const Eigen::MatrixXcd& H, const Eigen::VectorXd& d,
                               const Eigen::VectorXcd& beta, double q,
                               double* omega_out = nullptr);

// Converged continuous WMMSE followed by element-wise quantization.
Eigen::MatrixXcd unaware_precoding(const Eigen::MatrixXcd& H, const WmmseConfig& cfg,
                                   const QuantizerSpec& spec,
                                   WmmseState* state_out = nullptr);

// Continuous WMMSE for all but the last iteration, then one exact quantized
// subproblem solve reusing the continuous receiver gains and MSE weights.
Eigen::MatrixXcd half_aware_precoding(const Eigen::MatrixXcd& H, const WmmseConfig& cfg,
                                      const QuantizerSpec& spec,
                                      WmmseState* state_out = nullptr);

// Interference UE k's precoding column inflicts on the other UEs:
// sum over i != k of |[H P_scaled]_{i,k}|^2.
double generated_interference(const Eigen::MatrixXcd& H,
                              const Eigen::MatrixXcd& P_scaled, int k);

// Entry-wise improvement pass over quantize(P_unquantized): UE columns visited by
// decreasing generated interference (ties by ascending UE index), rows by
// ascending antenna index; each entry is replaced by the best of the four
// {nearest, second nearest} real/imaginary label combinations of the unquantized
// entry under the rescaled sum rate, keeping the incumbent on ties.
Eigen::MatrixXcd heuristic_refine(const Eigen::MatrixXcd& H,
                                  const Eigen::MatrixXcd& P_unquantized,
                                  const QuantizerSpec& spec, double q,
                                  double noise_power,
                                  const Eigen::VectorXd* weights = nullptr);

}  // namespace qprec
