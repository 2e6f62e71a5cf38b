#pragma once

#include <Eigen/Dense>

#include "qprec/rng.hpp"

namespace qprec {

enum class NlosModel { Uncorrelated, CorrelatedStub };
enum class PathGainModel { Unit, Umi3gpp };

struct ChannelConfig {
    int antennas = 16;  // M
    int users = 4;      // K
    double rician_factor = 10.0;
    double angle_min = -M_PI / 3;
    double angle_max = M_PI / 3;
    double distance_min = 10.0;   // meters
    double distance_max = 200.0;  // meters
    NlosModel nlos = NlosModel::Uncorrelated;
    PathGainModel path_gain = PathGainModel::Unit;
    double scatter_std = 10.0 * M_PI / 180.0;  // correlated-stub angular spread (radians)
};

struct ChannelMatrix {
    Eigen::MatrixXcd H;        // users x antennas, row k is UE k's channel
    Eigen::VectorXd gain;      // linear path gain rho_k baked into each row
    Eigen::VectorXd angle;     // azimuth per UE (radians)
    Eigen::VectorXd distance;  // meters
};

enum class CsiMode { Perfect, LsEstimate, LsPlusAqnm };

struct CsiModel {
    CsiMode mode = CsiMode::Perfect;
    int pilot_length = 4;       // tau_p
    double uplink_power = 0.0;  // q_U; 0 means "track the downlink power budget"
    double uplink_noise = 0.0;  // sigma^2_U; 0 means "track the downlink noise power"
    int csi_bits = 3;           // B_H for the AQNM stage
};

// Half-wavelength ULA response: element m is exp(j*m*pi*sin(angle)).
Eigen::VectorXcd ula_response(double angle, int antennas);

// Urban-microcell path loss in dB at distance d meters.
double path_loss_db(double d);

// Rician fading draw: row k = sqrt(rho_k) * (sqrt(kappa/(kappa+1)) a(angle_k)
// + sqrt(1/(kappa+1)) h_nlos). Draw order per UE: angle, distance, NLoS entries.
ChannelMatrix draw_channel(const ChannelConfig& cfg, Rng& rng);

// Least-squares pilot estimate. The pilot observation is y = sqrt(q_U)*tau_p*h + n
// with n the receive noise projected onto the UE's length-tau_p unit-power pilot
// sequence (||phi||^2 = tau_p), so each entry of n is CN(0, tau_p*sigma2_u) and
// h_hat = y/(sqrt(q_U)*tau_p) = h + error with per-entry error variance
// sigma2_u/(q_U*tau_p).
Eigen::VectorXcd ls_estimate(const Eigen::VectorXcd& h_true, double uplink_power,
                             int pilot_length, double uplink_noise, Rng& rng);

// AQNM distortion factor: tabulated for 1..5 bits, closed form (pi*sqrt(3)/2)*2^(-2B)
// beyond that.
double aqnm_eta(int bits);

// Additive quantization noise model: (1-eta)*H + N_Q with per-entry noise variance
// eta*(1-eta)*mean|row|^2, the row mean power standing in for E|h_hat|^2.
Eigen::MatrixXcd apply_aqnm(const Eigen::MatrixXcd& h_hat, double eta, Rng& rng);
Eigen::MatrixXcd aqnm_quantize_csi(const Eigen::MatrixXcd& h_hat, int bits, Rng& rng);

}  // namespace qprec
