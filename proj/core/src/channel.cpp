#include "qprec/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace qprec {

Eigen::VectorXcd ula_response(double angle, int antennas) {
    Eigen::VectorXcd a(antennas);
    const double psi = M_PI * std::sin(angle);
    for (int m = 0; m < antennas; ++m)
        a(m) = std::polar(1.0, psi * m);
    return a;
}

double path_loss_db(double d) {
    if (!(d > 0.0)) throw std::invalid_argument("path_loss_db: distance must be positive");
    return -37.5 - 22.0 * std::log10(d);
}

namespace {

// Gaussian local scattering: R(m,n) = exp(j pi (m-n) sin(angle))
//                                   * exp(-0.5 (scatter_std pi (m-n) cos(angle))^2).
Eigen::MatrixXcd scattering_covariance(double angle, double scatter_std, int antennas) {
    Eigen::MatrixXcd r(antennas, antennas);
    for (int m = 0; m < antennas; ++m) {
        for (int n = 0; n < antennas; ++n) {
            const double delta = M_PI * (m - n);
            const double phase = delta * std::sin(angle);
            const double spread = scatter_std * delta * std::cos(angle);
            r(m, n) = std::polar(std::exp(-0.5 * spread * spread), phase);
        }
    }
    return r;
}

Eigen::MatrixXcd matrix_sqrt_psd(const Eigen::MatrixXcd& r) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
           es.eigenvectors().adjoint();
}

}  // namespace

ChannelMatrix draw_channel(const ChannelConfig& cfg, Rng& rng) {
    if (cfg.antennas < cfg.users || cfg.users < 1)
        throw std::invalid_argument("draw_channel: need antennas >= users >= 1");
    if (cfg.rician_factor < 0.0)
        throw std::invalid_argument("draw_channel: negative Rician factor");
    const int m_ant = cfg.antennas;
    const int k_ue = cfg.users;
    ChannelMatrix ch;
    ch.H.resize(k_ue, m_ant);
    ch.gain.resize(k_ue);
    ch.angle.resize(k_ue);
    ch.distance.resize(k_ue);

    const double kappa = cfg.rician_factor;
    const double los_scale = std::sqrt(kappa / (kappa + 1.0));
    const double nlos_scale = std::sqrt(1.0 / (kappa + 1.0));

    for (int k = 0; k < k_ue; ++k) {
        ch.angle(k) = rng.uniform(cfg.angle_min, cfg.angle_max);
        ch.distance(k) = rng.uniform(cfg.distance_min, cfg.distance_max);
        ch.gain(k) = cfg.path_gain == PathGainModel::Umi3gpp
                         ? std::pow(10.0, path_loss_db(ch.distance(k)) / 10.0)
                         : 1.0;
        Eigen::VectorXcd nlos(m_ant);
        for (int m = 0; m < m_ant; ++m)
            nlos(m) = rng.cnormal();
        if (cfg.nlos == NlosModel::CorrelatedStub) {
            nlos = matrix_sqrt_psd(scattering_covariance(ch.angle(k), cfg.scatter_std,
                                                         m_ant)) *
                   nlos;
        }
        ch.H.row(k) = std::sqrt(ch.gain(k)) *
                      (los_scale * ula_response(ch.angle(k), m_ant) + nlos_scale * nlos)
                          .transpose();
    }
    return ch;
}

Eigen::VectorXcd ls_estimate(const Eigen::VectorXcd& h_true, double uplink_power,
                             int pilot_length, double uplink_noise, Rng& rng) {
    if (pilot_length < 1)
        throw std::invalid_argument("ls_estimate: pilot_length must be >= 1");
    if (!(uplink_power > 0.0))
        throw std::invalid_argument("ls_estimate: uplink power must be positive");
    // Error variance sigma2_u/(q_U tau_p) per entry; realized through the pilot
    // observation noise with per-entry variance tau_p*sigma2_u.
    const double denom = std::sqrt(uplink_power) * pilot_length;
    Eigen::VectorXcd out(h_true.size());
    const double noise_std = std::sqrt(pilot_length * uplink_noise);
    for (Eigen::Index m = 0; m < h_true.size(); ++m) {
        const std::complex<double> observed =
            denom * h_true(m) + noise_std * rng.cnormal();
        out(m) = observed / denom;
    }
    return out;
}

double aqnm_eta(int bits) {
    if (bits < 1) throw std::invalid_argument("aqnm_eta: bits must be >= 1");
    switch (bits) {
        case 1: return 0.3634;
        case 2: return 0.1175;
        case 3: return 0.03454;
        case 4: return 0.009497;
        case 5: return 0.002499;
        default:
            return (M_PI * std::sqrt(3.0) / 2.0) * std::pow(2.0, -2.0 * bits);
    }
}

Eigen::MatrixXcd apply_aqnm(const Eigen::MatrixXcd& h_hat, double eta, Rng& rng) {
    Eigen::MatrixXcd out(h_hat.rows(), h_hat.cols());
    for (Eigen::Index k = 0; k < h_hat.rows(); ++k) {
        const double row_power =
            h_hat.row(k).squaredNorm() / static_cast<double>(h_hat.cols());
        const double noise_std = std::sqrt(eta * (1.0 - eta) * row_power);
        for (Eigen::Index m = 0; m < h_hat.cols(); ++m)
            out(k, m) = (1.0 - eta) * h_hat(k, m) + noise_std * rng.cnormal();
    }
    return out;
}

Eigen::MatrixXcd aqnm_quantize_csi(const Eigen::MatrixXcd& h_hat, int bits, Rng& rng) {
    return apply_aqnm(h_hat, aqnm_eta(bits), rng);
}

}  // namespace qprec
