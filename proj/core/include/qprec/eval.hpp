#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qprec/channel.hpp"
#include "qprec/ep.hpp"
#include "qprec/wmmse.hpp"

namespace qprec {

enum class Scheme { InfiniteRes, Sd, Ep, HalfAware, Heuristic, Unaware };

std::string scheme_name(Scheme s);
std::optional<Scheme> parse_scheme(const std::string& name);

enum class WeightMode { Uniform, Fixed, RandomOneTwo };

struct ExperimentConfig {
    std::vector<Scheme> schemes{Scheme::Sd};
    std::vector<double> snr_grid_db{25.0};
    int antennas = 16;
    int users = 4;
    int levels = 8;
    int trials = 100;
    std::uint64_t seed = 12345;
    double power_budget = 1.0;
    double carrier_ghz = 3.0;  // metadata; nothing downstream depends on it
    ChannelConfig channel;     // antennas/users above take precedence
    CsiModel csi;
    int wmmse_max_iterations = 50;
    double wmmse_tolerance = 1e-4;
    EpConfig ep;
    WeightMode weight_mode = WeightMode::Uniform;
    std::vector<double> weights;  // used by WeightMode::Fixed
};

struct ResultRow {
    std::string scheme;
    double snr_db = 0.0;
    double mean_sum_rate = 0.0;
    double std_error = 0.0;
    int trials = 0;
    double converged_fraction = 0.0;
    double mean_iterations = 0.0;
    int failed_trials = 0;  // not part of the CSV schema; surfaced via warnings
};

struct TrialResult {
    double rate = 0.0;
    bool converged = false;
    int iterations = 0;
};

// Per-trial channel/CSI/weight draws come from seeds derived as
// (seed, trial, stream), so trial t is identical no matter how many trials run
// or which scheme/SNR consumes it.
struct TrialData {
    ChannelMatrix channel;       // true channel
    Eigen::MatrixXcd h_known;    // what the optimizer sees under the CSI model
    Eigen::VectorXd weights;
};
TrialData draw_trial_data(const ExperimentConfig& cfg, double snr_db, int trial);

TrialResult simulate_trial(const ExperimentConfig& cfg, Scheme scheme, double snr_db,
                           int trial, WmmseState* state_out = nullptr,
                           Eigen::MatrixXcd* precoder_out = nullptr);

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

// Fronthaul bits per coherence block: separate precoding/data transfer
// (2*M*K*n_precoding + tau_s*K*eta_bits) vs joint precoded-signal transfer
// (M*tau_s*eta_bits*n_oversampling).
std::pair<long long, long long> fronthaul_capacity(long long antennas, long long users,
                                                   long long symbols_per_block,
                                                   long long eta_bits,
                                                   long long n_precoding,
                                                   long long n_oversampling);

}  // namespace qprec
