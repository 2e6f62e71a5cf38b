#include "qprec/eval.hpp"

#include <cmath>
#include <stdexcept>

#include "qprec/baselines.hpp"
#include "qprec/quantizer.hpp"
#include "qprec/rng.hpp"

namespace qprec {

namespace {

// Derived-seed stream tags; renumbering would silently change every trial.
constexpr std::uint64_t kChannelStream = 1;
constexpr std::uint64_t kCsiStream = 2;
constexpr std::uint64_t kWeightStream = 3;

double noise_power_at(const ExperimentConfig& cfg, double snr_db) {
    return cfg.power_budget * std::pow(10.0, -snr_db / 10.0);
}

double rate_or_zero(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& p, double q,
                    double noise_power, const Eigen::VectorXd& weights) {
    if (p.size() == 0 || p.squaredNorm() <= 0.0) return 0.0;
    return sum_rate(h, p, q, noise_power, weights);
}

}  // namespace

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::InfiniteRes: return "infinite_res";
        case Scheme::Sd: return "sd";
        case Scheme::Ep: return "ep";
        case Scheme::HalfAware: return "half_aware";
        case Scheme::Heuristic: return "heuristic";
        case Scheme::Unaware: return "unaware";
    }
    throw std::invalid_argument("scheme_name: unknown scheme");
}

std::optional<Scheme> parse_scheme(const std::string& name) {
    if (name == "infinite_res") return Scheme::InfiniteRes;
    if (name == "sd") return Scheme::Sd;
    if (name == "ep") return Scheme::Ep;
    if (name == "half_aware") return Scheme::HalfAware;
    if (name == "heuristic") return Scheme::Heuristic;
    if (name == "unaware") return Scheme::Unaware;
    return std::nullopt;
}

TrialData draw_trial_data(const ExperimentConfig& cfg, double snr_db, int trial) {
    ChannelConfig ch = cfg.channel;
    ch.antennas = cfg.antennas;
    ch.users = cfg.users;

    TrialData td;
    Rng rng_channel(derive_seed(cfg.seed, static_cast<std::uint64_t>(trial), kChannelStream));
    td.channel = draw_channel(ch, rng_channel);

    td.h_known = td.channel.H;
    if (cfg.csi.mode != CsiMode::Perfect) {
        Rng rng_csi(derive_seed(cfg.seed, static_cast<std::uint64_t>(trial), kCsiStream));
        const double q_ul =
            cfg.csi.uplink_power > 0.0 ? cfg.csi.uplink_power : cfg.power_budget;
        const double noise_ul = cfg.csi.uplink_noise > 0.0 ? cfg.csi.uplink_noise
                                                           : noise_power_at(cfg, snr_db);
        for (Eigen::Index k = 0; k < td.h_known.rows(); ++k)
            td.h_known.row(k) = ls_estimate(td.channel.H.row(k).transpose(), q_ul,
                                            cfg.csi.pilot_length, noise_ul, rng_csi)
                                    .transpose();
        if (cfg.csi.mode == CsiMode::LsPlusAqnm)
            td.h_known = aqnm_quantize_csi(td.h_known, cfg.csi.csi_bits, rng_csi);
    }

    Rng rng_w(derive_seed(cfg.seed, static_cast<std::uint64_t>(trial), kWeightStream));
    td.weights = Eigen::VectorXd::Ones(cfg.users);
    switch (cfg.weight_mode) {
        case WeightMode::Uniform:
            break;
        case WeightMode::Fixed: {
            if (static_cast<int>(cfg.weights.size()) != cfg.users)
                throw std::invalid_argument("draw_trial_data: fixed weight count mismatch");
            for (int k = 0; k < cfg.users; ++k) td.weights(k) = cfg.weights[k];
            break;
        }
        case WeightMode::RandomOneTwo: {
            for (int k = 0; k < cfg.users; ++k)
                td.weights(k) = rng_w.uniform() < 0.5 ? 1.0 : 2.0;
            td.weights *= static_cast<double>(cfg.users) / td.weights.sum();
            break;
        }
    }
    return td;
}

TrialResult simulate_trial(const ExperimentConfig& cfg, Scheme scheme, double snr_db,
                           int trial, WmmseState* state_out,
                           Eigen::MatrixXcd* precoder_out) {
    const double q = cfg.power_budget;
    const double n0 = noise_power_at(cfg, snr_db);
    const TrialData td = draw_trial_data(cfg, snr_db, trial);

    const double per_dim_variance = q / (2.0 * cfg.users * cfg.antennas);
    const QuantizerSpec spec =
        build_quantizer(cfg.levels, optimal_step_size(cfg.levels, per_dim_variance));

    WmmseConfig wc;
    wc.max_iterations = cfg.wmmse_max_iterations;
    wc.tolerance = cfg.wmmse_tolerance;
    wc.ue_weights = td.weights;
    wc.power_budget = q;
    wc.noise_power = n0;
    wc.quantizer = spec;
    wc.ep = cfg.ep;

    WmmseState st;
    Eigen::MatrixXcd p;
    switch (scheme) {
        case Scheme::InfiniteRes: {
            wc.solver = SolverKind::Continuous;
            st = run_wmmse(td.h_known, wc);
            p = st.P;
            break;
        }
        case Scheme::Sd: {
            wc.solver = SolverKind::Sd;
            st = run_wmmse(td.h_known, wc);
            p = st.P;
            break;
        }
        case Scheme::Ep: {
            wc.solver = SolverKind::Ep;
            st = run_wmmse(td.h_known, wc);
            p = st.P;
            break;
        }
        case Scheme::HalfAware: {
            p = half_aware_precoding(td.h_known, wc, spec, &st);
            break;
        }
        case Scheme::Heuristic: {
            wc.solver = SolverKind::Continuous;
            st = run_wmmse(td.h_known, wc);
            p = heuristic_refine(td.h_known, st.P, spec, q, n0, &td.weights);
            break;
        }
        case Scheme::Unaware: {
            p = unaware_precoding(td.h_known, wc, spec, &st);
            break;
        }
    }

    TrialResult out;
    out.rate = rate_or_zero(td.channel.H, p, q, n0, td.weights);
    out.converged = st.converged;
    out.iterations = st.iterations;
    if (state_out != nullptr) *state_out = std::move(st);
    if (precoder_out != nullptr) *precoder_out = std::move(p);
    return out;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
    if (cfg.trials < 1) throw std::invalid_argument("run_experiment: trials < 1");
    if (cfg.schemes.empty() || cfg.snr_grid_db.empty())
        throw std::invalid_argument("run_experiment: empty scheme or SNR grid");
    if (cfg.users < 1 || cfg.antennas < cfg.users)
        throw std::invalid_argument("run_experiment: need antennas >= users >= 1");
    if (cfg.levels < 2) throw std::invalid_argument("run_experiment: levels < 2");

    std::vector<ResultRow> rows;
    rows.reserve(cfg.schemes.size() * cfg.snr_grid_db.size());
    for (Scheme scheme : cfg.schemes) {
        for (double snr : cfg.snr_grid_db) {
            ResultRow row;
            row.scheme = scheme_name(scheme);
            row.snr_db = snr;
            double sum = 0.0;
            double sum_sq = 0.0;
            double iter_sum = 0.0;
            int ok = 0;
            int converged = 0;
            for (int t = 0; t < cfg.trials; ++t) {
                TrialResult tr;
                try {
                    tr = simulate_trial(cfg, scheme, snr, t);
                } catch (const std::exception&) {
                    ++row.failed_trials;
                    continue;
                }
                ++ok;
                sum += tr.rate;
                sum_sq += tr.rate * tr.rate;
                iter_sum += tr.iterations;
                if (tr.converged) ++converged;
            }
            row.trials = ok;
            if (ok > 0) {
                row.mean_sum_rate = sum / ok;
                row.converged_fraction = static_cast<double>(converged) / ok;
                row.mean_iterations = iter_sum / ok;
            }
            if (ok > 1) {
                const double var =
                    std::max(sum_sq - sum * sum / ok, 0.0) / (ok - 1);
                row.std_error = std::sqrt(var / ok);
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::pair<long long, long long> fronthaul_capacity(long long antennas, long long users,
                                                   long long symbols_per_block,
                                                   long long eta_bits,
                                                   long long n_precoding,
                                                   long long n_oversampling) {
    if (antennas < 1 || users < 1 || symbols_per_block < 0 || eta_bits < 0 ||
        n_precoding < 0 || n_oversampling < 0)
        throw std::invalid_argument("fronthaul_capacity: invalid sizes");
    const long long separate =
        2 * antennas * users * n_precoding + symbols_per_block * users * eta_bits;
    const long long joint = antennas * symbols_per_block * eta_bits * n_oversampling;
    return {separate, joint};
}

}  // namespace qprec
