#include "qprec/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qprec/ep.hpp"
#include "qprec/quantizer.hpp"
#include "qprec/rng.hpp"
#include "qprec/sd.hpp"

namespace qprec {
namespace {

constexpr std::uint64_t kFactorStream = 11;
constexpr std::uint64_t kPointStream = 12;
constexpr std::uint64_t kNoiseStream = 13;

}  // namespace

IlsProblem oracle_problem(int index) {
    if (index < 0 || index >= kOracleInstances)
        throw std::out_of_range("oracle_problem: index outside the frozen set");

    IlsProblem prob;
    const QuantizerSpec spec =
        build_quantizer(kOracleLevels, optimal_step_size(kOracleLevels, 1.0));
    prob.labels = spec.labels;

    Rng rng_g(derive_seed(kOracleSeed, kFactorStream, static_cast<std::uint64_t>(index)));
    prob.G = Eigen::MatrixXd::Zero(kOracleDim, kOracleDim);
    for (int m = 0; m < kOracleDim; ++m) {
        prob.G(m, m) = rng_g.uniform(0.8, 1.6);
        for (int j = m + 1; j < kOracleDim; ++j) prob.G(m, j) = 0.25 * rng_g.normal();
    }

    Rng rng_p(derive_seed(kOracleSeed, kPointStream, static_cast<std::uint64_t>(index)));
    Eigen::VectorXd p0(kOracleDim);
    for (int m = 0; m < kOracleDim; ++m)
        p0(m) = prob.labels[rng_p.next_u64() % prob.labels.size()];

    Rng rng_n(derive_seed(kOracleSeed, kNoiseStream, static_cast<std::uint64_t>(index)));
    Eigen::VectorXd noise(kOracleDim);
    for (int m = 0; m < kOracleDim; ++m) noise(m) = 0.3 * rng_n.normal();

    prob.c = prob.G * p0 + noise;
    return prob;
}

SdExactnessReport run_sd_exactness_suite() {
    SdExactnessReport rep;
    SdWorkspace ws;
    for (int i = 0; i < kOracleInstances; ++i) {
        const IlsProblem prob = oracle_problem(i);
        const Eigen::VectorXd by_sphere = sphere_decode(prob, &ws);
        const Eigen::VectorXd by_brute = brute_force_ils(prob);
        const double gap = std::abs(ils_objective(prob, by_sphere) -
                                    ils_objective(prob, by_brute));
        rep.max_objective_gap = std::max(rep.max_objective_gap, gap);
        if (gap > 1e-12) ++rep.objective_mismatches;
        // Labels are shared exact doubles, so minimizer equality is exact too.
        if (!(by_sphere.array() == by_brute.array()).all()) ++rep.minimizer_mismatches;
        ++rep.instances;
    }
    rep.passed = rep.objective_mismatches == 0 && rep.minimizer_mismatches == 0;
    return rep;
}

EpQualityReport run_ep_quality_suite() {
    EpQualityReport rep;
    SdWorkspace ws;
    std::uint64_t updates = 0;
    std::uint64_t clamps = 0;
    double excess_sum = 0.0;
    for (int i = 0; i < kOracleInstances; ++i) {
        const IlsProblem prob = oracle_problem(i);
        const double sd_obj = ils_objective(prob, sphere_decode(prob, &ws));

        EpDiagnostics diag;
        const double ep_obj = ils_objective(prob, ep_solve(prob, EpConfig{}, &diag));
        if (ep_obj < sd_obj - 1e-9) ++rep.ep_better_count;
        const double excess = (ep_obj - sd_obj) / std::max(sd_obj, 1e-12);
        excess_sum += std::max(excess, 0.0);
        rep.max_relative_excess = std::max(rep.max_relative_excess, excess);
        updates += diag.coordinate_updates;
        clamps += diag.cavity_clamps;
        rep.posterior_pd = rep.posterior_pd && diag.posterior_pd;
        rep.all_finite = rep.all_finite && diag.all_finite;
        ++rep.instances;
    }
    rep.mean_relative_excess = excess_sum / rep.instances;
    rep.clamp_fraction =
        updates > 0 ? static_cast<double>(clamps) / static_cast<double>(updates) : 0.0;
    rep.passed = rep.ep_better_count == 0 &&
                 rep.mean_relative_excess <= kEpMeanExcessBound &&
                 rep.clamp_fraction < 0.05 && rep.posterior_pd && rep.all_finite;
    return rep;
}

}  // namespace qprec
