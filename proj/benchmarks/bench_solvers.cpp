#include <benchmark/benchmark.h>

#include <vector>

#include "qprec/channel.hpp"
#include "qprec/ep.hpp"
#include "qprec/oracles.hpp"
#include "qprec/quantizer.hpp"
#include "qprec/rng.hpp"
#include "qprec/sd.hpp"
#include "qprec/wmmse.hpp"

namespace {

std::vector<qprec::IlsProblem> bench_problems() {
    std::vector<qprec::IlsProblem> problems;
    for (int i = 0; i < 20; ++i) problems.push_back(qprec::oracle_problem(i));
    return problems;
}

void BM_SphereDecode(benchmark::State& state) {
    const std::vector<qprec::IlsProblem> problems = bench_problems();
    qprec::SdWorkspace ws;
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(qprec::sphere_decode(problems[i], &ws));
        i = (i + 1) % problems.size();
    }
}
BENCHMARK(BM_SphereDecode);

void BM_EpSolve(benchmark::State& state) {
    const std::vector<qprec::IlsProblem> problems = bench_problems();
    const qprec::EpConfig cfg;
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(qprec::ep_solve(problems[i], cfg));
        i = (i + 1) % problems.size();
    }
}
BENCHMARK(BM_EpSolve);

// One full precoder design at desk scale, lattice search included.
void BM_WmmseQuantized(benchmark::State& state) {
    qprec::Rng rng(5150);
    Eigen::MatrixXcd h(2, 8);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 8; ++c) h(r, c) = rng.cnormal();
    qprec::WmmseConfig cfg;
    cfg.solver = state.range(0) == 0 ? qprec::SolverKind::Sd : qprec::SolverKind::Ep;
    cfg.noise_power = 1e-2;
    cfg.quantizer =
        qprec::build_quantizer(8, qprec::optimal_step_size(8, 1.0 / 32.0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(qprec::run_wmmse(h, cfg));
    }
}
BENCHMARK(BM_WmmseQuantized)->Arg(0)->Arg(1)->ArgNames({"solver"});

void BM_WmmseContinuous(benchmark::State& state) {
    qprec::Rng rng(5151);
    Eigen::MatrixXcd h(4, 16);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 16; ++c) h(r, c) = rng.cnormal();
    qprec::WmmseConfig cfg;
    cfg.solver = qprec::SolverKind::Continuous;
    cfg.noise_power = 1e-2;
    for (auto _ : state) {
        benchmark::DoNotOptimize(qprec::run_wmmse(h, cfg));
    }
}
BENCHMARK(BM_WmmseContinuous);

void BM_OptimalStepSize(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            qprec::optimal_step_size(static_cast<int>(state.range(0)), 1.0));
    }
}
BENCHMARK(BM_OptimalStepSize)->Arg(2)->Arg(8)->Arg(16)->ArgNames({"levels"});

void BM_DrawChannel(benchmark::State& state) {
    qprec::ChannelConfig cfg;
    qprec::Rng rng(5152);
    for (auto _ : state) {
        benchmark::DoNotOptimize(qprec::draw_channel(cfg, rng));
    }
}
BENCHMARK(BM_DrawChannel);

}  // namespace

BENCHMARK_MAIN();
