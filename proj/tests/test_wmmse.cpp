#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "qprec/rng.hpp"
#include "qprec/sd.hpp"
#include "qprec/wmmse.hpp"

using namespace qprec;
using doctest::Approx;

namespace {

Eigen::MatrixXcd random_matrix(int rows, int cols, Rng& rng) {
    Eigen::MatrixXcd m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = rng.cnormal();
    return m;
}

// Complex quadratic form of the fixed-(beta, d, omega) subproblem for UE i:
// p' (H'D'DH + omega I) p - 2 Re(f_i' p) with D = diag(sqrt(d) beta) H rows
// and f_i = d_i conj(beta_i) h_i.
double subproblem_form(const Eigen::MatrixXcd& H, const Eigen::VectorXd& d,
                       const Eigen::VectorXcd& beta, double omega, int ue,
                       const Eigen::VectorXcd& p) {
    const int users = static_cast<int>(H.rows());
    Eigen::MatrixXcd dh = H;
    for (int k = 0; k < users; ++k) dh.row(k) *= std::sqrt(d(k)) * beta(k);
    const Eigen::MatrixXcd v = dh.adjoint() * dh +
                               omega * Eigen::MatrixXcd::Identity(H.cols(), H.cols());
    const Eigen::VectorXcd f = d(ue) * std::conj(beta(ue)) * H.row(ue).adjoint();
    return std::real(p.dot(v * p)) - 2.0 * std::real(f.dot(p));
}

}  // namespace

TEST_CASE("wiener filter initialization") {
    const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(2, 2);
    CHECK((wf_init(eye, 1e12, 1.0) - eye).norm() < 1e-9);

    Eigen::MatrixXcd h(1, 1);
    h(0, 0) = 2.0;
    CHECK(std::abs(wf_init(h, 1.0, 1.0)(0, 0) - std::complex<double>(0.4, 0.0)) <
          1e-14);

    Rng rng(1);
    const Eigen::MatrixXcd hr = random_matrix(2, 4, rng);
    const Eigen::MatrixXcd p = wf_init(hr, 2.0, 0.5);
    const Eigen::MatrixXcd expected =
        hr.adjoint() *
        (hr * hr.adjoint() + (2.0 * 0.5 / 2.0) * Eigen::MatrixXcd::Identity(2, 2))
            .inverse();
    CHECK((p - expected).norm() < 1e-10 * expected.norm());
}

TEST_CASE("receiver gain formula") {
    Eigen::MatrixXcd h(1, 1), p(1, 1);
    h(0, 0) = 1.0;
    p(0, 0) = 1.0;
    CHECK(std::abs(receiver_gain(h, p, 0, 1.0) - std::complex<double>(0.5, 0.0)) <
          1e-15);
    p(0, 0) = 0.0;
    CHECK(std::abs(receiver_gain(h, p, 0, 1.0)) == 0.0);
}

TEST_CASE("receiver gain minimizes the detection mse") {
    Rng rng(42);
    const Eigen::MatrixXcd h = random_matrix(3, 5, rng);
    const Eigen::MatrixXcd p = random_matrix(5, 3, rng);
    for (int k = 0; k < 3; ++k) {
        const std::complex<double> best = receiver_gain(h, p, k, 0.7);
        const double at_best = ue_mse(h, p, best, k, 0.7);
        for (int i = 0; i < 100; ++i) {
            const std::complex<double> delta{0.1 * rng.normal(), 0.1 * rng.normal()};
            CHECK(at_best <= ue_mse(h, p, best + delta, k, 0.7) + 1e-12);
        }
    }
}

TEST_CASE("mse weight formula") {
    Eigen::MatrixXcd h(1, 1), p(1, 1);
    h(0, 0) = 1.0;
    p(0, 0) = 0.0;  // no signal, SINR 0
    CHECK(mse_weight(h, p, 0, 1.0, 1.0) == Approx(1.0 / std::log(2.0)));
    p(0, 0) = 1.0;  // unit signal power over unit noise, SINR 1
    CHECK(mse_weight(h, p, 0, 1.0, 1.0) == Approx(2.0 / std::log(2.0)));
    CHECK(mse_weight(h, p, 0, 1.0, 2.0) == Approx(2.0 * mse_weight(h, p, 0, 1.0, 1.0)));
}

TEST_CASE("detection mse values") {
    Eigen::MatrixXcd h(1, 1), p(1, 1);
    h(0, 0) = 1.0;
    p(0, 0) = 1.0;
    CHECK(ue_mse(h, p, 0.0, 0, 1.0) == Approx(1.0));
    CHECK(ue_mse(h, p, 0.5, 0, 1.0) == Approx(0.5));
}

TEST_CASE("optimal gain turns mse into one over one plus sinr") {
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        const int users = 1 + static_cast<int>(rng.next_u64() % 4);
        const int antennas = users + static_cast<int>(rng.next_u64() % 5);
        const Eigen::MatrixXcd h = random_matrix(users, antennas, rng);
        const Eigen::MatrixXcd p = random_matrix(antennas, users, rng);
        const double noise = rng.uniform(0.1, 10.0);
        for (int k = 0; k < users; ++k) {
            const double e = ue_mse(h, p, receiver_gain(h, p, k, noise), k, noise);
            const double target = 1.0 + ue_sinr(h, p, k, noise);
            CHECK(std::abs(1.0 / e - target) <= 1e-10 * target);
        }
    }
}

TEST_CASE("ils reduction on the degenerate channel") {
    const Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2, 3);
    const Eigen::VectorXd d = Eigen::VectorXd::Ones(2);
    const Eigen::VectorXcd beta = Eigen::VectorXcd::Ones(2);
    const IlsProblem prob = reduce_to_ils(h, d, beta, 1.0, 0, {-0.5, 0.5});
    CHECK((prob.G - Eigen::MatrixXd::Identity(6, 6)).norm() < 1e-14);
    CHECK(prob.c.norm() == 0.0);
}

TEST_CASE("ils reduction reproduces the quadratic form") {
    Rng rng(3);
    const Eigen::MatrixXcd h = random_matrix(3, 4, rng);
    Eigen::VectorXd d(3);
    Eigen::VectorXcd beta(3);
    for (int k = 0; k < 3; ++k) {
        d(k) = rng.uniform(0.5, 3.0);
        beta(k) = rng.cnormal();
    }
    const double omega = 0.31;
    for (int ue = 0; ue < 3; ++ue) {
        const IlsProblem prob = reduce_to_ils(h, d, beta, omega, ue, {-0.5, 0.5});
        for (int trial = 0; trial < 100; ++trial) {
            Eigen::VectorXd pr(8);
            for (int m = 0; m < 8; ++m) pr(m) = rng.normal();
            const Eigen::VectorXcd pc = real_to_complex(pr);
            const double via_ils = (prob.c - prob.G * pr).squaredNorm() -
                                   prob.c.squaredNorm();
            const double direct = subproblem_form(h, d, beta, omega, ue, pc);
            CHECK(std::abs(via_ils - direct) <= 1e-9 * (1.0 + std::abs(direct)));
        }
    }
}

TEST_CASE("cholesky round trip and real embedding isometry") {
    Rng rng(4);
    const Eigen::MatrixXcd h = random_matrix(2, 3, rng);
    Eigen::VectorXd d(2);
    Eigen::VectorXcd beta(2);
    for (int k = 0; k < 2; ++k) {
        d(k) = rng.uniform(0.5, 2.0);
        beta(k) = rng.cnormal();
    }
    const IlsReduction red = reduce_all(h, d, beta, 0.2);

    Eigen::MatrixXcd dh = h;
    for (int k = 0; k < 2; ++k) dh.row(k) *= std::sqrt(d(k)) * beta(k);
    const Eigen::MatrixXcd v =
        dh.adjoint() * dh + 0.2 * Eigen::MatrixXcd::Identity(3, 3);
    Eigen::MatrixXd v_real(6, 6);
    v_real << v.real(), -v.imag(), v.imag(), v.real();
    CHECK((red.G.transpose() * red.G - v_real).norm() <= 1e-10 * v_real.norm());

    Eigen::VectorXd pr(6);
    for (int m = 0; m < 6; ++m) pr(m) = rng.normal();
    CHECK(real_to_complex(pr).norm() == Approx(pr.norm()).epsilon(1e-14));
}

TEST_CASE("sd-backed subproblem solve attains the brute-force optimum") {
    Rng rng(5);
    const Eigen::MatrixXcd h = random_matrix(2, 2, rng);
    Eigen::VectorXd d(2);
    Eigen::VectorXcd beta(2);
    for (int k = 0; k < 2; ++k) {
        d(k) = rng.uniform(0.5, 2.0);
        beta(k) = rng.cnormal();
    }
    const std::vector<double> labels{-0.75, -0.25, 0.25, 0.75};
    const double omega = 0.4;
    const IlsSolver sd = [](const IlsProblem& prob) { return sphere_decode(prob); };
    const Eigen::MatrixXcd p = solve_p5(h, d, beta, omega, labels, sd);
    for (int ue = 0; ue < 2; ++ue) {
        const IlsProblem prob = reduce_to_ils(h, d, beta, omega, ue, labels);
        const double best = ils_objective(prob, brute_force_ils(prob));
        Eigen::VectorXd pr(4);
        pr << p.col(ue).real(), p.col(ue).imag();
        CHECK(ils_objective(prob, pr) == Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("subproblem solutions are independent across ues") {
    Rng rng(6);
    const Eigen::MatrixXcd h = random_matrix(3, 4, rng);
    Eigen::VectorXd d(3);
    Eigen::VectorXcd beta(3);
    for (int k = 0; k < 3; ++k) {
        d(k) = rng.uniform(0.5, 2.0);
        beta(k) = rng.cnormal();
    }
    const std::vector<double> labels{-0.5, 0.5};
    const IlsSolver sd = [](const IlsProblem& prob) { return sphere_decode(prob); };
    const Eigen::MatrixXcd whole = solve_p5(h, d, beta, 0.3, labels, sd);
    for (int ue = 0; ue < 3; ++ue) {
        const IlsProblem prob = reduce_to_ils(h, d, beta, 0.3, ue, labels);
        const Eigen::VectorXcd single = real_to_complex(sphere_decode(prob));
        CHECK((whole.col(ue) - single).norm() == 0.0);
    }
}

TEST_CASE("sum rate basics") {
    Eigen::MatrixXcd h(1, 1), p(1, 1);
    h(0, 0) = 1.0;
    p(0, 0) = 1.0;
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(1);
    CHECK(sum_rate(h, p, 1.0, 1.0, ones) == Approx(1.0));
    CHECK_THROWS_AS(sum_rate(h, Eigen::MatrixXcd::Zero(1, 1), 1.0, 1.0, ones),
                    std::invalid_argument);
}

TEST_CASE("sum rate is scale invariant") {
    Rng rng(8);
    const Eigen::MatrixXcd h = random_matrix(3, 5, rng);
    const Eigen::MatrixXcd p = random_matrix(5, 3, rng);
    Eigen::VectorXd w(3);
    w << 1.0, 2.0, 0.5;
    const double base = sum_rate(h, p, 2.0, 0.3, w);
    CHECK(sum_rate(h, 3.0 * p, 2.0, 0.3, w) == Approx(base).epsilon(1e-12));
    CHECK(sum_rate(h, 0.01 * p, 2.0, 0.3, w) == Approx(base).epsilon(1e-12));
}

TEST_CASE("uniform weights reduce to the unweighted rate") {
    Rng rng(9);
    const Eigen::MatrixXcd h = random_matrix(2, 4, rng);
    const Eigen::MatrixXcd p = random_matrix(4, 2, rng);
    double unweighted = 0.0;
    for (int k = 0; k < 2; ++k)
        unweighted += std::log2(1.0 + ue_sinr(h, std::sqrt(1.0 / p.squaredNorm()) * p,
                                              k, 0.5));
    CHECK(sum_rate(h, p, 1.0, 0.5, Eigen::VectorXd::Ones(2)) ==
          Approx(unweighted).epsilon(1e-12));
}

TEST_CASE("continuous objective trace never increases between iterations") {
    // The first trace entry is recorded at the raw Wiener-filter start, whose
    // transmit power is unnormalized, so its effective noise differs from the
    // iterates'. Descent is guaranteed from the first iterate onward, where
    // the power constraint pins the noise scaling.
    Rng rng(10);
    for (int i = 0; i < 5; ++i) {
        const Eigen::MatrixXcd h = random_matrix(2, 4, rng);
        WmmseConfig cfg;
        cfg.solver = SolverKind::Continuous;
        cfg.noise_power = 0.05;
        const WmmseState st = run_wmmse(h, cfg);
        REQUIRE(st.objective_trace.size() >= 3);
        for (size_t n = 2; n < st.objective_trace.size(); ++n)
            CHECK(st.objective_trace[n] <= st.objective_trace[n - 1] + 1e-9);
    }
}

TEST_CASE("zero channel terminates immediately with zero rate") {
    const Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2, 4);
    WmmseConfig cfg;
    cfg.solver = SolverKind::Continuous;
    const WmmseState st = run_wmmse(h, cfg);
    CHECK(st.converged);
    CHECK(st.iterations <= 2);
    CHECK(st.rate_trace.back() == 0.0);
}

TEST_CASE("single antenna single ue picks a corner of the binary alphabet") {
    Eigen::MatrixXcd h(1, 1);
    h(0, 0) = 1.0;
    WmmseConfig cfg;
    cfg.solver = SolverKind::Sd;
    cfg.quantizer = build_quantizer(2, optimal_step_size(2, 0.5));
    const WmmseState st = run_wmmse(h, cfg);
    const double half = cfg.quantizer.step / 2.0;
    CHECK(std::abs(std::abs(st.P(0, 0).real()) - half) < 1e-14);
    CHECK(std::abs(std::abs(st.P(0, 0).imag()) - half) < 1e-14);
    // All four corners tie after power rescaling, so the achieved rate must
    // equal the best over the full alphabet.
    double best = 0.0;
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(1);
    for (double re : cfg.quantizer.labels)
        for (double im : cfg.quantizer.labels) {
            Eigen::MatrixXcd p(1, 1);
            p(0, 0) = {re, im};
            best = std::max(best, sum_rate(h, p, 1.0, 1.0, ones));
        }
    CHECK(sum_rate(h, st.P, 1.0, 1.0, ones) == Approx(best).epsilon(1e-12));
}

TEST_CASE("quantized solvers return alphabet points") {
    Rng rng(11);
    const Eigen::MatrixXcd h = random_matrix(2, 3, rng);
    WmmseConfig cfg;
    cfg.quantizer = build_quantizer(4, optimal_step_size(4, 1.0 / 12.0));
    cfg.noise_power = 0.1;
    for (SolverKind solver : {SolverKind::Sd, SolverKind::Ep}) {
        cfg.solver = solver;
        const WmmseState st = run_wmmse(h, cfg);
        CHECK((quantize(st.P, cfg.quantizer) - st.P).norm() == 0.0);
        CHECK(st.iterations <= cfg.max_iterations);
    }
}

TEST_CASE("curve power is non-increasing and vanishes at huge omega") {
    Rng rng(12);
    const Eigen::MatrixXcd h = random_matrix(2, 4, rng);
    Eigen::VectorXd d(2);
    Eigen::VectorXcd beta(2);
    for (int k = 0; k < 2; ++k) {
        d(k) = rng.uniform(0.5, 2.0);
        beta(k) = rng.cnormal();
    }
    const P3Curve curve = p3_curve(h, d, beta);
    double prev = curve.power(1e-6);
    for (int g = 0; g < 20; ++g) {
        const double omega = 1e-6 * std::pow(10.0, 0.4 * (g + 1));
        const double at = curve.power(omega);
        CHECK(at <= prev + 1e-12);
        prev = at;
    }
    CHECK(curve.precoder(1e9).norm() < 1e-6);
    // The closed-form slope matches finite differences.
    const double eps = 1e-5;
    const double fd = (curve.power(1.0 + eps) - curve.power(1.0 - eps)) / (2.0 * eps);
    CHECK(curve.power_slope(1.0) == Approx(fd).epsilon(1e-5));
}

TEST_CASE("bisection keeps an unbeatable incumbent") {
    Rng rng(13);
    const Eigen::MatrixXcd h = random_matrix(2, 3, rng);
    Eigen::VectorXd d = Eigen::VectorXd::Ones(2);
    Eigen::VectorXcd beta = Eigen::VectorXcd::Ones(2);
    const P3Curve curve = p3_curve(h, d, beta);
    const Eigen::MatrixXcd incumbent = Eigen::MatrixXcd::Constant(3, 2, 0.25);
    const auto solve_at = [&](double omega) { return curve.precoder(omega); };
    // A constant metric means no candidate strictly improves on the incumbent.
    const auto rate_of = [](const Eigen::MatrixXcd&) { return 1.0; };
    const BisectResult res = bisect_omega(solve_at, rate_of, 1.0, &incumbent);
    CHECK((res.P - incumbent).norm() == 0.0);
    CHECK(res.evaluations <= BisectOptions{}.max_evaluations);
}

TEST_CASE("bisection walks to the power crossing and returns the rate argmax") {
    Rng rng(14);
    const Eigen::MatrixXcd h = random_matrix(2, 4, rng);
    Eigen::VectorXd d(2);
    Eigen::VectorXcd beta(2);
    for (int k = 0; k < 2; ++k) {
        d(k) = rng.uniform(1.0, 3.0);
        beta(k) = rng.cnormal();
    }
    const P3Curve curve = p3_curve(h, d, beta);
    // Budget well below the unconstrained power so the crossing is interior.
    const double q = 0.05 * curve.power(1e-9);
    std::vector<double> walked;
    const auto solve_at = [&](double omega) {
        walked.push_back(omega);
        return curve.precoder(omega);
    };
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(2);
    const auto rate_of = [&](const Eigen::MatrixXcd& p) {
        return sum_rate(h, p, q, 0.1, ones);
    };
    const std::function<double(double)> power_at = [&](double omega) {
        return curve.power(omega);
    };
    const BisectResult res =
        bisect_omega(solve_at, rate_of, q, nullptr, BisectOptions{}, &power_at);
    CHECK(res.P.size() > 0);
    CHECK(res.evaluations == static_cast<int>(walked.size()));
    CHECK(res.evaluations <= BisectOptions{}.max_evaluations);

    // The walk terminates once some candidate meets the power budget.
    double closest = std::numeric_limits<double>::infinity();
    for (double omega : walked)
        closest = std::min(closest, std::abs(curve.power(omega) - q));
    CHECK(closest <= BisectOptions{}.power_tol_rel * q);

    // The returned omega carries the best rate over everything walked.
    double best_rate = -1.0;
    for (double omega : walked)
        best_rate = std::max(best_rate, rate_of(curve.precoder(omega)));
    CHECK(rate_of(curve.precoder(res.omega)) == Approx(best_rate).epsilon(1e-12));
}

TEST_CASE("default omega floor scales with the quadratic form") {
    Rng rng(15);
    const Eigen::MatrixXcd h = random_matrix(2, 3, rng);
    const Eigen::VectorXd d = Eigen::VectorXd::Ones(2);
    const Eigen::VectorXcd beta = Eigen::VectorXcd::Ones(2);
    const double floor = default_omega_floor(h, d, beta);
    CHECK(floor > 0.0);
    CHECK(default_omega_floor(2.0 * h, d, beta) == Approx(4.0 * floor));
    CHECK(default_omega_floor(Eigen::MatrixXcd::Zero(2, 3), d, beta) == 0.0);
}

TEST_CASE("custom solver injection is honored") {
    Rng rng(16);
    const Eigen::MatrixXcd h = random_matrix(1, 2, rng);
    WmmseConfig cfg;
    cfg.solver = SolverKind::Sd;
    cfg.quantizer = build_quantizer(2, 1.0);
    cfg.max_iterations = 3;
    int calls = 0;
    const IlsSolver counting = [&calls](const IlsProblem& prob) {
        ++calls;
        return sphere_decode(prob);
    };
    run_wmmse(h, cfg, &counting);
    CHECK(calls > 0);
}
