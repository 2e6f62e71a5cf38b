#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>

#include "qprec/quantizer.hpp"
#include "qprec/rng.hpp"

using namespace qprec;
using doctest::Approx;

TEST_CASE("label and threshold layout") {
    const QuantizerSpec two = build_quantizer(2, 1.0);
    CHECK(two.labels == std::vector<double>{-0.5, 0.5});
    CHECK(two.thresholds == std::vector<double>{0.0});

    const QuantizerSpec four = build_quantizer(4, 1.0);
    CHECK(four.labels == std::vector<double>{-1.5, -0.5, 0.5, 1.5});
    CHECK(four.thresholds == std::vector<double>{-1.0, 0.0, 1.0});

    const QuantizerSpec eight = build_quantizer(8, 0.5);
    REQUIRE(eight.labels.size() == 8);
    CHECK(eight.labels.front() == Approx(-1.75));
    CHECK(eight.labels.back() == Approx(1.75));
    for (int z = 1; z < 8; ++z)
        CHECK(eight.labels[z] - eight.labels[z - 1] == Approx(0.5));
}

TEST_CASE("labels symmetric about zero for any level count") {
    for (int levels : {2, 3, 4, 8, 16}) {
        const QuantizerSpec spec = build_quantizer(levels, 0.7);
        for (int z = 0; z < levels; ++z)
            CHECK(spec.labels[z] == Approx(-spec.labels[levels - 1 - z]).epsilon(1e-15));
        for (size_t i = 1; i < spec.thresholds.size(); ++i)
            CHECK(spec.thresholds[i] > spec.thresholds[i - 1]);
    }
}

TEST_CASE("construction rejects bad arguments") {
    CHECK_THROWS_AS(build_quantizer(1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_quantizer(4, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(build_quantizer(4, -1.0), std::invalid_argument);
}

TEST_CASE("complex quantization maps parts independently") {
    const QuantizerSpec spec = build_quantizer(4, 1.0);
    CHECK(quantize(std::complex<double>(0.3, 0.7), spec) == std::complex<double>(0.5, 0.5));
    // 0 falls in [0, 1) under the half-open interval convention.
    CHECK(quantize(std::complex<double>(0.0, 0.0), spec) == std::complex<double>(0.5, 0.5));
    CHECK(quantize(std::complex<double>(100.0, -100.0), spec) == std::complex<double>(1.5, -1.5));
}

TEST_CASE("non-finite input rejected") {
    const QuantizerSpec spec = build_quantizer(4, 1.0);
    const double inf = std::numeric_limits<double>::infinity();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(quantize(std::complex<double>(inf, 0.0), spec), std::invalid_argument);
    CHECK_THROWS_AS(quantize(std::complex<double>(0.0, nan), spec), std::invalid_argument);
}

TEST_CASE("idempotence, label fixed points, round to nearest") {
    const QuantizerSpec spec = build_quantizer(8, 0.37);
    Rng rng(2024);
    for (int i = 0; i < 2000; ++i) {
        const std::complex<double> x{4.0 * rng.normal(), 4.0 * rng.normal()};
        const std::complex<double> y = quantize(x, spec);
        CHECK(quantize(y, spec) == y);
        // Nearest label per real dimension, away from exact threshold points.
        double best = spec.labels[0];
        for (double l : spec.labels)
            if (std::abs(x.real() - l) < std::abs(x.real() - best)) best = l;
        CHECK(y.real() == best);
    }
    for (double lr : spec.labels)
        for (double li : spec.labels)
            CHECK(quantize(std::complex<double>(lr, li), spec) == std::complex<double>(lr, li));
}

TEST_CASE("matrix quantization is element-wise") {
    const QuantizerSpec spec = build_quantizer(4, 1.0);
    Eigen::MatrixXcd x(2, 2);
    x << std::complex<double>(0.3, 0.7), std::complex<double>(-2.0, 0.0),
        std::complex<double>(0.0, 0.0), std::complex<double>(1.2, -0.4);
    const Eigen::MatrixXcd y = quantize(x, spec);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) CHECK(y(r, c) == quantize(x(r, c), spec));
}

TEST_CASE("two nearest labels are distinct and ordered by distance") {
    const QuantizerSpec spec = build_quantizer(4, 1.0);
    auto [a, b] = two_nearest_labels(0.6, spec);
    CHECK(spec.labels[a] == 0.5);
    CHECK(spec.labels[b] == 1.5);
    // At the alphabet edge the fallback is the two nearest distinct labels.
    auto [ea, eb] = two_nearest_labels(100.0, spec);
    CHECK(spec.labels[ea] == 1.5);
    CHECK(spec.labels[eb] == 0.5);
}

TEST_CASE("one-bit optimal step matches the closed form") {
    const double expected = 2.0 * std::sqrt(2.0 / M_PI);
    CHECK(std::abs(optimal_step_size(2, 1.0) - expected) < 1e-6);
    // Quadrature MSE at the optimum has the closed form 1 - 2/pi.
    CHECK(quantizer_mse(2, expected, 1.0) == Approx(1.0 - 2.0 / M_PI).epsilon(1e-10));
}

TEST_CASE("optimal steps match independently computed values") {
    CHECK(optimal_step_size(2, 1.0) == Approx(1.5957691216057308).epsilon(1e-6));
    CHECK(optimal_step_size(4, 1.0) == Approx(0.9956866939).epsilon(1e-6));
    CHECK(optimal_step_size(8, 1.0) == Approx(0.5860194578).epsilon(1e-6));
    CHECK(optimal_step_size(16, 1.0) == Approx(0.3352006057).epsilon(1e-6));
}

TEST_CASE("step scales with sigma") {
    CHECK(optimal_step_size(2, 4.0) == Approx(2.0 * optimal_step_size(2, 1.0)));
    CHECK(optimal_step_size(8, 0.25) == Approx(0.5 * optimal_step_size(8, 1.0)));
}

TEST_CASE("local minimum certificate at the returned step") {
    for (int levels : {2, 4, 8, 16}) {
        const double step = optimal_step_size(levels, 1.0);
        const double at = quantizer_mse(levels, step, 1.0);
        CHECK(at <= quantizer_mse(levels, step * 1.01, 1.0));
        CHECK(at <= quantizer_mse(levels, step * 0.99, 1.0));
    }
}

TEST_CASE("finer alphabets quantize better") {
    const double m2 = quantizer_mse(2, optimal_step_size(2, 1.0), 1.0);
    const double m4 = quantizer_mse(4, optimal_step_size(4, 1.0), 1.0);
    const double m8 = quantizer_mse(8, optimal_step_size(8, 1.0), 1.0);
    CHECK(m4 < m2);
    CHECK(m8 < m4);
}

TEST_CASE("mse scale law") {
    CHECK(quantizer_mse(4, 2.0, 4.0) == Approx(4.0 * quantizer_mse(4, 1.0, 1.0)));
}
