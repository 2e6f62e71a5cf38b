#include "qprec/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qprec {

QuantizerSpec build_quantizer(int levels, double step) {
    if (levels < 2) throw std::invalid_argument("quantizer needs at least 2 levels");
    if (!(step > 0.0) || !std::isfinite(step))
        throw std::invalid_argument("quantizer step must be positive and finite");
    QuantizerSpec spec;
    spec.levels = levels;
    spec.step = step;
    spec.labels.resize(levels);
    for (int z = 0; z < levels; ++z)
        spec.labels[z] = step * (z - 0.5 * (levels - 1));
    spec.thresholds.resize(levels - 1);
    for (int z = 0; z < levels - 1; ++z)
        spec.thresholds[z] = step * (z + 1 - 0.5 * levels);
    return spec;
}

double quantize_real(double x, const QuantizerSpec& spec) {
    // Half-open cells [tau, tau_next); upper_bound picks the first threshold > x,
    // which is exactly the cell index under that convention.
    const auto it =
        std::upper_bound(spec.thresholds.begin(), spec.thresholds.end(), x);
    return spec.labels[static_cast<size_t>(it - spec.thresholds.begin())];
}

std::complex<double> quantize(std::complex<double> x, const QuantizerSpec& spec) {
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
        throw std::invalid_argument("quantize: non-finite input");
    return {quantize_real(x.real(), spec), quantize_real(x.imag(), spec)};
}

Eigen::MatrixXcd quantize(const Eigen::MatrixXcd& X, const QuantizerSpec& spec) {
    Eigen::MatrixXcd out(X.rows(), X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            out(i, j) = quantize(X(i, j), spec);
    return out;
}

int nearest_label_index(double x, const QuantizerSpec& spec) {
    int best = 0;
    double best_err = std::abs(x - spec.labels[0]);
    for (int z = 1; z < spec.levels; ++z) {
        const double err = std::abs(x - spec.labels[z]);
        if (err < best_err) {
            best = z;
            best_err = err;
        }
    }
    return best;
}

std::pair<int, int> two_nearest_labels(double x, const QuantizerSpec& spec) {
    const int first = nearest_label_index(x, spec);
    int second = -1;
    double second_err = 0.0;
    for (int z = 0; z < spec.levels; ++z) {
        if (z == first) continue;
        const double err = std::abs(x - spec.labels[z]);
        if (second < 0 || err < second_err) {
            second = z;
            second_err = err;
        }
    }
    return {first, second};
}

namespace {

double gauss_pdf(double x, double sigma) {
    return std::exp(-x * x / (2.0 * sigma * sigma)) /
           (sigma * std::sqrt(2.0 * M_PI));
}

double gauss_cdf(double x, double sigma) {
    return 0.5 * std::erfc(-x / (sigma * M_SQRT2));
}

}  // namespace

double quantizer_mse(int levels, double step, double per_dim_variance) {
    const QuantizerSpec spec = build_quantizer(levels, step);
    const double s2 = per_dim_variance;
    const double s = std::sqrt(s2);
    // Per cell [a, b) with label l:
    // int (x-l)^2 phi(x) dx = (s2+l^2)(Phi(b)-Phi(a)) - s2*(b phi(b)-a phi(a))
    //                         - 2 l s2 (phi(a)-phi(b))
    double total = 0.0;
    for (int z = 0; z < levels; ++z) {
        const double l = spec.labels[z];
        const bool has_a = z > 0;
        const bool has_b = z < levels - 1;
        const double a = has_a ? spec.thresholds[z - 1] : 0.0;
        const double b = has_b ? spec.thresholds[z] : 0.0;
        const double cdf_a = has_a ? gauss_cdf(a, s) : 0.0;
        const double cdf_b = has_b ? gauss_cdf(b, s) : 1.0;
        const double pdf_a = has_a ? gauss_pdf(a, s) : 0.0;
        const double pdf_b = has_b ? gauss_pdf(b, s) : 0.0;
        const double apdf_a = has_a ? a * pdf_a : 0.0;
        const double bpdf_b = has_b ? b * pdf_b : 0.0;
        total += (s2 + l * l) * (cdf_b - cdf_a) - s2 * (bpdf_b - apdf_a) -
                 2.0 * l * s2 * (pdf_a - pdf_b);
    }
    return total;
}

double optimal_step_size(int levels, double per_dim_variance) {
    if (levels < 2) throw std::invalid_argument("optimal_step_size: levels < 2");
    if (!(per_dim_variance > 0.0))
        throw std::invalid_argument("optimal_step_size: variance must be positive");
    const double sigma = std::sqrt(per_dim_variance);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.01 * sigma;
    double b = 10.0 * sigma;
    const double tol = 1e-6 * sigma;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = quantizer_mse(levels, c, per_dim_variance);
    double fd = quantizer_mse(levels, d, per_dim_variance);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = quantizer_mse(levels, c, per_dim_variance);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = quantizer_mse(levels, d, per_dim_variance);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace qprec
