#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace qprec {

// Symmetric uniform quantizer over L labels spaced step apart.
// labels[z] = step*(z - (L-1)/2) for z = 0..L-1; thresholds midway between labels.
// Real and imaginary parts are quantized independently; intervals are half-open
// [threshold, next_threshold) and out-of-range inputs saturate to the extreme labels.
struct QuantizerSpec {
    int levels = 0;
    double step = 0.0;
    std::vector<double> labels;
    std::vector<double> thresholds;
};

QuantizerSpec build_quantizer(int levels, double step);

double quantize_real(double x, const QuantizerSpec& spec);
std::complex<double> quantize(std::complex<double> x, const QuantizerSpec& spec);
Eigen::MatrixXcd quantize(const Eigen::MatrixXcd& X, const QuantizerSpec& spec);

// Index of the label closest to x (ties resolved to the lower index).
int nearest_label_index(double x, const QuantizerSpec& spec);

// Indices of the two closest distinct labels to x, nearest first.
std::pair<int, int> two_nearest_labels(double x, const QuantizerSpec& spec);

// E[(x - Q(x))^2] for x ~ Normal(0, per_dim_variance) under the L-level quantizer
// with the given step, integrated in closed form per quantizer cell.
double quantizer_mse(int levels, double step, double per_dim_variance);

// Step size minimizing quantizer_mse, found by golden-section search over
// [0.01*sigma, 10*sigma] with tolerance 1e-6*sigma.
double optimal_step_size(int levels, double per_dim_variance);

}  // namespace qprec
