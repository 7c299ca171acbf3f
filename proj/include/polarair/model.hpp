#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace polarair {

// One-hidden-layer MLP with tanh activation and softmax cross-entropy.
// Flat parameter order: W1 row-major (d_h x d_in), b1, W2 row-major
// (d_out x d_h), b2.
struct MlpLayout {
    std::size_t d_in = 16;
    std::size_t d_h = 32;
    std::size_t d_out = 4;

    std::size_t param_count() const {
        return d_in * d_h + d_h + d_h * d_out + d_out;
    }
};

struct SynthParams {
    std::size_t feature_dim = 16;
    std::size_t classes = 4;
    std::size_t train_size = 4096;
    std::size_t test_size = 1024;
    double mean_scale = 3.0;  // class means drawn from N(0, mean_scale^2 I)
    double cov_scale = 1.0;   // per-feature noise around the class mean
    std::uint64_t seed = 1;
};

// Gaussian-mixture classification data with a stratified train/test split.
struct SynthDataset {
    std::size_t feature_dim = 0;
    std::size_t classes = 0;
    std::vector<double> train_x;  // row-major, train_size x feature_dim
    std::vector<int> train_y;
    std::vector<double> test_x;
    std::vector<int> test_y;

    std::size_t train_size() const { return train_y.size(); }
    std::size_t test_size() const { return test_y.size(); }
    std::span<const double> train_row(std::size_t i) const {
        return {train_x.data() + i * feature_dim, feature_dim};
    }
    std::span<const double> test_row(std::size_t i) const {
        return {test_x.data() + i * feature_dim, feature_dim};
    }
};

SynthDataset synth_dataset(const SynthParams& params);

// Mean loss over the batch and its exact gradient (written into grad, which
// must have layout.param_count() entries).
double forward_backward(const MlpLayout& layout, std::span<const double> theta,
                        const SynthDataset& data,
                        std::span<const std::size_t> batch_indices,
                        std::span<double> grad);

double test_accuracy(const MlpLayout& layout, std::span<const double> theta,
                     const SynthDataset& data);

std::vector<double> init_params(const MlpLayout& layout, std::uint64_t seed);

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::int64_t t = 0;
};

struct AdamParams {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Standard bias-corrected update; state grows lazily to the gradient size.
void adam_step(AdamState& state, std::span<const double> grad,
               std::span<double> theta, const AdamParams& params);

}  // namespace polarair
