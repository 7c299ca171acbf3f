#include "polarair/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "polarair/errors.hpp"
#include "polarair/rng.hpp"

namespace polarair {

SynthDataset synth_dataset(const SynthParams& params) {
    if (params.classes < 2)
        throw config_error("synth_dataset: need at least 2 classes");
    if (params.cov_scale <= 0.0)
        throw config_error("synth_dataset: cov_scale must be positive");

    NormalSampler noise(derive_seed(params.seed, 0xDA7A));
    std::mt19937_64 label_gen(derive_seed(params.seed, 0x1ABE1));

    std::vector<double> means(params.classes * params.feature_dim);
    {
        NormalSampler mgen(derive_seed(params.seed, 0x3EA5));
        for (double& v : means) v = params.mean_scale * mgen();
    }

    const std::size_t total = params.train_size + params.test_size;
    std::vector<double> x(total * params.feature_dim);
    std::vector<int> y(total);
    for (std::size_t s = 0; s < total; ++s) {
        const int c = static_cast<int>(bounded(label_gen, params.classes));
        y[s] = c;
        for (std::size_t f = 0; f < params.feature_dim; ++f)
            x[s * params.feature_dim + f] =
                means[static_cast<std::size_t>(c) * params.feature_dim + f] +
                params.cov_scale * noise();
    }

    // Stratified split: within each class, samples go to train/test in
    // proportion, preserving generation order.
    SynthDataset out;
    out.feature_dim = params.feature_dim;
    out.classes = params.classes;
    const double train_frac =
        static_cast<double>(params.train_size) / static_cast<double>(total);
    std::vector<std::vector<std::size_t>> by_class(params.classes);
    for (std::size_t s = 0; s < total; ++s)
        by_class[static_cast<std::size_t>(y[s])].push_back(s);

    std::vector<std::size_t> train_ids, test_ids;
    for (const auto& members : by_class) {
        const std::size_t n_train = static_cast<std::size_t>(
            std::llround(train_frac * static_cast<double>(members.size())));
        for (std::size_t t = 0; t < members.size(); ++t)
            (t < n_train ? train_ids : test_ids).push_back(members[t]);
    }
    // Deterministic shuffle so batches are not class-sorted.
    std::mt19937_64 shuf(derive_seed(params.seed, 0x5F0F));
    for (std::size_t t = train_ids.size(); t > 1; --t)
        std::swap(train_ids[t - 1], train_ids[bounded(shuf, t)]);

    auto copy_rows = [&](const std::vector<std::size_t>& ids,
                         std::vector<double>& dst_x, std::vector<int>& dst_y) {
        dst_x.resize(ids.size() * params.feature_dim);
        dst_y.resize(ids.size());
        for (std::size_t t = 0; t < ids.size(); ++t) {
            std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(
                                        ids[t] * params.feature_dim),
                        params.feature_dim,
                        dst_x.begin() + static_cast<std::ptrdiff_t>(
                                            t * params.feature_dim));
            dst_y[t] = y[ids[t]];
        }
    };
    copy_rows(train_ids, out.train_x, out.train_y);
    copy_rows(test_ids, out.test_x, out.test_y);
    return out;
}

namespace {

void forward(const MlpLayout& lay, std::span<const double> theta,
             std::span<const double> x, std::vector<double>& hidden,
             std::vector<double>& probs) {
    const double* w1 = theta.data();
    const double* b1 = w1 + lay.d_in * lay.d_h;
    const double* w2 = b1 + lay.d_h;
    const double* b2 = w2 + lay.d_h * lay.d_out;

    hidden.assign(lay.d_h, 0.0);
    for (std::size_t h = 0; h < lay.d_h; ++h) {
        double acc = b1[h];
        const double* row = w1 + h * lay.d_in;
        for (std::size_t f = 0; f < lay.d_in; ++f) acc += row[f] * x[f];
        hidden[h] = std::tanh(acc);
    }

    probs.assign(lay.d_out, 0.0);
    double zmax = -1e300;
    for (std::size_t o = 0; o < lay.d_out; ++o) {
        double acc = b2[o];
        const double* row = w2 + o * lay.d_h;
        for (std::size_t h = 0; h < lay.d_h; ++h) acc += row[h] * hidden[h];
        probs[o] = acc;
        zmax = std::max(zmax, acc);
    }
    double zsum = 0.0;
    for (double& p : probs) {
        p = std::exp(p - zmax);
        zsum += p;
    }
    for (double& p : probs) p /= zsum;
}

}  // namespace

double forward_backward(const MlpLayout& lay, std::span<const double> theta,
                        const SynthDataset& data,
                        std::span<const std::size_t> batch_indices,
                        std::span<double> grad) {
    if (theta.size() != lay.param_count() || grad.size() != lay.param_count())
        throw std::invalid_argument("forward_backward: parameter size mismatch");
    if (batch_indices.empty())
        throw std::invalid_argument("forward_backward: empty batch");

    std::fill(grad.begin(), grad.end(), 0.0);
    const double* w1 = theta.data();
    const double* w2 = w1 + lay.d_in * lay.d_h + lay.d_h;
    double* g_w1 = grad.data();
    double* g_b1 = g_w1 + lay.d_in * lay.d_h;
    double* g_w2 = g_b1 + lay.d_h;
    double* g_b2 = g_w2 + lay.d_h * lay.d_out;

    const double inv_batch = 1.0 / static_cast<double>(batch_indices.size());
    double loss = 0.0;
    std::vector<double> hidden, probs, dz2(lay.d_out), dh(lay.d_h);
    for (std::size_t bi : batch_indices) {
        const std::span<const double> x = data.train_row(bi);
        const int label = data.train_y[bi];
        forward(lay, theta, x, hidden, probs);
        loss -= std::log(std::max(probs[static_cast<std::size_t>(label)], 1e-300));

        for (std::size_t o = 0; o < lay.d_out; ++o)
            dz2[o] = (probs[o] - (static_cast<int>(o) == label ? 1.0 : 0.0)) *
                     inv_batch;
        for (std::size_t o = 0; o < lay.d_out; ++o) {
            double* row = g_w2 + o * lay.d_h;
            for (std::size_t h = 0; h < lay.d_h; ++h) row[h] += dz2[o] * hidden[h];
            g_b2[o] += dz2[o];
        }
        for (std::size_t h = 0; h < lay.d_h; ++h) {
            double acc = 0.0;
            for (std::size_t o = 0; o < lay.d_out; ++o)
                acc += w2[o * lay.d_h + h] * dz2[o];
            dh[h] = acc * (1.0 - hidden[h] * hidden[h]);
        }
        for (std::size_t h = 0; h < lay.d_h; ++h) {
            double* row = g_w1 + h * lay.d_in;
            for (std::size_t f = 0; f < lay.d_in; ++f) row[f] += dh[h] * x[f];
            g_b1[h] += dh[h];
        }
    }
    return loss * inv_batch;
}

double test_accuracy(const MlpLayout& lay, std::span<const double> theta,
                     const SynthDataset& data) {
    if (data.test_size() == 0) return 0.0;
    std::vector<double> hidden, probs;
    std::size_t correct = 0;
    for (std::size_t s = 0; s < data.test_size(); ++s) {
        forward(lay, theta, data.test_row(s), hidden, probs);
        const std::size_t arg = static_cast<std::size_t>(
            std::max_element(probs.begin(), probs.end()) - probs.begin());
        if (static_cast<int>(arg) == data.test_y[s]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.test_size());
}

std::vector<double> init_params(const MlpLayout& lay, std::uint64_t seed) {
    std::vector<double> theta(lay.param_count(), 0.0);
    NormalSampler gen(derive_seed(seed, 0x1217));
    const double s1 = 1.0 / std::sqrt(static_cast<double>(lay.d_in));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(lay.d_h));
    std::size_t p = 0;
    for (std::size_t t = 0; t < lay.d_in * lay.d_h; ++t) theta[p++] = s1 * gen();
    p += lay.d_h;  // b1 = 0
    for (std::size_t t = 0; t < lay.d_h * lay.d_out; ++t) theta[p++] = s2 * gen();
    return theta;
}

void adam_step(AdamState& state, std::span<const double> grad,
               std::span<double> theta, const AdamParams& params) {
    if (grad.size() != theta.size())
        throw std::invalid_argument("adam_step: size mismatch");
    if (state.m.size() != theta.size()) {
        state.m.assign(theta.size(), 0.0);
        state.v.assign(theta.size(), 0.0);
        state.t = 0;
    }
    ++state.t;
    const double bc1 = 1.0 - std::pow(params.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(params.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        state.m[i] = params.beta1 * state.m[i] + (1.0 - params.beta1) * grad[i];
        state.v[i] = params.beta2 * state.v[i] + (1.0 - params.beta2) * grad[i] * grad[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        theta[i] -= params.lr * mhat / (std::sqrt(vhat) + params.eps);
    }
}

}  // namespace polarair
