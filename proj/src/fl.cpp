#include "polarair/fl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include "polarair/channel.hpp"
#include "polarair/errors.hpp"
#include "polarair/metrics.hpp"
#include "polarair/rng.hpp"

namespace polarair {

std::string to_string(Mode mode) {
    return mode == Mode::polarair ? "polarair" : "dense";
}

void ExperimentConfig::validate() const {
    codec.validate();
    if (workers < 1) throw config_invariant_error("workers must be >= 1");
    if (epochs < 1) throw config_invariant_error("epochs must be >= 1");
    if (rounds_per_epoch < 1)
        throw config_invariant_error("rounds_per_epoch must be >= 1");
    if (noise_std < 0.0) throw config_invariant_error("noise_std must be >= 0");
    if (adam.lr <= 0.0) throw config_invariant_error("lr must be positive");
    if (source == GradientSource::mlp) {
        if (batch_size < 1) throw config_invariant_error("batch_size must be >= 1");
        if (layout.param_count() > codec.N)
            throw config_invariant_error(
                "model parameter count exceeds N; offending keys: d_in, d_h, d_out, N");
        if (data.feature_dim != layout.d_in)
            throw config_invariant_error(
                "dataset feature_dim must equal d_in; offending keys: d_in");
        if (data.classes != layout.d_out)
            throw config_invariant_error(
                "dataset classes must equal d_out; offending keys: classes, d_out");
        if (data.train_size < workers)
            throw config_invariant_error(
                "train_size must cover every worker; offending keys: train_size, workers");
    }
}

SparseVector top_k(std::span<const double> v, std::size_t k) {
    std::vector<std::uint32_t> idx;
    idx.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] != 0.0) idx.push_back(static_cast<std::uint32_t>(i));

    const std::size_t keep = std::min(k, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep),
                      idx.end(), [&](std::uint32_t a, std::uint32_t b) {
                          const double ma = std::fabs(v[a]), mb = std::fabs(v[b]);
                          if (ma != mb) return ma > mb;
                          return a < b;
                      });
    idx.resize(keep);
    std::sort(idx.begin(), idx.end());

    SparseVector out;
    out.indices = std::move(idx);
    out.values.reserve(out.indices.size());
    for (std::uint32_t i : out.indices) out.values.push_back(v[i]);
    return out;
}

SparseVector worker_round(WorkerState& state, std::span<const double> gradient,
                          std::size_t k) {
    if (gradient.size() != state.delta.size())
        throw std::invalid_argument("worker_round: gradient length mismatch");
    for (std::size_t i = 0; i < state.delta.size(); ++i) state.delta[i] += gradient[i];
    const SparseVector out = top_k(state.delta, k);
    // delta now holds g_ea; zeroing the emitted coordinates leaves exactly
    // the sparsification residual.
    for (std::uint32_t i : out.indices) state.delta[i] = 0.0;
    return out;
}

void ps_update(std::span<double> theta, const SparseVector& estimate,
               Optimizer& opt) {
    std::vector<double> grad(theta.size(), 0.0);
    for (std::size_t t = 0; t < estimate.size(); ++t) {
        if (estimate.indices[t] >= theta.size()) continue;  // phantom coordinate
        grad[estimate.indices[t]] += estimate.values[t];
    }
    if (opt.kind == OptimizerKind::adam) {
        adam_step(opt.adam, grad, theta, opt.params);
    } else {
        for (std::size_t i = 0; i < theta.size(); ++i)
            theta[i] -= opt.params.lr * grad[i];
    }
}

PolicyState adaptive_policy_step(const PolicyState& policy, std::size_t k) {
    PolicyState next = policy;
    next.last_q = static_cast<double>(policy.recovered_accum) /
                  static_cast<double>(policy.rounds_per_epoch);
    next.recovered_accum = 0;
    if (next.last_q <= static_cast<double>(k) / 2.0) {
        if (!next.n_c_bump_used) {
            const std::size_t bumped = next.n_c + 32;
            if (bumped == 0 || (bumped & (bumped - 1)) != 0)
                throw config_error("adaptive policy: n_c + 32 is not a power of two");
            next.n_c = bumped;
            next.n_c_bump_used = true;
        } else {
            next.L += 100;
        }
    }
    return next;
}

namespace {

struct GradientFeed {
    const ExperimentConfig& cfg;
    const SynthDataset* data;
    std::vector<std::vector<std::size_t>> order;  // per-worker epoch order
    std::vector<std::size_t> cursor;
    std::vector<std::mt19937_64> synth_gen;
    std::vector<NormalSampler> synth_val;

    explicit GradientFeed(const ExperimentConfig& c, const SynthDataset* d)
        : cfg(c), data(d) {
        if (cfg.source == GradientSource::synthetic) {
            for (std::size_t w = 0; w < cfg.workers; ++w) {
                synth_gen.emplace_back(derive_seed(cfg.codec.seed, 0x5A11D, w));
                synth_val.emplace_back(derive_seed(cfg.codec.seed, 0x5A11E, w));
            }
        } else {
            order.resize(cfg.workers);
            cursor.assign(cfg.workers, 0);
        }
    }

    void start_epoch(std::span<const WorkerState> workers, std::size_t epoch) {
        if (cfg.source != GradientSource::mlp) return;
        for (std::size_t w = 0; w < workers.size(); ++w) {
            order[w] = workers[w].shard;
            std::mt19937_64 shuf(derive_seed(cfg.codec.seed, 0xBA7C4, w, epoch));
            for (std::size_t t = order[w].size(); t > 1; --t)
                std::swap(order[w][t - 1], order[w][bounded(shuf, t)]);
            cursor[w] = 0;
        }
    }

    // Fills grad (length N, zero-padded past the real parameter count) and
    // returns the batch loss (0 for the synthetic source).
    double next_gradient(std::size_t w, std::span<const double> theta,
                         std::span<double> grad) {
        std::fill(grad.begin(), grad.end(), 0.0);
        if (cfg.source == GradientSource::synthetic) {
            // K fresh indices with Gaussian values; duplicates resolved by
            // accumulation.
            for (std::size_t t = 0; t < cfg.codec.K; ++t) {
                const std::size_t k = bounded(synth_gen[w], cfg.codec.N);
                grad[k] += synth_val[w]();
            }
            return 0.0;
        }
        std::vector<std::size_t> batch(cfg.batch_size);
        for (std::size_t t = 0; t < cfg.batch_size; ++t) {
            batch[t] = order[w][cursor[w]];
            cursor[w] = (cursor[w] + 1) % order[w].size();
        }
        return forward_backward(cfg.layout, theta,
                                *data, batch,
                                grad.first(cfg.layout.param_count()));
    }
};

}  // namespace

SynthDataset experiment_dataset(const ExperimentConfig& config) {
    SynthParams dp = config.data;
    dp.seed = derive_seed(config.codec.seed, 0xDA7A5E7);
    return synth_dataset(dp);
}

std::vector<double> experiment_init(const ExperimentConfig& config) {
    return init_params(config.layout, config.codec.seed);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    const std::size_t n = config.codec.N;
    const std::size_t w_count = config.workers;
    const bool train_model = config.source == GradientSource::mlp;

    SynthDataset dataset;
    std::vector<double> theta;
    Optimizer opt{config.optimizer, config.adam, {}};
    if (train_model) {
        dataset = experiment_dataset(config);
        theta = experiment_init(config);
    }

    std::vector<WorkerState> workers(w_count);
    for (std::size_t w = 0; w < w_count; ++w) {
        workers[w].id = w;
        workers[w].delta.assign(n, 0.0);
    }
    if (train_model) {
        // Disjoint equal shards from a seeded shuffle of the training set.
        std::vector<std::size_t> perm(dataset.train_size());
        std::iota(perm.begin(), perm.end(), 0);
        std::mt19937_64 shuf(derive_seed(config.codec.seed, 0x54A8D));
        for (std::size_t t = perm.size(); t > 1; --t)
            std::swap(perm[t - 1], perm[bounded(shuf, t)]);
        const std::size_t shard_size = dataset.train_size() / w_count;
        for (std::size_t w = 0; w < w_count; ++w)
            workers[w].shard.assign(
                perm.begin() + static_cast<std::ptrdiff_t>(w * shard_size),
                perm.begin() + static_cast<std::ptrdiff_t>((w + 1) * shard_size));
    }

    GradientFeed feed(config, train_model ? &dataset : nullptr);
    NormalSampler channel_rng(derive_seed(config.codec.seed, 0xC4A2));

    ExperimentResult result;
    result.mode = config.mode;

    CodecConfig phase_cfg = config.codec;
    std::unique_ptr<CsCodec> codec;
    if (config.mode == Mode::polarair) codec = std::make_unique<CsCodec>(phase_cfg);

    PolicyState policy{phase_cfg.L, phase_cfg.n_c, false, config.rounds_per_epoch,
                       0, 0.0};

    std::size_t uses_cum = 0;
    std::vector<double> grad(n), sum_dense(n);

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        feed.start_epoch(workers, epoch);
        policy.recovered_accum = 0;

        for (std::size_t round = 1; round <= config.rounds_per_epoch; ++round) {
            std::fill(sum_dense.begin(), sum_dense.end(), 0.0);
            std::vector<SparseVector> sparse(w_count);
            for (std::size_t w = 0; w < w_count; ++w) {
                feed.next_gradient(w, theta, grad);
                sparse[w] = worker_round(workers[w], grad, config.codec.K);
                sparse[w].densify_into(sum_dense);
            }
            const SparseVector g_sum = top_k(sum_dense, n);  // full support, sorted

            RoundRecord rr;
            rr.epoch = epoch;
            rr.round = round;
            rr.L = phase_cfg.L;
            rr.n_c = phase_cfg.n_c;

            std::vector<std::uint32_t> recovered_idx;
            SparseVector estimate;

            if (config.mode == Mode::dense) {
                rr.channel_uses = n;
                estimate = g_sum;
                for (double& v : estimate.values)
                    v /= static_cast<double>(w_count);
                recovered_idx = estimate.indices;
            } else {
                rr.channel_uses = phase_cfg.m() + 2;
                std::vector<ChannelFrame> frames;
                frames.reserve(w_count);
                for (std::size_t w = 0; w < w_count; ++w)
                    frames.push_back(
                        power_encode(codec->measure(sparse[w]), phase_cfg.P));
                const ChannelOutput chan =
                    mac_transmit(frames, config.noise_std, channel_rng);
                try {
                    const std::vector<double> y_tilde = ps_preprocess(chan);
                    const RecoveredSet rec = codec->recover(y_tilde);
                    for (const auto& e : rec.entries)
                        recovered_idx.push_back(e.index);
                    estimate = rec.to_sparse();
                    if (config.explicit_rescale)
                        for (double& v : estimate.values)
                            v /= static_cast<double>(w_count);
                } catch (const degenerate_normalizer_error&) {
                    rr.aborted = true;
                }
            }

            uses_cum += rr.channel_uses;
            rr.channel_uses_cum = uses_cum;
            rr.recovered = recovered_idx.size();
            policy.recovered_accum += recovered_idx.size();

            const SetTaxonomy tax =
                build_taxonomy(g_sum, config.codec.K, std::move(recovered_idx), n);
            const RoundStats stats = compute_round_stats(tax);
            rr.pd = stats.pd;
            rr.pfa = stats.pfa;
            rr.b_hat = stats.b_hat;
            rr.active_count = stats.active;
            result.rounds.push_back(rr);

            if (train_model && !rr.aborted) ps_update(theta, estimate, opt);
        }

        EpochRecord er;
        er.epoch = epoch;
        er.test_accuracy = train_model
                               ? test_accuracy(config.layout, theta, dataset)
                               : std::numeric_limits<double>::quiet_NaN();
        er.L = phase_cfg.L;
        er.n_c = phase_cfg.n_c;

        if (config.mode == Mode::polarair) {
            policy = adaptive_policy_step(policy, config.codec.K);
            er.q = policy.last_q;
            if (policy.L != phase_cfg.L || policy.n_c != phase_cfg.n_c) {
                phase_cfg.L = policy.L;
                phase_cfg.n_c = policy.n_c;
                phase_cfg.validate();
                codec = std::make_unique<CsCodec>(phase_cfg);
            }
        } else {
            er.q = static_cast<double>(policy.recovered_accum) /
                   static_cast<double>(config.rounds_per_epoch);
        }
        result.epochs.push_back(er);
    }

    result.theta = std::move(theta);
    return result;
}

}  // namespace polarair
