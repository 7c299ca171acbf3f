#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "polarair/codec.hpp"
#include "polarair/model.hpp"

namespace polarair {

enum class Mode { polarair, dense };
enum class GradientSource { mlp, synthetic };
enum class OptimizerKind { sgd, adam };

std::string to_string(Mode mode);

struct ExperimentConfig {
    CodecConfig codec;
    std::size_t workers = 4;
    Mode mode = Mode::polarair;
    double noise_std = 1.0;
    std::size_t epochs = 30;
    std::size_t rounds_per_epoch = 24;  // C
    OptimizerKind optimizer = OptimizerKind::adam;
    AdamParams adam;  // lr shared with SGD
    GradientSource source = GradientSource::mlp;
    std::size_t batch_size = 64;
    MlpLayout layout;
    SynthParams data;
    // Optional explicit 1/W rescale of the recovered estimate; the channel
    // preprocessing already yields a near-1/W convex combination, so this
    // defaults to off.
    bool explicit_rescale = false;

    void validate() const;  // throws config_invariant_error
};

// Per-worker error accumulator Delta and dataset shard.
struct WorkerState {
    std::size_t id = 0;
    std::vector<double> delta;          // length N, starts at zero
    std::vector<std::size_t> shard;     // indices into the training set
};

// Adaptive measurement-growth policy state (Q statistic per epoch).
struct PolicyState {
    std::size_t L = 0;
    std::size_t n_c = 0;
    bool n_c_bump_used = false;
    std::size_t rounds_per_epoch = 1;   // C
    std::size_t recovered_accum = 0;    // sum of |A_hat| this epoch
    double last_q = 0.0;
};

struct RoundRecord {
    std::size_t epoch = 0;
    std::size_t round = 0;  // 1-based within the epoch
    std::size_t channel_uses = 0;
    std::size_t channel_uses_cum = 0;
    std::size_t recovered = 0;
    double pd = 0.0;
    double pfa = 0.0;
    std::size_t b_hat = 0;
    std::size_t active_count = 0;
    std::size_t L = 0;
    std::size_t n_c = 0;
    bool aborted = false;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double test_accuracy = 0.0;  // NaN when no model is being trained
    double q = 0.0;
    std::size_t L = 0;   // in effect during the epoch
    std::size_t n_c = 0;
};

struct ExperimentResult {
    Mode mode = Mode::polarair;
    std::vector<RoundRecord> rounds;
    std::vector<EpochRecord> epochs;
    std::vector<double> theta;  // final parameters (mlp source)
};

// K largest-magnitude entries; ties to the lower index; exact zeros never
// included, so the result may hold fewer than K entries.
SparseVector top_k(std::span<const double> v, std::size_t k);

// g_ea = g + Delta; emits top_k(g_ea); Delta becomes the sparsification
// residual g_ea - densify(output).
SparseVector worker_round(WorkerState& state, std::span<const double> gradient,
                          std::size_t k);

struct Optimizer {
    OptimizerKind kind = OptimizerKind::adam;
    AdamParams params;
    AdamState adam;
};

// Densifies the estimate and feeds it through the optimizer. Indices beyond
// theta.size() (phantom padding coordinates) are rejected.
void ps_update(std::span<double> theta, const SparseVector& estimate,
               Optimizer& opt);

// Epoch-end policy: Q = recovered_accum / C; if Q <= K/2 the first trigger
// sets n_c += 32, later triggers set L += 100. Resets the accumulator.
PolicyState adaptive_policy_step(const PolicyState& policy, std::size_t k);

// The dataset and initial parameters a run with this config will use;
// exposed so callers can evaluate or extend a finished run.
SynthDataset experiment_dataset(const ExperimentConfig& config);
std::vector<double> experiment_init(const ExperimentConfig& config);

ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace polarair
