#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polarair/fl.hpp"

namespace polarair {

// Index taxonomy of one round: A = top-K of the summed sparse gradient,
// B = remaining active indices ("active indices in the false alarm set"),
// F = the zeros; A, B, F partition [0, N). recovered is A_hat.
struct SetTaxonomy {
    std::size_t n = 0;
    std::vector<std::uint32_t> top;        // A, sorted
    std::vector<std::uint32_t> other_active;  // B, sorted
    std::vector<std::uint32_t> recovered;  // A_hat, sorted unique
};

SetTaxonomy build_taxonomy(const SparseVector& g_sum, std::size_t k,
                           std::vector<std::uint32_t> recovered, std::size_t n);

struct RoundStats {
    double pd = 0.0;        // |A_hat ∩ A| / |A|, 0 when A empty
    double pfa = 0.0;       // |A_hat \ A| / |A_hat|, 0 when A_hat empty
    std::size_t b_hat = 0;  // |A_hat ∩ B|
    std::size_t active = 0; // |A ∪ B|
};

RoundStats compute_round_stats(const SetTaxonomy& taxonomy);

// rounds.csv: epoch,round,mode,channel_uses,channel_uses_cum,recovered,pd,
// pfa,b_hat,active_count,L,n_c,aborted
// epochs.csv: epoch,test_accuracy,Q,L,n_c
// Decimals carry 6 significant digits; output is byte-deterministic per seed.
void emit_records(const ExperimentResult& result, const std::string& rounds_path,
                  const std::string& epochs_path);

// Flat key=value config file; '#' starts a comment. Unknown keys are
// rejected, all invariants are checked eagerly, and any key may be omitted
// (documented defaults apply).
ExperimentConfig load_config(const std::string& path);

// Parses the same key=value pairs from memory (CLI overrides reuse this).
void apply_config_entry(ExperimentConfig& config, const std::string& key,
                        const std::string& value);

}  // namespace polarair
