#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "polarair/crc.hpp"
#include "polarair/polar.hpp"
#include "polarair/spreading.hpp"

namespace polarair {

// All compressed-sensing parameters for one measurement phase. L and n_c can
// change between epochs under the adaptive policy; everything else is fixed
// for a run.
struct CodecConfig {
    std::size_t N = 8192;    // gradient length (padded to make B_f + B_s exact)
    std::size_t K = 64;      // sparsity target
    std::size_t B_f = 5;     // index bits protected by the polar code
    std::size_t B_s = 8;     // index bits selecting the spreading column
    unsigned r = 8;          // CRC width
    std::uint64_t crc_poly = 0x07;  // x^8 + x^2 + x + 1
    std::size_t n_c = 32;    // polar codeword length
    std::size_t L = 64;      // spreading sequence length
    std::size_t n_L = 2;     // SCL list size
    double P = 1000.0;       // average symbol power
    std::uint64_t seed = 1;
    std::size_t max_sic_iters = 10;
    std::size_t dict_cache_mb = 64;  // materialize dictionaries under this budget

    std::size_t index_bits() const;                   // B = ceil(log2 N)
    std::size_t J() const { return std::size_t{1} << B_s; }
    std::size_t m() const { return L * n_c; }         // measurement length
    std::size_t payload_len() const { return B_f + r; }

    // Throws config_invariant_error naming the offending keys.
    void validate() const;
};

// K-sparse gradient: strictly increasing indices, matching nonzero values.
struct SparseVector {
    std::vector<std::uint32_t> indices;
    std::vector<double> values;

    std::size_t size() const { return indices.size(); }
    void densify_into(std::span<double> out) const;  // adds values into out
    std::vector<double> densify(std::size_t n) const;
};

enum class SicTermination { k_reached, no_improvement, max_iters };

struct RecoveredEntry {
    std::uint32_t index = 0;
    double value = 0.0;
};

struct SicRoundDiag {
    std::size_t round = 0;
    std::size_t added = 0;
    double residual_norm = 0.0;
};

struct RecoveredSet {
    std::vector<RecoveredEntry> entries;  // recovery order, unique indices
    std::size_t sic_rounds_used = 0;
    SicTermination terminated_by = SicTermination::no_improvement;
    std::vector<SicRoundDiag> rounds;

    std::vector<std::uint32_t> sorted_indices() const;
    SparseVector to_sparse() const;  // index-sorted, zero values kept out
};

struct IndexParts {
    BitVec m_f;          // B_f most significant bits of k
    BitVec m_s;          // B_s least significant bits of k
    std::size_t column;  // decimal value of m_s
};

IndexParts index_to_parts(std::size_t k, const CodecConfig& config);

// Frozen bits carry m_s redundantly: the B_s bits repeat cyclically across
// the frozen positions in ascending order.
FrozenPattern frozen_pattern_for_column(std::size_t column, const CodecConfig& config,
                                        const PolarSpec& spec);

struct LeastSquaresResult {
    std::vector<double> values;         // aligned with input columns; dropped -> 0
    std::vector<std::size_t> dropped;   // positions of dependent columns removed
};

// argmin_v ||y - Phi v||^2 via the normal equations with a Cholesky
// factorization taken in column order; a column whose pivot falls below
// 1e-10 of its own squared norm is declared dependent on earlier columns and
// dropped.
LeastSquaresResult least_squares(std::span<const double> y,
                                 const std::vector<std::vector<double>>& columns);

// Bundles the polar spec, CRC spec and spreading dictionaries for one
// (L, n_c) phase.
class CsCodec {
public:
    explicit CsCodec(const CodecConfig& config);

    const CodecConfig& config() const { return cfg_; }
    const PolarSpec& polar_spec() const { return pspec_; }
    const SpreadingDictionaries& dictionaries() const { return dict_; }

    // phi_k = [b_1 a_{1,j}^T ... b_{n_c} a_{n_c,j}^T]^T with
    // b = BPSK(polar_encode(crc_append(m_f), frozen(m_s))), bit 0 -> +1.
    std::vector<double> encode_column(std::size_t k) const;

    // g_cs = sum_k phi_k g_k, length m.
    std::vector<double> measure(const SparseVector& g) const;

    // Iterative matched filter / energy detector / dual SCL / LS / SIC loop.
    RecoveredSet recover(std::span<const double> y_tilde) const;

private:
    bool has_crc() const { return cfg_.r > 0; }

    CodecConfig cfg_;
    PolarSpec pspec_;
    CrcSpec crc_;
    SpreadingDictionaries dict_;
};

}  // namespace polarair
