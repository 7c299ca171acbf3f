#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "polarair/crc.hpp"

namespace polarair {

// Code construction: Bhattacharyya-parameter ordering for a design erasure
// probability of 0.5, fixed for every block length. info_set holds the
// payload_len most reliable input positions, ascending.
struct PolarSpec {
    std::size_t n_c = 0;          // codeword length, power of two
    std::size_t payload_len = 0;  // number of information positions
    std::vector<std::size_t> info_set;
    std::vector<std::size_t> frozen_set;
};

// Values for the frozen input positions, one bit per frozen_set entry in
// ascending position order.
struct FrozenPattern {
    BitVec values;
};

PolarSpec build_polar_spec(std::size_t n_c, std::size_t payload_len);

// c = u * F^{(x) log2 n_c} over GF(2), natural (non-bit-reversed) order.
// payload bits are scattered into info_set positions, frozen bits into
// frozen_set positions, both ascending.
BitVec polar_encode(const BitVec& payload_with_crc, const FrozenPattern& frozen,
                    const PolarSpec& spec);

struct SclResult {
    BitVec payload;     // information bits with the CRC stripped
    double path_metric; // lower is better
};

// CRC-aided successive-cancellation list decoding. bit_estimates are soft
// observations whose sign encodes the BPSK symbol (bit 0 -> +1); they are
// scaled to LLRs internally assuming +-A in unit-variance Gaussian noise with
// A = mean |estimate|. crc == nullptr means every list path passes (used for
// plain SCL, e.g. r = 0). Returns the best-metric CRC-passing path, or
// nothing. Exact f/g combining and exact metric updates are used, so with a
// list covering all 2^payload_len paths the output is the ML codeword.
std::optional<SclResult> scl_decode(std::span<const double> bit_estimates,
                                    const FrozenPattern& frozen,
                                    const PolarSpec& spec, const CrcSpec* crc,
                                    std::size_t list_size);

}  // namespace polarair
