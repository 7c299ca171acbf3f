#pragma once

// Independent reference implementations used only to check the library.
// They deliberately avoid the library's code paths.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "polarair/crc.hpp"
#include "polarair/polar.hpp"

namespace oracles {

// CRC as explicit polynomial long division over GF(2) bit arrays.
// poly_bits holds the r coefficient bits of degrees r-1..0 (leading x^r
// implicit); init_bits seeds the working register.
inline polarair::BitVec crc_long_division(const polarair::BitVec& payload,
                                          const polarair::BitVec& poly_bits,
                                          const polarair::BitVec& init_bits) {
    const std::size_t r = poly_bits.size();
    std::vector<std::uint8_t> reg(init_bits.begin(), init_bits.end());
    reg.resize(r, 0);
    auto step = [&](std::uint8_t bit) {
        const std::uint8_t top = reg.empty() ? 0 : reg[0];
        for (std::size_t i = 0; i + 1 < r; ++i) reg[i] = reg[i + 1];
        if (r > 0) reg[r - 1] = bit;
        if (top)
            for (std::size_t i = 0; i < r; ++i) reg[i] ^= poly_bits[i];
    };
    for (std::uint8_t b : payload) step(b);
    for (std::size_t i = 0; i < r; ++i) step(0);
    return polarair::BitVec(reg.begin(), reg.end());
}

// Exhaustive maximum-likelihood decoding: the codeword (over all payloads
// with the given frozen pattern) closest in Euclidean distance to the
// observation, assuming BPSK bit 0 -> +1.
struct MlResult {
    polarair::BitVec payload;
    double distance2 = 0.0;
};

inline MlResult ml_decode(std::span<const double> observed,
                          const polarair::FrozenPattern& frozen,
                          const polarair::PolarSpec& spec) {
    MlResult best;
    best.distance2 = 1e300;
    const std::size_t count = std::size_t{1} << spec.payload_len;
    for (std::size_t v = 0; v < count; ++v) {
        polarair::BitVec payload(spec.payload_len);
        for (std::size_t i = 0; i < spec.payload_len; ++i)
            payload[i] = static_cast<std::uint8_t>((v >> (spec.payload_len - 1 - i)) & 1u);
        const polarair::BitVec code = polar_encode(payload, frozen, spec);
        double d2 = 0.0;
        for (std::size_t i = 0; i < code.size(); ++i) {
            const double s = code[i] ? -1.0 : 1.0;
            d2 += (observed[i] - s) * (observed[i] - s);
        }
        if (d2 < best.distance2) {
            best.distance2 = d2;
            best.payload = payload;
        }
    }
    return best;
}

}  // namespace oracles
