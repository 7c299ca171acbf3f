#pragma once

#include <cstdint>
#include <vector>

namespace polarair {

using BitVec = std::vector<std::uint8_t>;  // one bit per element, values 0/1

// CRC over GF(2), MSB-first. `poly` holds the coefficient bits of degrees
// width-1 .. 0; the leading x^width coefficient is implicit.
struct CrcSpec {
    unsigned width = 8;
    std::uint64_t poly = 0x07;  // x^8 + x^2 + x + 1
    std::uint64_t init = 0;

    void validate() const;  // throws std::invalid_argument
};

// Remainder of payload * x^width mod (x^width + poly), register seeded with
// `init`. Returned as `width` bits, MSB first.
BitVec crc_remainder(const BitVec& payload, const CrcSpec& spec);

// payload followed by its CRC remainder.
BitVec crc_append(const BitVec& payload, const CrcSpec& spec);

// True iff the trailing spec.width bits equal the CRC of the leading bits.
bool crc_check(const BitVec& augmented, const CrcSpec& spec);

}  // namespace polarair
