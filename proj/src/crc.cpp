#include "polarair/crc.hpp"

#include <stdexcept>

namespace polarair {

void CrcSpec::validate() const {
    if (width < 1 || width > 63)
        throw std::invalid_argument("CrcSpec: width must be in [1, 63]");
    if (poly >> width)
        throw std::invalid_argument("CrcSpec: polynomial wider than CRC width");
}

BitVec crc_remainder(const BitVec& payload, const CrcSpec& spec) {
    spec.validate();
    const std::uint64_t mask = (spec.width == 63) ? ~0ull >> 1
                                                  : (1ull << spec.width) - 1;
    std::uint64_t reg = spec.init & mask;
    auto feed = [&](std::uint8_t bit) {
        const std::uint64_t top = (reg >> (spec.width - 1)) & 1u;
        reg = ((reg << 1) | bit) & mask;
        if (top) reg ^= spec.poly;
    };
    for (std::uint8_t b : payload) feed(b & 1u);
    for (unsigned i = 0; i < spec.width; ++i) feed(0);
    BitVec out(spec.width);
    for (unsigned i = 0; i < spec.width; ++i)
        out[i] = static_cast<std::uint8_t>((reg >> (spec.width - 1 - i)) & 1u);
    return out;
}

BitVec crc_append(const BitVec& payload, const CrcSpec& spec) {
    BitVec out = payload;
    const BitVec rem = crc_remainder(payload, spec);
    out.insert(out.end(), rem.begin(), rem.end());
    return out;
}

bool crc_check(const BitVec& augmented, const CrcSpec& spec) {
    spec.validate();
    if (augmented.size() < spec.width) return false;
    const BitVec payload(augmented.begin(), augmented.end() - spec.width);
    const BitVec rem = crc_remainder(payload, spec);
    for (unsigned i = 0; i < spec.width; ++i)
        if (rem[i] != (augmented[augmented.size() - spec.width + i] & 1u))
            return false;
    return true;
}

}  // namespace polarair
