#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace polarair {

// SplitMix64 finalizer. Used both as a hash for deriving sub-stream seeds
// and as the counter-based generator behind the spreading dictionaries.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) noexcept {
    return mix64(base ^ mix64(tag));
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                    std::uint64_t b) noexcept {
    return derive_seed(derive_seed(base, a), b);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                    std::uint64_t b, std::uint64_t c) noexcept {
    return derive_seed(derive_seed(base, a, b), c);
}

// Bounded uniform draw without std::uniform_int_distribution, which the
// standard leaves unspecified; this keeps seeded runs bit-identical across
// standard libraries.
inline std::uint64_t bounded(std::mt19937_64& gen, std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(gen()) * n) >> 64);
}

inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller; fully specified so seeded output does not
// depend on the standard library's std::normal_distribution.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : gen_(seed) {}

    double operator()() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;  // (0,1]
        const double u2 = uniform01(gen_);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace polarair
