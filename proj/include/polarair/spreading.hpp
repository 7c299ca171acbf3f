#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <vector>

namespace polarair {

struct CodecConfig;

// Per-coded-bit spreading dictionaries A_i, i in [n_c], each L x J with
// entries +-sqrt(1/N). Entries come from a counter-based generator keyed on
// (seed, i, j), so any column can be regenerated on the fly; when the full
// set fits the cache budget it is materialized once instead.
class SpreadingDictionaries {
public:
    explicit SpreadingDictionaries(const CodecConfig& config);

    std::size_t sections() const { return n_c_; }
    std::size_t spread_len() const { return L_; }
    std::size_t columns() const { return J_; }
    double magnitude() const { return mag_; }

    double entry(std::size_t i, std::size_t j, std::size_t row) const;

    // Writes spreading sequence a_{i,j} (length L) into out.
    void column(std::size_t i, std::size_t j, std::span<double> out) const;

    // Direct view when materialized; nullptr in on-the-fly mode.
    const double* cached_column(std::size_t i, std::size_t j) const;

    bool cached() const { return !cache_.empty(); }

private:
    std::uint64_t column_key(std::size_t i, std::size_t j) const;
    void generate_column(std::size_t i, std::size_t j, std::span<double> out) const;

    std::size_t n_c_ = 0, L_ = 0, J_ = 0;
    double mag_ = 0.0;
    std::uint64_t seed_ = 0;
    std::vector<double> cache_;  // [i][j][row] when within budget
};

SpreadingDictionaries build_dictionaries(const CodecConfig& config);

// Z[i][j] = <a_{i,j}, y_i> for every (i, j).
struct BitEstimateMatrix {
    std::size_t n_c = 0, J = 0;
    std::vector<double> z;  // row-major, z[i * J + j]

    double at(std::size_t i, std::size_t j) const { return z[i * J + j]; }
};

// y is the full length n_c * L measurement, treated as n_c contiguous
// sections of length L.
BitEstimateMatrix matched_filter(std::span<const double> y,
                                 const SpreadingDictionaries& dict);

// The `count` columns outside `exclude` with the largest energies
// E_j = sum_i Z[i][j]^2, energy-descending, ties by ascending column index.
std::vector<std::size_t> energy_detect(const BitEstimateMatrix& z,
                                       std::size_t count,
                                       const std::set<std::size_t>& exclude);

}  // namespace polarair
