#include "polarair/spreading.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "polarair/codec.hpp"
#include "polarair/errors.hpp"
#include "polarair/rng.hpp"

namespace polarair {

SpreadingDictionaries::SpreadingDictionaries(const CodecConfig& config)
    : n_c_(config.n_c),
      L_(config.L),
      J_(config.J()),
      mag_(std::sqrt(1.0 / static_cast<double>(config.N))),
      seed_(config.seed) {
    if (n_c_ == 0 || L_ == 0 || J_ == 0)
        throw config_error("SpreadingDictionaries: L, J, n_c must be >= 1");

    const std::size_t bytes = n_c_ * J_ * L_ * sizeof(double);
    if (bytes <= config.dict_cache_mb * (std::size_t{1} << 20)) {
        cache_.resize(n_c_ * J_ * L_);
        for (std::size_t i = 0; i < n_c_; ++i)
            for (std::size_t j = 0; j < J_; ++j)
                generate_column(i, j, std::span<double>(&cache_[(i * J_ + j) * L_], L_));
    }
}

void SpreadingDictionaries::generate_column(std::size_t i, std::size_t j,
                                            std::span<double> out) const {
    const std::uint64_t key = column_key(i, j);
    std::uint64_t word = 0;
    for (std::size_t row = 0; row < L_; ++row) {
        if ((row & 63) == 0) word = mix64(key + (row >> 6));
        out[row] = ((word >> (row & 63)) & 1u) ? mag_ : -mag_;
    }
}

std::uint64_t SpreadingDictionaries::column_key(std::size_t i, std::size_t j) const {
    return mix64(seed_ ^ mix64((static_cast<std::uint64_t>(i) << 32) |
                               static_cast<std::uint64_t>(j)));
}

double SpreadingDictionaries::entry(std::size_t i, std::size_t j,
                                    std::size_t row) const {
    if (!cache_.empty()) return cache_[(i * J_ + j) * L_ + row];
    const std::uint64_t word = mix64(column_key(i, j) + (row >> 6));
    return ((word >> (row & 63)) & 1u) ? mag_ : -mag_;
}

void SpreadingDictionaries::column(std::size_t i, std::size_t j,
                                   std::span<double> out) const {
    if (out.size() != L_)
        throw std::invalid_argument("SpreadingDictionaries::column: bad span length");
    if (const double* c = cached_column(i, j)) {
        std::copy(c, c + L_, out.begin());
        return;
    }
    generate_column(i, j, out);
}

const double* SpreadingDictionaries::cached_column(std::size_t i, std::size_t j) const {
    return cache_.empty() ? nullptr : &cache_[(i * J_ + j) * L_];
}

SpreadingDictionaries build_dictionaries(const CodecConfig& config) {
    return SpreadingDictionaries(config);
}

BitEstimateMatrix matched_filter(std::span<const double> y,
                                 const SpreadingDictionaries& dict) {
    const std::size_t n_c = dict.sections();
    const std::size_t L = dict.spread_len();
    const std::size_t J = dict.columns();
    if (y.size() != n_c * L)
        throw std::invalid_argument("matched_filter: measurement length mismatch");

    BitEstimateMatrix out;
    out.n_c = n_c;
    out.J = J;
    out.z.assign(n_c * J, 0.0);

    std::vector<double> scratch(L);
    for (std::size_t i = 0; i < n_c; ++i) {
        const std::span<const double> section = y.subspan(i * L, L);
        for (std::size_t j = 0; j < J; ++j) {
            const double* col = dict.cached_column(i, j);
            if (!col) {
                dict.column(i, j, scratch);
                col = scratch.data();
            }
            double acc = 0.0;
            for (std::size_t t = 0; t < L; ++t) acc += col[t] * section[t];
            out.z[i * J + j] = acc;
        }
    }
    return out;
}

std::vector<std::size_t> energy_detect(const BitEstimateMatrix& z,
                                       std::size_t count,
                                       const std::set<std::size_t>& exclude) {
    if (count > z.J - exclude.size())
        throw std::invalid_argument("energy_detect: count exceeds available columns");

    std::vector<double> energy(z.J, 0.0);
    for (std::size_t i = 0; i < z.n_c; ++i)
        for (std::size_t j = 0; j < z.J; ++j)
            energy[j] += z.z[i * z.J + j] * z.z[i * z.J + j];

    std::vector<std::size_t> cols;
    cols.reserve(z.J - exclude.size());
    for (std::size_t j = 0; j < z.J; ++j)
        if (!exclude.count(j)) cols.push_back(j);

    std::partial_sort(cols.begin(), cols.begin() + static_cast<std::ptrdiff_t>(count),
                      cols.end(), [&](std::size_t a, std::size_t b) {
                          if (energy[a] != energy[b]) return energy[a] > energy[b];
                          return a < b;
                      });
    cols.resize(count);
    return cols;
}

}  // namespace polarair
