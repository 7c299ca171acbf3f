#include "polarair/polar.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "polarair/errors.hpp"

namespace polarair {

namespace {

// Exact check-node combine: 2 atanh(tanh(a/2) tanh(b/2)), in a numerically
// stable log-domain form.
double f_combine(double a, double b) {
    const double sgn = ((a < 0.0) != (b < 0.0)) ? -1.0 : 1.0;
    return sgn * std::min(std::fabs(a), std::fabs(b)) +
           std::log1p(std::exp(-std::fabs(a + b))) -
           std::log1p(std::exp(-std::fabs(a - b)));
}

// Exact path-metric increment: log(1 + exp(-(1-2u) * llr)).
double metric_penalty(double llr, std::uint8_t bit) {
    const double s = bit ? -llr : llr;
    return s >= 0.0 ? std::log1p(std::exp(-s)) : -s + std::log1p(std::exp(s));
}

struct Path {
    // llr[d] has length n >> d; llr[0] is the channel level.
    std::vector<std::vector<double>> llr;
    // bits[d] caches the encoded value of the completed left child at depth d.
    std::vector<std::vector<std::uint8_t>> bits;
    BitVec u;
    double metric = 0.0;
};

}  // namespace

PolarSpec build_polar_spec(std::size_t n_c, std::size_t payload_len) {
    if (n_c == 0 || !std::has_single_bit(n_c))
        throw config_error("build_polar_spec: n_c must be a power of two");
    if (payload_len == 0 || payload_len > n_c)
        throw config_error("build_polar_spec: payload_len must be in [1, n_c]");

    // Bhattacharyya recursion from Z = 0.5. Each doubling appends the new
    // transform level as the least-significant index bit: the minus (check)
    // branch lands on even offsets, the plus (variable) branch on odd.
    std::vector<double> z{0.5};
    while (z.size() < n_c) {
        std::vector<double> nz(2 * z.size());
        for (std::size_t p = 0; p < z.size(); ++p) {
            nz[2 * p] = 2.0 * z[p] - z[p] * z[p];
            nz[2 * p + 1] = z[p] * z[p];
        }
        z = std::move(nz);
    }

    std::vector<std::size_t> order(n_c);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (z[a] != z[b]) return z[a] < z[b];
        return a < b;
    });

    PolarSpec spec;
    spec.n_c = n_c;
    spec.payload_len = payload_len;
    spec.info_set.assign(order.begin(), order.begin() + payload_len);
    std::sort(spec.info_set.begin(), spec.info_set.end());
    spec.frozen_set.assign(order.begin() + payload_len, order.end());
    std::sort(spec.frozen_set.begin(), spec.frozen_set.end());
    return spec;
}

BitVec polar_encode(const BitVec& payload_with_crc, const FrozenPattern& frozen,
                    const PolarSpec& spec) {
    if (payload_with_crc.size() != spec.payload_len)
        throw std::invalid_argument("polar_encode: payload length mismatch");
    if (frozen.values.size() != spec.frozen_set.size())
        throw std::invalid_argument("polar_encode: frozen pattern length mismatch");

    BitVec u(spec.n_c, 0);
    for (std::size_t i = 0; i < spec.info_set.size(); ++i)
        u[spec.info_set[i]] = payload_with_crc[i] & 1u;
    for (std::size_t i = 0; i < spec.frozen_set.size(); ++i)
        u[spec.frozen_set[i]] = frozen.values[i] & 1u;

    // x = u * F^{(x) m}: in-place butterflies, natural order.
    for (std::size_t len = 1; len < spec.n_c; len <<= 1)
        for (std::size_t blk = 0; blk < spec.n_c; blk += 2 * len)
            for (std::size_t k = 0; k < len; ++k)
                u[blk + k] ^= u[blk + k + len];
    return u;
}

std::optional<SclResult> scl_decode(std::span<const double> bit_estimates,
                                    const FrozenPattern& frozen,
                                    const PolarSpec& spec, const CrcSpec* crc,
                                    std::size_t list_size) {
    const std::size_t n = spec.n_c;
    if (bit_estimates.size() != n)
        throw std::invalid_argument("scl_decode: estimate length mismatch");
    if (frozen.values.size() != spec.frozen_set.size())
        throw std::invalid_argument("scl_decode: frozen pattern length mismatch");
    if (list_size == 0)
        throw std::invalid_argument("scl_decode: list_size must be positive");
    if (crc && spec.payload_len < crc->width)
        throw std::invalid_argument("scl_decode: payload shorter than CRC");

    const unsigned m = static_cast<unsigned>(std::countr_zero(n));

    // Soft estimates of +-A symbols in unit noise give LLR = 2 A y; only the
    // relative scale matters for path ordering, so normalize by A^2 to
    // 2 y / A. This keeps clean inputs at LLR +-2 for any amplitude; the raw
    // 2 A y form collapses below double precision under repeated check-node
    // combining when A is small (f(c, c) ~ c^2 / 2).
    double amp = 0.0;
    for (double e : bit_estimates) amp += std::fabs(e);
    amp /= static_cast<double>(n);
    const double scale = amp > 0.0 ? 2.0 / amp : 0.0;

    std::vector<std::uint8_t> is_frozen(n, 1);
    std::vector<std::size_t> frozen_rank(n, 0);
    for (std::size_t pos : spec.info_set) is_frozen[pos] = 0;
    for (std::size_t i = 0; i < spec.frozen_set.size(); ++i)
        frozen_rank[spec.frozen_set[i]] = i;

    std::vector<Path> paths(1);
    {
        Path& p = paths[0];
        p.llr.resize(m + 1);
        p.bits.resize(m + 1);
        for (unsigned d = 0; d <= m; ++d) {
            p.llr[d].resize(n >> d);
            p.bits[d].resize(n >> d);
        }
        for (std::size_t i = 0; i < n; ++i)
            p.llr[0][i] = scale * bit_estimates[i];
        p.u.assign(n, 0);
    }

    auto compute_f = [&](Path& p, unsigned d) {
        const std::size_t half = n >> d;
        for (std::size_t k = 0; k < half; ++k)
            p.llr[d][k] = f_combine(p.llr[d - 1][k], p.llr[d - 1][k + half]);
    };
    auto compute_g = [&](Path& p, unsigned d) {
        const std::size_t half = n >> d;
        for (std::size_t k = 0; k < half; ++k) {
            const double sign = p.bits[d][k] ? -1.0 : 1.0;
            p.llr[d][k] = p.llr[d - 1][k + half] + sign * p.llr[d - 1][k];
        }
    };
    // Fold the decided leaf upward: combine completed right children with
    // their stashed left siblings, stop at the first left child.
    auto propagate = [&](Path& p, std::size_t phi, std::uint8_t bit) {
        std::vector<std::uint8_t> v{bit};
        unsigned d = m;
        while (d >= 1 && ((phi >> (m - d)) & 1u)) {
            const auto& a = p.bits[d];
            std::vector<std::uint8_t> parent(2 * v.size());
            for (std::size_t k = 0; k < v.size(); ++k) {
                parent[k] = a[k] ^ v[k];
                parent[k + v.size()] = v[k];
            }
            v = std::move(parent);
            --d;
        }
        if (d >= 1) p.bits[d] = std::move(v);
    };
    auto refresh_llrs = [&](Path& p, std::size_t phi) {
        if (m == 0) return;
        unsigned ds = 1;
        if (phi == 0) {
            compute_f(p, 1);
        } else {
            const unsigned h =
                static_cast<unsigned>(std::bit_width(phi ^ (phi - 1))) - 1;
            ds = m - h;
            compute_g(p, ds);
        }
        for (unsigned d = ds + 1; d <= m; ++d) compute_f(p, d);
    };

    for (std::size_t phi = 0; phi < n; ++phi) {
        for (Path& p : paths) refresh_llrs(p, phi);

        if (is_frozen[phi]) {
            const std::uint8_t bit = frozen.values[frozen_rank[phi]] & 1u;
            for (Path& p : paths) {
                const double l = p.llr[m][0];
                p.metric += metric_penalty(l, bit);
                p.u[phi] = bit;
                propagate(p, phi, bit);
            }
            continue;
        }

        struct Cand {
            std::size_t parent;
            std::uint8_t bit;
            double metric;
        };
        std::vector<Cand> cands;
        cands.reserve(2 * paths.size());
        for (std::size_t pi = 0; pi < paths.size(); ++pi) {
            const double l = paths[pi].llr[m][0];
            cands.push_back({pi, 0, paths[pi].metric + metric_penalty(l, 0)});
            cands.push_back({pi, 1, paths[pi].metric + metric_penalty(l, 1)});
        }
        std::stable_sort(cands.begin(), cands.end(),
                         [](const Cand& a, const Cand& b) { return a.metric < b.metric; });
        if (cands.size() > list_size) cands.resize(list_size);

        std::vector<Path> next;
        next.reserve(cands.size());
        for (const Cand& c : cands) {
            next.push_back(paths[c.parent]);
            Path& p = next.back();
            p.metric = c.metric;
            p.u[phi] = c.bit;
            propagate(p, phi, c.bit);
        }
        paths = std::move(next);
    }

    std::vector<std::size_t> rank(paths.size());
    std::iota(rank.begin(), rank.end(), 0);
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
        return paths[a].metric < paths[b].metric;
    });

    for (std::size_t ri : rank) {
        const Path& p = paths[ri];
        BitVec aug(spec.payload_len);
        for (std::size_t i = 0; i < spec.info_set.size(); ++i)
            aug[i] = p.u[spec.info_set[i]];
        if (crc && !crc_check(aug, *crc)) continue;
        const std::size_t keep = crc ? spec.payload_len - crc->width : spec.payload_len;
        aug.resize(keep);
        return SclResult{std::move(aug), p.metric};
    }
    return std::nullopt;
}

}  // namespace polarair
