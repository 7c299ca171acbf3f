#include "polarair/codec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "polarair/errors.hpp"

namespace polarair {

std::size_t CodecConfig::index_bits() const {
    std::size_t b = 0;
    while ((std::size_t{1} << b) < N) ++b;
    return b;
}

void CodecConfig::validate() const {
    if (N < 2) throw config_invariant_error("N must be >= 2");
    if (K < 1) throw config_invariant_error("K must be >= 1");
    if (B_f + B_s != index_bits())
        throw config_invariant_error("B_f + B_s must equal ceil(log2(N)); offending keys: B_f, B_s, N");
    if (n_c == 0 || !std::has_single_bit(n_c))
        throw config_invariant_error("n_c must be a power of two");
    if (B_f + r > n_c)
        throw config_invariant_error("B_f + r must not exceed n_c; offending keys: B_f, r, n_c");
    if (B_f + r == 0)
        throw config_invariant_error("B_f + r must be >= 1; offending keys: B_f, r");
    if (L == 0) throw config_invariant_error("L must be >= 1");
    if (n_L == 0) throw config_invariant_error("n_L must be >= 1");
    if (P <= 0.0) throw config_invariant_error("P must be positive");
    if (max_sic_iters == 0) throw config_invariant_error("max_sic_iters must be >= 1");
    if (B_s >= 32) throw config_invariant_error("B_s too large to enumerate 2^B_s columns");
    if (r > 63) throw config_invariant_error("r must be <= 63");
    if (r > 0 && (crc_poly >> r))
        throw config_invariant_error("crc_poly wider than r; offending keys: crc_poly, r");
}

void SparseVector::densify_into(std::span<double> out) const {
    for (std::size_t t = 0; t < indices.size(); ++t) out[indices[t]] += values[t];
}

std::vector<double> SparseVector::densify(std::size_t n) const {
    std::vector<double> out(n, 0.0);
    densify_into(out);
    return out;
}

std::vector<std::uint32_t> RecoveredSet::sorted_indices() const {
    std::vector<std::uint32_t> idx;
    idx.reserve(entries.size());
    for (const auto& e : entries) idx.push_back(e.index);
    std::sort(idx.begin(), idx.end());
    return idx;
}

SparseVector RecoveredSet::to_sparse() const {
    std::vector<const RecoveredEntry*> ptrs;
    ptrs.reserve(entries.size());
    for (const auto& e : entries)
        if (e.value != 0.0) ptrs.push_back(&e);
    std::sort(ptrs.begin(), ptrs.end(),
              [](const RecoveredEntry* a, const RecoveredEntry* b) {
                  return a->index < b->index;
              });
    SparseVector sv;
    sv.indices.reserve(ptrs.size());
    sv.values.reserve(ptrs.size());
    for (const auto* p : ptrs) {
        sv.indices.push_back(p->index);
        sv.values.push_back(p->value);
    }
    return sv;
}

IndexParts index_to_parts(std::size_t k, const CodecConfig& config) {
    if (k >= config.N) throw std::invalid_argument("index_to_parts: k out of range");
    const std::size_t B = config.index_bits();
    IndexParts parts;
    parts.m_f.resize(config.B_f);
    parts.m_s.resize(config.B_s);
    for (std::size_t i = 0; i < config.B_f; ++i)
        parts.m_f[i] = static_cast<std::uint8_t>((k >> (B - 1 - i)) & 1u);
    for (std::size_t i = 0; i < config.B_s; ++i)
        parts.m_s[i] = static_cast<std::uint8_t>((k >> (config.B_s - 1 - i)) & 1u);
    parts.column = config.B_s == 0 ? 0 : (k & (config.J() - 1));
    return parts;
}

FrozenPattern frozen_pattern_for_column(std::size_t column, const CodecConfig& config,
                                        const PolarSpec& spec) {
    FrozenPattern fp;
    fp.values.assign(spec.frozen_set.size(), 0);
    if (config.B_s == 0) return fp;
    for (std::size_t t = 0; t < fp.values.size(); ++t) {
        const std::size_t bitpos = t % config.B_s;  // m_s bits MSB-first, cyclic
        fp.values[t] = static_cast<std::uint8_t>(
            (column >> (config.B_s - 1 - bitpos)) & 1u);
    }
    return fp;
}

LeastSquaresResult least_squares(std::span<const double> y,
                                 const std::vector<std::vector<double>>& columns) {
    const std::size_t c = columns.size();
    LeastSquaresResult res;
    res.values.assign(c, 0.0);
    if (c == 0) return res;
    const std::size_t mlen = y.size();
    for (const auto& col : columns)
        if (col.size() != mlen)
            throw std::invalid_argument("least_squares: column length mismatch");

    // Normal equations: G = Phi^T Phi, b = Phi^T y.
    std::vector<double> gram(c * c, 0.0);
    std::vector<double> rhs(c, 0.0);
    for (std::size_t a = 0; a < c; ++a) {
        for (std::size_t b = a; b < c; ++b) {
            double acc = 0.0;
            for (std::size_t t = 0; t < mlen; ++t) acc += columns[a][t] * columns[b][t];
            gram[a * c + b] = acc;
            gram[b * c + a] = acc;
        }
        double acc = 0.0;
        for (std::size_t t = 0; t < mlen; ++t) acc += columns[a][t] * y[t];
        rhs[a] = acc;
    }

    // Cholesky in column order. A pivot below tol * ||phi_a||^2 means the
    // column is (numerically) dependent on earlier ones; it is dropped and
    // reported rather than poisoning the factorization.
    constexpr double kDropTol = 1e-10;
    std::vector<double> chol(c * c, 0.0);
    std::vector<std::size_t> active;
    active.reserve(c);
    for (std::size_t a = 0; a < c; ++a) {
        double pivot = gram[a * c + a];
        std::vector<double> row(active.size());
        for (std::size_t t = 0; t < active.size(); ++t) {
            double s = gram[a * c + active[t]];
            for (std::size_t u = 0; u < t; ++u)
                s -= row[u] * chol[active[t] * c + active[u]];
            row[t] = s / chol[active[t] * c + active[t]];
            pivot -= row[t] * row[t];
        }
        if (pivot <= kDropTol * gram[a * c + a] || gram[a * c + a] == 0.0) {
            res.dropped.push_back(a);
            continue;
        }
        for (std::size_t t = 0; t < active.size(); ++t) chol[a * c + active[t]] = row[t];
        chol[a * c + a] = std::sqrt(pivot);
        active.push_back(a);
    }

    // Forward then back substitution over the retained columns.
    const std::size_t na = active.size();
    std::vector<double> fwd(na, 0.0);
    for (std::size_t t = 0; t < na; ++t) {
        double s = rhs[active[t]];
        for (std::size_t u = 0; u < t; ++u)
            s -= chol[active[t] * c + active[u]] * fwd[u];
        fwd[t] = s / chol[active[t] * c + active[t]];
    }
    for (std::size_t t = na; t-- > 0;) {
        double s = fwd[t];
        for (std::size_t u = t + 1; u < na; ++u)
            s -= chol[active[u] * c + active[t]] * res.values[active[u]];
        res.values[active[t]] = s / chol[active[t] * c + active[t]];
    }
    return res;
}

namespace {
CodecConfig validated(CodecConfig c) {
    c.validate();
    return c;
}
}  // namespace

CsCodec::CsCodec(const CodecConfig& config)
    : cfg_(validated(config)),
      pspec_(build_polar_spec(cfg_.n_c, cfg_.payload_len())),
      crc_{cfg_.r > 0 ? cfg_.r : 1, cfg_.crc_poly, 0},
      dict_(cfg_) {
    if (has_crc()) crc_.validate();
}

std::vector<double> CsCodec::encode_column(std::size_t k) const {
    const IndexParts parts = index_to_parts(k, cfg_);
    const BitVec aug = has_crc() ? crc_append(parts.m_f, crc_) : parts.m_f;
    const FrozenPattern frozen = frozen_pattern_for_column(parts.column, cfg_, pspec_);
    const BitVec code = polar_encode(aug, frozen, pspec_);

    std::vector<double> phi(cfg_.m());
    std::vector<double> col(cfg_.L);
    for (std::size_t i = 0; i < cfg_.n_c; ++i) {
        const double b = code[i] ? -1.0 : 1.0;  // bit 0 -> +1
        dict_.column(i, parts.column, col);
        for (std::size_t t = 0; t < cfg_.L; ++t) phi[i * cfg_.L + t] = b * col[t];
    }
    return phi;
}

std::vector<double> CsCodec::measure(const SparseVector& g) const {
    std::vector<double> out(cfg_.m(), 0.0);
    for (std::size_t t = 0; t < g.size(); ++t) {
        const std::vector<double> phi = encode_column(g.indices[t]);
        const double v = g.values[t];
        for (std::size_t s = 0; s < out.size(); ++s) out[s] += v * phi[s];
    }
    return out;
}

RecoveredSet CsCodec::recover(std::span<const double> y_tilde) const {
    if (y_tilde.size() != cfg_.m())
        throw std::invalid_argument("recover: measurement length mismatch");

    RecoveredSet rec;
    std::vector<double> residual(y_tilde.begin(), y_tilde.end());
    std::set<std::size_t> resolved_columns;
    std::set<std::uint32_t> seen;
    std::vector<std::vector<double>> phi_cols;  // aligned with rec.entries

    double y_energy = 0.0;
    for (double v : y_tilde) y_energy += v * v;
    // Columns with (numerically) no matched-filter energy carry no signal;
    // decoding them would only surface the all-zero codeword artifact.
    const double dead_energy = 1e-20 * std::max(1.0, y_energy);

    bool hit_max = true;
    for (std::size_t iter = 1; iter <= cfg_.max_sic_iters; ++iter) {
        rec.sic_rounds_used = iter;
        const std::size_t s_now = rec.entries.size();
        const std::size_t avail = cfg_.J() - resolved_columns.size();
        const std::size_t want = std::min(cfg_.K - s_now, avail);
        if (want == 0) {
            rec.terminated_by = SicTermination::no_improvement;
            hit_max = false;
            break;
        }

        const BitEstimateMatrix z = matched_filter(residual, dict_);
        const std::vector<std::size_t> cands = energy_detect(z, want, resolved_columns);

        std::size_t added = 0;
        for (std::size_t j : cands) {
            std::vector<double> est(cfg_.n_c);
            double energy = 0.0;
            for (std::size_t i = 0; i < cfg_.n_c; ++i) {
                est[i] = z.at(i, j);
                energy += est[i] * est[i];
            }
            if (energy <= dead_energy) continue;

            const FrozenPattern frozen = frozen_pattern_for_column(j, cfg_, pspec_);
            // The sign of the underlying value is unknown, so decode both
            // polarities and keep the better-metric CRC pass; LS below owns
            // the amplitude (and hence the sign) of the estimate.
            auto best = scl_decode(est, frozen, pspec_, has_crc() ? &crc_ : nullptr,
                                   cfg_.n_L);
            for (double& e : est) e = -e;
            const auto neg = scl_decode(est, frozen, pspec_,
                                        has_crc() ? &crc_ : nullptr, cfg_.n_L);
            if (neg && (!best || neg->path_metric < best->path_metric)) best = neg;
            if (!best) continue;

            std::size_t k = j;
            for (std::size_t i = 0; i < cfg_.B_f; ++i)
                k |= static_cast<std::size_t>(best->payload[i] & 1u)
                     << (cfg_.index_bits() - 1 - i);
            if (k >= cfg_.N) continue;  // CRC false pass landing out of range
            if (!seen.insert(static_cast<std::uint32_t>(k)).second) continue;

            rec.entries.push_back({static_cast<std::uint32_t>(k), 0.0});
            phi_cols.push_back(encode_column(k));
            resolved_columns.insert(j);
            ++added;
        }

        if (added == 0) {
            rec.terminated_by = SicTermination::no_improvement;
            hit_max = false;
            break;
        }

        // LS re-estimates every recovered value against the original
        // measurement; dependent columns are evicted and become eligible
        // again in later rounds.
        const LeastSquaresResult ls = least_squares(y_tilde, phi_cols);
        for (std::size_t d : ls.dropped) {
            const auto& e = rec.entries[d];
            seen.erase(e.index);
            resolved_columns.erase(index_to_parts(e.index, cfg_).column);
        }
        if (!ls.dropped.empty()) {
            std::vector<RecoveredEntry> kept_e;
            std::vector<std::vector<double>> kept_c;
            std::size_t di = 0;
            for (std::size_t t = 0; t < rec.entries.size(); ++t) {
                if (di < ls.dropped.size() && ls.dropped[di] == t) {
                    ++di;
                    continue;
                }
                rec.entries[t].value = ls.values[t];
                kept_e.push_back(rec.entries[t]);
                kept_c.push_back(std::move(phi_cols[t]));
            }
            rec.entries = std::move(kept_e);
            phi_cols = std::move(kept_c);
        } else {
            for (std::size_t t = 0; t < rec.entries.size(); ++t)
                rec.entries[t].value = ls.values[t];
        }

        residual.assign(y_tilde.begin(), y_tilde.end());
        for (std::size_t t = 0; t < rec.entries.size(); ++t) {
            const double v = rec.entries[t].value;
            for (std::size_t s = 0; s < residual.size(); ++s)
                residual[s] -= v * phi_cols[t][s];
        }
        double rnorm = 0.0;
        for (double v : residual) rnorm += v * v;
        rec.rounds.push_back({iter, added, std::sqrt(rnorm)});

        if (rec.entries.size() >= cfg_.K) {
            rec.terminated_by = SicTermination::k_reached;
            hit_max = false;
            break;
        }
    }
    if (hit_max) rec.terminated_by = SicTermination::max_iters;

    if (rec.entries.size() > cfg_.K) {
        std::vector<std::size_t> order(rec.entries.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return std::fabs(rec.entries[a].value) > std::fabs(rec.entries[b].value);
        });
        order.resize(cfg_.K);
        std::sort(order.begin(), order.end());
        std::vector<RecoveredEntry> kept;
        for (std::size_t t : order) kept.push_back(rec.entries[t]);
        rec.entries = std::move(kept);
    }
    return rec;
}

}  // namespace polarair
