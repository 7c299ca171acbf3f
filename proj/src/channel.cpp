#include "polarair/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "polarair/errors.hpp"

namespace polarair {

ChannelFrame power_encode(std::span<const double> g_cs, double P) {
    if (g_cs.empty()) throw std::invalid_argument("power_encode: empty measurement");
    if (P <= 0.0) throw std::invalid_argument("power_encode: P must be positive");

    const std::size_t m = g_cs.size();
    double mu = 0.0;
    for (double v : g_cs) mu += v;
    mu /= static_cast<double>(m);

    double mr_energy = 0.0;
    for (double v : g_cs) mr_energy += (v - mu) * (v - mu);

    const double a = P * static_cast<double>(m + 2) / (1.0 + mu * mu + mr_energy);
    const double root_a = std::sqrt(a);

    ChannelFrame frame;
    frame.symbols.resize(m + 2);
    frame.symbols[0] = root_a;
    frame.symbols[1] = root_a * mu;
    for (std::size_t t = 0; t < m; ++t)
        frame.symbols[t + 2] = root_a * (g_cs[t] - mu);
    return frame;
}

ChannelOutput mac_transmit(std::span<const ChannelFrame> frames, double noise_std,
                           NormalSampler& rng) {
    if (frames.empty()) throw std::invalid_argument("mac_transmit: no frames");
    if (noise_std < 0.0) throw std::invalid_argument("mac_transmit: negative noise std");
    const std::size_t len = frames[0].symbols.size();
    for (const ChannelFrame& f : frames)
        if (f.symbols.size() != len)
            throw std::invalid_argument("mac_transmit: frame length mismatch");

    ChannelOutput out;
    out.noise_std = noise_std;
    out.y.assign(len, 0.0);
    for (const ChannelFrame& f : frames)
        for (std::size_t t = 0; t < len; ++t) out.y[t] += f.symbols[t];
    if (noise_std > 0.0)
        for (std::size_t t = 0; t < len; ++t) out.y[t] += noise_std * rng();
    return out;
}

std::vector<double> ps_preprocess(const ChannelOutput& out) {
    if (out.y.size() < 3)
        throw std::invalid_argument("ps_preprocess: output shorter than 3 symbols");
    const double normalizer = out.y[0];
    if (std::fabs(normalizer) < 1e-12)
        throw degenerate_normalizer_error("ps_preprocess: normalizer symbol ~ 0");

    const std::size_t m = out.y.size() - 2;
    std::vector<double> y_tilde(m);
    for (std::size_t t = 0; t < m; ++t)
        y_tilde[t] = (out.y[t + 2] + out.y[1]) / normalizer;
    return y_tilde;
}

}  // namespace polarair
