#pragma once

#include <span>
#include <vector>

#include "polarair/rng.hpp"

namespace polarair {

// One worker's transmission for a round: [sqrt(a), sqrt(a)*mu, sqrt(a)*(g - mu)]
// where a is chosen so the average symbol power is exactly P.
struct ChannelFrame {
    std::vector<double> symbols;  // length m + 2

    std::size_t measurement_len() const { return symbols.size() - 2; }
};

struct ChannelOutput {
    std::vector<double> y;
    double noise_std = 1.0;
};

// Mean-removal power control. a = P(m+2) / (1 + mu^2 + ||g - mu||^2), which
// makes ||frame||^2 = P(m+2) hold identically.
ChannelFrame power_encode(std::span<const double> g_cs, double P);

// Synchronous multiple-access AWGN channel: elementwise sum of all frames
// plus N(0, sigma^2) noise. sigma = 0 is the noiseless genie channel.
ChannelOutput mac_transmit(std::span<const ChannelFrame> frames, double noise_std,
                           NormalSampler& rng);

// Undo the power control on the superposed signal:
// y_tilde = (y[2:] + y[1]) / y[0]. Throws degenerate_normalizer_error when
// |y[0]| < 1e-12; the caller aborts the round.
std::vector<double> ps_preprocess(const ChannelOutput& out);

}  // namespace polarair
