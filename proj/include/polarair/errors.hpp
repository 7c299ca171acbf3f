#pragma once

#include <stdexcept>
#include <string>

namespace polarair {

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// load_config failure kinds, kept distinct so callers can tell a bad path
// from a bad file from a bad parameter set.
struct config_io_error : config_error {
    using config_error::config_error;
};
struct config_parse_error : config_error {
    using config_error::config_error;
};
struct config_invariant_error : config_error {
    using config_error::config_error;
};

// Thrown by ps_preprocess when the received normalizer symbol is too close
// to zero to divide by; the round is aborted and counted as failed.
struct degenerate_normalizer_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace polarair
