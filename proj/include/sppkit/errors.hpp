#pragma once

#include <stdexcept>
#include <string>

namespace sppkit {

// Circular mean is undefined when the weighted heading vectors cancel exactly.
struct DegenerateMeanError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Requested density lower bound lies outside the noise support.
struct NoCertificateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Plan parameters violate the hypotheses the construction needs (e.g. a
// periodic box too small for the separation maneuver).
struct RegimeViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A control decision left the admissible box (margin outside (0, noise_bound)
// or |drive| > noise_bound - margin).
struct InadmissibleControl : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Not enough data for the requested statistic.
struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace sppkit
