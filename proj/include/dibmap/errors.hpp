#pragma once

#include <stdexcept>
#include <string>

namespace dibmap {

// Shape or size mismatch between tensor operands.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// NaN/Inf surfaced where a finite value is required.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent wire frame.
struct WireError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Peer protocol violation (bad sender, impossible round, ...).
struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Receive timeout while peers are still expected to make progress.
struct TimeoutError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid or inconsistent experiment configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace dibmap
