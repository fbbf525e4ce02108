// Error types shared across modules.
#pragma once

#include <stdexcept>
#include <string>

namespace cascadelab {

// E w*^q is infinite at the requested q (e.g. negative q with an atom at 0).
struct DivergentMomentError : std::domain_error {
    using std::domain_error::domain_error;
};

// Total-mass second moment has no finite fixed point (sum of E w_i^2 >= 1).
struct DivergentSecondMomentError : std::domain_error {
    using std::domain_error::domain_error;
};

// Requested grid exceeds the configured cell bound (CASCADELAB_MAX_CELLS).
struct CellLimitError : std::length_error {
    using std::length_error::length_error;
};

// A cell with zero mass met a negative exponent.
struct ZeroCellError : std::domain_error {
    using std::domain_error::domain_error;
};

// Root finder failed to converge; message carries bracketing diagnostics.
struct RootFindError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Config file rejected; message carries file/line diagnostics.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace cascadelab
