#pragma once

#include <stdexcept>

namespace matchstat {

// Data-dependent failures. The CLI maps anything derived from DataError to
// exit code 2; precondition misuse throws std::invalid_argument instead.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The matching statistic is undefined on tied ranks without a tie-breaking
// convention.
struct TiesPresent : DataError {
    using DataError::DataError;
};

struct ZeroVariance : DataError {
    using DataError::DataError;
};

struct SampleTooSmall : DataError {
    using DataError::DataError;
};

// No value of the test statistic has a tail probability at or below alpha.
struct NoRejectionRegion : DataError {
    using DataError::DataError;
};

}  // namespace matchstat
