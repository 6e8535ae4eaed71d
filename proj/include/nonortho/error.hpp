#pragma once

#include <stdexcept>
#include <string>

namespace nonortho {

enum class ErrorCode {
    BadShape,
    NonFinite,
    NotHermitian,
    NonConvergence,
    OverflowRisk,
    BadSpec,
    ZeroVector,
    ParseError,
    NotSquare,
    AllUndefined,
    EigenvalueMatchFailure,
    BranchAmbiguity,
    NoRootsFound,
    MaxStatesExceeded,
    RegionTooSmall,
    ZeroRHS,
    NotNormalized,
    DegenerateDenominator,
    InfiniteDistance,
    UpperHalfPlaneEigenvalue,
    BadOrdering,
    Io,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace nonortho
