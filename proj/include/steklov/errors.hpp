#pragma once

#include <stdexcept>
#include <string>

namespace steklov {

// All failure modes surface as typed exceptions so callers (CLI, tests) can
// distinguish configuration mistakes from numerical breakdowns.

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct OverlapError : Error {
    using Error::Error;
};
struct OutsideOuter : Error {
    using Error::Error;
};
struct NonPositiveWeight : Error {
    using Error::Error;
};
struct QuadratureNotConverged : Error {
    using Error::Error;
};
struct TooCloseToBoundary : Error {
    using Error::Error;
};
struct EigenSolveFailed : Error {
    using Error::Error;
};
struct SpuriousModes : Error {
    using Error::Error;
};
struct ModeOutOfRange : Error {
    using Error::Error;
};
struct GapScanFailed : Error {
    using Error::Error;
};
struct ClusterUnderResolved : Error {
    using Error::Error;
};
struct GapBelowNoiseFloor : Error {
    using Error::Error;
};
struct OutsideCollar : Error {
    using Error::Error;
};
struct NoStrategy : Error {
    using Error::Error;
};
struct ResolutionTooCoarse : Error {
    using Error::Error;
};
struct DiskOutsideDomain : Error {
    using Error::Error;
};
struct TooFewSamples : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace steklov
