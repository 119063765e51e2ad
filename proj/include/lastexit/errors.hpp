#pragma once

#include <stdexcept>
#include <string>

namespace lastexit {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidRange : Error {
    using Error::Error;
};

struct RangeTooWide : Error {
    using Error::Error;
};

struct EmbeddingFailed : Error {
    using Error::Error;
};

struct UnknownPickandsConstant : Error {
    using Error::Error;
};

struct InvalidSampleSize : Error {
    using Error::Error;
};

struct MonotonicityViolated : Error {
    using Error::Error;
};

struct NotPSD : Error {
    using Error::Error;
};

struct PreconditionViolated : Error {
    using Error::Error;
};

struct TooFewSamples : Error {
    using Error::Error;
};

struct ConfigInvalid : Error {
    using Error::Error;
};

} // namespace lastexit
