#pragma once

#include <stdexcept>
#include <string>

namespace pulseframe {

// Every failure mode gets its own code; the CLI maps codes to process
// exit status 1:1, so keep the numeric values stable.
enum class ErrorCode : int {
    ZeroMean = 10,
    TooShort = 11,
    BandOutOfRange = 12,
    ZeroVariance = 13,
    SingularCovariance = 14,
    NoConvergence = 15,
    EmptyBand = 16,
    AlphaUndefined = 17,
    SigmaUndefined = 18,
    NoFeatures = 19,
    AllPointsLost = 20,
    TooFewTrajectories = 21,
    ZeroPower = 22,
    EmptySeries = 23,
    ParseError = 24,
    NonUniformSampling = 25,
    TruncatedFrame = 26,
    DimensionMismatch = 27,
    EmptyRoi = 28,
    ConfigError = 29,
    InvalidArgument = 30,
    IoError = 31,
    OutOfBounds = 32,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }
    const char* code_name() const { return error_code_name(code_); }
    int exit_code() const { return static_cast<int>(code_); }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace pulseframe
