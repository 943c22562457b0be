#include "pulseframe/types.hpp"

#include <cfenv>
#include <cmath>
#include <cstdlib>

#include "pulseframe/error.hpp"

namespace pulseframe {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::ZeroMean: return "ZeroMean";
        case ErrorCode::TooShort: return "TooShort";
        case ErrorCode::BandOutOfRange: return "BandOutOfRange";
        case ErrorCode::ZeroVariance: return "ZeroVariance";
        case ErrorCode::SingularCovariance: return "SingularCovariance";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::EmptyBand: return "EmptyBand";
        case ErrorCode::AlphaUndefined: return "AlphaUndefined";
        case ErrorCode::SigmaUndefined: return "SigmaUndefined";
        case ErrorCode::NoFeatures: return "NoFeatures";
        case ErrorCode::AllPointsLost: return "AllPointsLost";
        case ErrorCode::TooFewTrajectories: return "TooFewTrajectories";
        case ErrorCode::ZeroPower: return "ZeroPower";
        case ErrorCode::EmptySeries: return "EmptySeries";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::NonUniformSampling: return "NonUniformSampling";
        case ErrorCode::TruncatedFrame: return "TruncatedFrame";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::EmptyRoi: return "EmptyRoi";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::OutOfBounds: return "OutOfBounds";
    }
    return "Unknown";
}

void Trace::validate() const {
    if (!(fs > 0.0))
        raise(ErrorCode::InvalidArgument, "trace sampling rate must be positive");
    if (samples.size() < 2)
        raise(ErrorCode::InvalidArgument, "trace needs at least 2 samples");
    for (double v : samples)
        if (!std::isfinite(v))
            raise(ErrorCode::InvalidArgument, "trace contains a non-finite sample");
}

void RgbTrace::validate() const {
    r.validate();
    g.validate();
    b.validate();
    if (r.samples.size() != g.samples.size() || g.samples.size() != b.samples.size())
        raise(ErrorCode::InvalidArgument, "channel lengths differ");
    if (r.fs != g.fs || g.fs != b.fs)
        raise(ErrorCode::InvalidArgument, "channel sampling rates differ");
}

void FreqBand::validate_for(double fs) const {
    if (!(fs > 0.0))
        raise(ErrorCode::InvalidArgument, "sampling rate must be positive");
    if (!(low_hz > 0.0) || !(low_hz < high_hz))
        raise(ErrorCode::InvalidArgument, "band edges must satisfy 0 < low < high");
    if (high_hz >= fs / 2.0)
        raise(ErrorCode::BandOutOfRange,
              "band high edge reaches Nyquist (fs/2 = " + std::to_string(fs / 2.0) + " Hz)");
}

const char* method_name(Method m) {
    switch (m) {
        case Method::Green: return "green";
        case Method::Ica: return "ica";
        case Method::Chrom: return "chrom";
        case Method::Pos: return "pos";
        case Method::Ibcg: return "ibcg";
    }
    return "?";
}

Method method_from_name(const std::string& name) {
    if (name == "green") return Method::Green;
    if (name == "ica") return Method::Ica;
    if (name == "chrom") return Method::Chrom;
    if (name == "pos") return Method::Pos;
    if (name == "ibcg") return Method::Ibcg;
    raise(ErrorCode::ConfigError, "unknown method '" + name + "'");
}

std::vector<double> normalize_window(const std::vector<double>& w) {
    if (w.empty())
        raise(ErrorCode::InvalidArgument, "cannot normalize an empty window");
    double sum = 0.0;
    double peak = 0.0;
    for (double v : w) {
        sum += v;
        peak = std::max(peak, std::abs(v));
    }
    const double m = sum / static_cast<double>(w.size());
    if (std::abs(m) <= 1e-12 * peak)
        raise(ErrorCode::ZeroMean, "window mean is negligible; invalid region");
    std::vector<double> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        out[i] = w[i] / m;
    return out;
}

std::size_t seconds_to_samples(double seconds, double fs) {
    // nearbyint under the default rounding mode: ties go to even, so
    // fractional rates like 29.97 give one deterministic answer.
    const double n = std::nearbyint(seconds * fs);
    return n < 0 ? 0 : static_cast<std::size_t>(n);
}

std::vector<std::pair<std::size_t, std::size_t>>
window_iter(std::size_t n_samples, double fs, const WindowPlan& plan) {
    if (!(plan.step_s > 0.0) || plan.step_s > plan.length_s)
        raise(ErrorCode::InvalidArgument, "window plan needs 0 < step <= length");
    const std::size_t len = seconds_to_samples(plan.length_s, fs);
    const std::size_t step = seconds_to_samples(plan.step_s, fs);
    if (len == 0 || step == 0)
        raise(ErrorCode::InvalidArgument, "window plan rounds to zero samples");
    if (n_samples < len)
        raise(ErrorCode::TooShort,
              "signal of " + std::to_string(n_samples) + " samples is shorter than one " +
                  std::to_string(len) + "-sample window");
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t start = 0; start + len <= n_samples; start += step)
        out.emplace_back(start, start + len);
    return out;
}

} // namespace pulseframe
