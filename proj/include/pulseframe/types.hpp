#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pulseframe/error.hpp"

namespace pulseframe {

/// A single uniformly sampled real-valued signal.
struct Trace {
    std::vector<double> samples;
    double fs = 0.0; // Hz
    std::string label;

    std::size_t size() const { return samples.size(); }
    double duration_s() const { return fs > 0 ? static_cast<double>(samples.size()) / fs : 0.0; }

    /// Throws InvalidArgument unless fs > 0, length >= 2 and all samples finite.
    void validate() const;
};

/// Three aligned per-frame channel averages sharing one sampling rate.
struct RgbTrace {
    Trace r, g, b;

    double fs() const { return g.fs; }
    std::size_t size() const { return g.samples.size(); }

    /// Equal lengths, equal rates, per-channel validity.
    void validate() const;
};

struct FreqBand {
    double low_hz = 0.7;
    double high_hz = 2.5;

    /// 0 < low < high < fs/2; BandOutOfRange when the band collides with Nyquist.
    void validate_for(double fs) const;
};

/// Sliding-window geometry in seconds; converted to samples at point of use.
struct WindowPlan {
    double length_s = 1.6;
    double step_s = 0.8;
};

enum class RoiKind { WholeFrame, Rectangle, SkinMask };

struct Roi {
    RoiKind kind = RoiKind::WholeFrame;
    // Rectangle geometry, in pixels; ignored for the other kinds.
    int x = 0, y = 0, w = 0, h = 0;
};

enum class Method { Green, Ica, Chrom, Pos, Ibcg };

const char* method_name(Method m);
Method method_from_name(const std::string& name);

/// Recovered blood volume pulse waveform plus the method that produced it.
struct Bvp {
    Trace trace;
    Method method = Method::Green;
};

/// Divides a window by its mean so the result has mean exactly 1.
/// ZeroMean when the mean is negligible relative to the peak magnitude
/// (an all-dark or otherwise invalid region).
std::vector<double> normalize_window(const std::vector<double>& w);

/// Nearest-integer sample count for a duration, ties to even.
std::size_t seconds_to_samples(double seconds, double fs);

/// Full [start, end) windows of round(length_s*fs) samples spaced
/// round(step_s*fs) apart. Trailing samples that do not fill a final
/// window are dropped. TooShort when not even one window fits.
std::vector<std::pair<std::size_t, std::size_t>>
window_iter(std::size_t n_samples, double fs, const WindowPlan& plan);

} // namespace pulseframe
