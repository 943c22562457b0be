#pragma once

#include <vector>

#include "pulseframe/dsp.hpp"
#include "pulseframe/separation.hpp"
#include "pulseframe/types.hpp"

namespace pulseframe::ippg {

/// Per-window intermediates of the chrominance method. y_* are the
/// normalized, re-filtered channel windows the combination runs on.
struct ChromWindowState {
    std::vector<double> y_r, y_g, y_b;
    std::vector<double> a_sig; // 3*y_r - 2*y_g
    std::vector<double> b_sig; // 1.5*y_r + y_g - 1.5*y_b
    double alpha = 0.0;        // std(a_sig) / std(b_sig)
    std::vector<double> s_win;
};

/// Per-window intermediates of the orthogonal-plane method.
struct PosWindowState {
    std::vector<double> x_s; // xg - xb
    std::vector<double> y_s; // -2*xr + xg + xb
    double sigma_x = 0.0;
    double sigma_y = 0.0;
    std::vector<double> s_win;
};

/// Chrominance combination on prepared (normalized + filtered) windows.
/// AlphaUndefined when std(b_sig) is zero.
ChromWindowState chrom_window(const std::vector<double>& y_r,
                              const std::vector<double>& y_g,
                              const std::vector<double>& y_b);

/// Orthogonal-plane combination on mean-normalized windows. A window with
/// sigma_x == sigma_y == 0 contributes zeros; sigma_y == 0 with signal left
/// in x_s is SigmaUndefined.
PosWindowState pos_window(const std::vector<double>& xbar_r,
                          const std::vector<double>& xbar_g,
                          const std::vector<double>& xbar_b);

/// Band-pass filtered green channel.
Bvp green(const RgbTrace& x, const FreqBand& band);

/// Detrend + z-score each channel, unmix with JADE, band-pass the sources
/// and keep the one with the strongest normalized spectral peak.
Bvp ica_pulse(const RgbTrace& x, const FreqBand& band,
              const dsp::DetrendConfig& cfg = {});

/// Chrominance method: band-pass the full channels, then per 1.6 s window
/// (0.8 s step) normalize by the window mean, filter again, combine, taper
/// with a Hann window and overlap-add.
Bvp chrom(const RgbTrace& x, const FreqBand& band);

/// Orthogonal-plane method with an explicit window plan; pos() uses 1.6 s
/// windows stepped one frame. Each window is mean-normalized per channel,
/// combined, optionally mean-subtracted, and accumulated without taper; the
/// reconstruction is band-pass filtered at the end.
Bvp pos_windowed(const RgbTrace& x, const FreqBand& band,
                 const WindowPlan& plan, bool subtract_window_mean);

Bvp pos(const RgbTrace& x, const FreqBand& band);

} // namespace pulseframe::ippg
