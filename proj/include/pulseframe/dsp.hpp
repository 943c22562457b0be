#pragma once

#include <cstddef>
#include <vector>

#include "pulseframe/types.hpp"

namespace pulseframe::dsp {

/// IIR transfer function coefficients, a[0] == 1.
struct IirCoeffs {
    std::vector<double> b;
    std::vector<double> a;

    std::size_t order_taps() const { return a.size() - 1; }
};

struct SpectralEstimate {
    std::vector<double> freqs_hz;
    std::vector<double> power;
};

struct DetrendConfig {
    double lambda = 100.0;
};

double mean(const std::vector<double>& x);
/// Sample standard deviation (n-1 denominator); 0 for n < 2.
double sample_std(const std::vector<double>& x);

std::size_t next_pow2(std::size_t n);

/// Band-pass Butterworth of the given order: analog prototype, frequency
/// pre-warping, bilinear transform. Resulting b/a each have 2*order+1 taps.
IirCoeffs butter_bandpass(int order, const FreqBand& band, double fs);

/// Squared magnitude of the analog-prototype response the bilinear transform
/// preserves; used to cross-check designed coefficients.
double butter_bandpass_mag2(int order, const FreqBand& band, double fs, double freq_hz);

/// |H(e^{j 2 pi f / fs})| evaluated from the coefficients.
double magnitude_response(const IirCoeffs& c, double freq_hz, double fs);

/// Single forward pass, direct form II transposed, zero initial state.
std::vector<double> lfilter(const IirCoeffs& c, const std::vector<double>& x);

/// Zero-phase filtering: odd-reflection padding of 3*(len(a)-1) samples,
/// forward pass then time-reversed pass with steady-state initial conditions,
/// run in both orders and averaged so the result is exactly time-reversal
/// symmetric. Output length equals input length.
std::vector<double> filtfilt(const IirCoeffs& c, const std::vector<double>& x);

/// Smoothness-priors detrending: returns x minus the smooth trend
/// (I + lambda^2 D2' D2)^-1 x, solved on the pentadiagonal system directly.
std::vector<double> detrend_sp(const std::vector<double>& x, const DetrendConfig& cfg);

/// Zero mean, unit sample standard deviation. ZeroVariance on constant input.
std::vector<double> zscore(const std::vector<double>& x);

/// One-sided squared-magnitude spectrum of the mean-removed, zero-padded
/// signal. Scaled so the bin sum equals the mean-removed signal energy.
/// Bin k sits at k*fs/nfft for k = 0..nfft/2. nfft must be a power of two
/// and at least the signal length.
SpectralEstimate power_spectrum(const Trace& x, std::size_t nfft);

/// Default analysis grid for lomb(): [0.5, 4.0] Hz in 0.01 Hz steps.
std::vector<double> lomb_default_grid();

/// Classical normalized Lomb-Scargle periodogram with the per-frequency
/// time offset tau; valid for unevenly sampled input.
SpectralEstimate lomb(const std::vector<double>& times_s,
                      const std::vector<double>& x,
                      const std::vector<double>& freqs_hz);

/// Periodic Hann window w[k] = 0.5*(1 - cos(2 pi k / n)).
std::vector<double> hann(std::size_t n);

/// Accumulates each window into a zero-initialized buffer at its start index.
std::vector<double> overlap_add(const std::vector<std::vector<double>>& windows,
                                const std::vector<std::size_t>& starts,
                                std::size_t total_len);

/// In-place radix-2 FFT over interleaved (re, im) pairs; n a power of two.
void fft_pow2(std::vector<double>& re, std::vector<double>& im);

} // namespace pulseframe::dsp
