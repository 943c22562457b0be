#pragma once

#include <cstddef>
#include <vector>

#include "pulseframe/dsp.hpp"
#include "pulseframe/types.hpp"

namespace pulseframe::quality {

struct HrSeries {
    std::vector<double> t_s;  // window-center times
    std::vector<double> bpm;
};

struct SnrReport {
    double fraction = 0.0;  // in-mask power over total power in 0-240 BPM
    double db = 0.0;        // 10*log10(fraction / (1 - fraction))
    double gold_bpm = 0.0;
};

/// 60 x argmax frequency of the band-restricted power spectrum.
double estimate_hr(const Bvp& b, const FreqBand& band, std::size_t nfft);

/// estimate_hr over sliding windows; times are window centers.
HrSeries hr_series(const Bvp& b, const FreqBand& band,
                   double window_s, double step_s);

/// Fraction of spectral power within 6 BPM of the gold-standard rate plus
/// 12 BPM of its first harmonic, over the power in 0-240 BPM. Overlapping
/// mask intervals are unioned, not double-counted.
SnrReport snr(const Bvp& b, double gold_bpm, std::size_t nfft);

/// Mean absolute error in BPM; the reference is resampled to the estimate's
/// times by nearest neighbor.
double mae(const HrSeries& est, const HrSeries& ref);

/// Root mean squared error in BPM, aligned as in mae().
double rmse(const HrSeries& est, const HrSeries& ref);

} // namespace pulseframe::quality
