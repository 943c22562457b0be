#include "pulseframe/quality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pulseframe/error.hpp"

namespace pulseframe::quality {

double estimate_hr(const Bvp& b, const FreqBand& band, std::size_t nfft) {
    const auto est = dsp::power_spectrum(b.trace, nfft);
    double best_power = -1.0;
    double best_freq = 0.0;
    for (std::size_t k = 0; k < est.freqs_hz.size(); ++k) {
        const double f = est.freqs_hz[k];
        if (f < band.low_hz || f > band.high_hz) continue;
        if (est.power[k] > best_power) {
            best_power = est.power[k];
            best_freq = f;
        }
    }
    if (best_power < 0.0)
        raise(ErrorCode::EmptyBand, "no spectral bin inside the band");
    return 60.0 * best_freq;
}

HrSeries hr_series(const Bvp& b, const FreqBand& band,
                   double window_s, double step_s) {
    const double fs = b.trace.fs;
    const auto windows = window_iter(b.trace.samples.size(), fs,
                                     WindowPlan{window_s, step_s});
    HrSeries out;
    for (const auto& [begin, end] : windows) {
        Bvp piece;
        piece.method = b.method;
        piece.trace = Trace{
            std::vector<double>(b.trace.samples.begin() + begin,
                                b.trace.samples.begin() + end),
            fs, b.trace.label};
        const std::size_t len = end - begin;
        const std::size_t nfft = dsp::next_pow2(std::max<std::size_t>(4 * len, 1024));
        out.bpm.push_back(estimate_hr(piece, band, nfft));
        out.t_s.push_back((static_cast<double>(begin) + static_cast<double>(len) / 2.0) / fs);
    }
    return out;
}

SnrReport snr(const Bvp& b, double gold_bpm, std::size_t nfft) {
    if (gold_bpm < 42.0 || gold_bpm > 120.0)
        raise(ErrorCode::InvalidArgument,
              "gold-standard rate must lie in [42, 120] BPM so the harmonic mask fits");
    const auto est = dsp::power_spectrum(b.trace, nfft);

    const double f_lo1 = (gold_bpm - 6.0) / 60.0, f_hi1 = (gold_bpm + 6.0) / 60.0;
    const double f_lo2 = (2.0 * gold_bpm - 12.0) / 60.0, f_hi2 = (2.0 * gold_bpm + 12.0) / 60.0;
    const double f_total = 240.0 / 60.0;

    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < est.freqs_hz.size(); ++k) {
        const double f = est.freqs_hz[k];
        if (f > f_total) break;
        den += est.power[k];
        // Union of the two mask intervals; overlap is not double-counted.
        if ((f >= f_lo1 && f <= f_hi1) || (f >= f_lo2 && f <= f_hi2))
            num += est.power[k];
    }
    if (den == 0.0)
        raise(ErrorCode::ZeroPower, "no spectral power below 240 BPM");

    SnrReport rep;
    rep.fraction = num / den;
    rep.gold_bpm = gold_bpm;
    if (rep.fraction <= 0.0)
        rep.db = -std::numeric_limits<double>::infinity();
    else if (rep.fraction >= 1.0)
        rep.db = std::numeric_limits<double>::infinity();
    else
        rep.db = 10.0 * std::log10(rep.fraction / (1.0 - rep.fraction));
    return rep;
}

namespace {

double nearest_ref(const HrSeries& ref, double t) {
    std::size_t best = 0;
    double best_d = std::abs(ref.t_s[0] - t);
    for (std::size_t i = 1; i < ref.t_s.size(); ++i) {
        const double d = std::abs(ref.t_s[i] - t);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return ref.bpm[best];
}

void check_series(const HrSeries& est, const HrSeries& ref) {
    if (est.t_s.empty() || est.bpm.size() != est.t_s.size())
        raise(ErrorCode::EmptySeries, "estimate series is empty or misaligned");
    if (ref.t_s.empty() || ref.bpm.size() != ref.t_s.size())
        raise(ErrorCode::EmptySeries, "reference series is empty or misaligned");
}

} // namespace

double mae(const HrSeries& est, const HrSeries& ref) {
    check_series(est, ref);
    double acc = 0.0;
    for (std::size_t i = 0; i < est.t_s.size(); ++i)
        acc += std::abs(est.bpm[i] - nearest_ref(ref, est.t_s[i]));
    return acc / static_cast<double>(est.t_s.size());
}

double rmse(const HrSeries& est, const HrSeries& ref) {
    check_series(est, ref);
    double acc = 0.0;
    for (std::size_t i = 0; i < est.t_s.size(); ++i) {
        const double d = est.bpm[i] - nearest_ref(ref, est.t_s[i]);
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(est.t_s.size()));
}

} // namespace pulseframe::quality
