#include "pulseframe/ippg.hpp"

#include <cmath>
#include <exception>
#include <iostream>
#include <mutex>

#include "pulseframe/error.hpp"
#include "pulseframe/parallel.hpp"

namespace pulseframe::ippg {

namespace {

constexpr int kFilterOrder = 3;
const WindowPlan kChromPlan{1.6, 0.8};
constexpr double kPosWindowSeconds = 1.6;

std::vector<double> slice(const std::vector<double>& x, std::size_t begin, std::size_t end) {
    return std::vector<double>(x.begin() + begin, x.begin() + end);
}

} // namespace

ChromWindowState chrom_window(const std::vector<double>& y_r,
                              const std::vector<double>& y_g,
                              const std::vector<double>& y_b) {
    const std::size_t n = y_r.size();
    if (y_g.size() != n || y_b.size() != n || n == 0)
        raise(ErrorCode::InvalidArgument, "chrominance window channels must align");

    ChromWindowState st;
    st.y_r = y_r;
    st.y_g = y_g;
    st.y_b = y_b;
    st.a_sig.resize(n);
    st.b_sig.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        st.a_sig[i] = 3.0 * y_r[i] - 2.0 * y_g[i];
        st.b_sig[i] = 1.5 * y_r[i] + y_g[i] - 1.5 * y_b[i];
    }
    const double std_a = dsp::sample_std(st.a_sig);
    const double std_b = dsp::sample_std(st.b_sig);
    if (std_b == 0.0)
        raise(ErrorCode::AlphaUndefined, "flat chrominance window: std of B is zero");
    st.alpha = std_a / std_b;

    st.s_win.resize(n);
    const double a = st.alpha;
    for (std::size_t i = 0; i < n; ++i)
        st.s_win[i] = 3.0 * (1.0 - a / 2.0) * y_r[i] - 2.0 * (1.0 + a / 2.0) * y_g[i] +
                      (3.0 * a / 2.0) * y_b[i];
    return st;
}

PosWindowState pos_window(const std::vector<double>& xbar_r,
                          const std::vector<double>& xbar_g,
                          const std::vector<double>& xbar_b) {
    const std::size_t n = xbar_r.size();
    if (xbar_g.size() != n || xbar_b.size() != n || n == 0)
        raise(ErrorCode::InvalidArgument, "plane-projection window channels must align");

    PosWindowState st;
    st.x_s.resize(n);
    st.y_s.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        st.x_s[i] = xbar_g[i] - xbar_b[i];
        st.y_s[i] = -2.0 * xbar_r[i] + xbar_g[i] + xbar_b[i];
    }
    st.sigma_x = dsp::sample_std(st.x_s);
    st.sigma_y = dsp::sample_std(st.y_s);

    st.s_win.assign(n, 0.0);
    if (st.sigma_y == 0.0) {
        if (st.sigma_x == 0.0)
            return st; // degenerate window contributes nothing
        raise(ErrorCode::SigmaUndefined,
              "projection ratio undefined: sigma(Y) is zero with signal left in X");
    }
    const double ratio = st.sigma_x / st.sigma_y;
    for (std::size_t i = 0; i < n; ++i)
        st.s_win[i] = st.x_s[i] + ratio * st.y_s[i];
    return st;
}

Bvp green(const RgbTrace& x, const FreqBand& band) {
    x.validate();
    const auto coeffs = dsp::butter_bandpass(kFilterOrder, band, x.fs());
    Bvp out;
    out.trace = Trace{dsp::filtfilt(coeffs, x.g.samples), x.fs(), "bvp"};
    out.method = Method::Green;
    return out;
}

Bvp ica_pulse(const RgbTrace& x, const FreqBand& band, const dsp::DetrendConfig& cfg) {
    x.validate();
    const double fs = x.fs();

    std::vector<std::vector<double>> prepared;
    for (const Trace* ch : {&x.r, &x.g, &x.b}) {
        if (dsp::sample_std(ch->samples) == 0.0)
            raise(ErrorCode::ZeroVariance,
                  "channel '" + ch->label + "' is constant; nothing to unmix");
        prepared.push_back(dsp::zscore(dsp::detrend_sp(ch->samples, cfg)));
    }

    sep::SourceSet sources = sep::jade(prepared, fs);
    if (!sources.converged)
        std::cerr << "warning: source separation did not converge; "
                     "using the best available unmixing\n";

    const auto coeffs = dsp::butter_bandpass(kFilterOrder, band, fs);
    for (auto& s : sources.sources)
        s = dsp::filtfilt(coeffs, s);

    const auto choice = sep::select_source(sources, band, sep::SpectrumKind::Fft,
                                           sources.sources.size());
    Bvp out;
    out.trace = Trace{sources.sources[choice.index], fs, "bvp"};
    out.method = Method::Ica;
    return out;
}

Bvp chrom(const RgbTrace& x, const FreqBand& band) {
    x.validate();
    const double fs = x.fs();
    const std::size_t n = x.size();
    const auto coeffs = dsp::butter_bandpass(kFilterOrder, band, fs);

    // Windows are cut from the raw channels: the per-window mean captures the
    // baseline, so normalization leaves 1 + (pulsatile fraction). Band-passing
    // the channels first would zero those means and the alpha-tuned
    // combination would cancel the pulse itself.
    const auto windows = window_iter(n, fs, kChromPlan);
    const std::size_t win_len = windows.front().second - windows.front().first;
    const std::vector<double> taper = dsp::hann(win_len);

    std::vector<std::vector<double>> pieces(windows.size());
    std::vector<std::size_t> starts(windows.size());
    std::exception_ptr first_error;
    std::mutex error_mu;
    parallel_for(windows.size(), [&](std::size_t w) {
        try {
            const auto [begin, end] = windows[w];
            starts[w] = begin;
            const auto y_r =
                dsp::filtfilt(coeffs, normalize_window(slice(x.r.samples, begin, end)));
            const auto y_g =
                dsp::filtfilt(coeffs, normalize_window(slice(x.g.samples, begin, end)));
            const auto y_b =
                dsp::filtfilt(coeffs, normalize_window(slice(x.b.samples, begin, end)));
            ChromWindowState st = chrom_window(y_r, y_g, y_b);
            for (std::size_t i = 0; i < st.s_win.size(); ++i)
                st.s_win[i] *= taper[i];
            pieces[w] = std::move(st.s_win);
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mu);
            if (!first_error) first_error = std::current_exception();
        }
    });
    if (first_error) std::rethrow_exception(first_error);

    Bvp out;
    out.trace = Trace{dsp::overlap_add(pieces, starts, n), fs, "bvp"};
    out.method = Method::Chrom;
    return out;
}

Bvp pos_windowed(const RgbTrace& x, const FreqBand& band,
                 const WindowPlan& plan, bool subtract_window_mean) {
    x.validate();
    const double fs = x.fs();
    const std::size_t n = x.size();

    const auto windows = window_iter(n, fs, plan);
    std::vector<std::vector<double>> pieces(windows.size());
    std::vector<std::size_t> starts(windows.size());
    std::exception_ptr first_error;
    std::mutex error_mu;
    parallel_for(windows.size(), [&](std::size_t w) {
        try {
            const auto [begin, end] = windows[w];
            starts[w] = begin;
            const auto nr = normalize_window(slice(x.r.samples, begin, end));
            const auto ng = normalize_window(slice(x.g.samples, begin, end));
            const auto nb = normalize_window(slice(x.b.samples, begin, end));
            PosWindowState st = pos_window(nr, ng, nb);
            if (subtract_window_mean) {
                const double m = dsp::mean(st.s_win);
                for (double& v : st.s_win) v -= m;
            }
            pieces[w] = std::move(st.s_win);
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mu);
            if (!first_error) first_error = std::current_exception();
        }
    });
    if (first_error) std::rethrow_exception(first_error);

    std::vector<double> combined = dsp::overlap_add(pieces, starts, n);
    const auto coeffs = dsp::butter_bandpass(kFilterOrder, band, fs);

    Bvp out;
    out.trace = Trace{dsp::filtfilt(coeffs, combined), fs, "bvp"};
    out.method = Method::Pos;
    return out;
}

Bvp pos(const RgbTrace& x, const FreqBand& band) {
    const WindowPlan plan{kPosWindowSeconds, 1.0 / x.fs()};
    return pos_windowed(x, band, plan, true);
}

} // namespace pulseframe::ippg
