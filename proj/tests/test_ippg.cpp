#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pulseframe/error.hpp"
#include "pulseframe/ippg.hpp"
#include "pulseframe/quality.hpp"
#include "support/synth.hpp"
#include "support/testrng.hpp"

using namespace pulseframe;

namespace {

// Brute-force transcription of the chrominance-combination equations, kept
// deliberately separate from the implementation: every quantity is recomputed
// from scratch with its own arithmetic.
struct ChromBrute {
    std::vector<double> s;
    double alpha;
};

ChromBrute chrom_brute(const std::vector<double>& yr, const std::vector<double>& yg,
                       const std::vector<double>& yb) {
    const std::size_t n = yr.size();
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = 3.0 * yr[i] - 2.0 * yg[i];
        b[i] = 1.5 * yr[i] + yg[i] - 1.5 * yb[i];
    }
    auto stdev = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        double acc = 0.0;
        for (double x : v) acc += (x - m) * (x - m);
        return std::sqrt(acc / static_cast<double>(v.size() - 1));
    };
    const double alpha = stdev(a) / stdev(b);
    // S = A - alpha * B, the expanded combination written the other way.
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i)
        s[i] = a[i] - alpha * b[i];
    return {s, alpha};
}

struct PosBrute {
    std::vector<double> s;
    double sigma_x, sigma_y;
};

PosBrute pos_brute(const std::vector<double>& xr, const std::vector<double>& xg,
                   const std::vector<double>& xb) {
    const std::size_t n = xr.size();
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = xg[i] - xb[i];
        ys[i] = -2.0 * xr[i] + xg[i] + xb[i];
    }
    auto stdev = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        double acc = 0.0;
        for (double x : v) acc += (x - m) * (x - m);
        return std::sqrt(acc / static_cast<double>(v.size() - 1));
    };
    const double sx = stdev(xs), sy = stdev(ys);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i)
        s[i] = xs[i] + (sx / sy) * ys[i];
    return {s, sx, sy};
}

std::vector<double> seeded_vector(std::uint64_t seed, std::size_t n, double offset) {
    testsupport::Rng rng(seed);
    std::vector<double> out(n);
    for (auto& v : out) v = offset + rng.gauss();
    return out;
}

constexpr double kHrTolBpm = 2.0;

} // namespace

TEST_CASE("chrom_window matches the brute-force equation transcription") {
    const std::size_t n = 48;
    const auto yr = seeded_vector(101, n, 0.0);
    const auto yg = seeded_vector(102, n, 0.0);
    const auto yb = seeded_vector(103, n, 0.0);

    const auto st = ippg::chrom_window(yr, yg, yb);
    const auto brute = chrom_brute(yr, yg, yb);

    CHECK(st.alpha == doctest::Approx(brute.alpha).epsilon(1e-12));
    for (std::size_t i = 0; i < n; ++i)
        CHECK(st.s_win[i] == doctest::Approx(brute.s[i]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("chrom_window collapses as expected when alpha is one") {
    const auto u = seeded_vector(104, 48, 0.0);
    const auto st = ippg::chrom_window(u, u, u);
    CHECK(st.alpha == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double expect = 1.5 * u[i] - 3.0 * u[i] + 1.5 * u[i];
        CHECK(st.s_win[i] == doctest::Approx(expect).scale(1.0).epsilon(1e-12));
    }
}

TEST_CASE("chrom_window flags a flat chrominance window") {
    const std::vector<double> z(48, 0.0);
    try {
        ippg::chrom_window(z, z, z);
        FAIL("expected AlphaUndefined");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::AlphaUndefined);
    }
}

TEST_CASE("pos_window matches the brute-force equation transcription") {
    const std::size_t n = 48;
    const auto xr = seeded_vector(111, n, 1.0);
    const auto xg = seeded_vector(112, n, 1.0);
    const auto xb = seeded_vector(113, n, 1.0);

    const auto st = ippg::pos_window(xr, xg, xb);
    const auto brute = pos_brute(xr, xg, xb);

    CHECK(st.sigma_x == doctest::Approx(brute.sigma_x).epsilon(1e-12));
    CHECK(st.sigma_y == doctest::Approx(brute.sigma_y).epsilon(1e-12));
    for (std::size_t i = 0; i < n; ++i)
        CHECK(st.s_win[i] == doctest::Approx(brute.s[i]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("pos_window degenerate sigmas") {
    const std::vector<double> ones(48, 1.0);
    const auto st = ippg::pos_window(ones, ones, ones);
    CHECK(st.sigma_x == 0.0);
    CHECK(st.sigma_y == 0.0);
    for (double v : st.s_win) CHECK(v == 0.0);

    // sigma_y zero while x_s still varies cannot be projected.
    std::vector<double> vary(48, 1.0);
    for (std::size_t i = 0; i < vary.size(); ++i) vary[i] += 0.01 * static_cast<double>(i % 5);
    // Choose channels so y_s = -2r + g + b is constant but x_s = g - b varies.
    std::vector<double> r(48, 1.0), g = vary, b(48);
    for (std::size_t i = 0; i < 48; ++i) b[i] = 2.0 * r[i] - g[i]; // forces y_s == 0
    try {
        ippg::pos_window(r, g, b);
        FAIL("expected SigmaUndefined");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SigmaUndefined);
    }
}

TEST_CASE("green recovers a drifting tone") {
    const double fs = 30.0;
    const auto tone = testsupport::sine(fs, 60.0, 1.2);
    std::vector<double> g(tone.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = 100.0 + tone[i] + 0.05 * static_cast<double>(i) / fs;
    RgbTrace x{Trace{std::vector<double>(g.size(), 90.0), fs, "r"}, Trace{g, fs, "g"},
               Trace{std::vector<double>(g.size(), 80.0), fs, "b"}};

    const auto bvp = ippg::green(x, FreqBand{});
    REQUIRE(bvp.method == Method::Green);
    REQUIRE(bvp.trace.samples.size() == g.size());

    std::vector<double> mid_out(bvp.trace.samples.begin() + 200, bvp.trace.samples.end() - 200);
    std::vector<double> mid_tone(tone.begin() + 200, tone.end() - 200);
    CHECK(testsupport::correlation(mid_out, mid_tone) >= 0.99);
}

TEST_CASE("green rejects DC input") {
    const double fs = 30.0;
    RgbTrace x{Trace{std::vector<double>(600, 10.0), fs, "r"},
               Trace{std::vector<double>(600, 20.0), fs, "g"},
               Trace{std::vector<double>(600, 30.0), fs, "b"}};
    const auto bvp = ippg::green(x, FreqBand{});
    double mid_max = 0.0;
    for (std::size_t i = 200; i < 400; ++i)
        mid_max = std::max(mid_max, std::abs(bvp.trace.samples[i]));
    CHECK(mid_max < 1e-6);
}

TEST_CASE("green depends only on the green channel") {
    auto x = testsupport::make_pulse_rgb(7);
    const auto before = ippg::green(x, FreqBand{});
    for (auto& v : x.r.samples) v = 55.5;
    for (auto& v : x.b.samples) v *= -3.0;
    const auto after = ippg::green(x, FreqBand{});
    CHECK(before.trace.samples == after.trace.samples); // bit-for-bit
}

TEST_CASE("ica_pulse recovers an embedded tone at 72 BPM") {
    testsupport::PulseTraceParams p;
    p.pulse_hz = 1.2;
    p.gain_r = 0.3;
    p.gain_g = 1.0;
    p.gain_b = 0.5;
    const auto x = testsupport::make_pulse_rgb(21, p);
    const auto bvp = ippg::ica_pulse(x, FreqBand{});
    CHECK(bvp.method == Method::Ica);
    const double hr = quality::estimate_hr(bvp, FreqBand{}, 4096);
    CHECK(std::abs(hr - 72.0) <= kHrTolBpm);
}

TEST_CASE("ica_pulse survives pure-noise channels") {
    const double fs = 30.0;
    const std::size_t n = 1800;
    RgbTrace x{Trace{testsupport::white_noise(31, n, 1.0), fs, "r"},
               Trace{testsupport::white_noise(32, n, 1.0), fs, "g"},
               Trace{testsupport::white_noise(33, n, 1.0), fs, "b"}};
    for (auto* t : {&x.r, &x.g, &x.b})
        for (auto& v : t->samples) v += 100.0;
    const auto bvp = ippg::ica_pulse(x, FreqBand{});
    REQUIRE(bvp.trace.samples.size() == n);
    // Nothing periodic to find: the normalized peak-power score stays low.
    const auto est = dsp::power_spectrum(bvp.trace, 4096);
    double total = 0.0, peak = 0.0;
    for (std::size_t k = 0; k < est.freqs_hz.size(); ++k) {
        total += est.power[k];
        if (est.freqs_hz[k] >= 0.7 && est.freqs_hz[k] <= 2.5)
            peak = std::max(peak, est.power[k]);
    }
    CHECK(peak / total < 0.2);
}

TEST_CASE("ica_pulse surfaces ZeroVariance on constant channels") {
    const double fs = 30.0;
    RgbTrace x{Trace{std::vector<double>(900, 1.0), fs, "r"},
               Trace{std::vector<double>(900, 2.0), fs, "g"},
               Trace{std::vector<double>(900, 3.0), fs, "b"}};
    try {
        ippg::ica_pulse(x, FreqBand{});
        FAIL("expected ZeroVariance");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroVariance);
    }
}

TEST_CASE("chrom recovers the pulsatile synthetic at 90 BPM") {
    const auto x = testsupport::make_pulse_rgb(5);
    const auto bvp = ippg::chrom(x, FreqBand{});
    CHECK(bvp.method == Method::Chrom);
    CHECK(bvp.trace.samples.size() == x.size());
    const double hr = quality::estimate_hr(bvp, FreqBand{}, 4096);
    CHECK(std::abs(hr - 90.0) <= kHrTolBpm);
}

TEST_CASE("chrom needs one full window") {
    const double fs = 30.0;
    RgbTrace x{Trace{std::vector<double>(47, 1.0), fs, "r"},
               Trace{std::vector<double>(47, 2.0), fs, "g"},
               Trace{std::vector<double>(47, 3.0), fs, "b"}};
    try {
        ippg::chrom(x, FreqBand{});
        FAIL("expected TooShort");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TooShort);
    }
}

TEST_CASE("pos yields zero on constant equal channels") {
    const double fs = 30.0;
    RgbTrace x{Trace{std::vector<double>(300, 50.0), fs, "r"},
               Trace{std::vector<double>(300, 50.0), fs, "g"},
               Trace{std::vector<double>(300, 50.0), fs, "b"}};
    const auto bvp = ippg::pos(x, FreqBand{});
    for (double v : bvp.trace.samples) CHECK(std::abs(v) < 1e-9);
}

TEST_CASE("pos recovers the pulsatile synthetic at 90 BPM") {
    const auto x = testsupport::make_pulse_rgb(5);
    const auto bvp = ippg::pos(x, FreqBand{});
    CHECK(bvp.method == Method::Pos);
    CHECK(bvp.trace.samples.size() == x.size());
    const double hr = quality::estimate_hr(bvp, FreqBand{}, 4096);
    CHECK(std::abs(hr - 90.0) <= kHrTolBpm);
}

TEST_CASE("pos with step equal to window length concatenates window outputs") {
    // Two-window brute force with no mean subtraction.
    const double fs = 30.0;
    const std::size_t L = 48;
    const auto x = testsupport::make_pulse_rgb(13, [] {
        testsupport::PulseTraceParams p;
        p.secs = 3.2;
        return p;
    }());
    const WindowPlan plan{1.6, 1.6};
    const auto got = ippg::pos_windowed(x, FreqBand{}, plan, false);

    std::vector<double> expect(x.size(), 0.0);
    for (std::size_t w = 0; w < 2; ++w) {
        const std::size_t b = w * L;
        const auto nr = normalize_window(
            std::vector<double>(x.r.samples.begin() + b, x.r.samples.begin() + b + L));
        const auto ng = normalize_window(
            std::vector<double>(x.g.samples.begin() + b, x.g.samples.begin() + b + L));
        const auto nb = normalize_window(
            std::vector<double>(x.b.samples.begin() + b, x.b.samples.begin() + b + L));
        const auto brute = pos_brute(nr, ng, nb);
        for (std::size_t i = 0; i < L; ++i) expect[b + i] = brute.s[i];
    }
    const auto coeffs = dsp::butter_bandpass(3, FreqBand{}, fs);
    expect = dsp::filtfilt(coeffs, expect);
    for (std::size_t i = 0; i < expect.size(); ++i)
        CHECK(got.trace.samples[i] == doctest::Approx(expect[i]).epsilon(1e-9).scale(1.0));
}

TEST_CASE("per-channel positive gain leaves chrom and pos unchanged") {
    const auto x = testsupport::make_pulse_rgb(29);
    auto scaled = x;
    for (auto& v : scaled.r.samples) v *= 3.7;

    const auto chrom_a = ippg::chrom(x, FreqBand{});
    const auto chrom_b = ippg::chrom(scaled, FreqBand{});
    const auto pos_a = ippg::pos(x, FreqBand{});
    const auto pos_b = ippg::pos(scaled, FreqBand{});
    double chrom_scale = 0.0, pos_scale = 0.0;
    for (double v : chrom_a.trace.samples) chrom_scale = std::max(chrom_scale, std::abs(v));
    for (double v : pos_a.trace.samples) pos_scale = std::max(pos_scale, std::abs(v));
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(std::abs(chrom_a.trace.samples[i] - chrom_b.trace.samples[i]) <=
              1e-9 * chrom_scale);
        CHECK(std::abs(pos_a.trace.samples[i] - pos_b.trace.samples[i]) <= 1e-9 * pos_scale);
    }

    // The single-channel method scales along with its channel.
    auto gscaled = x;
    for (auto& v : gscaled.g.samples) v *= 2.0;
    const auto green_a = ippg::green(x, FreqBand{});
    const auto green_b = ippg::green(gscaled, FreqBand{});
    for (std::size_t i = 100; i < 200; ++i)
        CHECK(green_b.trace.samples[i] ==
              doctest::Approx(2.0 * green_a.trace.samples[i]).epsilon(1e-9));
}

TEST_CASE("methods are deterministic run to run") {
    const auto x = testsupport::make_pulse_rgb(3);
    CHECK(ippg::green(x, FreqBand{}).trace.samples == ippg::green(x, FreqBand{}).trace.samples);
    CHECK(ippg::chrom(x, FreqBand{}).trace.samples == ippg::chrom(x, FreqBand{}).trace.samples);
    CHECK(ippg::pos(x, FreqBand{}).trace.samples == ippg::pos(x, FreqBand{}).trace.samples);
    CHECK(ippg::ica_pulse(x, FreqBand{}).trace.samples ==
          ippg::ica_pulse(x, FreqBand{}).trace.samples);
}
