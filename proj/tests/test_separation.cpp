#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "pulseframe/error.hpp"
#include "pulseframe/separation.hpp"
#include "support/synth.hpp"
#include "support/testrng.hpp"

using namespace pulseframe;
using testsupport::correlation;

namespace {

std::vector<std::vector<double>> sample_cov(const std::vector<std::vector<double>>& x) {
    const std::size_t k = x.size(), t = x.front().size();
    std::vector<double> means(k, 0.0);
    for (std::size_t i = 0; i < k; ++i)
        for (double v : x[i]) means[i] += v / static_cast<double>(t);
    std::vector<std::vector<double>> cov(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            double acc = 0.0;
            for (std::size_t s = 0; s < t; ++s)
                acc += (x[i][s] - means[i]) * (x[j][s] - means[j]);
            cov[i][j] = acc / static_cast<double>(t - 1);
        }
    return cov;
}

// Greedy permutation match: best |corr| pairing between recovered and truth.
double min_matched_corr(const std::vector<std::vector<double>>& rec,
                        const std::vector<std::vector<double>>& truth) {
    const std::size_t k = truth.size();
    std::vector<bool> used(rec.size(), false);
    double worst = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        double best = -1.0;
        std::size_t best_j = 0;
        for (std::size_t j = 0; j < rec.size(); ++j) {
            if (used[j]) continue;
            const double c = std::abs(correlation(truth[i], rec[j]));
            if (c > best) {
                best = c;
                best_j = j;
            }
        }
        used[best_j] = true;
        worst = std::min(worst, best);
    }
    return worst;
}

std::vector<double> sawtooth(std::size_t n, double period) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double ph = std::fmod(static_cast<double>(i), period) / period;
        out[i] = 2.0 * ph - 1.0;
    }
    return out;
}

std::vector<std::vector<double>> mix(const std::vector<std::vector<double>>& s,
                                     const std::vector<std::vector<double>>& a) {
    const std::size_t k = s.size(), t = s.front().size();
    std::vector<std::vector<double>> x(a.size(), std::vector<double>(t, 0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t n = 0; n < t; ++n)
                x[i][n] += a[i][j] * s[j][n];
    return x;
}

} // namespace

TEST_CASE("whiten produces identity covariance") {
    testsupport::Rng rng(41);
    const std::size_t t = 4000;
    // Correlated pair.
    std::vector<std::vector<double>> x(2, std::vector<double>(t));
    for (std::size_t i = 0; i < t; ++i) {
        const double a = rng.gauss(), b = rng.gauss();
        x[0][i] = 2.0 * a + 0.5 * b + 3.0;
        x[1][i] = a - 0.2 * b - 1.0;
    }
    const auto w = sep::whiten(x);
    const auto cov = sample_cov(w.channels);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            CHECK(cov[i][j] == doctest::Approx(i == j ? 1.0 : 0.0).scale(1.0).epsilon(1e-8));
}

TEST_CASE("whiten leaves already-white data near identity") {
    testsupport::Rng rng(42);
    const std::size_t t = 8000;
    std::vector<std::vector<double>> x(3, std::vector<double>(t));
    for (auto& ch : x)
        for (auto& v : ch) v = rng.gauss();
    const auto w = sep::whiten(x);
    const auto cov = sample_cov(w.channels);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(cov[i][j] == doctest::Approx(i == j ? 1.0 : 0.0).scale(1.0).epsilon(1e-8));

    // With unit input covariance the sphering matrix is a pure rotation:
    // S S' stays close to the identity.
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            double dot = 0.0;
            for (std::size_t k = 0; k < 3; ++k)
                dot += w.sphering[i][k] * w.sphering[j][k];
            CHECK(dot == doctest::Approx(i == j ? 1.0 : 0.0).scale(1.0).epsilon(0.1));
        }
}

TEST_CASE("whiten rejects perfectly correlated channels") {
    testsupport::Rng rng(43);
    std::vector<double> a(500);
    for (auto& v : a) v = rng.gauss();
    std::vector<double> b = a;
    for (auto& v : b) v *= 2.0;
    try {
        sep::whiten({a, b});
        FAIL("expected SingularCovariance");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingularCovariance);
    }
}

TEST_CASE("jade unmixes a seeded 2x2 uniform mixture") {
    testsupport::Rng rng(51);
    const std::size_t t = 5000;
    std::vector<std::vector<double>> s(2, std::vector<double>(t));
    for (auto& ch : s)
        for (auto& v : ch) v = rng.uniform(-1.0, 1.0);
    const auto x = mix(s, {{0.6, 0.4}, {0.4, -0.7}});
    const auto out = sep::jade(x, 30.0);
    REQUIRE(out.sources.size() == 2);
    CHECK(out.converged);
    CHECK(min_matched_corr(out.sources, s) >= 0.99);
}

TEST_CASE("jade with identity mixing returns the inputs") {
    testsupport::Rng rng(52);
    const std::size_t t = 5000;
    std::vector<std::vector<double>> s(2, std::vector<double>(t));
    for (auto& ch : s)
        for (auto& v : ch) v = rng.uniform(-1.7320508, 1.7320508); // unit variance
    const auto out = sep::jade(s, 30.0);
    CHECK(min_matched_corr(out.sources, s) >= 0.99);
}

TEST_CASE("jade recovers a 3-source mixture") {
    const std::size_t t = 4000;
    testsupport::Rng rng(53);
    std::vector<std::vector<double>> s;
    s.push_back(testsupport::sine(30.0, static_cast<double>(t) / 30.0, 1.3));
    s.push_back(sawtooth(t, 37.0));
    std::vector<double> noise(t);
    for (auto& v : noise) v = rng.uniform(-1.0, 1.0);
    s.push_back(noise);
    s[0].resize(t);

    const auto x = mix(s, {{0.8, 0.3, 0.2}, {-0.4, 0.9, 0.3}, {0.1, -0.5, 1.0}});
    const auto out = sep::jade(x, 30.0);
    REQUIRE(out.sources.size() == 3);
    CHECK(min_matched_corr(out.sources, s) >= 0.98);
}

TEST_CASE("jade sources are mutually uncorrelated and unit variance") {
    testsupport::Rng rng(54);
    const std::size_t t = 6000;
    std::vector<std::vector<double>> s(3, std::vector<double>(t));
    for (auto& ch : s)
        for (auto& v : ch) v = rng.uniform(-1.0, 1.0);
    const auto x = mix(s, {{1.0, 0.2, 0.1}, {0.3, 1.0, -0.2}, {-0.1, 0.4, 1.0}});
    const auto out = sep::jade(x, 30.0);
    const auto cov = sample_cov(out.sources);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(cov[i][i] == doctest::Approx(1.0).epsilon(1e-6));
        for (std::size_t j = 0; j < i; ++j)
            CHECK(std::abs(cov[i][j]) < 1e-6);
    }
}

TEST_CASE("jade is equivariant under remixing of its own output") {
    testsupport::Rng rng(55);
    const std::size_t t = 5000;
    std::vector<std::vector<double>> s(3, std::vector<double>(t));
    for (auto& ch : s)
        for (auto& v : ch) v = rng.uniform(-1.0, 1.0);
    const auto x = mix(s, {{0.9, 0.1, 0.3}, {0.2, 1.1, -0.4}, {-0.3, 0.2, 0.8}});
    const auto first = sep::jade(x, 30.0);

    const auto remixed = mix(first.sources, {{0.5, -0.6, 0.2}, {0.8, 0.5, -0.1}, {0.1, 0.3, 0.9}});
    const auto second = sep::jade(remixed, 30.0);
    CHECK(min_matched_corr(second.sources, first.sources) >= 0.99);
}

TEST_CASE("jade flags all-Gaussian input instead of failing") {
    testsupport::Rng rng(56);
    const std::size_t t = 4000;
    std::vector<std::vector<double>> x(3, std::vector<double>(t));
    for (auto& ch : x)
        for (auto& v : ch) v = rng.gauss();
    const auto out = sep::jade(x, 30.0);
    CHECK_FALSE(out.converged);
    REQUIRE(out.sources.size() == 3);
    // Whitened channels still come back usable.
    const auto cov = sample_cov(out.sources);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(cov[i][i] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("jade validates its preconditions") {
    std::vector<std::vector<double>> tiny(2, std::vector<double>(10, 1.0));
    CHECK_THROWS_AS(sep::jade(tiny, 30.0), Error);
    std::vector<std::vector<double>> one(1, std::vector<double>(100, 1.0));
    CHECK_THROWS_AS(sep::jade(one, 30.0), Error);
    std::vector<std::vector<double>> wide(9, std::vector<double>(2000, 1.0));
    CHECK_THROWS_AS(sep::jade(wide, 30.0), Error); // channel cap is 8
}

TEST_CASE("pca puts all variance of rank-1 data in the first component") {
    testsupport::Rng rng(61);
    std::vector<double> base(1000);
    for (auto& v : base) v = rng.gauss();
    std::vector<std::vector<double>> x(5, base);
    const auto out = sep::pca(x, 30.0, 5);
    double total = 0.0, first = 0.0;
    for (std::size_t i = 0; i < out.sources.size(); ++i) {
        const double sd = dsp::sample_std(out.sources[i]);
        total += sd * sd;
        if (i == 0) first = sd * sd;
    }
    CHECK(first / total > 0.999);
}

TEST_CASE("pca recovers a known principal axis") {
    // 2-D data stretched along a known direction; closed-form 2x2 oracle.
    const double angle = 0.35; // radians
    testsupport::Rng rng(62);
    const std::size_t t = 20000;
    std::vector<std::vector<double>> x(2, std::vector<double>(t));
    for (std::size_t i = 0; i < t; ++i) {
        const double along = 5.0 * rng.gauss();
        const double across = 0.5 * rng.gauss();
        x[0][i] = along * std::cos(angle) - across * std::sin(angle);
        x[1][i] = along * std::sin(angle) + across * std::cos(angle);
    }

    // Closed-form eigenvector of the sample 2x2 covariance.
    const auto cov = sample_cov(x);
    const double tr = cov[0][0] + cov[1][1];
    const double det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
    const double l1 = 0.5 * (tr + std::sqrt(tr * tr - 4.0 * det));
    double ex = cov[0][1], ey = l1 - cov[0][0];
    const double norm = std::sqrt(ex * ex + ey * ey);
    ex /= norm;
    ey /= norm;

    const auto out = sep::pca(x, 30.0, 2);
    const double dot = std::abs(out.unmixing[0][0] * ex + out.unmixing[0][1] * ey);
    CHECK(std::acos(std::min(1.0, dot)) < testsupport::kTestPi / 180.0); // within 1 degree
}

TEST_CASE("pca loadings are orthonormal") {
    testsupport::Rng rng(63);
    std::vector<std::vector<double>> x(4, std::vector<double>(800));
    for (auto& ch : x)
        for (auto& v : ch) v = rng.gauss();
    const auto out = sep::pca(x, 30.0, 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            double dot = 0.0;
            for (std::size_t k = 0; k < 4; ++k)
                dot += out.unmixing[i][k] * out.unmixing[j][k];
            CHECK(dot == doctest::Approx(i == j ? 1.0 : 0.0).scale(1.0).epsilon(1e-9));
        }
}

TEST_CASE("pca preserves total variance when k equals N") {
    testsupport::Rng rng(64);
    std::vector<std::vector<double>> x(3, std::vector<double>(600));
    for (auto& ch : x)
        for (auto& v : ch) v = 2.0 * rng.gauss() + 1.0;
    double in_var = 0.0;
    for (const auto& ch : x) {
        const double sd = dsp::sample_std(ch);
        in_var += sd * sd;
    }
    const auto out = sep::pca(x, 30.0, 3);
    double out_var = 0.0;
    for (const auto& s : out.sources) {
        const double sd = dsp::sample_std(s);
        out_var += sd * sd;
    }
    CHECK(out_var == doctest::Approx(in_var).epsilon(1e-9));
}

TEST_CASE("select_source prefers the in-band tone") {
    sep::SourceSet s;
    s.fs = 30.0;
    s.sources.push_back(testsupport::sine(30.0, 30.0, 1.2));
    s.sources.push_back(testsupport::white_noise(71, s.sources[0].size()));
    const auto pick = sep::select_source(s, FreqBand{0.7, 2.5}, sep::SpectrumKind::Fft, 2);
    CHECK(pick.index == 0);
    CHECK(pick.peak_hz == doctest::Approx(1.2).epsilon(0.02));
    CHECK(pick.score > 0.0);
    CHECK(pick.score <= 1.0);
}

TEST_CASE("select_source gates by band") {
    sep::SourceSet s;
    s.fs = 30.0;
    s.sources.push_back(testsupport::sine(30.0, 30.0, 0.2)); // below band
    s.sources.push_back(testsupport::sine(30.0, 30.0, 1.2));
    const auto pick = sep::select_source(s, FreqBand{0.7, 2.5}, sep::SpectrumKind::Fft, 2);
    CHECK(pick.index == 1);
}

TEST_CASE("select_source score is scale-free") {
    sep::SourceSet s;
    s.fs = 30.0;
    s.sources.push_back(testsupport::sine(30.0, 30.0, 1.1));
    s.sources.push_back(testsupport::white_noise(72, s.sources[0].size()));
    const auto before = sep::select_source(s, FreqBand{0.7, 2.5}, sep::SpectrumKind::Fft, 2);
    for (auto& v : s.sources[0]) v *= 7.5;
    const auto after = sep::select_source(s, FreqBand{0.7, 2.5}, sep::SpectrumKind::Fft, 2);
    CHECK(before.index == after.index);
    CHECK(before.score == doctest::Approx(after.score).epsilon(1e-12));
}

TEST_CASE("select_source finds a weak tone among noise channels") {
    // One channel hides a 1 Hz tone at 0 dB; the pick must find it nearly
    // every time across seeds.
    int hits = 0;
    const int trials = 100;
    for (int trial = 0; trial < trials; ++trial) {
        testsupport::Rng rng(9000 + trial);
        sep::SourceSet s;
        s.fs = 30.0;
        const std::size_t n = 900;
        const std::size_t tone_at = static_cast<std::size_t>(trial % 6);
        for (std::size_t i = 0; i < 6; ++i) {
            std::vector<double> ch(n);
            for (auto& v : ch) v = rng.gauss();
            if (i == tone_at) {
                // 0 dB in-band: tone power equals the in-band share of noise.
                const double bw = 1.8, fs = 30.0;
                const double amp = std::sqrt(2.0 * bw / (fs / 2.0));
                for (std::size_t k = 0; k < n; ++k)
                    ch[k] += amp * std::sin(2.0 * testsupport::kTestPi * 1.0 *
                                            static_cast<double>(k) / fs);
            }
            s.sources.push_back(std::move(ch));
        }
        const auto pick = sep::select_source(s, FreqBand{0.7, 2.5}, sep::SpectrumKind::Fft, 6);
        if (pick.index == tone_at) ++hits;
    }
    CHECK(hits >= 95);
}

TEST_CASE("select_source reports EmptyBand when the grid misses the band") {
    sep::SourceSet s;
    s.fs = 30.0;
    s.sources.push_back(testsupport::sine(30.0, 30.0, 1.0));
    try {
        sep::select_source(s, FreqBand{4.5, 5.0}, sep::SpectrumKind::Lomb, 1);
        FAIL("expected EmptyBand"); // default Lomb grid stops at 4 Hz
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyBand);
    }
}
