#include "pulseframe/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "pulseframe/error.hpp"

namespace pulseframe::dsp {

namespace {

constexpr double kPi = std::numbers::pi;

using cplx = std::complex<double>;

// Polynomial with the given roots, highest power first, leading coeff 1.
std::vector<cplx> poly_from_roots(const std::vector<cplx>& roots) {
    std::vector<cplx> c{1.0};
    for (const cplx& r : roots) {
        std::vector<cplx> next(c.size() + 1, cplx(0.0));
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i] += c[i];
            next[i + 1] -= c[i] * r;
        }
        c = std::move(next);
    }
    return c;
}

std::vector<double> real_coeffs(const std::vector<cplx>& c) {
    std::vector<double> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i)
        out[i] = c[i].real();
    return out;
}

} // namespace

double mean(const std::vector<double>& x) {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double sample_std(const std::vector<double>& x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double acc = 0.0;
    for (double v : x) acc += (v - m) * (v - m);
    return std::sqrt(acc / static_cast<double>(x.size() - 1));
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

IirCoeffs butter_bandpass(int order, const FreqBand& band, double fs) {
    if (order < 1)
        raise(ErrorCode::InvalidArgument, "filter order must be >= 1");
    band.validate_for(fs);

    // Analog low-pass prototype poles on the left unit semicircle.
    std::vector<cplx> lp_poles;
    for (int k = 0; k < order; ++k) {
        const double theta = kPi * (2.0 * k + order + 1.0) / (2.0 * order);
        lp_poles.emplace_back(std::cos(theta), std::sin(theta));
    }

    // Pre-warp the band edges so the bilinear transform lands them exactly.
    const double fs2 = 2.0 * fs;
    const double w1 = fs2 * std::tan(kPi * band.low_hz / fs);
    const double w2 = fs2 * std::tan(kPi * band.high_hz / fs);
    const double bw = w2 - w1;
    const double w0sq = w1 * w2;

    // Low-pass -> band-pass: each prototype pole splits into a pair.
    std::vector<cplx> s_poles;
    for (const cplx& p : lp_poles) {
        const cplx ps = p * (bw / 2.0);
        const cplx d = std::sqrt(ps * ps - w0sq);
        s_poles.push_back(ps + d);
        s_poles.push_back(ps - d);
    }
    // order zeros at s = 0; gain gathers bw^order.
    double k_analog = std::pow(bw, order);

    // Bilinear transform, s -> 2*fs*(z-1)/(z+1).
    std::vector<cplx> z_poles, z_zeros;
    cplx num(1.0), den(1.0);
    for (const cplx& p : s_poles) {
        z_poles.push_back((fs2 + p) / (fs2 - p));
        den *= (fs2 - p);
    }
    for (int i = 0; i < order; ++i) {
        z_zeros.emplace_back(1.0, 0.0); // images of the s = 0 zeros
        num *= fs2;
    }
    for (int i = 0; i < order; ++i)
        z_zeros.emplace_back(-1.0, 0.0); // zeros from infinity
    const double k_digital = k_analog * (num / den).real();

    IirCoeffs c;
    c.b = real_coeffs(poly_from_roots(z_zeros));
    for (double& v : c.b) v *= k_digital;
    c.a = real_coeffs(poly_from_roots(z_poles));

    for (const cplx& p : z_poles)
        if (std::abs(p) >= 1.0)
            raise(ErrorCode::InvalidArgument, "designed filter is unstable");
    return c;
}

double butter_bandpass_mag2(int order, const FreqBand& band, double fs, double freq_hz) {
    const double fs2 = 2.0 * fs;
    const double w1 = fs2 * std::tan(kPi * band.low_hz / fs);
    const double w2 = fs2 * std::tan(kPi * band.high_hz / fs);
    const double w = fs2 * std::tan(kPi * freq_hz / fs);
    if (w == 0.0) return 0.0;
    const double xi = (w * w - w1 * w2) / ((w2 - w1) * w);
    return 1.0 / (1.0 + std::pow(xi, 2.0 * order));
}

double magnitude_response(const IirCoeffs& c, double freq_hz, double fs) {
    const cplx z = std::exp(cplx(0.0, -2.0 * kPi * freq_hz / fs));
    cplx num(0.0), den(0.0), zk(1.0);
    const std::size_t n = std::max(c.b.size(), c.a.size());
    for (std::size_t k = 0; k < n; ++k) {
        if (k < c.b.size()) num += c.b[k] * zk;
        if (k < c.a.size()) den += c.a[k] * zk;
        zk *= z;
    }
    return std::abs(num / den);
}

namespace {

std::vector<double> run_df2t(const std::vector<double>& b, const std::vector<double>& a,
                             const std::vector<double>& x, std::vector<double> z) {
    const std::size_t m = b.size();
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        const double yi = b[0] * xi + z[0];
        for (std::size_t j = 1; j + 1 < m; ++j)
            z[j - 1] = b[j] * xi + z[j] - a[j] * yi;
        if (m > 1)
            z[m - 2] = b[m - 1] * xi - a[m - 1] * yi;
        y[i] = yi;
    }
    return y;
}

// State that keeps a unit-step input already settled, so each pass starts at
// steady state instead of ringing in from zero.
std::vector<double> step_steady_state(const std::vector<double>& b,
                                      const std::vector<double>& a) {
    const std::size_t m = b.size();
    double sb = 0.0, sa = 0.0;
    for (double v : b) sb += v;
    for (double v : a) sa += v;
    const double y_ss = sb / sa;
    std::vector<double> z(m > 1 ? m - 1 : 1, 0.0);
    for (std::size_t j = m - 1; j >= 1; --j) {
        const double next = (j < m - 1) ? z[j] : 0.0;
        z[j - 1] = b[j] - a[j] * y_ss + next;
    }
    return z;
}

} // namespace

std::vector<double> lfilter(const IirCoeffs& c, const std::vector<double>& x) {
    const std::size_t m = std::max(c.a.size(), c.b.size());
    std::vector<double> b(c.b), a(c.a);
    b.resize(m, 0.0);
    a.resize(m, 0.0);
    return run_df2t(b, a, x, std::vector<double>(m > 1 ? m - 1 : 1, 0.0));
}

namespace {

std::vector<double> filtfilt_one_order(const IirCoeffs& c, const std::vector<double>& x) {
    const std::size_t pad = 3 * (c.a.size() - 1);
    if (x.size() <= pad)
        raise(ErrorCode::TooShort,
              "filtfilt needs more than " + std::to_string(pad) + " samples, got " +
                  std::to_string(x.size()));
    const std::size_t m = std::max(c.a.size(), c.b.size());
    std::vector<double> b(c.b), a(c.a);
    b.resize(m, 0.0);
    a.resize(m, 0.0);
    const std::vector<double> zi = step_steady_state(b, a);

    const std::size_t n = x.size();
    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i)
        ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= pad; ++i)
        ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

    std::vector<double> z0 = zi;
    for (auto& v : z0) v *= ext.front();
    std::vector<double> y = run_df2t(b, a, ext, std::move(z0));

    std::reverse(y.begin(), y.end());
    std::vector<double> z1 = zi;
    for (auto& v : z1) v *= y.front();
    y = run_df2t(b, a, y, std::move(z1));
    std::reverse(y.begin(), y.end());

    return std::vector<double>(y.begin() + pad, y.begin() + pad + n);
}

} // namespace

std::vector<double> filtfilt(const IirCoeffs& c, const std::vector<double>& x) {
    // Both pass orders, averaged. Residual edge transients of a single
    // forward-backward sweep are direction-dependent; the average makes the
    // whole operation exactly time-reversal symmetric.
    std::vector<double> fwd = filtfilt_one_order(c, x);
    std::vector<double> rev(x.rbegin(), x.rend());
    std::vector<double> bwd = filtfilt_one_order(c, rev);
    std::reverse(bwd.begin(), bwd.end());
    for (std::size_t i = 0; i < fwd.size(); ++i)
        fwd[i] = 0.5 * (fwd[i] + bwd[i]);
    return fwd;
}

std::vector<double> detrend_sp(const std::vector<double>& x, const DetrendConfig& cfg) {
    const std::size_t n = x.size();
    if (n < 3)
        raise(ErrorCode::InvalidArgument, "detrend needs at least 3 samples");
    if (cfg.lambda < 0.0)
        raise(ErrorCode::InvalidArgument, "lambda must be non-negative");
    const double l2 = cfg.lambda * cfg.lambda;

    // Bands of A = I + lambda^2 * D2' D2 (pentadiagonal, SPD).
    std::vector<double> d0(n, 1.0), d1(n - 1, 0.0), d2(n - 2, 0.0);
    for (std::size_t r = 0; r + 2 < n; ++r) {
        d0[r] += l2;
        d0[r + 1] += 4.0 * l2;
        d0[r + 2] += l2;
        d1[r] += -2.0 * l2;
        d1[r + 1] += -2.0 * l2;
        d2[r] += l2;
    }

    // Banded Cholesky A = L L^T with bandwidth 2.
    std::vector<double> l0(n), l1(n - 1, 0.0), l2b(n - 2, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double diag = d0[i];
        if (i >= 1) diag -= l1[i - 1] * l1[i - 1];
        if (i >= 2) diag -= l2b[i - 2] * l2b[i - 2];
        l0[i] = std::sqrt(diag);
        if (i + 1 < n) {
            double v = d1[i];
            if (i >= 1) v -= l1[i - 1] * l2b[i - 1];
            l1[i] = v / l0[i];
        }
        if (i + 2 < n)
            l2b[i] = d2[i] / l0[i];
    }

    // Solve L y = x, then L^T t = y; the trend is t.
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = x[i];
        if (i >= 1) v -= l1[i - 1] * t[i - 1];
        if (i >= 2) v -= l2b[i - 2] * t[i - 2];
        t[i] = v / l0[i];
    }
    for (std::size_t k = n; k-- > 0;) {
        double v = t[k];
        if (k + 1 < n) v -= l1[k] * t[k + 1];
        if (k + 2 < n) v -= l2b[k] * t[k + 2];
        t[k] = v / l0[k];
    }

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = x[i] - t[i];
    return out;
}

std::vector<double> zscore(const std::vector<double>& x) {
    if (x.size() < 2)
        raise(ErrorCode::InvalidArgument, "zscore needs at least 2 samples");
    const double m = mean(x);
    const double s = sample_std(x);
    if (s == 0.0)
        raise(ErrorCode::ZeroVariance, "constant signal cannot be z-scored");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = (x[i] - m) / s;
    return out;
}

void fft_pow2(std::vector<double>& re, std::vector<double>& im) {
    const std::size_t n = re.size();
    if (n == 0 || (n & (n - 1)) != 0 || im.size() != n)
        raise(ErrorCode::InvalidArgument, "fft length must be a power of two");
    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) {
            std::swap(re[i], re[j]);
            std::swap(im[i], im[j]);
        }
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * kPi / static_cast<double>(len);
        const double wr = std::cos(ang), wi = std::sin(ang);
        for (std::size_t i = 0; i < n; i += len) {
            double cr = 1.0, ci = 0.0;
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::size_t u = i + k, v = i + k + len / 2;
                const double tr = re[v] * cr - im[v] * ci;
                const double ti = re[v] * ci + im[v] * cr;
                re[v] = re[u] - tr;
                im[v] = im[u] - ti;
                re[u] += tr;
                im[u] += ti;
                const double ncr = cr * wr - ci * wi;
                ci = cr * wi + ci * wr;
                cr = ncr;
            }
        }
    }
}

SpectralEstimate power_spectrum(const Trace& x, std::size_t nfft) {
    x.validate();
    const std::size_t n = x.samples.size();
    if (nfft < n)
        raise(ErrorCode::InvalidArgument, "nfft must be at least the signal length");
    if ((nfft & (nfft - 1)) != 0)
        raise(ErrorCode::InvalidArgument, "nfft must be a power of two");

    const double m = mean(x.samples);
    std::vector<double> re(nfft, 0.0), im(nfft, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        re[i] = x.samples[i] - m;
    fft_pow2(re, im);

    // One-sided scaling chosen so the bin sum equals the mean-removed
    // signal energy (Parseval).
    const std::size_t half = nfft / 2;
    SpectralEstimate est;
    est.freqs_hz.resize(half + 1);
    est.power.resize(half + 1);
    const double inv_n = 1.0 / static_cast<double>(nfft);
    for (std::size_t k = 0; k <= half; ++k) {
        est.freqs_hz[k] = static_cast<double>(k) * x.fs * inv_n;
        const double p = (re[k] * re[k] + im[k] * im[k]) * inv_n;
        est.power[k] = (k == 0 || k == half) ? p : 2.0 * p;
    }
    return est;
}

std::vector<double> lomb_default_grid() {
    std::vector<double> grid;
    for (int k = 0; k <= 350; ++k)
        grid.push_back(0.5 + 0.01 * k);
    return grid;
}

SpectralEstimate lomb(const std::vector<double>& times_s,
                      const std::vector<double>& x,
                      const std::vector<double>& freqs_hz) {
    const std::size_t n = x.size();
    if (times_s.size() != n || n < 4)
        raise(ErrorCode::InvalidArgument, "lomb needs >= 4 aligned (time, value) pairs");
    for (double f : freqs_hz)
        if (!(f > 0.0))
            raise(ErrorCode::InvalidArgument, "lomb frequencies must be positive");

    const double m = mean(x);
    std::vector<double> xc(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        xc[i] = x[i] - m;
        var += xc[i] * xc[i];
    }
    var /= static_cast<double>(n - 1);

    SpectralEstimate est;
    est.freqs_hz = freqs_hz;
    est.power.assign(freqs_hz.size(), 0.0);
    if (var == 0.0) return est;

    for (std::size_t fi = 0; fi < freqs_hz.size(); ++fi) {
        const double w = 2.0 * kPi * freqs_hz[fi];
        double s2 = 0.0, c2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s2 += std::sin(2.0 * w * times_s[i]);
            c2 += std::cos(2.0 * w * times_s[i]);
        }
        const double tau = std::atan2(s2, c2) / (2.0 * w);
        double cs = 0.0, sn = 0.0, cc = 0.0, ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double arg = w * (times_s[i] - tau);
            const double cv = std::cos(arg), sv = std::sin(arg);
            cs += xc[i] * cv;
            sn += xc[i] * sv;
            cc += cv * cv;
            ss += sv * sv;
        }
        double p = 0.0;
        if (cc > 0.0) p += cs * cs / cc;
        if (ss > 0.0) p += sn * sn / ss;
        est.power[fi] = p / (2.0 * var);
    }
    return est;
}

std::vector<double> hann(std::size_t n) {
    if (n < 2)
        raise(ErrorCode::InvalidArgument, "hann needs n >= 2");
    std::vector<double> w(n);
    for (std::size_t k = 0; k < n; ++k)
        w[k] = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(k) / static_cast<double>(n)));
    return w;
}

std::vector<double> overlap_add(const std::vector<std::vector<double>>& windows,
                                const std::vector<std::size_t>& starts,
                                std::size_t total_len) {
    if (windows.size() != starts.size())
        raise(ErrorCode::InvalidArgument, "windows and starts differ in count");
    std::vector<double> out(total_len, 0.0);
    for (std::size_t w = 0; w < windows.size(); ++w) {
        if (starts[w] + windows[w].size() > total_len)
            raise(ErrorCode::OutOfBounds,
                  "window " + std::to_string(w) + " exceeds the output length");
        for (std::size_t i = 0; i < windows[w].size(); ++i)
            out[starts[w] + i] += windows[w][i];
    }
    return out;
}

} // namespace pulseframe::dsp
