#include "pulseframe/separation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pulseframe/error.hpp"

namespace pulseframe::sep {

namespace {

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& x) {
    if (x.empty())
        raise(ErrorCode::InvalidArgument, "need at least one channel");
    const std::size_t t = x.front().size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(t));
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].size() != t)
            raise(ErrorCode::InvalidArgument, "channel lengths differ");
        for (std::size_t j = 0; j < t; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x[i][j];
    }
    return m;
}

std::vector<std::vector<double>> to_rows(const Eigen::MatrixXd& m) {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
    }
    return out;
}

struct WhitenInternal {
    Eigen::MatrixXd z;        // K x T, identity sample covariance
    Eigen::MatrixXd sphering; // K x K
    Eigen::VectorXd means;
};

WhitenInternal whiten_internal(const Eigen::MatrixXd& x) {
    const Eigen::Index k = x.rows();
    const Eigen::Index t = x.cols();
    if (k < 2)
        raise(ErrorCode::InvalidArgument, "whitening needs at least 2 channels");
    if (t < k + 1)
        raise(ErrorCode::InvalidArgument, "whitening needs more samples than channels");

    WhitenInternal w;
    w.means = x.rowwise().mean();
    Eigen::MatrixXd xc = x.colwise() - w.means;
    Eigen::MatrixXd cov = xc * xc.transpose() / static_cast<double>(t - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const Eigen::VectorXd evals = eig.eigenvalues(); // ascending
    const double lmax = evals(k - 1);
    if (!(lmax > 0.0) || evals(0) <= 1e-12 * lmax)
        raise(ErrorCode::SingularCovariance,
              "channel covariance is singular (constant or duplicated channel)");

    Eigen::VectorXd inv_sqrt(k);
    for (Eigen::Index i = 0; i < k; ++i)
        inv_sqrt(i) = 1.0 / std::sqrt(evals(i));
    w.sphering = inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
    w.z = w.sphering * xc;
    return w;
}

double excess_kurtosis(const std::vector<double>& s) {
    const std::size_t n = s.size();
    double m = 0.0;
    for (double v : s) m += v;
    m /= static_cast<double>(n);
    double m2 = 0.0, m4 = 0.0;
    for (double v : s) {
        const double d = v - m;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    if (m2 == 0.0) return 0.0;
    return m4 / (m2 * m2) - 3.0;
}

} // namespace

WhitenResult whiten(const std::vector<std::vector<double>>& x) {
    const WhitenInternal w = whiten_internal(to_matrix(x));
    WhitenResult out;
    out.channels = to_rows(w.z);
    out.sphering = to_rows(w.sphering);
    out.means.assign(w.means.data(), w.means.data() + w.means.size());
    return out;
}

SourceSet jade(const std::vector<std::vector<double>>& x, double fs) {
    Eigen::MatrixXd obs = to_matrix(x);
    const Eigen::Index k = obs.rows();
    const Eigen::Index t = obs.cols();
    if (k < 2 || k > 8)
        raise(ErrorCode::InvalidArgument, "jade supports 2..8 channels");
    if (t < 10 * k * k)
        raise(ErrorCode::InvalidArgument,
              "jade needs at least " + std::to_string(10 * k * k) + " samples");

    const WhitenInternal w = whiten_internal(obs);
    const Eigen::MatrixXd& z = w.z;

    // Parallel set of fourth-order cumulant matrices of the whitened data:
    // one per channel pair, K(K+1)/2 in total. The sqrt(2) weight on the
    // off-diagonal pairs keeps the set an orthonormal basis of the cumulant
    // tensor's range.
    const double inv_t = 1.0 / static_cast<double>(t);
    std::vector<Eigen::MatrixXd> cm;
    cm.reserve(static_cast<std::size_t>(k * (k + 1) / 2));
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            Eigen::MatrixXd q = Eigen::MatrixXd::Zero(k, k);
            for (Eigen::Index s = 0; s < t; ++s) {
                const double wgt = z(i, s) * z(j, s);
                q.noalias() += wgt * (z.col(s) * z.col(s).transpose());
            }
            q *= inv_t;
            if (i == j) {
                q -= Eigen::MatrixXd::Identity(k, k);
                q(i, i) -= 2.0;
            } else {
                q(i, j) -= 1.0;
                q(j, i) -= 1.0;
                q *= std::sqrt(2.0);
            }
            cm.push_back(std::move(q));
        }
    }

    SourceSet out;
    out.fs = fs;
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(k, k);

    // Gaussian-only data has vanishing fourth-order cumulants, leaving
    // nothing to diagonalize; flag it and hand back the whitened channels.
    double cmax = 0.0;
    for (const auto& q : cm)
        cmax = std::max(cmax, q.cwiseAbs().maxCoeff());
    const double noise_floor = 5.0 * std::sqrt(24.0 / static_cast<double>(t));
    bool degenerate = cmax < noise_floor;

    if (!degenerate) {
        const double angle_threshold = 1e-8;
        const int max_sweeps = 100;
        bool converged = false;
        for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
            double max_angle = 0.0;
            for (Eigen::Index p = 0; p < k - 1; ++p) {
                for (Eigen::Index q = p + 1; q < k; ++q) {
                    double g11 = 0.0, g12 = 0.0, g22 = 0.0;
                    for (const auto& m : cm) {
                        const double h1 = m(p, p) - m(q, q);
                        const double h2 = m(p, q) + m(q, p);
                        g11 += h1 * h1;
                        g12 += h1 * h2;
                        g22 += h2 * h2;
                    }
                    const double ton = g11 - g22;
                    const double toff = 2.0 * g12;
                    const double theta =
                        0.5 * std::atan2(toff, ton + std::sqrt(ton * ton + toff * toff));
                    max_angle = std::max(max_angle, std::abs(theta));
                    if (std::abs(theta) > angle_threshold) {
                        const double c = std::cos(theta), s = std::sin(theta);
                        for (auto& m : cm) {
                            // Rows, then columns: m <- G' m G.
                            for (Eigen::Index col = 0; col < k; ++col) {
                                const double mp = m(p, col), mq = m(q, col);
                                m(p, col) = c * mp + s * mq;
                                m(q, col) = -s * mp + c * mq;
                            }
                            for (Eigen::Index row = 0; row < k; ++row) {
                                const double mp = m(row, p), mq = m(row, q);
                                m(row, p) = c * mp + s * mq;
                                m(row, q) = -s * mp + c * mq;
                            }
                        }
                        for (Eigen::Index row = 0; row < k; ++row) {
                            const double vp = v(row, p), vq = v(row, q);
                            v(row, p) = c * vp + s * vq;
                            v(row, q) = -s * vp + c * vq;
                        }
                    }
                }
            }
            converged = max_angle < angle_threshold;
        }
        out.converged = converged;
    } else {
        out.converged = false;
    }

    Eigen::MatrixXd unmix = v.transpose() * w.sphering;
    Eigen::MatrixXd sources = v.transpose() * z;

    // Unit variance, deterministic sign, then order by kurtosis magnitude.
    for (Eigen::Index i = 0; i < k; ++i) {
        std::vector<double> row(static_cast<std::size_t>(t));
        for (Eigen::Index j = 0; j < t; ++j)
            row[static_cast<std::size_t>(j)] = sources(i, j);
        double sd = dsp::sample_std(row);
        if (sd > 0.0) {
            sources.row(i) /= sd;
            unmix.row(i) /= sd;
        }
        Eigen::Index jmax = 0;
        unmix.row(i).cwiseAbs().maxCoeff(&jmax);
        if (unmix(i, jmax) < 0.0) {
            unmix.row(i) = -unmix.row(i);
            sources.row(i) = -sources.row(i);
        }
    }

    std::vector<std::vector<double>> source_rows = to_rows(sources);
    std::vector<std::size_t> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> kurt(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < kurt.size(); ++i)
        kurt[i] = std::abs(excess_kurtosis(source_rows[i]));
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return kurt[a] > kurt[b]; });

    std::vector<std::vector<double>> unmix_rows = to_rows(unmix);
    for (std::size_t i = 0; i < order.size(); ++i) {
        out.sources.push_back(std::move(source_rows[order[i]]));
        out.unmixing.push_back(std::move(unmix_rows[order[i]]));
    }
    return out;
}

SourceSet pca(const std::vector<std::vector<double>>& x, double fs, std::size_t k) {
    Eigen::MatrixXd obs = to_matrix(x);
    const Eigen::Index n = obs.rows();
    const Eigen::Index t = obs.cols();
    if (k == 0 || k > static_cast<std::size_t>(std::min(n, t)))
        raise(ErrorCode::InvalidArgument, "pca component count out of range");

    const Eigen::VectorXd means = obs.rowwise().mean();
    Eigen::MatrixXd xc = obs.colwise() - means;
    Eigen::MatrixXd cov = xc * xc.transpose() / static_cast<double>(t - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);

    SourceSet out;
    out.fs = fs;
    for (std::size_t c = 0; c < k; ++c) {
        // Eigenvalues come back ascending; walk from the top.
        const Eigen::Index idx = n - 1 - static_cast<Eigen::Index>(c);
        Eigen::VectorXd loading = eig.eigenvectors().col(idx);
        Eigen::Index imax = 0;
        loading.cwiseAbs().maxCoeff(&imax);
        if (loading(imax) < 0.0)
            loading = -loading;
        Eigen::VectorXd score = loading.transpose() * xc;
        out.unmixing.emplace_back(loading.data(), loading.data() + n);
        out.sources.emplace_back(score.data(), score.data() + t);
    }
    return out;
}

SourceChoice select_source(const SourceSet& s, const FreqBand& band,
                           SpectrumKind kind, std::size_t top_k) {
    if (s.sources.empty())
        raise(ErrorCode::InvalidArgument, "no sources to select from");
    const std::size_t count = std::min(top_k, s.sources.size());

    SourceChoice best;
    bool found = false;
    for (std::size_t i = 0; i < count; ++i) {
        dsp::SpectralEstimate est;
        if (kind == SpectrumKind::Fft) {
            Trace tr{s.sources[i], s.fs, ""};
            est = dsp::power_spectrum(tr, dsp::next_pow2(std::max<std::size_t>(s.sources[i].size(), 1024)));
        } else {
            std::vector<double> times(s.sources[i].size());
            for (std::size_t j = 0; j < times.size(); ++j)
                times[j] = static_cast<double>(j) / s.fs;
            est = dsp::lomb(times, s.sources[i], dsp::lomb_default_grid());
        }

        double total = 0.0;
        for (double p : est.power) total += p;

        double peak_power = -1.0;
        double peak_hz = 0.0;
        for (std::size_t b = 0; b < est.freqs_hz.size(); ++b) {
            const double f = est.freqs_hz[b];
            if (f < band.low_hz || f > band.high_hz) continue;
            if (est.power[b] > peak_power) {
                peak_power = est.power[b];
                peak_hz = f;
            }
        }
        if (peak_power < 0.0)
            raise(ErrorCode::EmptyBand, "no spectral bin falls inside the band");

        const double score = total > 0.0 ? peak_power / total : 0.0;
        if (!found || score > best.score) {
            best = SourceChoice{i, score, peak_hz};
            found = true;
        }
    }
    return best;
}

} // namespace pulseframe::sep
