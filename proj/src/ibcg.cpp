#include "pulseframe/ibcg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "pulseframe/dsp.hpp"
#include "pulseframe/error.hpp"

namespace pulseframe::ibcg {

namespace {

struct FloatImage {
    int width = 0;
    int height = 0;
    std::vector<float> data;

    float at(int x, int y) const {
        return data[static_cast<std::size_t>(y) * width + x];
    }
};

FloatImage to_float(const ImageGray8& img) {
    FloatImage f;
    f.width = img.width;
    f.height = img.height;
    f.data.assign(img.data.begin(), img.data.end());
    return f;
}

FloatImage downsample2(const FloatImage& in) {
    FloatImage out;
    out.width = in.width / 2;
    out.height = in.height / 2;
    out.data.resize(static_cast<std::size_t>(out.width) * out.height);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            out.data[static_cast<std::size_t>(y) * out.width + x] =
                0.25f * (in.at(2 * x, 2 * y) + in.at(2 * x + 1, 2 * y) +
                         in.at(2 * x, 2 * y + 1) + in.at(2 * x + 1, 2 * y + 1));
    return out;
}

bool interpolable(const FloatImage& img, double x, double y, int radius) {
    return x - radius >= 1.0 && y - radius >= 1.0 &&
           x + radius <= img.width - 2.0 && y + radius <= img.height - 2.0;
}

double sample_bilinear(const FloatImage& img, double x, double y) {
    const int ix = static_cast<int>(std::floor(x));
    const int iy = static_cast<int>(std::floor(y));
    const double fx = x - ix, fy = y - iy;
    const double v00 = img.at(ix, iy), v10 = img.at(ix + 1, iy);
    const double v01 = img.at(ix, iy + 1), v11 = img.at(ix + 1, iy + 1);
    return (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) + fy * ((1.0 - fx) * v01 + fx * v11);
}

std::vector<FloatImage> build_pyramid(const ImageGray8& img, int levels) {
    std::vector<FloatImage> pyr;
    pyr.push_back(to_float(img));
    for (int l = 1; l < levels; ++l) {
        const FloatImage& prev = pyr.back();
        if (prev.width < 16 || prev.height < 16) break;
        pyr.push_back(downsample2(prev));
    }
    return pyr;
}

struct PairTrack {
    bool lost = true;
    PointF position; // level-0 coordinates after the pair
};

// Iterative pyramidal least-squares alignment of one point between two
// pyramids. The coarse-level displacement seeds each finer level.
PairTrack track_point(const std::vector<FloatImage>& prev_pyr,
                      const std::vector<FloatImage>& next_pyr, const PointF& start,
                      const TrackerParams& params) {
    const int radius = params.window / 2;
    const int n_window = params.window * params.window;
    const int levels = static_cast<int>(std::min(prev_pyr.size(), next_pyr.size()));
    const int frame_w = prev_pyr.front().width;
    const int frame_h = prev_pyr.front().height;

    double gx_d = 0.0, gy_d = 0.0;
    bool lost = false;
    double residual = 0.0;

    for (int level = levels - 1; level >= 0 && !lost; --level) {
        const FloatImage& ip = prev_pyr[level];
        const FloatImage& in = next_pyr[level];
        const double scale = std::pow(2.0, level);
        const double px = start.x / scale;
        const double py = start.y / scale;

        if (!interpolable(ip, px, py, radius)) {
            if (level == 0) lost = true;
            // Too close to the border at this level; defer to finer ones.
            gx_d *= 2.0;
            gy_d *= 2.0;
            continue;
        }

        // Gradients of the template patch, fixed across iterations.
        std::vector<double> tvals(n_window), tix(n_window), tiy(n_window);
        double g11 = 0.0, g12 = 0.0, g22 = 0.0;
        int idx = 0;
        for (int dy = -radius; dy <= radius; ++dy) {
            for (int dx = -radius; dx <= radius; ++dx, ++idx) {
                const double sx = px + dx, sy = py + dy;
                tvals[idx] = sample_bilinear(ip, sx, sy);
                const double ix = 0.5 * (sample_bilinear(ip, sx + 1, sy) -
                                         sample_bilinear(ip, sx - 1, sy));
                const double iy = 0.5 * (sample_bilinear(ip, sx, sy + 1) -
                                         sample_bilinear(ip, sx, sy - 1));
                tix[idx] = ix;
                tiy[idx] = iy;
                g11 += ix * ix;
                g12 += ix * iy;
                g22 += iy * iy;
            }
        }
        const double tr = g11 + g22;
        const double disc = std::sqrt((g11 - g22) * (g11 - g22) + 4.0 * g12 * g12);
        const double min_eig = 0.5 * (tr - disc) / n_window;
        if (min_eig < params.min_eigen) {
            lost = true; // texture-free patch, no reliable solution
            break;
        }
        const double det = g11 * g22 - g12 * g12;

        double vx = 0.0, vy = 0.0;
        for (int iter = 0; iter < params.max_iterations; ++iter) {
            const double cx = px + gx_d + vx;
            const double cy = py + gy_d + vy;
            if (!interpolable(in, cx, cy, radius)) {
                lost = true;
                break;
            }
            double b1 = 0.0, b2 = 0.0, abs_diff = 0.0;
            idx = 0;
            for (int dy = -radius; dy <= radius; ++dy) {
                for (int dx = -radius; dx <= radius; ++dx, ++idx) {
                    const double diff = tvals[idx] - sample_bilinear(in, cx + dx, cy + dy);
                    b1 += diff * tix[idx];
                    b2 += diff * tiy[idx];
                    abs_diff += std::abs(diff);
                }
            }
            residual = abs_diff / n_window;
            const double ux = (g22 * b1 - g12 * b2) / det;
            const double uy = (g11 * b2 - g12 * b1) / det;
            vx += ux;
            vy += uy;
            if (std::sqrt(ux * ux + uy * uy) < params.min_update_px) break;
        }
        if (lost) break;
        gx_d += vx;
        gy_d += vy;
        if (level > 0) {
            gx_d *= 2.0;
            gy_d *= 2.0;
        }
    }

    PairTrack out;
    if (lost || residual > params.max_residual) return out;
    const double nx = start.x + gx_d;
    const double ny = start.y + gy_d;
    if (nx < 1.0 || ny < 1.0 || nx > frame_w - 2.0 || ny > frame_h - 2.0) return out;
    out.lost = false;
    out.position = {nx, ny};
    return out;
}

} // namespace

void FramePair::validate() const {
    if (prev.width != next.width || prev.height != next.height)
        raise(ErrorCode::DimensionMismatch, "frame pair geometry differs");
    if (prev.width < 32 || prev.height < 32)
        raise(ErrorCode::InvalidArgument, "frames must be at least 32x32");
}

std::optional<PointF> lk_displacement(const FramePair& pair, const PointF& point,
                                      const TrackerParams& params) {
    pair.validate();
    if (params.window < 3 || params.window % 2 == 0)
        raise(ErrorCode::InvalidArgument, "integration window must be odd and >= 3");
    const auto prev_pyr = build_pyramid(pair.prev, params.pyramid_levels);
    const auto next_pyr = build_pyramid(pair.next, params.pyramid_levels);
    const PairTrack r = track_point(prev_pyr, next_pyr, point, params);
    if (r.lost) return std::nullopt;
    return r.position;
}

std::vector<PointF> detect_features(const ImageGray8& frame,
                                    std::size_t max_points, double quality) {
    if (frame.width < 8 || frame.height < 8)
        raise(ErrorCode::InvalidArgument, "frame too small for feature detection");
    if (max_points == 0)
        raise(ErrorCode::InvalidArgument, "max_points must be positive");

    const FloatImage img = to_float(frame);
    const int w = img.width, h = img.height;

    // Central-difference gradients.
    std::vector<float> gx(img.data.size(), 0.0f), gy(img.data.size(), 0.0f);
    for (int y = 1; y < h - 1; ++y) {
        for (int x = 1; x < w - 1; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            gx[i] = 0.5f * (img.at(x + 1, y) - img.at(x - 1, y));
            gy[i] = 0.5f * (img.at(x, y + 1) - img.at(x, y - 1));
        }
    }

    // Minimum eigenvalue of the 3x3-summed structure tensor.
    struct Candidate {
        double score;
        int x, y;
    };
    std::vector<Candidate> cands;
    double max_score = 0.0;
    for (int y = 2; y < h - 2; ++y) {
        for (int x = 2; x < w - 2; ++x) {
            double sxx = 0.0, sxy = 0.0, syy = 0.0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const std::size_t i =
                        static_cast<std::size_t>(y + dy) * w + (x + dx);
                    sxx += static_cast<double>(gx[i]) * gx[i];
                    sxy += static_cast<double>(gx[i]) * gy[i];
                    syy += static_cast<double>(gy[i]) * gy[i];
                }
            }
            const double tr = sxx + syy;
            const double det = std::sqrt((sxx - syy) * (sxx - syy) + 4.0 * sxy * sxy);
            const double lmin = 0.5 * (tr - det);
            if (lmin > 0.0) {
                cands.push_back({lmin, x, y});
                max_score = std::max(max_score, lmin);
            }
        }
    }
    if (max_score <= 0.0)
        raise(ErrorCode::NoFeatures, "no corner response above zero");

    const double threshold = quality * max_score;
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });

    std::vector<PointF> picked;
    for (const Candidate& c : cands) {
        if (c.score < threshold) break;
        bool clear = true;
        for (const PointF& p : picked) {
            const double dx = p.x - c.x, dy = p.y - c.y;
            if (dx * dx + dy * dy < 64.0) { // 8 px separation
                clear = false;
                break;
            }
        }
        if (!clear) continue;
        picked.push_back({static_cast<double>(c.x), static_cast<double>(c.y)});
        if (picked.size() == max_points) break;
    }
    if (picked.empty())
        raise(ErrorCode::NoFeatures, "no corner passed the quality threshold");
    return picked;
}

TrajectorySet track_lk(const std::vector<ImageGray8>& frames,
                       const std::vector<PointF>& points, double fs,
                       const TrackerParams& params) {
    if (frames.size() < 2)
        raise(ErrorCode::InvalidArgument, "tracking needs at least 2 frames");
    if (points.empty())
        raise(ErrorCode::InvalidArgument, "tracking needs at least one point");
    if (params.window < 3 || params.window % 2 == 0)
        raise(ErrorCode::InvalidArgument, "integration window must be odd and >= 3");
    for (std::size_t f = 1; f < frames.size(); ++f)
        if (frames[f].width != frames[0].width || frames[f].height != frames[0].height)
            raise(ErrorCode::DimensionMismatch, "frame geometry changes mid-sequence");

    const std::size_t n_pts = points.size();
    const std::size_t n_frames = frames.size();

    std::vector<bool> alive(n_pts, true);
    std::vector<PointF> pos = points;
    // positions[f][i] = location of point i in frame f
    std::vector<std::vector<PointF>> positions(n_frames);
    positions[0] = pos;

    std::vector<FloatImage> prev_pyr = build_pyramid(frames[0], params.pyramid_levels);

    for (std::size_t f = 1; f < n_frames; ++f) {
        std::vector<FloatImage> next_pyr = build_pyramid(frames[f], params.pyramid_levels);
        for (std::size_t i = 0; i < n_pts; ++i) {
            if (!alive[i]) continue;
            const PairTrack r = track_point(prev_pyr, next_pyr, pos[i], params);
            if (r.lost)
                alive[i] = false;
            else
                pos[i] = r.position;
        }
        positions[f] = pos;
        prev_pyr = std::move(next_pyr);
    }

    TrajectorySet out;
    out.fs = fs;
    for (std::size_t i = 0; i < n_pts; ++i) {
        if (!alive[i]) continue;
        std::vector<double> traj(n_frames);
        for (std::size_t f = 0; f < n_frames; ++f)
            traj[f] = positions[f][i].y;
        out.y.push_back(std::move(traj));
        char buf[32];
        std::snprintf(buf, sizeof(buf), "p%03zu", i);
        out.point_ids.emplace_back(buf);
    }
    if (out.y.empty())
        raise(ErrorCode::AllPointsLost, "no feature point survived tracking");
    return out;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty())
        raise(ErrorCode::InvalidArgument, "quantile of an empty set");
    std::sort(values.begin(), values.end());
    // Linear interpolation at 1-indexed position q*n.
    double pos = q * static_cast<double>(values.size()) - 1.0;
    pos = std::clamp(pos, 0.0, static_cast<double>(values.size() - 1));
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= values.size()) return values[lo];
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

std::pair<Bvp, sep::SourceChoice> ibcg_pulse(const TrajectorySet& t,
                                             const FreqBand& band) {
    const std::size_t n = t.n_points();
    if (n < 2)
        raise(ErrorCode::TooFewTrajectories, "need at least 2 trajectories");
    const std::size_t frames = t.n_frames();
    for (const auto& traj : t.y)
        if (traj.size() != frames)
            raise(ErrorCode::InvalidArgument, "trajectory lengths differ");

    const auto coeffs = dsp::butter_bandpass(3, band, t.fs);
    std::vector<std::vector<double>> filtered(n);
    for (std::size_t i = 0; i < n; ++i)
        filtered[i] = dsp::filtfilt(coeffs, t.y[i]);

    // Reference-normalize against the first filtered trajectory; its own
    // difference is identically zero and is excluded from analysis.
    std::vector<std::vector<double>> z(n - 1);
    for (std::size_t i = 1; i < n; ++i) {
        z[i - 1].resize(frames);
        for (std::size_t f = 0; f < frames; ++f)
            z[i - 1][f] = filtered[i][f] - filtered[0][f];
    }

    std::vector<double> movement(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        double acc = 0.0;
        for (double v : z[i]) acc += v * v;
        movement[i] = std::sqrt(acc);
    }

    const double cutoff = quantile(movement, 0.75);
    std::vector<std::vector<double>> survivors;
    for (std::size_t i = 0; i < z.size(); ++i)
        if (!(movement[i] > cutoff))
            survivors.push_back(std::move(z[i]));

    if (survivors.size() < 3)
        raise(ErrorCode::TooFewTrajectories,
              "only " + std::to_string(survivors.size()) +
                  " trajectories survive motion pruning");
    double total_sd = 0.0;
    for (const auto& s : survivors) total_sd += dsp::sample_std(s);
    if (total_sd == 0.0)
        raise(ErrorCode::TooFewTrajectories, "no variance survives normalization");

    const std::size_t k = std::min<std::size_t>(5, survivors.size());
    sep::SourceSet comps = sep::pca(survivors, t.fs, k);
    sep::SourceChoice choice =
        sep::select_source(comps, band, sep::SpectrumKind::Lomb, 5);

    Bvp out;
    out.trace = Trace{comps.sources[choice.index], t.fs, "bvp"};
    out.method = Method::Ibcg;
    return {out, choice};
}

} // namespace pulseframe::ibcg
