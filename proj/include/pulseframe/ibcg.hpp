#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pulseframe/image.hpp"
#include "pulseframe/separation.hpp"
#include "pulseframe/types.hpp"

namespace pulseframe::ibcg {

/// Vertical displacement of N tracked points over T frames.
struct TrajectorySet {
    std::vector<std::vector<double>> y; // N series of length T, pixels
    double fs = 0.0;
    std::vector<std::string> point_ids;

    std::size_t n_points() const { return y.size(); }
    std::size_t n_frames() const { return y.empty() ? 0 : y.front().size(); }
};

struct FramePair {
    const ImageGray8& prev;
    const ImageGray8& next;

    /// Equal geometry, at least 32x32.
    void validate() const;
};

struct PointF {
    double x = 0.0;
    double y = 0.0;
};

struct TrackerParams {
    int pyramid_levels = 3;
    int window = 15;           // odd integration window side, pixels
    int max_iterations = 30;
    double min_update_px = 0.01;
    double min_eigen = 1e-4;   // per-pixel normalized gradient-matrix floor
    double max_residual = 16.0; // mean absolute patch difference, gray levels
};

/// Minimum-eigenvalue (Shi-Tomasi) corners, greedily picked in score order
/// with at least 8 px separation and score >= quality * best score.
std::vector<PointF> detect_features(const ImageGray8& frame,
                                    std::size_t max_points, double quality);

/// Tracks one point across a single frame pair; empty when the point leaves
/// the frame, lacks texture or mismatches beyond the residual threshold.
std::optional<PointF> lk_displacement(const FramePair& pair, const PointF& point,
                                      const TrackerParams& params = {});

/// Iterative pyramidal Lucas-Kanade over consecutive frame pairs. A point
/// that leaves the frame, loses texture or exceeds the residual threshold is
/// dropped for the whole run; survivors' y-components become trajectories.
TrajectorySet track_lk(const std::vector<ImageGray8>& frames,
                       const std::vector<PointF>& points, double fs,
                       const TrackerParams& params = {});

/// Trajectory quantile threshold used for motion pruning: linear
/// interpolation at 1-indexed position q*n.
double quantile(std::vector<double> values, double q);

/// Band-pass each trajectory, subtract the first filtered trajectory from
/// the rest, prune those whose movement magnitude exceeds the 75th
/// percentile, run PCA and keep the component with the strongest normalized
/// Lomb peak in the band.
std::pair<Bvp, sep::SourceChoice> ibcg_pulse(const TrajectorySet& t,
                                             const FreqBand& band);

} // namespace pulseframe::ibcg
