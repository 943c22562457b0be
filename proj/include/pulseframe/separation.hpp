#pragma once

#include <cstddef>
#include <vector>

#include "pulseframe/dsp.hpp"
#include "pulseframe/types.hpp"

namespace pulseframe::sep {

/// Output of a source-separation step: recovered series plus the matrix that
/// maps mean-centered observations onto them. For ICA the matrix is K x K;
/// for PCA it is k x N with orthonormal rows (the component loadings).
struct SourceSet {
    std::vector<std::vector<double>> sources;
    std::vector<std::vector<double>> unmixing;
    double fs = 0.0;
    bool converged = true;
};

struct SourceChoice {
    std::size_t index = 0;
    double score = 0.0;   // peak-bin power over total power, in [0, 1]
    double peak_hz = 0.0;
};

struct WhitenResult {
    std::vector<std::vector<double>> channels; // identity sample covariance
    std::vector<std::vector<double>> sphering; // K x K
    std::vector<double> means;                 // removed channel means
};

/// Mean-centers and spheres the channels so their sample covariance is the
/// identity. SingularCovariance when a channel is constant or duplicated.
WhitenResult whiten(const std::vector<std::vector<double>>& x);

/// JADE: whitening, the K(K+1)/2 parallel fourth-order cumulant matrices,
/// joint diagonalization by Jacobi sweeps (angle threshold 1e-8, at most 100
/// sweeps). Sources come back unit-variance, sign-fixed so each row's
/// largest-magnitude unmixing entry is positive, ordered by descending
/// kurtosis magnitude. When the data carries no usable fourth-order structure
/// (all-Gaussian channels) the whitened channels are returned with
/// converged=false instead of failing.
SourceSet jade(const std::vector<std::vector<double>>& x, double fs);

/// First k principal component score series of the mean-centered channels,
/// ordered by descending eigenvalue; loadings orthonormal.
SourceSet pca(const std::vector<std::vector<double>>& x, double fs, std::size_t k);

enum class SpectrumKind { Fft, Lomb };

/// Scores the first top_k sources by in-band spectral peak power normalized
/// by total power and returns the best one; ties break toward the lower
/// index. FFT spectra for the color-channel path, Lomb for trajectories.
SourceChoice select_source(const SourceSet& s, const FreqBand& band,
                           SpectrumKind kind, std::size_t top_k);

} // namespace pulseframe::sep
