#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pulseframe/image.hpp"
#include "pulseframe/types.hpp"

namespace pulseframe::pipeline {

enum class InputKind { TraceCsv, Raw, PpmDir, TrajectoryCsv };

const char* input_kind_name(InputKind k);
InputKind input_kind_from_name(const std::string& name);

struct RunConfig {
    Method method = Method::Pos;
    InputKind input_kind = InputKind::TraceCsv;
    std::filesystem::path input;
    double fps = 0.0;          // required for raw / ppm-dir / trajectory-csv
    int width = 0, height = 0; // required for raw
    Roi roi;
    FreqBand band;
    std::size_t nfft = 4096;
    double hr_window_s = 20.0;
    double hr_step_s = 10.0;
    std::optional<std::filesystem::path> ref_hr;
    std::filesystem::path out_dir = ".";
    std::uint64_t seed = 0;
    // Tracker knobs, used only by the motion method on frame input.
    int lk_levels = 3;
    int lk_window = 15;
    std::size_t max_points = 64;
    double feature_quality = 0.01;

    /// ConfigError unless the method/input pairing and geometry make sense.
    void validate() const;
};

/// Rule-based skin classifier on 8-bit RGB values.
bool skin_pixel(std::uint8_t r, std::uint8_t g, std::uint8_t b);

std::vector<bool> skin_mask(const ImageRgb8& frame);

/// Per-frame, per-channel mean over the ROI pixels. EmptyRoi (naming the
/// frame index) when a frame's mask selects nothing.
RgbTrace spatial_average(const std::vector<ImageRgb8>& frames,
                         const Roi& roi, double fps);

/// End-to-end run: ingest, recover the pulse, estimate heart rate, write
/// bvp.csv, hr.csv, spectrum.csv, metrics.json and plot.svg into out_dir.
void run(const RunConfig& cfg);

} // namespace pulseframe::pipeline
