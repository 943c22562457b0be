#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "pulseframe/ibcg.hpp"
#include "pulseframe/image.hpp"
#include "pulseframe/quality.hpp"
#include "pulseframe/types.hpp"

namespace pulseframe::io {

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

/// Columns `t,r,g,b`; t must be strictly increasing and uniform to 1e-6
/// relative. The rate is inferred from the median step.
RgbTrace load_trace_csv(const std::filesystem::path& path);

/// Columns `t,value` as written by save_bvp_csv.
Trace load_value_csv(const std::filesystem::path& path);

/// Columns `frame,point_id,y`, one row per (frame, point); every point must
/// cover every frame. The sampling rate is supplied by the caller.
ibcg::TrajectorySet load_trajectory_csv(const std::filesystem::path& path, double fs);

/// Columns `t,bpm`.
quality::HrSeries load_ref_hr_csv(const std::filesystem::path& path);

/// Packed 8-bit RGB frames, row-major, no padding; the byte count must be a
/// multiple of width*height*3. path "-" reads stdin.
std::vector<ImageRgb8> load_raw_rgb(const std::filesystem::path& path,
                                    int width, int height);

/// Binary (P6) portable pixmaps, consumed in lexicographic filename order;
/// all frames must share one geometry.
std::vector<ImageRgb8> load_ppm_dir(const std::filesystem::path& dir);

ImageRgb8 load_ppm(const std::filesystem::path& path);
void save_ppm(const std::filesystem::path& path, const ImageRgb8& img);

/// Writes to a temp file in the destination directory, then renames, so a
/// killed run never leaves a partial file behind.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string bvp_csv(const Bvp& b);
std::string hr_csv(const quality::HrSeries& h);
std::string spectrum_csv(const dsp::SpectralEstimate& s);

/// Static two-panel figure: waveform over time, spectrum below.
std::string plot_svg(const Bvp& b, const dsp::SpectralEstimate& spectrum);

} // namespace pulseframe::io
