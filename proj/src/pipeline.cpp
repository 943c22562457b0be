#include "pulseframe/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>

#include "pulseframe/dsp.hpp"
#include "pulseframe/error.hpp"
#include "pulseframe/ibcg.hpp"
#include "pulseframe/io.hpp"
#include "pulseframe/ippg.hpp"
#include "pulseframe/quality.hpp"

namespace fs = std::filesystem;

namespace pulseframe::pipeline {

const char* input_kind_name(InputKind k) {
    switch (k) {
        case InputKind::TraceCsv: return "trace-csv";
        case InputKind::Raw: return "raw";
        case InputKind::PpmDir: return "ppm-dir";
        case InputKind::TrajectoryCsv: return "trajectory-csv";
    }
    return "?";
}

InputKind input_kind_from_name(const std::string& name) {
    if (name == "trace-csv") return InputKind::TraceCsv;
    if (name == "raw") return InputKind::Raw;
    if (name == "ppm-dir") return InputKind::PpmDir;
    if (name == "trajectory-csv") return InputKind::TrajectoryCsv;
    raise(ErrorCode::ConfigError, "unknown input kind '" + name + "'");
}

void RunConfig::validate() const {
    const bool frames = input_kind == InputKind::Raw || input_kind == InputKind::PpmDir;
    if (method == Method::Ibcg) {
        if (!frames && input_kind != InputKind::TrajectoryCsv)
            raise(ErrorCode::ConfigError,
                  "the motion method needs frame input or a trajectory file, not " +
                      std::string(input_kind_name(input_kind)));
    } else {
        if (!frames && input_kind != InputKind::TraceCsv)
            raise(ErrorCode::ConfigError,
                  std::string(method_name(method)) +
                      " needs frame input or a channel trace file, not " +
                      std::string(input_kind_name(input_kind)));
    }
    if (input_kind != InputKind::TraceCsv && !(fps > 0.0))
        raise(ErrorCode::ConfigError, "--fps is required for this input kind");
    if (input_kind == InputKind::Raw && (width <= 0 || height <= 0))
        raise(ErrorCode::ConfigError, "--width/--height are required for raw input");
    if (nfft == 0 || (nfft & (nfft - 1)) != 0)
        raise(ErrorCode::ConfigError, "--nfft must be a power of two");
    if (!(hr_window_s > 0.0) || !(hr_step_s > 0.0) || hr_step_s > hr_window_s)
        raise(ErrorCode::ConfigError, "need 0 < --hr-step <= --hr-window");
}

bool skin_pixel(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const int mx = std::max({r, g, b});
    const int mn = std::min({r, g, b});
    return r > 95 && g > 40 && b > 20 && (mx - mn) > 15 &&
           std::abs(static_cast<int>(r) - static_cast<int>(g)) > 15 && r > g && r > b;
}

std::vector<bool> skin_mask(const ImageRgb8& frame) {
    const std::size_t n = static_cast<std::size_t>(frame.width) * frame.height;
    std::vector<bool> mask(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t* p = frame.data.data() + 3 * i;
        mask[i] = skin_pixel(p[0], p[1], p[2]);
    }
    return mask;
}

RgbTrace spatial_average(const std::vector<ImageRgb8>& frames,
                         const Roi& roi, double fps) {
    if (frames.empty())
        raise(ErrorCode::InvalidArgument, "no frames to average");
    const int w = frames[0].width, h = frames[0].height;
    if (roi.kind == RoiKind::Rectangle &&
        (roi.x < 0 || roi.y < 0 || roi.w <= 0 || roi.h <= 0 || roi.x + roi.w > w ||
         roi.y + roi.h > h))
        raise(ErrorCode::ConfigError, "rectangle ROI falls outside the frame");

    std::vector<double> r, g, b;
    r.reserve(frames.size());
    g.reserve(frames.size());
    b.reserve(frames.size());
    for (std::size_t f = 0; f < frames.size(); ++f) {
        const ImageRgb8& img = frames[f];
        double sr = 0.0, sg = 0.0, sb = 0.0;
        std::size_t count = 0;
        auto accumulate = [&](int x, int y) {
            const std::uint8_t* p = img.pixel(x, y);
            sr += p[0];
            sg += p[1];
            sb += p[2];
            ++count;
        };
        switch (roi.kind) {
            case RoiKind::WholeFrame:
                for (int y = 0; y < h; ++y)
                    for (int x = 0; x < w; ++x) accumulate(x, y);
                break;
            case RoiKind::Rectangle:
                for (int y = roi.y; y < roi.y + roi.h; ++y)
                    for (int x = roi.x; x < roi.x + roi.w; ++x) accumulate(x, y);
                break;
            case RoiKind::SkinMask: {
                const auto mask = skin_mask(img);
                for (int y = 0; y < h; ++y)
                    for (int x = 0; x < w; ++x)
                        if (mask[static_cast<std::size_t>(y) * w + x]) accumulate(x, y);
                break;
            }
        }
        if (count == 0)
            raise(ErrorCode::EmptyRoi,
                  "ROI selects no pixels in frame " + std::to_string(f));
        r.push_back(sr / static_cast<double>(count));
        g.push_back(sg / static_cast<double>(count));
        b.push_back(sb / static_cast<double>(count));
    }
    return RgbTrace{Trace{std::move(r), fps, "r"}, Trace{std::move(g), fps, "g"},
                    Trace{std::move(b), fps, "b"}};
}

void run(const RunConfig& cfg) {
    cfg.validate();

    Bvp bvp;
    if (cfg.method == Method::Ibcg) {
        ibcg::TrajectorySet traj;
        if (cfg.input_kind == InputKind::TrajectoryCsv) {
            traj = io::load_trajectory_csv(cfg.input, cfg.fps);
        } else {
            const auto frames = cfg.input_kind == InputKind::Raw
                                    ? io::load_raw_rgb(cfg.input, cfg.width, cfg.height)
                                    : io::load_ppm_dir(cfg.input);
            std::vector<ImageGray8> gray;
            gray.reserve(frames.size());
            for (const auto& f : frames) gray.push_back(to_gray(f));
            if (gray.empty())
                raise(ErrorCode::InvalidArgument, "no frames supplied");
            const auto points =
                ibcg::detect_features(gray.front(), cfg.max_points, cfg.feature_quality);
            ibcg::TrackerParams params;
            params.pyramid_levels = cfg.lk_levels;
            params.window = cfg.lk_window;
            traj = ibcg::track_lk(gray, points, cfg.fps, params);
        }
        auto [pulse, choice] = ibcg::ibcg_pulse(traj, cfg.band);
        bvp = std::move(pulse);
        std::cerr << "selected motion component " << choice.index << " (peak "
                  << io::format_double(choice.peak_hz) << " Hz, score "
                  << io::format_double(choice.score) << ")\n";
    } else {
        RgbTrace trace;
        if (cfg.input_kind == InputKind::TraceCsv) {
            trace = io::load_trace_csv(cfg.input);
        } else {
            const auto frames = cfg.input_kind == InputKind::Raw
                                    ? io::load_raw_rgb(cfg.input, cfg.width, cfg.height)
                                    : io::load_ppm_dir(cfg.input);
            trace = spatial_average(frames, cfg.roi, cfg.fps);
        }
        switch (cfg.method) {
            case Method::Green: bvp = ippg::green(trace, cfg.band); break;
            case Method::Ica: bvp = ippg::ica_pulse(trace, cfg.band); break;
            case Method::Chrom: bvp = ippg::chrom(trace, cfg.band); break;
            case Method::Pos: bvp = ippg::pos(trace, cfg.band); break;
            case Method::Ibcg: break; // handled above
        }
    }

    const std::size_t nfft =
        std::max(cfg.nfft, dsp::next_pow2(bvp.trace.samples.size()));
    const quality::HrSeries hrs =
        quality::hr_series(bvp, cfg.band, cfg.hr_window_s, cfg.hr_step_s);
    double hr_mean = 0.0;
    for (double v : hrs.bpm) hr_mean += v;
    hr_mean /= static_cast<double>(hrs.bpm.size());

    const auto spectrum = dsp::power_spectrum(bvp.trace, nfft);

    nlohmann::ordered_json metrics;
    metrics["method"] = method_name(bvp.method);
    metrics["fs"] = bvp.trace.fs;
    metrics["n_samples"] = bvp.trace.samples.size();
    metrics["hr_mean_bpm"] = hr_mean;

    if (cfg.ref_hr) {
        const quality::HrSeries ref = io::load_ref_hr_csv(*cfg.ref_hr);
        double gold = 0.0;
        for (double v : ref.bpm) gold += v;
        gold /= static_cast<double>(ref.bpm.size());
        const auto rep = quality::snr(bvp, gold, nfft);
        metrics["snr_fraction"] = rep.fraction;
        metrics["snr_db"] = rep.db; // serialized as null if ever non-finite
        metrics["mae_bpm"] = quality::mae(hrs, ref);
        metrics["rmse_bpm"] = quality::rmse(hrs, ref);
    } else {
        // No reference: score the spectrum against the tool's own estimate.
        const auto rep = quality::snr(bvp, std::clamp(hr_mean, 42.0, 120.0), nfft);
        metrics["snr_fraction"] = rep.fraction;
    }

    fs::create_directories(cfg.out_dir);
    io::atomic_write(cfg.out_dir / "bvp.csv", io::bvp_csv(bvp));
    io::atomic_write(cfg.out_dir / "hr.csv", io::hr_csv(hrs));
    io::atomic_write(cfg.out_dir / "spectrum.csv", io::spectrum_csv(spectrum));
    io::atomic_write(cfg.out_dir / "metrics.json", metrics.dump(2) + "\n");
    io::atomic_write(cfg.out_dir / "plot.svg", io::plot_svg(bvp, spectrum));
}

} // namespace pulseframe::pipeline
