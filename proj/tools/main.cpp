#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "pulseframe/error.hpp"
#include "pulseframe/pipeline.hpp"

using namespace pulseframe;

namespace {

FreqBand parse_band(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos)
        raise(ErrorCode::ConfigError, "--band expects LO,HI in Hz");
    try {
        return FreqBand{std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
    } catch (const std::exception&) {
        raise(ErrorCode::ConfigError, "--band expects numeric LO,HI");
    }
}

Roi parse_roi(const std::string& s) {
    Roi roi;
    if (s == "whole") {
        roi.kind = RoiKind::WholeFrame;
    } else if (s == "skin") {
        roi.kind = RoiKind::SkinMask;
    } else if (s.rfind("rect:", 0) == 0) {
        roi.kind = RoiKind::Rectangle;
        if (std::sscanf(s.c_str() + 5, "%d,%d,%d,%d", &roi.x, &roi.y, &roi.w, &roi.h) != 4)
            raise(ErrorCode::ConfigError, "--roi rect expects rect:X,Y,W,H");
    } else {
        raise(ErrorCode::ConfigError,
              "--roi must be whole, skin, or rect:X,Y,W,H (got '" + s + "')");
    }
    return roi;
}

const char* kExitCodeHelp =
    "Exit codes:\n"
    "  0   success\n"
    "  10  ZeroMean             window/ROI mean is negligible\n"
    "  11  TooShort             signal shorter than one analysis window\n"
    "  12  BandOutOfRange       band edge reaches Nyquist\n"
    "  13  ZeroVariance         constant signal cannot be normalized\n"
    "  14  SingularCovariance   constant or duplicated channel\n"
    "  15  NoConvergence        source separation did not converge\n"
    "  16  EmptyBand            no spectral bin inside the band\n"
    "  17  AlphaUndefined       chrominance ratio undefined (flat window)\n"
    "  18  SigmaUndefined       projection ratio undefined\n"
    "  19  NoFeatures           no trackable corners in the first frame\n"
    "  20  AllPointsLost        every tracked point was dropped\n"
    "  21  TooFewTrajectories   not enough trajectories after pruning\n"
    "  22  ZeroPower            spectrum carries no power below 240 BPM\n"
    "  23  EmptySeries          heart-rate series is empty\n"
    "  24  ParseError           malformed input file\n"
    "  25  NonUniformSampling   time column deviates from a uniform grid\n"
    "  26  TruncatedFrame       frame stream ends mid-frame\n"
    "  27  DimensionMismatch    frame geometry changes mid-sequence\n"
    "  28  EmptyRoi             ROI selects no pixels in some frame\n"
    "  29  ConfigError          invalid flag combination\n"
    "  30  InvalidArgument      precondition violated\n"
    "  31  IoError              file system failure\n"
    "  32  OutOfBounds          window exceeds the output buffer\n"
    "\n"
    "On failure a single machine-parsable line goes to stderr:\n"
    "  pulseframe: error code=<N> kind=<Name>: <message>\n"
    "\n"
    "Environment:\n"
    "  PULSEFRAME_THREADS   caps internal parallelism (0 or unset = auto);\n"
    "                       outputs are byte-identical at any setting\n";

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pulseframe - imaging-based pulse recovery and signal quality tool"};
    app.footer(kExitCodeHelp);

    auto* run_cmd = app.add_subcommand("run", "Recover a pulse waveform and heart rate");

    std::string method = "pos";
    std::string input;
    std::string input_kind = "trace-csv";
    std::string band = "0.7,2.5";
    std::string roi = "whole";
    pipeline::RunConfig cfg;

    run_cmd->add_option("--method", method, "green|ica|chrom|pos|ibcg")->required();
    run_cmd->add_option("--input", input, "input path, or - for stdin (raw only)")->required();
    run_cmd->add_option("--input-kind", input_kind, "trace-csv|raw|ppm-dir|trajectory-csv");
    run_cmd->add_option("--width", cfg.width, "frame width for raw input");
    run_cmd->add_option("--height", cfg.height, "frame height for raw input");
    run_cmd->add_option("--fps", cfg.fps, "frame rate for raw/ppm-dir/trajectory-csv input");
    run_cmd->add_option("--roi", roi, "whole | skin | rect:X,Y,W,H");
    run_cmd->add_option("--band", band, "pass band LO,HI in Hz (default 0.7,2.5)");
    run_cmd->add_option("--nfft", cfg.nfft, "FFT size, power of two (default 4096)");
    run_cmd->add_option("--hr-window", cfg.hr_window_s, "heart-rate window seconds (default 20)");
    run_cmd->add_option("--hr-step", cfg.hr_step_s, "heart-rate step seconds (default 10)");
    run_cmd->add_option("--ref-hr", [&cfg](const std::vector<std::string>& v) {
        cfg.ref_hr = v.front();
        return true;
    }, "reference heart-rate CSV (t,bpm) for error metrics");
    run_cmd->add_option("--out", cfg.out_dir, "output directory (default .)");
    run_cmd->add_option("--seed", cfg.seed, "seed recorded for stochastic test paths");
    run_cmd->add_option("--lk-levels", cfg.lk_levels, "tracker pyramid levels (default 3)");
    run_cmd->add_option("--lk-win", cfg.lk_window, "tracker window side, odd (default 15)");
    run_cmd->add_option("--max-points", cfg.max_points, "feature budget (default 64)");
    run_cmd->add_option("--feature-quality", cfg.feature_quality,
                        "corner quality fraction (default 0.01)");

    app.require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        cfg.method = method_from_name(method);
        cfg.input_kind = pipeline::input_kind_from_name(input_kind);
        cfg.input = input;
        cfg.band = parse_band(band);
        cfg.roi = parse_roi(roi);
        pipeline::run(cfg);
    } catch (const Error& e) {
        std::cerr << "pulseframe: error code=" << e.exit_code() << " kind=" << e.code_name()
                  << ": " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "pulseframe: error code=1 kind=Internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
