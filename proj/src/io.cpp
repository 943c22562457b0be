#include "pulseframe/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "pulseframe/error.hpp"

namespace fs = std::filesystem;

namespace pulseframe::io {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    out.push_back(field);
    return out;
}

double parse_number(const std::string& s, std::size_t line_no, const std::string& col) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last || !std::isfinite(v))
        raise(ErrorCode::ParseError,
              "line " + std::to_string(line_no) + ": bad numeric value '" + s +
                  "' in column '" + col + "'");
    return v;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        raise(ErrorCode::ParseError, "missing column '" + name + "'");
    }
};

CsvTable read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        raise(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    CsvTable t;
    std::string line;
    if (!std::getline(in, line))
        raise(ErrorCode::ParseError, "'" + path.string() + "' is empty");
    t.header = split_line(line);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (fields.size() != t.header.size())
            raise(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": expected " +
                      std::to_string(t.header.size()) + " fields, got " +
                      std::to_string(fields.size()));
        t.rows.push_back(std::move(fields));
    }
    return t;
}

/// Strictly increasing, uniform to 1e-6 relative; returns the inferred rate.
double infer_fs(const std::vector<double>& t) {
    if (t.size() < 2)
        raise(ErrorCode::ParseError, "need at least 2 rows to infer the sampling rate");
    std::vector<double> dt(t.size() - 1);
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        dt[i] = t[i + 1] - t[i];
        if (!(dt[i] > 0.0))
            raise(ErrorCode::ParseError, "time column must be strictly increasing");
    }
    std::vector<double> sorted = dt;
    std::sort(sorted.begin(), sorted.end());
    const double med = sorted[sorted.size() / 2];
    for (double d : dt)
        if (std::abs(d - med) > 1e-6 * med)
            raise(ErrorCode::NonUniformSampling,
                  "sample spacing deviates more than 1e-6 relative from the median");
    double rate = 1.0 / med;
    // Timestamps rounded through decimal text leave the reciprocal a few ulps
    // off whole-number rates; snap so reloading a file reproduces fs exactly.
    const double snapped = std::nearbyint(rate);
    if (snapped > 0.0 && std::abs(rate - snapped) <= 1e-9 * rate)
        rate = snapped;
    return rate;
}

} // namespace

RgbTrace load_trace_csv(const fs::path& path) {
    const CsvTable t = read_csv(path);
    const std::size_t ct = t.column("t"), cr = t.column("r"), cg = t.column("g"),
                      cb = t.column("b");
    std::vector<double> times, r, g, b;
    std::size_t line_no = 1;
    for (const auto& row : t.rows) {
        ++line_no;
        times.push_back(parse_number(row[ct], line_no, "t"));
        r.push_back(parse_number(row[cr], line_no, "r"));
        g.push_back(parse_number(row[cg], line_no, "g"));
        b.push_back(parse_number(row[cb], line_no, "b"));
    }
    const double rate = infer_fs(times);
    RgbTrace out{Trace{std::move(r), rate, "r"}, Trace{std::move(g), rate, "g"},
                 Trace{std::move(b), rate, "b"}};
    out.validate();
    return out;
}

Trace load_value_csv(const fs::path& path) {
    const CsvTable t = read_csv(path);
    const std::size_t ct = t.column("t"), cv = t.column("value");
    std::vector<double> times, values;
    std::size_t line_no = 1;
    for (const auto& row : t.rows) {
        ++line_no;
        times.push_back(parse_number(row[ct], line_no, "t"));
        values.push_back(parse_number(row[cv], line_no, "value"));
    }
    const double rate = infer_fs(times);
    Trace out{std::move(values), rate, "value"};
    out.validate();
    return out;
}

ibcg::TrajectorySet load_trajectory_csv(const fs::path& path, double fs) {
    if (!(fs > 0.0))
        raise(ErrorCode::ConfigError, "trajectory input needs a positive --fps");
    const CsvTable t = read_csv(path);
    const std::size_t cf = t.column("frame"), cp = t.column("point_id"),
                      cy = t.column("y");

    std::map<std::string, std::map<long, double>> by_point;
    std::set<long> frames;
    std::size_t line_no = 1;
    for (const auto& row : t.rows) {
        ++line_no;
        const double fval = parse_number(row[cf], line_no, "frame");
        const long frame = std::lround(fval);
        if (frame < 0 || static_cast<double>(frame) != fval)
            raise(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": frame must be a non-negative integer");
        const double y = parse_number(row[cy], line_no, "y");
        auto [it, inserted] = by_point[row[cp]].emplace(frame, y);
        if (!inserted)
            raise(ErrorCode::ParseError,
                  "duplicate (frame, point) pair at line " + std::to_string(line_no));
        frames.insert(frame);
    }
    if (by_point.empty())
        raise(ErrorCode::ParseError, "trajectory file has no rows");

    const std::size_t n_frames = frames.size();
    if (*frames.begin() != 0 ||
        *frames.rbegin() != static_cast<long>(n_frames) - 1)
        raise(ErrorCode::ParseError, "frame indices must cover 0..T-1 without gaps");

    ibcg::TrajectorySet out;
    out.fs = fs;
    for (const auto& [id, series] : by_point) {
        if (series.size() != n_frames)
            raise(ErrorCode::ParseError,
                  "point '" + id + "' does not cover all " + std::to_string(n_frames) +
                      " frames");
        std::vector<double> y;
        y.reserve(n_frames);
        for (const auto& [frame, v] : series)
            y.push_back(v);
        out.y.push_back(std::move(y));
        out.point_ids.push_back(id);
    }
    return out;
}

quality::HrSeries load_ref_hr_csv(const fs::path& path) {
    const CsvTable t = read_csv(path);
    const std::size_t ct = t.column("t"), cb = t.column("bpm");
    quality::HrSeries out;
    std::size_t line_no = 1;
    for (const auto& row : t.rows) {
        ++line_no;
        out.t_s.push_back(parse_number(row[ct], line_no, "t"));
        out.bpm.push_back(parse_number(row[cb], line_no, "bpm"));
    }
    if (out.t_s.empty())
        raise(ErrorCode::EmptySeries, "reference file has no rows");
    return out;
}

std::vector<ImageRgb8> load_raw_rgb(const fs::path& path, int width, int height) {
    if (width <= 0 || height <= 0)
        raise(ErrorCode::ConfigError, "raw input needs positive --width and --height");
    std::string bytes;
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        bytes = ss.str();
    } else {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            raise(ErrorCode::IoError, "cannot open '" + path.string() + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        bytes = ss.str();
    }
    const std::size_t frame_bytes = static_cast<std::size_t>(width) * height * 3;
    if (bytes.size() % frame_bytes != 0)
        raise(ErrorCode::TruncatedFrame,
              "stream of " + std::to_string(bytes.size()) +
                  " bytes is not a multiple of the " + std::to_string(frame_bytes) +
                  "-byte frame size");
    const std::size_t n = bytes.size() / frame_bytes;
    std::vector<ImageRgb8> frames(n);
    for (std::size_t f = 0; f < n; ++f) {
        frames[f].width = width;
        frames[f].height = height;
        const auto* src = reinterpret_cast<const std::uint8_t*>(bytes.data()) + f * frame_bytes;
        frames[f].data.assign(src, src + frame_bytes);
    }
    return frames;
}

namespace {

int read_ppm_token(std::istream& in) {
    // Skips whitespace and '#' comments between header tokens.
    while (in) {
        int c = in.peek();
        if (c == '#') {
            std::string comment;
            std::getline(in, comment);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int value = -1;
    in >> value;
    return value;
}

} // namespace

ImageRgb8 load_ppm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        raise(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    std::string magic;
    in >> magic;
    if (magic != "P6")
        raise(ErrorCode::ParseError, "'" + path.string() + "' is not a binary P6 pixmap");
    const int w = read_ppm_token(in);
    const int h = read_ppm_token(in);
    const int maxval = read_ppm_token(in);
    if (w <= 0 || h <= 0 || maxval != 255)
        raise(ErrorCode::ParseError, "'" + path.string() + "' has an unsupported header");
    in.get(); // single whitespace after maxval
    ImageRgb8 img;
    img.width = w;
    img.height = h;
    img.data.resize(static_cast<std::size_t>(w) * h * 3);
    in.read(reinterpret_cast<char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
    if (static_cast<std::size_t>(in.gcount()) != img.data.size())
        raise(ErrorCode::TruncatedFrame, "'" + path.string() + "' ends mid-frame");
    return img;
}

void save_ppm(const fs::path& path, const ImageRgb8& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        raise(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data.data()),
              static_cast<std::streamsize>(img.data.size()));
}

std::vector<ImageRgb8> load_ppm_dir(const fs::path& dir) {
    std::vector<fs::path> files;
    if (!fs::is_directory(dir))
        raise(ErrorCode::IoError, "'" + dir.string() + "' is not a directory");
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".ppm")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
        raise(ErrorCode::IoError, "no .ppm files in '" + dir.string() + "'");

    std::vector<ImageRgb8> frames;
    for (const auto& f : files) {
        ImageRgb8 img = load_ppm(f);
        if (!frames.empty() &&
            (img.width != frames[0].width || img.height != frames[0].height))
            raise(ErrorCode::DimensionMismatch,
                  "'" + f.string() + "' is " + std::to_string(img.width) + "x" +
                      std::to_string(img.height) + " but the sequence started at " +
                      std::to_string(frames[0].width) + "x" +
                      std::to_string(frames[0].height));
        frames.push_back(std::move(img));
    }
    return frames;
}

void atomic_write(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out)
            raise(ErrorCode::IoError, "cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out)
            raise(ErrorCode::IoError, "short write to '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

std::string bvp_csv(const Bvp& b) {
    std::string out = "t,value\n";
    for (std::size_t i = 0; i < b.trace.samples.size(); ++i) {
        out += format_double(static_cast<double>(i) / b.trace.fs);
        out += ',';
        out += format_double(b.trace.samples[i]);
        out += '\n';
    }
    return out;
}

std::string hr_csv(const quality::HrSeries& h) {
    std::string out = "t,bpm\n";
    for (std::size_t i = 0; i < h.t_s.size(); ++i) {
        out += format_double(h.t_s[i]);
        out += ',';
        out += format_double(h.bpm[i]);
        out += '\n';
    }
    return out;
}

std::string spectrum_csv(const dsp::SpectralEstimate& s) {
    std::string out = "freq_hz,power\n";
    for (std::size_t i = 0; i < s.freqs_hz.size(); ++i) {
        out += format_double(s.freqs_hz[i]);
        out += ',';
        out += format_double(s.power[i]);
        out += '\n';
    }
    return out;
}

namespace {

std::string fixed2(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
    return std::string(buf, res.ptr);
}

std::string polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                     double x0, double y0, double w, double h, const char* color) {
    double xmin = xs.front(), xmax = xs.back();
    double ymin = ys[0], ymax = ys[0];
    for (double v : ys) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;
    std::string pts;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double px = x0 + (xs[i] - xmin) / (xmax - xmin) * w;
        const double py = y0 + h - (ys[i] - ymin) / (ymax - ymin) * h;
        pts += fixed2(px);
        pts += ',';
        pts += fixed2(py);
        pts += ' ';
    }
    return "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1\" points=\"" + pts + "\"/>\n";
}

} // namespace

std::string plot_svg(const Bvp& b, const dsp::SpectralEstimate& spectrum) {
    const int width = 900, height = 520;
    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " +
           std::to_string(width) + " " + std::to_string(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"20\" y=\"24\" font-family=\"monospace\" font-size=\"14\">pulse waveform (" +
           std::string(method_name(b.method)) + ")</text>\n";

    std::vector<double> times(b.trace.samples.size());
    for (std::size_t i = 0; i < times.size(); ++i)
        times[i] = static_cast<double>(i) / b.trace.fs;
    svg += "<rect x=\"60\" y=\"40\" width=\"800\" height=\"180\" fill=\"none\" stroke=\"#ccc\"/>\n";
    svg += polyline(times, b.trace.samples, 60, 40, 800, 180, "#0b6");

    svg += "<text x=\"20\" y=\"284\" font-family=\"monospace\" font-size=\"14\">power spectrum</text>\n";
    svg += "<rect x=\"60\" y=\"300\" width=\"800\" height=\"180\" fill=\"none\" stroke=\"#ccc\"/>\n";
    // Only the physiologically interesting low end of the spectrum.
    std::vector<double> fx, fy;
    for (std::size_t i = 0; i < spectrum.freqs_hz.size(); ++i) {
        if (spectrum.freqs_hz[i] > 5.0) break;
        fx.push_back(spectrum.freqs_hz[i]);
        fy.push_back(spectrum.power[i]);
    }
    if (fx.size() >= 2)
        svg += polyline(fx, fy, 60, 300, 800, 180, "#06b");
    svg += "<text x=\"60\" y=\"500\" font-family=\"monospace\" font-size=\"11\">0 Hz</text>\n";
    svg += "<text x=\"840\" y=\"500\" font-family=\"monospace\" font-size=\"11\">" +
           fixed2(fx.empty() ? 0.0 : fx.back()) + " Hz</text>\n";
    svg += "</svg>\n";
    return svg;
}

} // namespace pulseframe::io
