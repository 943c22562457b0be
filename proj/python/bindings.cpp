#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pulseframe/dsp.hpp"
#include "pulseframe/error.hpp"
#include "pulseframe/ibcg.hpp"
#include "pulseframe/ippg.hpp"
#include "pulseframe/pipeline.hpp"
#include "pulseframe/quality.hpp"
#include "pulseframe/separation.hpp"
#include "pulseframe/types.hpp"

namespace py = pybind11;
using namespace pulseframe;

namespace {

std::vector<double> as_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 1)
        throw py::value_error("expected a 1-D float array");
    return std::vector<double>(a.data(), a.data() + a.shape(0));
}

std::vector<std::vector<double>> as_channels(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2)
        throw py::value_error("expected a 2-D float array (channels x samples)");
    std::vector<std::vector<double>> out(static_cast<std::size_t>(a.shape(0)));
    for (py::ssize_t i = 0; i < a.shape(0); ++i)
        out[static_cast<std::size_t>(i)].assign(a.data(i, 0), a.data(i, 0) + a.shape(1));
    return out;
}

py::array_t<double> to_array(const std::vector<double>& v) {
    // The (count, data) constructor copies into a fresh owning array.
    return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::array_t<double> to_array2(const std::vector<std::vector<double>>& rows) {
    const py::ssize_t r = static_cast<py::ssize_t>(rows.size());
    const py::ssize_t c = rows.empty() ? 0 : static_cast<py::ssize_t>(rows.front().size());
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(r * c));
    for (const auto& row : rows)
        flat.insert(flat.end(), row.begin(), row.end());
    py::array_t<double> out(
        std::vector<py::ssize_t>{r, c},
        std::vector<py::ssize_t>{c * static_cast<py::ssize_t>(sizeof(double)),
                                 static_cast<py::ssize_t>(sizeof(double))},
        flat.data());
    return out;
}

RgbTrace make_rgb(const py::array_t<double, py::array::c_style | py::array::forcecast>& r,
                  const py::array_t<double, py::array::c_style | py::array::forcecast>& g,
                  const py::array_t<double, py::array::c_style | py::array::forcecast>& b,
                  double fs) {
    return RgbTrace{Trace{as_vector(r), fs, "r"}, Trace{as_vector(g), fs, "g"},
                    Trace{as_vector(b), fs, "b"}};
}

py::dict source_set_dict(const sep::SourceSet& s) {
    py::dict d;
    d["sources"] = to_array2(s.sources);
    d["unmixing"] = to_array2(s.unmixing);
    d["fs"] = s.fs;
    d["converged"] = s.converged;
    return d;
}

py::dict choice_dict(const sep::SourceChoice& c) {
    py::dict d;
    d["index"] = c.index;
    d["score"] = c.score;
    d["peak_hz"] = c.peak_hz;
    return d;
}

} // namespace

PYBIND11_MODULE(_pulseframe, m) {
    m.doc() = "Imaging-based pulse recovery: channel-trace and motion pipelines";

    static py::exception<Error> exc(m, "PulseframeError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(exc, (std::string(e.code_name()) + ": " + e.what()).c_str());
        }
    });

    m.def("normalize_window",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> w) {
              return to_array(normalize_window(as_vector(w)));
          },
          py::arg("w"), "Divide a window by its mean.");

    m.def("window_starts",
          [](std::size_t n, double fs, double length_s, double step_s) {
              return window_iter(n, fs, WindowPlan{length_s, step_s});
          },
          py::arg("n"), py::arg("fs"), py::arg("length_s"), py::arg("step_s"),
          "Full [start, end) windows over an n-sample signal.");

    m.def("butter_bandpass",
          [](int order, double low, double high, double fs) {
              const auto c = dsp::butter_bandpass(order, FreqBand{low, high}, fs);
              return py::make_tuple(to_array(c.b), to_array(c.a));
          },
          py::arg("order"), py::arg("low_hz"), py::arg("high_hz"), py::arg("fs"));

    m.def("filtfilt",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> b,
             py::array_t<double, py::array::c_style | py::array::forcecast> a,
             py::array_t<double, py::array::c_style | py::array::forcecast> x) {
              dsp::IirCoeffs c{as_vector(b), as_vector(a)};
              return to_array(dsp::filtfilt(c, as_vector(x)));
          },
          py::arg("b"), py::arg("a"), py::arg("x"), "Zero-phase forward-backward filtering.");

    m.def("detrend",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> x, double lam) {
              return to_array(dsp::detrend_sp(as_vector(x), dsp::DetrendConfig{lam}));
          },
          py::arg("x"), py::arg("lambda_") = 100.0, "Smoothness-priors detrending.");

    m.def("zscore",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> x) {
              return to_array(dsp::zscore(as_vector(x)));
          },
          py::arg("x"));

    m.def("power_spectrum",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> x, double fs,
             std::size_t nfft) {
              const auto est = dsp::power_spectrum(Trace{as_vector(x), fs, ""}, nfft);
              return py::make_tuple(to_array(est.freqs_hz), to_array(est.power));
          },
          py::arg("x"), py::arg("fs"), py::arg("nfft"));

    m.def("lomb",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> t,
             py::array_t<double, py::array::c_style | py::array::forcecast> x,
             py::array_t<double, py::array::c_style | py::array::forcecast> freqs) {
              const auto est = dsp::lomb(as_vector(t), as_vector(x), as_vector(freqs));
              return py::make_tuple(to_array(est.freqs_hz), to_array(est.power));
          },
          py::arg("times_s"), py::arg("x"), py::arg("freqs_hz"));

    m.def("hann", [](std::size_t n) { return to_array(dsp::hann(n)); }, py::arg("n"));

    m.def("whiten",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> x) {
              const auto w = sep::whiten(as_channels(x));
              return py::make_tuple(to_array2(w.channels), to_array2(w.sphering));
          },
          py::arg("x"));

    m.def("jade",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> x, double fs) {
              return source_set_dict(sep::jade(as_channels(x), fs));
          },
          py::arg("x"), py::arg("fs"), "JADE blind source separation on row channels.");

    m.def("pca",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> x, double fs,
             std::size_t k) { return source_set_dict(sep::pca(as_channels(x), fs, k)); },
          py::arg("x"), py::arg("fs"), py::arg("k"));

    m.def("select_source",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> sources, double fs,
             double low, double high, const std::string& kind, std::size_t top_k) {
              sep::SourceSet s;
              s.sources = as_channels(sources);
              s.fs = fs;
              const auto spectrum =
                  kind == "lomb" ? sep::SpectrumKind::Lomb : sep::SpectrumKind::Fft;
              return choice_dict(sep::select_source(s, FreqBand{low, high}, spectrum, top_k));
          },
          py::arg("sources"), py::arg("fs"), py::arg("low_hz"), py::arg("high_hz"),
          py::arg("kind") = "fft", py::arg("top_k") = 5);

    auto def_rgb_method = [&m](const char* name, auto fn, const char* doc) {
        m.def(name,
              [fn](py::array_t<double, py::array::c_style | py::array::forcecast> r,
                   py::array_t<double, py::array::c_style | py::array::forcecast> g,
                   py::array_t<double, py::array::c_style | py::array::forcecast> b, double fs,
                   double low, double high) {
                  const Bvp out = fn(make_rgb(r, g, b, fs), FreqBand{low, high});
                  return to_array(out.trace.samples);
              },
              py::arg("r"), py::arg("g"), py::arg("b"), py::arg("fs"),
              py::arg("low_hz") = 0.7, py::arg("high_hz") = 2.5, doc);
    };
    def_rgb_method("green", [](const RgbTrace& x, const FreqBand& b) { return ippg::green(x, b); },
                   "Band-passed green channel.");
    def_rgb_method("chrom", [](const RgbTrace& x, const FreqBand& b) { return ippg::chrom(x, b); },
                   "Chrominance-combination pulse recovery.");
    def_rgb_method("pos", [](const RgbTrace& x, const FreqBand& b) { return ippg::pos(x, b); },
                   "Plane-orthogonal-to-skin pulse recovery.");
    def_rgb_method("ica",
                   [](const RgbTrace& x, const FreqBand& b) { return ippg::ica_pulse(x, b); },
                   "Detrend, z-score, JADE unmixing and spectral source selection.");

    m.def("ibcg",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> y, double fs,
             double low, double high) {
              ibcg::TrajectorySet t;
              t.y = as_channels(y);
              t.fs = fs;
              for (std::size_t i = 0; i < t.y.size(); ++i)
                  t.point_ids.push_back("p" + std::to_string(i));
              auto [bvp, choice] = ibcg::ibcg_pulse(t, FreqBand{low, high});
              return py::make_tuple(to_array(bvp.trace.samples), choice_dict(choice));
          },
          py::arg("trajectories"), py::arg("fs"), py::arg("low_hz") = 0.7,
          py::arg("high_hz") = 2.5,
          "Pulse recovery from vertical feature-point trajectories.");

    m.def("estimate_hr",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> x, double fs,
             double low, double high, std::size_t nfft) {
              Bvp b{Trace{as_vector(x), fs, ""}, Method::Green};
              return quality::estimate_hr(b, FreqBand{low, high}, nfft);
          },
          py::arg("x"), py::arg("fs"), py::arg("low_hz") = 0.7, py::arg("high_hz") = 2.5,
          py::arg("nfft") = 4096);

    m.def("hr_series",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> x, double fs,
             double low, double high, double window_s, double step_s) {
              Bvp b{Trace{as_vector(x), fs, ""}, Method::Green};
              const auto h = quality::hr_series(b, FreqBand{low, high}, window_s, step_s);
              return py::make_tuple(to_array(h.t_s), to_array(h.bpm));
          },
          py::arg("x"), py::arg("fs"), py::arg("low_hz") = 0.7, py::arg("high_hz") = 2.5,
          py::arg("window_s") = 20.0, py::arg("step_s") = 10.0);

    m.def("snr",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> x, double fs,
             double gold_bpm, std::size_t nfft) {
              Bvp b{Trace{as_vector(x), fs, ""}, Method::Green};
              const auto rep = quality::snr(b, gold_bpm, nfft);
              return py::make_tuple(rep.fraction, rep.db);
          },
          py::arg("x"), py::arg("fs"), py::arg("gold_bpm"), py::arg("nfft") = 4096,
          "Fraction of spectral power around the gold rate and its harmonic.");

    m.def("mae",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> et,
             py::array_t<double, py::array::c_style | py::array::forcecast> eb,
             py::array_t<double, py::array::c_style | py::array::forcecast> rt,
             py::array_t<double, py::array::c_style | py::array::forcecast> rb) {
              return quality::mae(quality::HrSeries{as_vector(et), as_vector(eb)},
                                  quality::HrSeries{as_vector(rt), as_vector(rb)});
          },
          py::arg("est_t"), py::arg("est_bpm"), py::arg("ref_t"), py::arg("ref_bpm"));

    m.def("rmse",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> et,
             py::array_t<double, py::array::c_style | py::array::forcecast> eb,
             py::array_t<double, py::array::c_style | py::array::forcecast> rt,
             py::array_t<double, py::array::c_style | py::array::forcecast> rb) {
              return quality::rmse(quality::HrSeries{as_vector(et), as_vector(eb)},
                                   quality::HrSeries{as_vector(rt), as_vector(rb)});
          },
          py::arg("est_t"), py::arg("est_bpm"), py::arg("ref_t"), py::arg("ref_bpm"));

    m.def("skin_mask",
          [](py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> img) {
              if (img.ndim() != 3 || img.shape(2) != 3)
                  throw py::value_error("expected an HxWx3 uint8 image");
              ImageRgb8 frame;
              frame.height = static_cast<int>(img.shape(0));
              frame.width = static_cast<int>(img.shape(1));
              frame.data.assign(img.data(), img.data() + img.size());
              const auto mask = pipeline::skin_mask(frame);
              std::vector<std::uint8_t> flat(mask.size());
              for (std::size_t i = 0; i < mask.size(); ++i)
                  flat[i] = mask[i] ? 1 : 0;
              py::array_t<bool> out(
                  std::vector<py::ssize_t>{img.shape(0), img.shape(1)},
                  std::vector<py::ssize_t>{img.shape(1), 1},
                  reinterpret_cast<const bool*>(flat.data()));
              return out;
          },
          py::arg("image"), "Rule-based skin classification of an RGB frame.");

    m.attr("__version__") = "0.1.0";
}
