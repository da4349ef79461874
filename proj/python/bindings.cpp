#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gccphat/error.hpp"
#include "gccphat/evaluation.hpp"
#include "gccphat/wav.hpp"

namespace py = pybind11;
using namespace py::literals;
using namespace gccphat;

namespace {

using ComplexArray = py::array_t<Complex, py::array::c_style | py::array::forcecast>;
using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

CrossSpectrum to_spectrum(const ComplexArray& x) {
    if (x.ndim() != 1) throw DimensionError("cross-spectrum must be one-dimensional");
    return CrossSpectrum{std::vector<Complex>(x.data(), x.data() + x.size())};
}

std::vector<double> to_vector(const RealArray& x) {
    if (x.ndim() != 1) throw DimensionError("signal must be one-dimensional");
    return {x.data(), x.data() + x.size()};
}

py::array_t<double> to_array(const std::vector<double>& v) {
    return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::array_t<double> to_array(const RealMatrix& m) {
    py::array_t<double> out({static_cast<py::ssize_t>(m.rows), static_cast<py::ssize_t>(m.cols)});
    std::copy(m.data.begin(), m.data.end(), out.mutable_data());
    return out;
}

RealMatrix to_matrix(const RealArray& a) {
    if (a.ndim() != 2) throw DimensionError("factor must be two-dimensional");
    RealMatrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), m.data.begin());
    return m;
}

py::array_t<Complex> steering_array(const SteeringMatrix& w) {
    py::array_t<Complex> out({static_cast<py::ssize_t>(w.rows()), static_cast<py::ssize_t>(w.cols())});
    std::copy(w.entries().begin(), w.entries().end(), out.mutable_data());
    return out;
}

/// Per-frame estimates for a stereo signal.
py::dict estimate_frames(const Estimator& est, const RealArray& ch1, const RealArray& ch2,
                         const std::string& window) {
    const auto a = to_vector(ch1);
    const auto b = to_vector(ch2);
    const auto& p = est.params();
    std::vector<CrossSpectrum> spectra;
    {
        py::gil_scoped_release release;
        spectra = pair_cross_spectra(a, b, p.n, p.hop, parse_window(window));
    }
    std::vector<double> theta(spectra.size()), energy(spectra.size());
    std::vector<std::size_t> index(spectra.size());
    {
        py::gil_scoped_release release;
        for (std::size_t l = 0; l < spectra.size(); ++l) {
            const auto e = est.estimate(spectra[l]);
            theta[l] = e.theta_est;
            energy[l] = e.energy;
            index[l] = e.q_max;
        }
    }
    return py::dict("theta"_a = to_array(theta), "energy"_a = to_array(energy), "q_max"_a = index);
}

}  // namespace

PYBIND11_MODULE(_gccphat, m) {
    m.doc() = "GCC-PHAT direction-of-arrival estimation with matrix, FFT and low-rank back-ends.";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
    py::register_exception<FormatError>(m, "FormatError", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
    py::register_exception<InputError>(m, "InputError", base.ptr());
    py::register_exception<SignalError>(m, "SignalError", base.ptr());

    py::class_<GccParams>(m, "Params")
        .def(py::init([](std::size_t q, std::size_t n, std::size_t hop, double dist, double speed,
                         double rate, double delta, std::size_t interp) {
                 GccParams p{q, n, hop, dist, speed, rate, delta, interp};
                 p.validate();
                 return p;
             }),
             "q"_a = 181, "n"_a = 512, "hop"_a = 160, "dist"_a = 0.05, "speed"_a = 343.0,
             "rate"_a = 16000.0, "delta"_a = 1e-5, "interp"_a = 1)
        .def_readwrite("q", &GccParams::q)
        .def_readwrite("n", &GccParams::n)
        .def_readwrite("hop", &GccParams::hop)
        .def_readwrite("dist", &GccParams::dist)
        .def_readwrite("speed", &GccParams::speed)
        .def_readwrite("rate", &GccParams::rate)
        .def_readwrite("delta", &GccParams::delta)
        .def_readwrite("interp", &GccParams::interp)
        .def_property_readonly("bins", &GccParams::bins)
        .def_property_readonly("max_tdoa", &GccParams::max_tdoa)
        .def("validate", &GccParams::validate)
        .def("fingerprint", &GccParams::fingerprint)
        .def("__repr__", [](const GccParams& p) { return "Params(" + p.fingerprint() + ")"; });

    m.def("theta_grid", [](const GccParams& p) {
        const auto g = theta_grid(p);
        return py::make_tuple(to_array(g.thetas), to_array(g.taus));
    }, "params"_a = GccParams{}, "Candidate angles (rad) and their TDOAs (samples).");

    m.def("normalization_gains", [](std::size_t n) { return to_array(normalization_gains(n)); }, "n"_a);

    m.def("steering_matrix", [](const GccParams& p) {
        return steering_array(steering_matrix(p, theta_grid(p)));
    }, "params"_a = GccParams{});

    m.def("mm_correlate", [](const ComplexArray& x, const GccParams& p) {
        const auto w = steering_matrix(p, theta_grid(p));
        return to_array(mm_correlate(w, to_spectrum(x)).values);
    }, "x12"_a, "params"_a = GccParams{});

    m.def("fft_correlate", [](const ComplexArray& x, const GccParams& p) {
        return to_array(fft_correlate(to_spectrum(x), p).samples);
    }, "x12"_a, "params"_a = GccParams{}, "Correlation on the lag grid refined by params.interp.");

    py::class_<LowRankFactors>(m, "LowRankFactors")
        .def(py::init([](const RealArray& u_r, const RealArray& t_r, const RealArray& u_i,
                         const RealArray& t_i, double delta) {
                 return LowRankFactors{to_matrix(u_r), to_matrix(t_r), to_matrix(u_i), to_matrix(t_i), delta};
             }),
             "u_r"_a, "t_r"_a, "u_i"_a, "t_i"_a, "delta"_a)
        .def_property_readonly("u_r", [](const LowRankFactors& f) { return to_array(f.u_r); })
        .def_property_readonly("t_r", [](const LowRankFactors& f) { return to_array(f.t_r); })
        .def_property_readonly("u_i", [](const LowRankFactors& f) { return to_array(f.u_i); })
        .def_property_readonly("t_i", [](const LowRankFactors& f) { return to_array(f.t_i); })
        .def_readonly("delta", &LowRankFactors::delta)
        .def_property_readonly("k_r", &LowRankFactors::k_r)
        .def_property_readonly("k_i", &LowRankFactors::k_i)
        .def_property_readonly("q", &LowRankFactors::q)
        .def_property_readonly("frame_size", &LowRankFactors::frame_size)
        .def("save", [](const LowRankFactors& f, const std::filesystem::path& path) { save_factors(f, path); })
        .def_static("load", &load_factors, "path"_a)
        .def("to_bytes", [](const LowRankFactors& f) {
            const auto b = encode_factors(f);
            return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
        })
        .def_static("from_bytes", [](const py::bytes& data) {
            const std::string s = data;
            return decode_factors(std::span(reinterpret_cast<const unsigned char*>(s.data()), s.size()));
        });

    m.def("factorize", [](const GccParams& p, double delta) {
        return factorize(steering_matrix(p, theta_grid(p)), delta);
    }, "params"_a = GccParams{}, "delta"_a = 1e-5);

    m.def("svd_correlate", [](const LowRankFactors& f, const ComplexArray& x) {
        return to_array(svd_correlate(f, to_spectrum(x)).values);
    }, "factors"_a, "x12"_a);

    m.def("cross_spectra", [](const RealArray& ch1, const RealArray& ch2, const GccParams& p,
                              const std::string& window) {
        const auto spectra = pair_cross_spectra(to_vector(ch1), to_vector(ch2), p.n, p.hop, parse_window(window));
        py::array_t<Complex> out({static_cast<py::ssize_t>(spectra.size()), static_cast<py::ssize_t>(p.bins())});
        auto* dst = out.mutable_data();
        for (const auto& s : spectra) dst = std::copy(s.bins.begin(), s.bins.end(), dst);
        return out;
    }, "ch1"_a, "ch2"_a, "params"_a = GccParams{}, "window"_a = "hann");

    m.def("method_names", [] {
        std::vector<std::string> out;
        for (const auto& mth : all_methods()) out.push_back(mth.name());
        return out;
    });

    py::class_<Estimator>(m, "Estimator")
        .def(py::init([](const std::string& method, const GccParams& p, const LowRankFactors* f) {
                 return make_estimator(parse_method(method), p, f);
             }),
             "method"_a = "mm", "params"_a = GccParams{}, "factors"_a = nullptr)
        .def_property_readonly("method", [](const Estimator& e) { return e.method().name(); })
        .def_property_readonly("params", &Estimator::params)
        .def("correlate", [](const Estimator& e, const ComplexArray& x) {
            return to_array(e.correlate(to_spectrum(x)).values);
        }, "x12"_a)
        .def("estimate", [](const Estimator& e, const ComplexArray& x) {
            const auto r = e.estimate(to_spectrum(x));
            return py::make_tuple(r.q_max, r.theta_est, r.energy);
        }, "x12"_a, "Returns (q_max, theta_rad, energy).")
        .def("estimate_frames", &estimate_frames, "ch1"_a, "ch2"_a, "window"_a = "hann");

    m.def("make_scenario", [](std::uint64_t id, std::uint64_t seed, double beta, double snr_db,
                              const GccParams& p, double min_distance) {
        return scenario_to_json(make_scenario(id, seed, beta, snr_db, p,
                                              min_distance < 0 ? default_min_source_distance(p) : min_distance));
    }, "id"_a, "seed"_a, "beta"_a = 0.0, "snr_db"_a = 40.0, "params"_a = GccParams{},
       "min_source_distance"_a = -1.0, "Scenario as a JSON record.");

    m.def("speech_like_source", [](double duration, double rate, std::uint64_t seed) {
        Rng rng(seed);
        return to_array(speech_like_source(duration, rate, rng));
    }, "duration_s"_a, "rate"_a = 16000.0, "seed"_a = 1);

    m.def("render", [](const std::string& scenario_json, const RealArray& source, std::size_t length,
                       const GccParams& p, std::size_t rir_length) {
        const auto s = scenario_from_json(scenario_json);
        const auto src = to_vector(source);
        RenderedPair pair;
        {
            py::gil_scoped_release release;
            pair = render(s, src, length, p, rir_length);
        }
        return py::make_tuple(to_array(pair.ch1), to_array(pair.ch2));
    }, "scenario"_a, "source"_a, "length"_a, "params"_a = GccParams{},
       "rir_length"_a = kDefaultRirLength);

    m.def("run_accuracy_sweep", [](const std::string& methods, const std::vector<std::pair<double, double>>& cells,
                                   std::size_t n_configs, std::uint64_t seed, double duration_s,
                                   unsigned threads, const GccParams& p) {
        SweepConfig c;
        c.methods = parse_methods(methods);
        for (const auto& [b, s] : cells) c.cells.push_back({b, s});
        c.n_configs = n_configs;
        c.seed = seed;
        c.duration_s = duration_s;
        c.threads = threads;
        c.params = p;
        std::vector<CellReport> reports;
        {
            py::gil_scoped_release release;
            reports = run_accuracy_sweep(c);
        }
        py::list out;
        for (const auto& r : reports) {
            out.append(py::dict("method"_a = r.method, "beta"_a = r.beta, "snr_db"_a = r.snr_db,
                                "rmse_deg"_a = r.rmse_deg, "configs"_a = r.configurations,
                                "degenerate"_a = r.degenerate));
        }
        return out;
    }, "methods"_a, "cells"_a, "n_configs"_a = 50, "seed"_a = 1, "duration_s"_a = 1.0,
       "threads"_a = 1, "params"_a = GccParams{});

    m.def("run_bench", [](const std::string& methods, std::size_t n_frames, std::uint64_t seed,
                          const GccParams& p) {
        BenchConfig c;
        c.methods = parse_methods(methods);
        c.n_frames = n_frames;
        c.seed = seed;
        c.params = p;
        std::vector<TimingReport> reports;
        {
            py::gil_scoped_release release;
            reports = run_bench(c);
        }
        py::list out;
        for (const auto& r : reports) {
            out.append(py::dict("method"_a = r.method, "mean_us"_a = r.mean_us_per_frame,
                                "median_us"_a = r.median_us_per_frame, "frames"_a = r.frames_timed));
        }
        return out;
    }, "methods"_a, "n_frames"_a = 2000, "seed"_a = 1, "params"_a = GccParams{});

    m.def("read_stereo_wav", [](const std::filesystem::path& path, std::uint32_t rate) {
        const auto a = read_stereo_wav(path, rate);
        return py::make_tuple(to_array(a.channels[0]), to_array(a.channels[1]));
    }, "path"_a, "rate"_a = 16000);

    m.def("write_wav", [](const std::filesystem::path& path, const std::vector<std::vector<double>>& channels,
                          std::uint32_t rate) {
        write_wav(path, WavAudio{rate, channels});
    }, "path"_a, "channels"_a, "rate"_a = 16000);
}
