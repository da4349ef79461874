// gccphat: command-line front end for the two-microphone DOA toolkit.
//
//   gccphat factorize --out factors.bin
//   gccphat estimate pair.wav --method fft02-qi
//   gccphat simulate --configs 10 --seed 7 --out sim/
//   gccphat evaluate --configs 50 --methods mm,fft01,fft02-qi --out rmse.csv --check
//   gccphat bench --frames 2000 --out timing.csv

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gccphat/core.hpp"
#include "gccphat/error.hpp"
#include "gccphat/estimators.hpp"
#include "gccphat/evaluation.hpp"
#include "gccphat/factorization.hpp"
#include "gccphat/simulator.hpp"
#include "gccphat/stft.hpp"
#include "gccphat/wav.hpp"

namespace fs = std::filesystem;
using namespace gccphat;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitCheckFailed = 3;

struct UsageError : Error {
    using Error::Error;
};

// Bare "fft" and "fft-qi" take their factor from --interp.
std::string with_interp(std::string_view list, std::size_t interp) {
    std::string out;
    std::size_t start = 0;
    while (start <= list.size()) {
        const std::size_t end = std::min(list.find(',', start), list.size());
        std::string name(list.substr(start, end - start));
        char digits[8];
        std::snprintf(digits, sizeof digits, "%02zu", interp);
        if (name == "fft") name = std::string("fft") + digits;
        if (name == "fft-qi") name = std::string("fft") + digits + "-qi";
        if (start > 0) out += ',';
        out += name;
        start = end + 1;
    }
    return out;
}

void add_param_flags(CLI::App* cmd, GccParams& p, std::string& window) {
    cmd->add_option("--q", p.q, "Number of discrete angles")->capture_default_str();
    cmd->add_option("--n", p.n, "STFT frame size (samples)")->capture_default_str();
    cmd->add_option("--hop", p.hop, "Hop size (samples)")->capture_default_str();
    cmd->add_option("--dist", p.dist, "Microphone spacing (m)")->capture_default_str();
    cmd->add_option("--speed", p.speed, "Speed of sound (m/s)")->capture_default_str();
    cmd->add_option("--rate", p.rate, "Sample rate (Hz)")->capture_default_str();
    cmd->add_option("--delta", p.delta, "Low-rank reconstruction tolerance")->capture_default_str();
    cmd->add_option("--interp", p.interp, "Factor for bare fft and fft-qi method names")->capture_default_str();
    cmd->add_option("--window", window, "Analysis window: hann or rect")->capture_default_str();
}

std::vector<double> parse_doubles(const std::string& list) {
    std::vector<double> out;
    std::stringstream ss(list);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok == "inf") {
            out.push_back(std::numeric_limits<double>::infinity());
            continue;
        }
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::logic_error&) {
            throw UsageError("not a number: '" + tok + "'");
        }
    }
    if (out.empty()) throw UsageError("empty number list");
    return out;
}

std::string format_fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

// ---------------------------------------------------------------------------

int cmd_factorize(const GccParams& params, const fs::path& out) {
    const auto grid = theta_grid(params);
    const auto w = steering_matrix(params, grid);
    FactorReport report;
    const auto factors = factorize(w, params.delta, &report);
    save_factors(factors, out);
    std::printf("K_R=%zu K_I=%zu ratio_R=%.3e ratio_I=%.3e delta=%g -> %s\n", factors.k_r(),
                factors.k_i(), report.ratio_r, report.ratio_i, params.delta, out.string().c_str());
    return 0;
}

int cmd_estimate(const GccParams& params, Window window, const fs::path& wav,
                 const std::string& method_name, const std::optional<fs::path>& factor_path,
                 const std::optional<fs::path>& out_path) {
    const Method method = parse_method(with_interp(method_name, params.interp));
    std::optional<LowRankFactors> factors;
    if (method.backend == Backend::svd) {
        if (!factor_path) throw UsageError("method svd requires --factors <file>");
        factors = load_factors(*factor_path);
    }
    const auto audio = read_stereo_wav(wav, static_cast<std::uint32_t>(std::llround(params.rate)));
    if (static_cast<double>(audio.rate) != params.rate) {
        throw InputError("sample rate must be an integer number of Hz");
    }
    const auto est = make_estimator(method, params, factors ? &*factors : nullptr);
    const auto spectra =
        pair_cross_spectra(audio.channels[0], audio.channels[1], params.n, params.hop, window);

    std::ofstream file;
    if (out_path) {
        file.open(*out_path, std::ios::trunc);
        if (!file) throw Error("cannot open " + out_path->string() + " for writing");
    }
    std::ostream& out = out_path ? static_cast<std::ostream&>(file) : std::cout;
    for (std::size_t l = 0; l < spectra.size(); ++l) {
        const DoaEstimate d = est->estimate(spectra[l]);
        nlohmann::ordered_json j;
        j["frame"] = l;
        j["theta_deg"] = rad_to_deg(d.theta_est);
        j["energy"] = d.energy;
        out << j.dump() << '\n';
    }
    return 0;
}

void write_pair_wav(const fs::path& path, const RenderedPair& pair, double rate) {
    double peak = 0.0;
    for (double v : pair.ch1) peak = std::max(peak, std::abs(v));
    for (double v : pair.ch2) peak = std::max(peak, std::abs(v));
    const double scale = peak > 0.0 ? 0.9 / peak : 1.0;
    WavAudio audio;
    audio.rate = static_cast<std::uint32_t>(std::llround(rate));
    audio.channels = {pair.ch1, pair.ch2};
    for (auto& ch : audio.channels) {
        for (double& v : ch) v *= scale;
    }
    write_wav(path, audio);
}

int cmd_simulate(const GccParams& params, std::size_t configs, std::uint64_t seed,
                 const std::string& betas_arg, const std::string& snrs_arg, double duration,
                 bool wav, const fs::path& out_dir) {
    if (configs < 1) throw UsageError("--configs must be at least 1");
    fs::create_directories(out_dir);
    SweepConfig sweep;
    sweep.params = params;
    sweep.seed = seed;
    sweep.n_configs = configs;
    sweep.duration_s = duration;
    const auto betas = parse_doubles(betas_arg);
    const auto snrs = parse_doubles(snrs_arg);
    const auto length = static_cast<std::size_t>(std::llround(duration * params.rate));

    std::ofstream manifest(out_dir / "manifest.jsonl", std::ios::trunc);
    if (!manifest) throw Error("cannot write manifest in " + out_dir.string());
    std::size_t written = 0;
    for (std::size_t i = 0; i < configs; ++i) {
        std::vector<double> source;
        if (wav) source = sweep_source(sweep, i);
        for (double beta : betas) {
            for (double snr : snrs) {
                const Scenario s = sweep_scenario(sweep, i, Cell{beta, snr});
                manifest << scenario_to_json(s) << '\n';
                if (wav) {
                    const auto pair = render(s, source, length, params);
                    char name[96];
                    std::snprintf(name, sizeof name, "scenario_%04zu_b%s_snr%s.wav", i,
                                  format_fixed(beta).c_str(), format_fixed(snr).c_str());
                    write_pair_wav(out_dir / name, pair, params.rate);
                }
                ++written;
            }
        }
    }
    std::printf("wrote %zu scenarios to %s\n", written, (out_dir / "manifest.jsonl").string().c_str());
    return 0;
}

int report_checks(const std::vector<CheckResult>& checks) {
    bool ok = true;
    for (const auto& c : checks) {
        std::printf("[%s] %s (%s)\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
        ok = ok && c.passed;
    }
    return ok ? 0 : kExitCheckFailed;
}

int cmd_evaluate(const GccParams& params, Window window, std::size_t configs, std::uint64_t seed,
                 const std::string& methods, const std::string& betas_arg,
                 const std::string& snrs_arg, double duration, unsigned threads,
                 const fs::path& out, bool check) {
    SweepConfig sweep;
    sweep.params = params;
    sweep.window = window;
    sweep.seed = seed;
    sweep.n_configs = configs;
    sweep.duration_s = duration;
    sweep.threads = threads;
    sweep.methods = methods.empty() ? all_methods() : parse_methods(with_interp(methods, params.interp));
    for (double beta : parse_doubles(betas_arg)) {
        for (double snr : parse_doubles(snrs_arg)) sweep.cells.push_back({beta, snr});
    }
    const auto reports = run_accuracy_sweep(sweep);
    write_cell_csv(out, reports);
    for (const auto& r : reports) {
        if (r.degenerate > 0) {
            std::fprintf(stderr, "%s beta=%g snr=%g: %zu zero-energy configurations excluded\n",
                         r.method.c_str(), r.beta, r.snr_db, r.degenerate);
        }
    }
    std::printf("wrote %zu rows to %s\n", reports.size(), out.string().c_str());
    return check ? report_checks(check_accuracy(reports)) : 0;
}

int cmd_bench(const GccParams& params, std::size_t frames, std::uint64_t seed,
              const std::string& methods, const fs::path& out, bool check) {
    BenchConfig bench;
    bench.params = params;
    bench.n_frames = frames;
    bench.seed = seed;
    bench.methods = methods.empty() ? all_methods() : parse_methods(with_interp(methods, params.interp));
    const auto reports = run_bench(bench);
    write_timing_csv(out, reports);
    for (const auto& r : reports) {
        std::printf("%-9s mean %9.3f us  median %9.3f us\n", r.method.c_str(), r.mean_us_per_frame,
                    r.median_us_per_frame);
    }
    return check ? report_checks(check_timing(reports)) : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-microphone GCC-PHAT direction-of-arrival toolkit"};
    app.require_subcommand(1);

    GccParams params;
    std::string window_name = "hann";
    std::uint64_t seed = 1;

    auto* fac = app.add_subcommand("factorize", "Build low-rank factors of the steering matrix");
    fs::path fac_out;
    add_param_flags(fac, params, window_name);
    fac->add_option("--out", fac_out, "Factor file to write")->required();

    auto* est = app.add_subcommand("estimate", "Per-frame DOA of a stereo WAV file as NDJSON");
    fs::path est_wav;
    std::string est_method = "mm";
    std::optional<fs::path> est_factors, est_out;
    add_param_flags(est, params, window_name);
    est->add_option("wav", est_wav, "Two-channel 16-bit PCM WAV")->required();
    est->add_option("--method", est_method, "Back-end")->capture_default_str();
    est->add_option("--factors", est_factors, "Factor file (required for svd)");
    est->add_option("--out", est_out, "NDJSON output (default: stdout)");

    auto* sim = app.add_subcommand("simulate", "Generate a scenario manifest (and WAVs)");
    std::size_t sim_configs = 10;
    std::string sim_betas = "0", sim_snrs = "40";
    double sim_duration = 1.0;
    bool sim_wav = false;
    fs::path sim_out;
    add_param_flags(sim, params, window_name);
    sim->add_option("--configs", sim_configs, "Number of configurations")->capture_default_str();
    sim->add_option("--seed", seed, "Master seed")->capture_default_str();
    sim->add_option("--betas", sim_betas, "Reflection coefficients, comma separated")->capture_default_str();
    sim->add_option("--snrs", sim_snrs, "SNRs in dB (or inf), comma separated")->capture_default_str();
    sim->add_option("--duration", sim_duration, "Source duration (s)")->capture_default_str();
    sim->add_flag("--wav", sim_wav, "Also render each scenario to a stereo WAV");
    sim->add_option("--out", sim_out, "Output directory")->required();

    auto* eva = app.add_subcommand("evaluate", "Energy-weighted RMSE sweep over (beta, SNR) cells");
    std::size_t eva_configs = 50;
    std::string eva_methods, eva_betas = "0,0.3,0.6", eva_snrs = "10,20,40";
    double eva_duration = 1.0;
    unsigned eva_threads = 1;
    fs::path eva_out;
    bool eva_check = false;
    add_param_flags(eva, params, window_name);
    eva->add_option("--configs", eva_configs, "Configurations per cell")->capture_default_str();
    eva->add_option("--seed", seed, "Master seed")->capture_default_str();
    eva->add_option("--methods", eva_methods, "Comma-separated back-ends (default: all)");
    eva->add_option("--betas", eva_betas, "Reflection coefficients")->capture_default_str();
    eva->add_option("--snrs", eva_snrs, "SNRs in dB")->capture_default_str();
    eva->add_option("--duration", eva_duration, "Source duration (s)")->capture_default_str();
    eva->add_option("--threads", eva_threads, "Worker threads")->capture_default_str();
    eva->add_option("--out", eva_out, "CSV report")->required();
    eva->add_flag("--check", eva_check, "Verify expected orderings; exit 3 on failure");

    auto* ben = app.add_subcommand("bench", "Per-frame execution time of each back-end");
    std::size_t ben_frames = 2000;
    std::string ben_methods;
    fs::path ben_out;
    bool ben_check = false;
    add_param_flags(ben, params, window_name);
    ben->add_option("--frames", ben_frames, "Frames to time")->capture_default_str();
    ben->add_option("--seed", seed, "Seed for the random spectra")->capture_default_str();
    ben->add_option("--methods", ben_methods, "Comma-separated back-ends (default: all)");
    ben->add_option("--out", ben_out, "CSV report")->required();
    ben->add_flag("--check", ben_check, "Verify expected orderings; exit 3 on failure");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        params.validate();
        const Window window = parse_window(window_name);
        if (fac->parsed()) return cmd_factorize(params, fac_out);
        if (est->parsed()) {
            return cmd_estimate(params, window, est_wav, est_method, est_factors, est_out);
        }
        if (sim->parsed()) {
            return cmd_simulate(params, sim_configs, seed, sim_betas, sim_snrs, sim_duration,
                                sim_wav, sim_out);
        }
        if (eva->parsed()) {
            return cmd_evaluate(params, window, eva_configs, seed, eva_methods, eva_betas, eva_snrs,
                                eva_duration, eva_threads, eva_out, eva_check);
        }
        if (ben->parsed()) return cmd_bench(params, ben_frames, seed, ben_methods, ben_out, ben_check);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return kExitUsage;
    } catch (const InputError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
