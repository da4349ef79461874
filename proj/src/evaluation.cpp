#include "gccphat/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "gccphat/error.hpp"

namespace gccphat {

void ConfigurationResult::add(const DoaEstimate& est) {
    const double e = std::max(est.energy, 0.0);
    weighted_sum += est.theta_est * e;
    energy_sum += e;
    ++frames;
}

std::optional<double> weighted_doa(const ConfigurationResult& result) {
    if (!(result.energy_sum > 0.0)) return std::nullopt;
    return result.weighted_sum / result.energy_sum;
}

double rmse(std::span<const double> errors) {
    if (errors.empty()) throw DimensionError("rmse: no errors to aggregate");
    double acc = 0.0;
    for (double e : errors) acc += e * e;
    return std::sqrt(acc / static_cast<double>(errors.size()));
}

// ---------------------------------------------------------------------------
// Accuracy sweep

namespace {

constexpr std::uint64_t kGeometrySalt = 0x47454f4dULL;  // "GEOM"
constexpr std::uint64_t kSourceSalt = 0x53524345ULL;    // "SRCE"

double min_distance(const SweepConfig& c) {
    return c.min_source_distance < 0.0 ? default_min_source_distance(c.params)
                                       : c.min_source_distance;
}

}  // namespace

Scenario sweep_scenario(const SweepConfig& config, std::size_t index, const Cell& cell) {
    return make_scenario(index, derive_seed(config.seed, index, kGeometrySalt), cell.beta,
                         cell.snr_db, config.params, min_distance(config));
}

std::vector<double> sweep_source(const SweepConfig& config, std::size_t index) {
    Rng rng = derive_rng(config.seed, index, kSourceSalt);
    return speech_like_source(config.duration_s, config.params.rate, rng);
}

std::vector<ConfigurationResult> evaluate_pair(
    std::span<const std::unique_ptr<Estimator>> estimators, const RenderedPair& pair,
    const GccParams& params, Window window) {
    const auto spectra = pair_cross_spectra(pair.ch1, pair.ch2, params.n, params.hop, window);
    std::vector<ConfigurationResult> out(estimators.size());
    for (std::size_t m = 0; m < estimators.size(); ++m) {
        out[m].theta0 = pair.scenario.theta0;
        for (const auto& x12 : spectra) out[m].add(estimators[m]->estimate(x12));
    }
    return out;
}

std::vector<CellReport> run_accuracy_sweep(const SweepConfig& config) {
    if (config.n_configs < 1) throw ConfigError("sweep needs at least one configuration");
    if (config.methods.empty()) throw ConfigError("sweep needs at least one method");
    if (config.cells.empty()) throw ConfigError("sweep needs at least one cell");
    config.params.validate();

    std::vector<std::unique_ptr<Estimator>> estimators;
    for (const auto& m : config.methods) estimators.push_back(make_estimator(m, config.params));

    std::vector<double> betas;
    for (const auto& c : config.cells) {
        if (std::find(betas.begin(), betas.end(), c.beta) == betas.end()) betas.push_back(c.beta);
    }

    const std::size_t n_cells = config.cells.size();
    const std::size_t n_methods = estimators.size();
    const auto length = static_cast<std::size_t>(std::llround(config.duration_s * config.params.rate));

    // errors[cell][method][config]; NaN marks a degenerate configuration.
    std::vector<double> errors(n_cells * n_methods * config.n_configs, 0.0);
    auto slot = [&](std::size_t cell, std::size_t method, std::size_t cfg) -> double& {
        return errors[(cell * n_methods + method) * config.n_configs + cfg];
    };

    auto run_one = [&](std::size_t index) {
        const auto source = sweep_source(config, index);
        for (double beta : betas) {
            const Scenario clean_scenario = sweep_scenario(
                config, index, Cell{beta, std::numeric_limits<double>::infinity()});
            const RenderedPair clean =
                render(clean_scenario, source, length, config.params, config.rir_length);
            for (std::size_t c = 0; c < n_cells; ++c) {
                if (config.cells[c].beta != beta) continue;
                RenderedPair noisy = clean;
                add_noise(noisy, config.cells[c].snr_db, clean_scenario.seed);
                const auto results = evaluate_pair(estimators, noisy, config.params, config.window);
                for (std::size_t m = 0; m < n_methods; ++m) {
                    const auto doa = weighted_doa(results[m]);
                    slot(c, m, index) = doa ? rad_to_deg(*doa - results[m].theta0)
                                            : std::numeric_limits<double>::quiet_NaN();
                }
            }
        }
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(config.threads,
                                                             static_cast<unsigned>(config.n_configs)));
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr failure;
    std::string failure_context;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= config.n_configs) return;
            try {
                run_one(i);
            } catch (const std::exception& e) {
                std::lock_guard lock(error_mutex);
                if (!failure) {
                    failure = std::current_exception();
                    failure_context = "scenario " + std::to_string(i) + ": " + e.what();
                }
                next.store(config.n_configs);
                return;
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    }
    if (failure) throw Error(failure_context);

    std::vector<CellReport> reports;
    for (std::size_t c = 0; c < n_cells; ++c) {
        for (std::size_t m = 0; m < n_methods; ++m) {
            std::vector<double> kept;
            std::size_t degenerate = 0;
            for (std::size_t i = 0; i < config.n_configs; ++i) {
                const double e = slot(c, m, i);
                if (std::isnan(e)) {
                    ++degenerate;
                } else {
                    kept.push_back(e);
                }
            }
            CellReport r;
            r.method = config.methods[m].name();
            r.beta = config.cells[c].beta;
            r.snr_db = config.cells[c].snr_db;
            r.configurations = kept.size();
            r.degenerate = degenerate;
            r.rmse_deg = kept.empty() ? std::numeric_limits<double>::quiet_NaN() : rmse(kept);
            reports.push_back(std::move(r));
        }
    }
    return reports;
}

// ---------------------------------------------------------------------------
// Timing

std::vector<CrossSpectrum> random_cross_spectra(std::size_t count, std::size_t bins,
                                                std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> phase(-kPi, kPi);
    std::vector<CrossSpectrum> out(count);
    for (auto& x : out) {
        x.bins.resize(bins);
        for (auto& b : x.bins) b = std::polar(1.0, phase(rng));
    }
    return out;
}

std::vector<TimingReport> run_bench(const BenchConfig& config) {
    if (config.n_frames < 1) throw ConfigError("bench needs at least one frame");
    config.params.validate();
    const auto batch = random_cross_spectra(config.n_frames, config.params.bins(), config.seed);

    using Clock = std::chrono::steady_clock;
    std::vector<TimingReport> out;
    std::size_t sink = 0;
    for (const auto& method : config.methods) {
        const auto est = make_estimator(method, config.params, nullptr, config.rigor);
        for (std::size_t i = 0; i < config.warmup; ++i) {
            sink += est->estimate(batch[i % batch.size()]).q_max;
        }
        std::vector<double> us(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i) {
            const auto t0 = Clock::now();
            sink += est->estimate(batch[i]).q_max;
            const auto t1 = Clock::now();
            us[i] = std::chrono::duration<double, std::micro>(t1 - t0).count();
        }
        TimingReport r;
        r.method = method.name();
        r.frames_timed = us.size();
        double total = 0.0;
        for (double v : us) total += v;
        r.mean_us_per_frame = total / static_cast<double>(us.size());
        std::nth_element(us.begin(), us.begin() + static_cast<std::ptrdiff_t>(us.size() / 2), us.end());
        r.median_us_per_frame = us[us.size() / 2];
        r.params_fingerprint = config.params.fingerprint();
        out.push_back(std::move(r));
    }
    // Keeps the estimate calls observable.
    static std::atomic<std::size_t> keep{0};
    keep.fetch_add(sink, std::memory_order_relaxed);
    return out;
}

// ---------------------------------------------------------------------------
// Checks

namespace {

const CellReport* find_cell(std::span<const CellReport> reports, const std::string& method,
                            double beta, double snr) {
    for (const auto& r : reports) {
        if (r.method == method && r.beta == beta && r.snr_db == snr) return &r;
    }
    return nullptr;
}

std::string fmt(const char* f, double a, double b) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

std::string cell_name(double beta, double snr) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "beta=%g snr=%g", beta, snr);
    return buf;
}

}  // namespace

std::vector<CheckResult> check_accuracy(std::span<const CellReport> reports) {
    std::vector<CheckResult> out;
    std::vector<std::pair<double, double>> cells;
    for (const auto& r : reports) {
        const std::pair key{r.beta, r.snr_db};
        if (std::find(cells.begin(), cells.end(), key) == cells.end()) cells.push_back(key);
    }

    for (const auto& [beta, snr] : cells) {
        const auto* mm = find_cell(reports, "mm", beta, snr);
        if (!mm) continue;
        if (const auto* f = find_cell(reports, "fft01", beta, snr)) {
            out.push_back({"mm <= fft01 @ " + cell_name(beta, snr), mm->rmse_deg <= f->rmse_deg,
                           fmt("mm=%.4f fft01=%.4f", mm->rmse_deg, f->rmse_deg)});
        }
        if (const auto* qi = find_cell(reports, "fft02-qi", beta, snr)) {
            const double rel = std::abs(qi->rmse_deg - mm->rmse_deg) / mm->rmse_deg;
            out.push_back({"fft02-qi within 10% of mm @ " + cell_name(beta, snr), rel <= 0.10,
                           fmt("rel=%.4f mm=%.4f", rel, mm->rmse_deg)});
        }
    }
    // Degradation with lower SNR at fixed beta, and with higher beta at the highest SNR.
    for (const auto& [beta, snr] : cells) {
        for (const auto& [beta2, snr2] : cells) {
            if (beta2 != beta || !(snr2 < snr)) continue;
            const auto* hi = find_cell(reports, "mm", beta, snr);
            const auto* lo = find_cell(reports, "mm", beta, snr2);
            if (!hi || !lo) continue;
            out.push_back({"mm rmse @ snr=" + fmt("%g", snr2, 0) + " >= @ snr=" + fmt("%g", snr, 0) +
                               " (beta=" + fmt("%g", beta, 0) + ")",
                           lo->rmse_deg >= hi->rmse_deg,
                           fmt("low=%.4f high=%.4f", lo->rmse_deg, hi->rmse_deg)});
        }
    }
    double top_snr = -std::numeric_limits<double>::infinity();
    for (const auto& c : cells) top_snr = std::max(top_snr, c.second);
    for (const auto& [beta, snr] : cells) {
        for (const auto& [beta2, snr2] : cells) {
            if (snr != top_snr || snr2 != top_snr || !(beta2 > beta)) continue;
            const auto* dry = find_cell(reports, "mm", beta, snr);
            const auto* wet = find_cell(reports, "mm", beta2, snr);
            if (!dry || !wet) continue;
            out.push_back({"mm rmse @ beta=" + fmt("%g", beta2, 0) + " >= @ beta=" +
                               fmt("%g", beta, 0) + " (snr=" + fmt("%g", snr, 0) + ")",
                           wet->rmse_deg >= dry->rmse_deg,
                           fmt("wet=%.4f dry=%.4f", wet->rmse_deg, dry->rmse_deg)});
        }
    }
    return out;
}

std::vector<CheckResult> check_timing(std::span<const TimingReport> reports) {
    auto find = [&](const std::string& m) -> const TimingReport* {
        for (const auto& r : reports) {
            if (r.method == m) return &r;
        }
        return nullptr;
    };
    std::vector<CheckResult> out;
    auto slower = [&](const std::string& a, const std::string& b) {
        const auto* ra = find(a);
        const auto* rb = find(b);
        if (!ra || !rb) return;
        out.push_back({a + " slower than " + b, ra->mean_us_per_frame > rb->mean_us_per_frame,
                       fmt("%.3f us vs %.3f us", ra->mean_us_per_frame, rb->mean_us_per_frame)});
    };
    slower("mm", "fft32-qi");
    slower("mm", "svd");
    slower("mm", "fft02-qi");
    slower("fft32", "fft01");
    return out;
}

// ---------------------------------------------------------------------------
// CSV

std::string cell_csv(std::span<const CellReport> reports) {
    std::string s = "method,beta,snr_db,rmse_deg,configs\n";
    char buf[256];
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f,%zu\n", r.method.c_str(), r.beta,
                      r.snr_db, r.rmse_deg, r.configurations);
        s += buf;
    }
    return s;
}

std::string timing_csv(std::span<const TimingReport> reports) {
    std::string s = "method,mean_us_per_frame,median_us_per_frame,frames_timed,params\n";
    char buf[512];
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%zu,%s\n", r.method.c_str(),
                      r.mean_us_per_frame, r.median_us_per_frame, r.frames_timed,
                      r.params_fingerprint.c_str());
        s += buf;
    }
    return s;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

void write_cell_csv(const std::filesystem::path& path, std::span<const CellReport> reports) {
    write_text(path, cell_csv(reports));
}

void write_timing_csv(const std::filesystem::path& path, std::span<const TimingReport> reports) {
    write_text(path, timing_csv(reports));
}

std::vector<CellReport> parse_cell_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "method,beta,snr_db,rmse_deg,configs") {
        throw FormatError("cell CSV: missing or unexpected header");
    }
    std::vector<CellReport> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ls(line);
        std::string f;
        while (std::getline(ls, f, ',')) fields.push_back(f);
        if (fields.size() != 5) throw FormatError("cell CSV: expected 5 fields in '" + line + "'");
        try {
            CellReport r;
            r.method = fields[0];
            r.beta = std::stod(fields[1]);
            r.snr_db = std::stod(fields[2]);
            r.rmse_deg = std::stod(fields[3]);
            r.configurations = std::stoul(fields[4]);
            out.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw FormatError("cell CSV: bad number in '" + line + "'");
        }
    }
    return out;
}

}  // namespace gccphat
