#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gccphat/estimators.hpp"
#include "gccphat/simulator.hpp"

namespace gccphat {

/// Energy-weighted DOA accumulator for one configuration (room + source).
struct ConfigurationResult {
    double theta0 = 0.0;
    double weighted_sum = 0.0;  ///< sum of theta_est * E_est
    double energy_sum = 0.0;    ///< sum of E_est
    std::size_t frames = 0;

    /// Frames with negative peak energy contribute zero weight.
    void add(const DoaEstimate& est);
};

/// weighted_sum / energy_sum, or nullopt when the configuration carries no energy.
std::optional<double> weighted_doa(const ConfigurationResult& result);

/// sqrt(mean(errors^2)). Throws DimensionError when empty.
double rmse(std::span<const double> errors);

struct Cell {
    double beta = 0.0;
    double snr_db = 40.0;
};

struct CellReport {
    std::string method;
    double beta = 0.0;
    double snr_db = 0.0;
    double rmse_deg = 0.0;
    std::size_t configurations = 0;  ///< configurations entering the RMSE
    std::size_t degenerate = 0;      ///< zero-energy configurations left out

    bool operator==(const CellReport&) const = default;
};

struct SweepConfig {
    std::vector<Method> methods;
    std::vector<Cell> cells;
    std::size_t n_configs = 50;
    std::uint64_t seed = 1;
    GccParams params;
    Window window = Window::hann;
    double duration_s = 1.0;
    std::size_t rir_length = kDefaultRirLength;
    double min_source_distance = -1.0;  ///< negative: twenty microphone spacings
    unsigned threads = 1;
};

/// Scenario `index` of a sweep: geometry and source depend only on
/// (seed, index), so every cell and method sees the same configurations.
Scenario sweep_scenario(const SweepConfig& config, std::size_t index, const Cell& cell);
std::vector<double> sweep_source(const SweepConfig& config, std::size_t index);

/// One report per (cell, method), cells in the given order, methods in the
/// given order within each cell. Deterministic for a fixed seed.
std::vector<CellReport> run_accuracy_sweep(const SweepConfig& config);

/// Runs every estimator on every frame of a rendered pair.
std::vector<ConfigurationResult> evaluate_pair(
    std::span<const std::unique_ptr<Estimator>> estimators, const RenderedPair& pair,
    const GccParams& params, Window window);

struct TimingReport {
    std::string method;
    double mean_us_per_frame = 0.0;
    double median_us_per_frame = 0.0;
    std::size_t frames_timed = 0;
    std::string params_fingerprint;
};

struct BenchConfig {
    std::vector<Method> methods;
    std::size_t n_frames = 2000;
    std::size_t warmup = 100;
    std::uint64_t seed = 1;
    GccParams params;
    PlanRigor rigor = PlanRigor::measure;
};

/// Random unit-modulus cross-spectra.
std::vector<CrossSpectrum> random_cross_spectra(std::size_t count, std::size_t bins,
                                                std::uint64_t seed);

/// Mean wall time per `estimate` call on a shared batch of random cross-spectra.
/// Estimator preparation is outside the timed region.
std::vector<TimingReport> run_bench(const BenchConfig& config);

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Orderings expected of an accuracy sweep: MM no worse than FFT01, FFT02-QI
/// within 10% of MM, and MM degrading with lower SNR and higher beta. Checks
/// whose methods or cells are absent are skipped.
std::vector<CheckResult> check_accuracy(std::span<const CellReport> reports);

/// MM slowest among mm/fft32-qi/svd/fft02-qi; fft32 slower than fft01.
std::vector<CheckResult> check_timing(std::span<const TimingReport> reports);

void write_cell_csv(const std::filesystem::path& path, std::span<const CellReport> reports);
void write_timing_csv(const std::filesystem::path& path, std::span<const TimingReport> reports);
std::string cell_csv(std::span<const CellReport> reports);
std::string timing_csv(std::span<const TimingReport> reports);
std::vector<CellReport> parse_cell_csv(const std::string& text);

}  // namespace gccphat
