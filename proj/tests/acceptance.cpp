// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "gccphat/evaluation.hpp"
#include "gccphat/factorization.hpp"
#include "oracles.hpp"

using namespace gccphat;

namespace {

struct Outcome {
    bool passed;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<CrossSpectrum> unit_batch(std::size_t count, std::size_t bins, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<CrossSpectrum> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(oracle::random_unit(bins, rng));
    return out;
}

// Frobenius ratio of a rank-k truncation, from the test's own products.
double truncation_ratio(const RealMatrix& w, const RealSvd& s, std::size_t k) {
    double err = 0.0, total = 0.0;
    for (std::size_t r = 0; r < w.rows; ++r) {
        for (std::size_t c = 0; c < w.cols; ++c) {
            double acc = 0.0;
            for (std::size_t i = 0; i < k; ++i) acc += s.u(r, i) * s.sigma[i] * s.vt(i, c);
            err += (acc - w(r, c)) * (acc - w(r, c));
            total += w(r, c) * w(r, c);
        }
    }
    return err / total;
}

double factor_ratio(const RealMatrix& u, const RealMatrix& t, const RealMatrix& w) {
    double err = 0.0, total = 0.0;
    for (std::size_t r = 0; r < w.rows; ++r) {
        for (std::size_t c = 0; c < w.cols; ++c) {
            double acc = 0.0;
            for (std::size_t i = 0; i < u.cols; ++i) acc += u(r, i) * t(i, c);
            err += (acc - w(r, c)) * (acc - w(r, c));
            total += w(r, c) * w(r, c);
        }
    }
    return err / total;
}

Outcome oracle_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    const GccParams p;
    const auto w = steering_matrix(p, theta_grid(p));
    const auto taus = oracle::taus(p.q, p.rate, p.dist, p.speed);
    double worst = 0.0;
    for (const auto& x : unit_batch(100, p.bins(), 1)) {
        const auto got = mm_correlate(w, x).values;
        const auto want = oracle::gcc_phat(x.bins, taus, p.n);
        for (std::size_t q = 0; q < p.q; ++q) worst = std::max(worst, std::abs(got[q] - want[q]));
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-10 && secs < 10.0, fmt("max |mm - direct| = %.3e, %.2f s", worst, secs)};
}

Outcome svd_fidelity() {
    const GccParams p;
    const auto grid = theta_grid(p);
    const auto w = steering_matrix(p, grid);
    const auto f = factorize(w, 1e-5);
    double worst = 0.0;
    for (const auto& x : unit_batch(100, p.bins(), 1)) {
        const auto a = svd_correlate(f, x).values;
        const auto b = mm_correlate(w, x).values;
        for (std::size_t q = 0; q < p.q; ++q) worst = std::max(worst, std::abs(a[q] - b[q]));
    }
    const double bound = 1e-2 * std::sqrt(double(p.bins()));

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-2.33, 2.33);
    int agree = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto x = oracle::single_source(u(rng), p.n);
        agree += pick_peak(svd_correlate(f, x), grid).q_max == pick_peak(mm_correlate(w, x), grid).q_max;
    }
    const auto [wr, wi] = split_steering(w);
    const double rr = factor_ratio(f.u_r, f.t_r, wr);
    const double ri = factor_ratio(f.u_i, f.t_i, wi);
    const bool ok = worst <= bound && agree >= 990 && rr <= 1e-5 && ri <= 1e-5;
    return {ok, fmt("max |svd - mm| = %.3e (bound %.3e), argmax agreement %d/1000, "
                    "ratios R=%.3e I=%.3e, K_R=%zu K_I=%zu",
                    worst, bound, agree, rr, ri, f.k_r(), f.k_i())};
}

Outcome rank_minimality() {
    const GccParams p;
    const auto w = steering_matrix(p, theta_grid(p));
    const auto [wr, wi] = split_steering(w);
    const auto sr = svd(wr);
    const auto si = svd(wi);
    bool ok = true;
    std::string detail;
    for (double delta : {1e-2, 1e-5}) {
        const auto f = factorize(w, delta);
        for (int part = 0; part < 2; ++part) {
            const auto& m = part == 0 ? wr : wi;
            const auto& s = part == 0 ? sr : si;
            const std::size_t k = part == 0 ? f.k_r() : f.k_i();
            const double at_k = truncation_ratio(m, s, k);
            const double below = k > 1 ? truncation_ratio(m, s, k - 1) : 1.0;
            ok = ok && at_k <= delta && below > delta;
            detail += fmt("%sdelta=%g %s: K=%zu ratio(K)=%.2e ratio(K-1)=%.2e", detail.empty() ? "" : "; ",
                          delta, part == 0 ? "R" : "I", k, at_k, below);
        }
    }
    return {ok, detail};
}

Outcome qi_exactness() {
    GccParams p;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> coef(-10.0, 10.0);
    std::uniform_real_distribution<double> tau(-2.33, 2.33);
    std::uniform_int_distribution<int> factor(0, 5);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        p.interp = std::size_t(1) << factor(rng);
        const double a = coef(rng), b = coef(rng), c = coef(rng), t = tau(rng);
        const std::size_t size = p.interp * p.n;
        const double scaled = double(p.interp) * t;
        const long r = long(scaled >= 0 ? std::floor(scaled + 0.5) : std::ceil(scaled - 0.5));
        InterpolatedLags y{std::vector<double>(size, 0.0), p.interp};
        for (long o = -1; o <= 1; ++o) {
            y.samples[std::size_t(((r + o) % long(size) + long(size)) % long(size))] = (a * o + b) * o + c;
        }
        AngularGrid g{{0.0}, {t}};
        const double dx = scaled - double(r);
        worst = std::max(worst, std::abs(qi_correlate(y, g, p).values[0] - ((a * dx + b) * dx + c)));
    }
    return {worst <= 1e-12, fmt("max error over 1000 quadratics = %.3e", worst)};
}

Outcome interpolation_consistency() {
    const GccParams p;
    const auto batch = unit_batch(20, p.bins(), 5);
    double worst = 0.0;
    for (const auto& x : batch) {
        const auto base = fft_correlate(x, p);
        for (std::size_t i : {2u, 4u, 8u, 16u, 32u}) {
            GccParams pi = p;
            pi.interp = i;
            const auto y = fft_correlate(x, pi);
            for (std::size_t t = 0; t < p.n; ++t) {
                worst = std::max(worst, std::abs(y.samples[i * t] - base.samples[t]));
            }
        }
    }
    return {worst <= 1e-9, fmt("max |y_i[i t] - y_1[t]| = %.3e", worst)};
}

const CellReport* find(const std::vector<CellReport>& r, const std::string& m, double beta, double snr) {
    for (const auto& c : r) {
        if (c.method == m && c.beta == beta && c.snr_db == snr) return &c;
    }
    return nullptr;
}

Outcome accuracy_replication() {
    const auto t0 = std::chrono::steady_clock::now();
    SweepConfig c;
    c.methods = parse_methods("mm,fft01,fft02-qi");
    c.cells = {{0.0, 10.0}, {0.0, 40.0}, {0.6, 10.0}, {0.6, 40.0}};
    c.n_configs = 50;
    c.seed = 2024;
    c.threads = std::max(1u, std::thread::hardware_concurrency());
    const auto r = run_accuracy_sweep(c);

    bool ok = true;
    std::string detail;
    auto rm = [&](const std::string& m, double b, double s) { return find(r, m, b, s)->rmse_deg; };
    for (const auto& cell : c.cells) {
        const double mm = rm("mm", cell.beta, cell.snr_db);
        const double f1 = rm("fft01", cell.beta, cell.snr_db);
        const double qi = rm("fft02-qi", cell.beta, cell.snr_db);
        const bool a = mm <= f1;
        const bool b = std::abs(qi - mm) <= 0.1 * mm;
        ok = ok && a && b;
        detail += fmt("[b=%.1f snr=%g: mm=%.3f fft01=%.3f fft02-qi=%.3f%s%s] ", cell.beta, cell.snr_db, mm,
                      f1, qi, a ? "" : " (a fails)", b ? "" : " (b fails)");
    }
    for (double beta : {0.0, 0.6}) {
        const bool cc = rm("mm", beta, 10.0) >= rm("mm", beta, 40.0);
        ok = ok && cc;
        if (!cc) detail += fmt("(c fails at b=%.1f) ", beta);
    }
    const bool d = rm("mm", 0.6, 40.0) >= rm("mm", 0.0, 40.0);
    ok = ok && d;
    if (!d) detail += "(d fails) ";
    const double secs = seconds_since(t0);
    ok = ok && secs < 600.0;
    detail += fmt("%.1f s", secs);
    return {ok, detail};
}

Outcome timing_replication() {
    BenchConfig c;
    c.methods = all_methods();
    c.n_frames = 2000;
    const auto reports = run_bench(c);
    bool ok = true;
    std::string detail;
    for (const auto& check : check_timing(reports)) {
        ok = ok && check.passed;
        detail += fmt("%s%s %s (%s)", detail.empty() ? "" : "; ", check.passed ? "ok" : "FAILED",
                      check.name.c_str(), check.detail.c_str());
    }
    return {ok, detail};
}

Outcome simulator_sanity() {
    SweepConfig c;
    c.seed = 77;
    const GccParams& p = c.params;
    std::vector<std::unique_ptr<Estimator>> one;
    one.push_back(make_estimator(parse_method("mm"), p));
    const auto length = std::size_t(std::llround(c.duration_s * p.rate));
    int within = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < 100; ++i) {
        const auto s = sweep_scenario(c, i, Cell{0.0, 40.0});
        const auto pair = render(s, sweep_source(c, i), length, p, c.rir_length);
        const auto r = evaluate_pair(one, pair, p, c.window);
        const auto doa = weighted_doa(r[0]);
        const double err = doa ? std::abs(rad_to_deg(*doa - s.theta0)) : 180.0;
        worst = std::max(worst, err);
        within += err <= 5.0;
    }
    return {within >= 90, fmt("%d/100 within 5 deg (worst %.2f deg)", within, worst)};
}

Outcome determinism() {
    SweepConfig c;
    c.methods = parse_methods("mm,fft02-qi,svd");
    c.cells = {{0.0, 40.0}, {0.6, 10.0}};
    c.n_configs = 4;
    c.seed = 9;
    c.duration_s = 0.5;
    auto sweep = [&](unsigned threads) {
        c.threads = threads;
        return cell_csv(run_accuracy_sweep(c));
    };
    const auto a = sweep(1);
    const auto b = sweep(1);
    const auto t = sweep(4);

    auto manifest = [&] {
        std::string out;
        for (std::size_t i = 0; i < 10; ++i) {
            const auto s = sweep_scenario(c, i, Cell{0.3, 20.0});
            out += scenario_to_json(s) + "\n";
            const auto pair = render(s, sweep_source(c, i), 4000, c.params, 1024);
            for (double v : pair.ch1) out.append(reinterpret_cast<const char*>(&v), sizeof v);
            for (double v : pair.ch2) out.append(reinterpret_cast<const char*>(&v), sizeof v);
        }
        return out;
    };
    const bool ok = a == b && a == t && manifest() == manifest();
    return {ok, fmt("evaluate %s across runs, %s across thread counts; simulate %s",
                    a == b ? "identical" : "DIFFERS", a == t ? "identical" : "DIFFERS",
                    ok ? "identical" : "checked")};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"1 oracle equivalence", oracle_equivalence},
        {"2 svd fidelity", svd_fidelity},
        {"3 rank minimality", rank_minimality},
        {"4 quadratic interpolation exactness", qi_exactness},
        {"5 interpolation consistency", interpolation_consistency},
        {"6 accuracy replication", accuracy_replication},
        {"7 timing replication", timing_replication},
        {"8 simulator sanity", simulator_sanity},
        {"9 determinism", determinism},
    };
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.passed;
        std::printf("%s criterion %s: %s\n", o.passed ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
