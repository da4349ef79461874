#include "gccphat/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "gccphat/error.hpp"

namespace gccphat {

namespace {

void require_bins(std::size_t got, std::size_t want, const char* who) {
    if (got != want) {
        throw DimensionError(std::string(who) + ": cross-spectrum has " + std::to_string(got) +
                             " bins, expected " + std::to_string(want));
    }
}

// Packs g[k] X12[k] into a one-sided spectrum of length iN/2+1 so that the
// unnormalized Hermitian inverse yields Re(sum_k g[k] X12[k] e^{j 2 pi k t / iN}).
// Interior bins appear twice in the Hermitian sum, hence the halving; DC and,
// for i = 1, the Nyquist bin appear once.
void pack_spectrum(std::span<const double> gains, const CrossSpectrum& x12,
                   std::span<Complex> spec) {
    const std::size_t half = gains.size() - 1;  // N/2
    const std::size_t nyquist = spec.size() - 1;  // iN/2
    for (std::size_t k = 0; k <= half; ++k) {
        const Complex c = gains[k] * x12.bins[k];
        spec[k] = (k == 0 || k == nyquist) ? c : 0.5 * c;
    }
    std::fill(spec.begin() + static_cast<std::ptrdiff_t>(half + 1), spec.end(), Complex(0.0, 0.0));
}

void inverse_lags(const RealFft& fft, std::span<const double> gains, const CrossSpectrum& x12,
                  std::span<Complex> spec, std::span<double> out) {
    require_bins(x12.size(), gains.size(), "fft_correlate");
    pack_spectrum(gains, x12, spec);
    fft.inverse(spec, out);
}

struct LagLookup {
    std::size_t center;
    std::size_t minus;
    std::size_t plus;
    double offset;  // i tau - round(i tau), in [-0.5, 0.5]
};

LagLookup lookup_for(double tau, std::size_t factor, std::size_t n) {
    const std::size_t size = factor * n;
    const double scaled = static_cast<double>(factor) * tau;
    const std::int64_t rounded = round_nearest(scaled);
    return {wrap_lag(rounded, size), wrap_lag(rounded - 1, size), wrap_lag(rounded + 1, size),
            scaled - static_cast<double>(rounded)};
}

void check_lags(const InterpolatedLags& y, const AngularGrid& grid, const GccParams& params,
                const char* who) {
    if (y.factor != params.interp) {
        throw DimensionError(std::string(who) + ": lag factor " + std::to_string(y.factor) +
                             " does not match interp " + std::to_string(params.interp));
    }
    if (y.samples.size() != y.factor * params.n) {
        throw DimensionError(std::string(who) + ": expected " +
                             std::to_string(y.factor * params.n) + " lag samples");
    }
    if (grid.taus.empty()) throw DimensionError(std::string(who) + ": empty angular grid");
}

}  // namespace

CorrelationCurve mm_correlate(const SteeringMatrix& w, const CrossSpectrum& x12) {
    require_bins(x12.size(), w.cols(), "mm_correlate");
    const std::size_t cols = w.cols();
    const Complex* x = x12.bins.data();
    CorrelationCurve out;
    out.values.resize(w.rows());
    for (std::size_t q = 0; q < w.rows(); ++q) {
        const Complex* row = w.row(q).data();
        double acc = 0.0;
        for (std::size_t k = 0; k < cols; ++k) {
            acc += row[k].real() * x[k].real() - row[k].imag() * x[k].imag();
        }
        out.values[q] = acc;
    }
    return out;
}

std::int64_t round_nearest(double x) {
    return static_cast<std::int64_t>(std::round(x));
}

std::size_t wrap_lag(std::int64_t lag, std::size_t size) {
    const auto s = static_cast<std::int64_t>(size);
    std::int64_t r = lag % s;
    if (r < 0) r += s;
    return static_cast<std::size_t>(r);
}

InterpolatedLags fft_correlate(const RealFft& fft, std::span<const double> gains,
                               const CrossSpectrum& x12) {
    const std::size_t n = 2 * (gains.size() - 1);
    if (fft.size() % n != 0) throw DimensionError("fft_correlate: transform size is not a multiple of N");
    AlignedBuffer<Complex> spec(fft.bins());
    AlignedBuffer<double> out(fft.size());
    inverse_lags(fft, gains, x12, spec.span(), out.span());

    InterpolatedLags y;
    y.factor = fft.size() / n;
    y.samples.assign(out.data(), out.data() + out.size());
    return y;
}

InterpolatedLags fft_correlate(const CrossSpectrum& x12, const GccParams& params) {
    params.validate();
    const RealFft fft(params.interp * params.n);
    const auto gains = normalization_gains(params.n);
    return fft_correlate(fft, gains, x12);
}

CorrelationCurve map_lags(const InterpolatedLags& y, const AngularGrid& grid,
                          const GccParams& params) {
    check_lags(y, grid, params, "map_lags");
    CorrelationCurve out;
    out.values.resize(grid.taus.size());
    for (std::size_t q = 0; q < grid.taus.size(); ++q) {
        out.values[q] = y.samples[lookup_for(grid.taus[q], y.factor, params.n).center];
    }
    return out;
}

Parabola fit_parabola(double y_minus, double y_zero, double y_plus) {
    return {0.5 * (y_minus - 2.0 * y_zero + y_plus), 0.5 * (y_plus - y_minus), y_zero};
}

CorrelationCurve qi_correlate(const InterpolatedLags& y, const AngularGrid& grid,
                              const GccParams& params) {
    check_lags(y, grid, params, "qi_correlate");
    CorrelationCurve out;
    out.values.resize(grid.taus.size());
    for (std::size_t q = 0; q < grid.taus.size(); ++q) {
        const LagLookup l = lookup_for(grid.taus[q], y.factor, params.n);
        const Parabola p = fit_parabola(y.samples[l.minus], y.samples[l.center], y.samples[l.plus]);
        out.values[q] = p(l.offset);
    }
    return out;
}

CorrelationCurve svd_correlate(const LowRankFactors& f, const CrossSpectrum& x12) {
    require_bins(x12.size(), f.bins(), "svd_correlate");
    if (f.t_i.cols != f.bins() || f.u_i.rows != f.q() || f.u_r.cols != f.t_r.rows ||
        f.u_i.cols != f.t_i.rows) {
        throw DimensionError("svd_correlate: inconsistent factor shapes");
    }
    const std::size_t bins = f.bins();
    const Complex* x = x12.bins.data();

    std::vector<double> proj_r(f.k_r());
    std::vector<double> proj_i(f.k_i());
    for (std::size_t k = 0; k < f.k_r(); ++k) {
        const double* t = f.t_r.data.data() + k * bins;
        double acc = 0.0;
        for (std::size_t c = 0; c < bins; ++c) acc += t[c] * x[c].real();
        proj_r[k] = acc;
    }
    for (std::size_t k = 0; k < f.k_i(); ++k) {
        const double* t = f.t_i.data.data() + k * bins;
        double acc = 0.0;
        for (std::size_t c = 0; c < bins; ++c) acc += t[c] * x[c].imag();
        proj_i[k] = acc;
    }

    CorrelationCurve out;
    out.values.resize(f.q());
    for (std::size_t q = 0; q < f.q(); ++q) {
        const double* ur = f.u_r.data.data() + q * f.k_r();
        const double* ui = f.u_i.data.data() + q * f.k_i();
        double re = 0.0;
        for (std::size_t k = 0; k < f.k_r(); ++k) re += ur[k] * proj_r[k];
        double im = 0.0;
        for (std::size_t k = 0; k < f.k_i(); ++k) im += ui[k] * proj_i[k];
        out.values[q] = re - im;
    }
    return out;
}

DoaEstimate pick_peak(const CorrelationCurve& curve, const AngularGrid& grid) {
    if (curve.values.empty()) throw DimensionError("pick_peak: empty correlation curve");
    if (grid.thetas.size() != curve.values.size()) {
        throw DimensionError("pick_peak: curve has " + std::to_string(curve.values.size()) +
                             " values but grid has " + std::to_string(grid.thetas.size()));
    }
    std::size_t best = 0;
    for (std::size_t q = 1; q < curve.values.size(); ++q) {
        if (curve.values[q] > curve.values[best]) best = q;
    }
    return {best, grid.thetas[best], curve.values[best]};
}

// ---------------------------------------------------------------------------

std::string Method::name() const {
    char buf[16];
    switch (backend) {
        case Backend::mm:
            return "mm";
        case Backend::svd:
            return "svd";
        case Backend::fft:
            std::snprintf(buf, sizeof buf, "fft%02zu", interp);
            return buf;
        case Backend::fft_qi:
            std::snprintf(buf, sizeof buf, "fft%02zu-qi", interp);
            return buf;
    }
    return "?";
}

Method parse_method(std::string_view name) {
    if (name == "mm") return {Backend::mm, 1};
    if (name == "svd") return {Backend::svd, 1};
    for (std::size_t factor : {1, 2, 4, 8, 16, 32}) {
        const Method plain{Backend::fft, factor};
        const Method qi{Backend::fft_qi, factor};
        if (name == plain.name()) return plain;
        if (name == qi.name()) return qi;
    }
    throw ConfigError("unknown method '" + std::string(name) +
                      "' (expected mm, svd, fft01..fft32 or fft01-qi..fft32-qi)");
}

std::vector<Method> parse_methods(std::string_view list) {
    std::vector<Method> out;
    std::size_t start = 0;
    while (start <= list.size()) {
        const std::size_t comma = std::min(list.find(',', start), list.size());
        const auto token = list.substr(start, comma - start);
        if (token.empty()) throw ConfigError("empty method name in list");
        const Method m = parse_method(token);
        if (std::find(out.begin(), out.end(), m) != out.end()) {
            throw ConfigError("method '" + m.name() + "' listed twice");
        }
        out.push_back(m);
        start = comma + 1;
    }
    return out;
}

std::vector<Method> all_methods() {
    std::vector<Method> out{{Backend::mm, 1}};
    for (std::size_t f : {1, 2, 4, 8, 16, 32}) out.push_back({Backend::fft, f});
    for (std::size_t f : {1, 2, 4, 8, 16, 32}) out.push_back({Backend::fft_qi, f});
    out.push_back({Backend::svd, 1});
    return out;
}

// ---------------------------------------------------------------------------

Estimator::Estimator(Method method, const GccParams& params)
    : method_(method), params_(params), grid_(theta_grid(params)) {}

namespace {

class MatrixEstimator final : public Estimator {
public:
    MatrixEstimator(Method m, const GccParams& p)
        : Estimator(m, p), w_(steering_matrix(params_, grid_)) {}

    CorrelationCurve correlate(const CrossSpectrum& x12) const override {
        return mm_correlate(w_, x12);
    }

private:
    SteeringMatrix w_;
};

class LagEstimator final : public Estimator {
public:
    LagEstimator(Method m, const GccParams& p, PlanRigor rigor)
        : Estimator(m, p), fft_(m.interp * p.n, rigor), gains_(normalization_gains(p.n)) {
        params_.interp = m.interp;
        lookups_.reserve(grid_.taus.size());
        for (double tau : grid_.taus) lookups_.push_back(lookup_for(tau, m.interp, p.n));
    }

    CorrelationCurve correlate(const CrossSpectrum& x12) const override {
        // Per-thread scratch keeps concurrent callers apart without a
        // zero-filled allocation on every frame.
        thread_local Scratch scratch;
        scratch.reserve(fft_.bins(), fft_.size());
        const auto spec = scratch.spec->span().first(fft_.bins());
        const auto lags = scratch.lags->span().first(fft_.size());
        inverse_lags(fft_, gains_, x12, spec, lags);
        const double* y = lags.data();

        CorrelationCurve out;
        out.values.resize(lookups_.size());
        if (method_.backend == Backend::fft) {
            for (std::size_t q = 0; q < lookups_.size(); ++q) out.values[q] = y[lookups_[q].center];
        } else {
            for (std::size_t q = 0; q < lookups_.size(); ++q) {
                const LagLookup& l = lookups_[q];
                out.values[q] = fit_parabola(y[l.minus], y[l.center], y[l.plus])(l.offset);
            }
        }
        return out;
    }

private:
    struct Scratch {
        std::unique_ptr<AlignedBuffer<Complex>> spec;
        std::unique_ptr<AlignedBuffer<double>> lags;

        void reserve(std::size_t bins, std::size_t size) {
            if (!spec || spec->size() < bins) spec = std::make_unique<AlignedBuffer<Complex>>(bins);
            if (!lags || lags->size() < size) lags = std::make_unique<AlignedBuffer<double>>(size);
        }
    };

    RealFft fft_;
    std::vector<double> gains_;
    std::vector<LagLookup> lookups_;
};

class LowRankEstimator final : public Estimator {
public:
    LowRankEstimator(Method m, const GccParams& p, LowRankFactors f)
        : Estimator(m, p), factors_(std::move(f)) {
        if (factors_.q() != params_.q || factors_.bins() != params_.bins()) {
            throw ConfigError("low-rank factors are for Q=" + std::to_string(factors_.q()) +
                              ", N=" + std::to_string(factors_.frame_size()) +
                              " but parameters have Q=" + std::to_string(params_.q) +
                              ", N=" + std::to_string(params_.n));
        }
    }

    CorrelationCurve correlate(const CrossSpectrum& x12) const override {
        return svd_correlate(factors_, x12);
    }

private:
    LowRankFactors factors_;
};

}  // namespace

std::unique_ptr<Estimator> make_estimator(const Method& method, const GccParams& params,
                                          const LowRankFactors* factors, PlanRigor rigor) {
    params.validate();
    switch (method.backend) {
        case Backend::mm:
            return std::make_unique<MatrixEstimator>(method, params);
        case Backend::fft:
        case Backend::fft_qi:
            if (!is_valid_interp(method.interp)) throw ConfigError("invalid interpolation factor");
            return std::make_unique<LagEstimator>(method, params, rigor);
        case Backend::svd: {
            if (factors) return std::make_unique<LowRankEstimator>(method, params, *factors);
            const auto w = steering_matrix(params, theta_grid(params));
            return std::make_unique<LowRankEstimator>(method, params, factorize(w, params.delta));
        }
    }
    throw ConfigError("unknown back-end");
}

}  // namespace gccphat
