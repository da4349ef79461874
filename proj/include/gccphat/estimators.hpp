#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "gccphat/core.hpp"
#include "gccphat/factorization.hpp"
#include "gccphat/fft.hpp"
#include "gccphat/stft.hpp"

namespace gccphat {

/// GCC-PHAT score for each of the Q grid angles.
struct CorrelationCurve {
    std::vector<double> values;
};

struct DoaEstimate {
    std::size_t q_max = 0;
    double theta_est = 0.0;  ///< radians
    double energy = 0.0;     ///< correlation value at q_max
};

/// Time-domain correlation on a lag grid `factor` times finer than one sample.
struct InterpolatedLags {
    std::vector<double> samples;  // factor * N values
    std::size_t factor = 1;
};

// Direct evaluation ---------------------------------------------------------

/// values[q] = Re(sum_k W[q][k] X12[k]).
CorrelationCurve mm_correlate(const SteeringMatrix& w, const CrossSpectrum& x12);

// Zero-padded inverse FFT ----------------------------------------------------

/// Round half away from zero.
std::int64_t round_nearest(double x);

/// Non-negative remainder of `lag` modulo `size`.
std::size_t wrap_lag(std::int64_t lag, std::size_t size);

/// samples[t] = Re(sum_{k<=N/2} g[k] X12[k] exp(j 2 pi k t / (i N))) for t in [0, i N).
InterpolatedLags fft_correlate(const CrossSpectrum& x12, const GccParams& params);

/// Same, reusing a transform of length i*N that the caller owns.
InterpolatedLags fft_correlate(const RealFft& fft, std::span<const double> gains,
                               const CrossSpectrum& x12);

/// values[q] = samples[round(i tau_q) mod iN].
CorrelationCurve map_lags(const InterpolatedLags& y, const AngularGrid& grid,
                          const GccParams& params);

/// Parabolic fit through the three lags around round(i tau_q), evaluated at
/// the fractional offset i tau_q - round(i tau_q).
CorrelationCurve qi_correlate(const InterpolatedLags& y, const AngularGrid& grid,
                              const GccParams& params);

/// Coefficients of the parabola through (-1, y_minus), (0, y_zero), (1, y_plus).
struct Parabola {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    double operator()(double x) const { return (a * x + b) * x + c; }
};

Parabola fit_parabola(double y_minus, double y_zero, double y_plus);

// Low-rank ------------------------------------------------------------------

/// values = U_R (T_R Re X12) - U_I (T_I Im X12).
CorrelationCurve svd_correlate(const LowRankFactors& factors, const CrossSpectrum& x12);

// Peak picking ----------------------------------------------------------------

/// First index attaining the maximum.
DoaEstimate pick_peak(const CorrelationCurve& curve, const AngularGrid& grid);

// Back-end selection ------------------------------------------------------------

enum class Backend { mm, fft, fft_qi, svd };

struct Method {
    Backend backend = Backend::mm;
    std::size_t interp = 1;  // used by fft and fft_qi

    /// Canonical name: mm, fft01..fft32, fft01-qi..fft32-qi, svd.
    std::string name() const;

    bool operator==(const Method&) const = default;
};

/// Throws ConfigError on unknown names.
Method parse_method(std::string_view name);

/// Comma-separated list; duplicates rejected.
std::vector<Method> parse_methods(std::string_view list);

/// Every method in the reference roster, in report order.
std::vector<Method> all_methods();

/// A prepared back-end. All tables (steering matrix, lag maps, FFT plan,
/// low-rank factors) are built once at construction; `correlate` and
/// `estimate` are const and reentrant.
class Estimator {
public:
    virtual ~Estimator() = default;

    virtual CorrelationCurve correlate(const CrossSpectrum& x12) const = 0;

    DoaEstimate estimate(const CrossSpectrum& x12) const { return pick_peak(correlate(x12), grid_); }

    const Method& method() const { return method_; }
    const GccParams& params() const { return params_; }
    const AngularGrid& grid() const { return grid_; }

protected:
    Estimator(Method method, const GccParams& params);

    Method method_;
    GccParams params_;
    AngularGrid grid_;
};

/// Builds the back-end for `method`. For svd, `factors` is used when given and
/// must match params; otherwise the steering matrix is factorized at params.delta.
/// `rigor` applies to the FFT back-ends' plans.
std::unique_ptr<Estimator> make_estimator(const Method& method, const GccParams& params,
                                          const LowRankFactors* factors = nullptr,
                                          PlanRigor rigor = PlanRigor::estimate);

}  // namespace gccphat
