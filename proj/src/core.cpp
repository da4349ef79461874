#include "gccphat/core.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "gccphat/error.hpp"

namespace gccphat {

bool is_valid_interp(std::size_t factor) {
    switch (factor) {
        case 1: case 2: case 4: case 8: case 16: case 32:
            return true;
        default:
            return false;
    }
}

void GccParams::validate() const {
    if (q < 2) throw ConfigError("q must be at least 2");
    if (n < 4 || n % 2 != 0) throw ConfigError("n must be even and at least 4");
    if (hop == 0 || hop > n) throw ConfigError("hop must be in (0, n]");
    if (!(dist > 0.0)) throw ConfigError("dist must be positive");
    if (!(speed > 0.0)) throw ConfigError("speed must be positive");
    if (!(rate > 0.0)) throw ConfigError("rate must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must be in (0, 1)");
    if (!is_valid_interp(interp)) throw ConfigError("interp must be one of 1, 2, 4, 8, 16, 32");
    if (!(max_tdoa() < static_cast<double>(n) / 2.0)) {
        throw ConfigError("maximum TDOA rate*dist/speed must stay below n/2");
    }
}

std::string GccParams::fingerprint() const {
    char buf[160];
    std::snprintf(buf, sizeof buf, "q=%zu;n=%zu;hop=%zu;d=%g;c=%g;fs=%g;delta=%g", q, n, hop,
                  dist, speed, rate, delta);
    return buf;
}

AngularGrid theta_grid(const GccParams& params) {
    params.validate();
    const std::size_t count = params.q;
    const double scale = params.max_tdoa();

    AngularGrid grid;
    grid.thetas.resize(count);
    grid.taus.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        grid.thetas[i] = (static_cast<double>(i) / static_cast<double>(count - 1) - 0.5) * kPi;
    }
    // Exact center and odd symmetry; sin(pi/2 - x) evaluation is not symmetric in floating point.
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t mirror = count - 1 - i;
        if (i == mirror) {
            grid.thetas[i] = 0.0;
            grid.taus[i] = 0.0;
        } else if (i < mirror) {
            grid.taus[i] = scale * std::sin(grid.thetas[i]);
        } else {
            grid.thetas[i] = -grid.thetas[mirror];
            grid.taus[i] = -grid.taus[mirror];
        }
    }
    return grid;
}

std::vector<double> normalization_gains(std::size_t n) {
    if (n < 4 || n % 2 != 0) throw ConfigError("frame size must be even and at least 4");
    const std::size_t bins = n / 2 + 1;
    std::vector<double> gains(bins, std::sqrt(2.0 / static_cast<double>(n)));
    gains.front() = 1.0 / std::sqrt(static_cast<double>(n));
    gains.back() = gains.front();
    return gains;
}

SteeringMatrix SteeringMatrix::from_taus(std::size_t n, std::span<const double> taus) {
    SteeringMatrix w;
    w.n_ = n;
    w.gains_ = normalization_gains(n);
    w.taus_.assign(taus.begin(), taus.end());

    const std::size_t cols = w.gains_.size();
    w.entries_.resize(w.taus_.size() * cols);
    for (std::size_t q = 0; q < w.taus_.size(); ++q) {
        for (std::size_t k = 0; k < cols; ++k) {
            const double phase =
                2.0 * kPi * static_cast<double>(k) * w.taus_[q] / static_cast<double>(n);
            w.entries_[q * cols + k] = w.gains_[k] * Complex(std::cos(phase), std::sin(phase));
        }
    }
    return w;
}

SteeringMatrix steering_matrix(const GccParams& params, const AngularGrid& grid) {
    params.validate();
    if (grid.taus.size() != params.q || grid.thetas.size() != params.q) {
        throw ConfigError("angular grid size " + std::to_string(grid.taus.size()) +
                          " does not match q=" + std::to_string(params.q));
    }
    return SteeringMatrix::from_taus(params.n, grid.taus);
}

}  // namespace gccphat
