#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "gccphat/params.hpp"

namespace gccphat {

using Complex = std::complex<double>;

/// The Q candidate angles spanning [-pi/2, pi/2] and their TDOAs in samples.
struct AngularGrid {
    std::vector<double> thetas;
    std::vector<double> taus;

    std::size_t size() const { return thetas.size(); }
};

AngularGrid theta_grid(const GccParams& params);

/// One-sided DFT normalization so that the gains squared sum to one.
std::vector<double> normalization_gains(std::size_t n);

/// Complex Q x (N/2+1) matrix whose row q evaluates the GCC-PHAT sum at the
/// TDOA of angle q. Entries are stored row-major.
class SteeringMatrix {
public:
    SteeringMatrix() = default;

    /// Builds rows for arbitrary TDOAs (in samples) at frame size n.
    static SteeringMatrix from_taus(std::size_t n, std::span<const double> taus);

    std::size_t rows() const { return taus_.size(); }
    std::size_t cols() const { return gains_.size(); }
    std::size_t frame_size() const { return n_; }

    const std::vector<double>& gains() const { return gains_; }
    const std::vector<double>& taus() const { return taus_; }

    Complex at(std::size_t q, std::size_t k) const { return entries_[q * cols() + k]; }
    std::span<const Complex> row(std::size_t q) const {
        return {entries_.data() + q * cols(), cols()};
    }
    std::span<const Complex> entries() const { return entries_; }

private:
    std::size_t n_ = 0;
    std::vector<double> gains_;
    std::vector<double> taus_;
    std::vector<Complex> entries_;
};

SteeringMatrix steering_matrix(const GccParams& params, const AngularGrid& grid);

inline constexpr double kPi = 3.14159265358979323846;

inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }
inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

}  // namespace gccphat
