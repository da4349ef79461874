#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "gccphat/core.hpp"

namespace gccphat {

/// Dense row-major real matrix.
struct RealMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    RealMatrix() = default;
    RealMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    double frobenius_sq() const;

    bool operator==(const RealMatrix&) const = default;
};

/// Low-rank factors W_R ~ U_R T_R and W_I ~ U_I T_I, with T = S V^T.
struct LowRankFactors {
    RealMatrix u_r;  // Q x K_R
    RealMatrix t_r;  // K_R x (N/2+1)
    RealMatrix u_i;  // Q x K_I
    RealMatrix t_i;  // K_I x (N/2+1)
    double delta = 0.0;

    std::size_t q() const { return u_r.rows; }
    std::size_t bins() const { return t_r.cols; }
    std::size_t frame_size() const { return 2 * (t_r.cols - 1); }
    std::size_t k_r() const { return u_r.cols; }
    std::size_t k_i() const { return u_i.cols; }

    bool operator==(const LowRankFactors&) const = default;
};

/// Real and imaginary parts of the steering matrix.
std::pair<RealMatrix, RealMatrix> split_steering(const SteeringMatrix& w);

/// Smallest K whose leading squared singular values retain (1 - delta) of the
/// total energy. Always at least 1. `singular_values` must be non-increasing.
std::size_t select_rank(std::span<const double> singular_values, double frobenius_sq,
                        double delta);

/// Thin SVD of a real matrix: singular values in descending order.
struct RealSvd {
    RealMatrix u;               // rows x r
    std::vector<double> sigma;  // r = min(rows, cols)
    RealMatrix vt;              // r x cols
};

RealSvd svd(const RealMatrix& a);

/// Per-part diagnostics gathered while factorizing.
struct FactorReport {
    double ratio_r = 0.0;  ///< ||U_R T_R - W_R||_F^2 / ||W_R||_F^2
    double ratio_i = 0.0;
    std::vector<double> sigma_r;
    std::vector<double> sigma_i;
};

LowRankFactors factorize(const SteeringMatrix& w, double delta, FactorReport* report = nullptr);

/// ||U T - W||_F^2 / ||W||_F^2 (0 when W is zero).
double reconstruction_ratio(const RealMatrix& u, const RealMatrix& t, const RealMatrix& w);

/// Binary factor file ("GPHAT-SVD" format, version 1, little-endian).
void save_factors(const LowRankFactors& factors, const std::filesystem::path& path);
LowRankFactors load_factors(const std::filesystem::path& path);

std::vector<unsigned char> encode_factors(const LowRankFactors& factors);
LowRankFactors decode_factors(std::span<const unsigned char> bytes);

}  // namespace gccphat
