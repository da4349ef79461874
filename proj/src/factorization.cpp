#include "gccphat/factorization.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "gccphat/error.hpp"

namespace gccphat {

namespace {

using EigenRowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr unsigned char kMagic[10] = {'G', 'P', 'H', 'A', 'T', '-', 'S', 'V', 'D', '\0'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

double RealMatrix::frobenius_sq() const {
    double acc = 0.0;
    for (double v : data) acc += v * v;
    return acc;
}

std::pair<RealMatrix, RealMatrix> split_steering(const SteeringMatrix& w) {
    RealMatrix re(w.rows(), w.cols());
    RealMatrix im(w.rows(), w.cols());
    for (std::size_t q = 0; q < w.rows(); ++q) {
        for (std::size_t k = 0; k < w.cols(); ++k) {
            re(q, k) = w.at(q, k).real();
            im(q, k) = w.at(q, k).imag();
        }
    }
    return {std::move(re), std::move(im)};
}

std::size_t select_rank(std::span<const double> singular_values, double frobenius_sq,
                        double delta) {
    if (singular_values.empty()) throw DimensionError("select_rank: empty singular spectrum");
    // Keeping (1 - delta) of the energy is the same as discarding at most delta
    // of it. Summing the discarded tail from the smallest value up avoids the
    // cancellation in 1 - delta when delta approaches machine precision.
    const double budget = delta * frobenius_sq;
    double discarded = 0.0;
    std::size_t k = singular_values.size();
    while (k > 1) {
        const double next = discarded + singular_values[k - 1] * singular_values[k - 1];
        if (next > budget) break;
        discarded = next;
        --k;
    }
    return k;
}

RealSvd svd(const RealMatrix& a) {
    if (a.rows == 0 || a.cols == 0) throw DimensionError("svd: empty matrix");
    const Eigen::Map<const EigenRowMajor> m(a.data.data(), static_cast<Eigen::Index>(a.rows),
                                            static_cast<Eigen::Index>(a.cols));
    Eigen::JacobiSVD<Eigen::MatrixXd> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("svd: Jacobi SVD did not converge on " + std::to_string(a.rows) +
                             "x" + std::to_string(a.cols) + " matrix");
    }
    const auto& s = solver.singularValues();
    const auto& u = solver.matrixU();
    const auto& v = solver.matrixV();
    const std::size_t r = static_cast<std::size_t>(s.size());

    RealSvd out;
    out.sigma.assign(s.data(), s.data() + r);
    for (double x : out.sigma) {
        if (!std::isfinite(x)) throw NumericalError("svd: non-finite singular value");
    }
    out.u = RealMatrix(a.rows, r);
    out.vt = RealMatrix(r, a.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = 0; j < r; ++j) out.u(i, j) = u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    for (std::size_t j = 0; j < r; ++j) {
        for (std::size_t c = 0; c < a.cols; ++c) out.vt(j, c) = v(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j));
    }
    return out;
}

double reconstruction_ratio(const RealMatrix& u, const RealMatrix& t, const RealMatrix& w) {
    if (u.rows != w.rows || t.cols != w.cols || u.cols != t.rows) {
        throw DimensionError("reconstruction_ratio: factor shapes do not match");
    }
    double err = 0.0;
    for (std::size_t i = 0; i < w.rows; ++i) {
        for (std::size_t j = 0; j < w.cols; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < u.cols; ++k) acc += u(i, k) * t(k, j);
            const double d = acc - w(i, j);
            err += d * d;
        }
    }
    const double total = w.frobenius_sq();
    return total > 0.0 ? err / total : err;
}

namespace {

struct Truncated {
    RealMatrix u;
    RealMatrix t;
    double ratio = 0.0;
    std::vector<double> sigma;
};

Truncated truncate_part(const RealMatrix& w, double delta, char part) {
    const RealSvd d = svd(w);
    const double total = w.frobenius_sq();
    const std::size_t k = select_rank(d.sigma, total, delta);

    // Minimality: dropping one more singular value must break the energy bound.
    if (total > 0.0 && k > 1) {
        double tail = 0.0;
        for (std::size_t i = d.sigma.size(); i-- > k - 1;) tail += d.sigma[i] * d.sigma[i];
        if (tail <= delta * total) {
            throw NumericalError(std::string("factorize: rank for W_") + part + " is not minimal");
        }
    }

    Truncated out;
    out.sigma = d.sigma;
    out.u = RealMatrix(w.rows, k);
    out.t = RealMatrix(k, w.cols);
    for (std::size_t i = 0; i < w.rows; ++i) {
        for (std::size_t j = 0; j < k; ++j) out.u(i, j) = d.u(i, j);
    }
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t c = 0; c < w.cols; ++c) out.t(j, c) = d.sigma[j] * d.vt(j, c);
    }
    out.ratio = reconstruction_ratio(out.u, out.t, w);
    if (!(out.ratio <= delta + 1e-9)) {
        throw NumericalError(std::string("factorize: reconstruction ratio for W_") + part + " = " +
                             std::to_string(out.ratio) + " exceeds delta = " +
                             std::to_string(delta) + " at rank " + std::to_string(k));
    }
    return out;
}

}  // namespace

LowRankFactors factorize(const SteeringMatrix& w, double delta, FactorReport* report) {
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("factorize: delta must be in (0, 1)");
    if (w.rows() == 0) throw DimensionError("factorize: steering matrix has no rows");
    const auto [w_r, w_i] = split_steering(w);
    Truncated re = truncate_part(w_r, delta, 'R');
    Truncated im = truncate_part(w_i, delta, 'I');

    if (report) {
        report->ratio_r = re.ratio;
        report->ratio_i = im.ratio;
        report->sigma_r = re.sigma;
        report->sigma_i = im.sigma;
    }
    LowRankFactors f;
    f.u_r = std::move(re.u);
    f.t_r = std::move(re.t);
    f.u_i = std::move(im.u);
    f.t_i = std::move(im.t);
    f.delta = delta;
    return f;
}

// ---------------------------------------------------------------------------
// Factor file

namespace {

class Writer {
public:
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        buf_.insert(buf_.end(), b, b + n);
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void f64(double v) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<unsigned char>(bits >> (8 * i)));
    }
    std::vector<unsigned char> take() { return std::move(buf_); }

private:
    std::vector<unsigned char> buf_;
};

class Reader {
public:
    explicit Reader(std::span<const unsigned char> b) : b_(b) {}

    void need(std::size_t n, const char* field) const {
        if (pos_ + n > b_.size()) {
            throw FormatError(std::string("factor file truncated while reading ") + field);
        }
    }
    std::uint32_t u32(const char* field) {
        need(4, field);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    double f64(const char* field) {
        need(8, field);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return std::bit_cast<double>(v);
    }
    std::span<const unsigned char> take(std::size_t n, const char* field) {
        need(n, field);
        auto s = b_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t remaining() const { return b_.size() - pos_; }

private:
    std::span<const unsigned char> b_;
    std::size_t pos_ = 0;
};

void write_matrix(Writer& w, const RealMatrix& m) {
    for (double v : m.data) w.f64(v);
}

RealMatrix read_matrix(Reader& r, std::size_t rows, std::size_t cols, const char* field) {
    RealMatrix m(rows, cols);
    for (double& v : m.data) v = r.f64(field);
    return m;
}

void check_factor_shapes(const LowRankFactors& f) {
    const std::size_t q = f.u_r.rows;
    const std::size_t bins = f.t_r.cols;
    if (f.u_i.rows != q || f.t_i.cols != bins || f.u_r.cols != f.t_r.rows ||
        f.u_i.cols != f.t_i.rows) {
        throw DimensionError("low-rank factors have inconsistent shapes");
    }
    if (bins < 3) throw DimensionError("low-rank factors have fewer than 3 bins");
}

}  // namespace

std::vector<unsigned char> encode_factors(const LowRankFactors& f) {
    check_factor_shapes(f);
    Writer w;
    w.bytes(kMagic, sizeof kMagic);
    w.u32(kVersion);
    w.u32(static_cast<std::uint32_t>(f.q()));
    w.u32(static_cast<std::uint32_t>(f.frame_size()));
    w.u32(static_cast<std::uint32_t>(f.k_r()));
    w.u32(static_cast<std::uint32_t>(f.k_i()));
    w.f64(f.delta);
    write_matrix(w, f.u_r);
    write_matrix(w, f.t_r);
    write_matrix(w, f.u_i);
    write_matrix(w, f.t_i);
    return w.take();
}

LowRankFactors decode_factors(std::span<const unsigned char> bytes) {
    Reader r(bytes);
    const auto magic = r.take(sizeof kMagic, "magic");
    if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic))) {
        throw FormatError("factor file has bad magic (expected GPHAT-SVD)");
    }
    const std::uint32_t version = r.u32("version");
    if (version != kVersion) {
        throw FormatError("factor file version " + std::to_string(version) + " unsupported");
    }
    const std::size_t q = r.u32("Q");
    const std::size_t n = r.u32("N");
    const std::size_t k_r = r.u32("K_R");
    const std::size_t k_i = r.u32("K_I");
    const double delta = r.f64("delta");

    if (q < 1) throw FormatError("factor file field Q must be at least 1");
    if (n < 4 || n % 2 != 0) throw FormatError("factor file field N must be even and >= 4");
    const std::size_t bins = n / 2 + 1;
    const std::size_t k_max = std::min(q, bins);
    if (k_r < 1 || k_r > k_max) {
        throw FormatError("factor file field K_R=" + std::to_string(k_r) + " outside [1, " +
                          std::to_string(k_max) + "]");
    }
    if (k_i < 1 || k_i > k_max) {
        throw FormatError("factor file field K_I=" + std::to_string(k_i) + " outside [1, " +
                          std::to_string(k_max) + "]");
    }
    if (!(delta > 0.0 && delta < 1.0)) throw FormatError("factor file field delta outside (0, 1)");

    const std::size_t payload = 8 * (q * k_r + k_r * bins + q * k_i + k_i * bins);
    if (r.remaining() != payload) {
        throw FormatError("factor file matrix payload is " + std::to_string(r.remaining()) +
                          " bytes, expected " + std::to_string(payload));
    }

    LowRankFactors f;
    f.delta = delta;
    f.u_r = read_matrix(r, q, k_r, "U_R");
    f.t_r = read_matrix(r, k_r, bins, "T_R");
    f.u_i = read_matrix(r, q, k_i, "U_I");
    f.t_i = read_matrix(r, k_i, bins, "T_I");
    return f;
}

void save_factors(const LowRankFactors& factors, const std::filesystem::path& path) {
    const auto bytes = encode_factors(factors);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing factor file " + path.string());
}

LowRankFactors load_factors(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open factor file " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return decode_factors(bytes);
}

}  // namespace gccphat
