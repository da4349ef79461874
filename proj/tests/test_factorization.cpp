#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "gccphat/error.hpp"
#include "gccphat/factorization.hpp"

using namespace gccphat;

namespace {

SteeringMatrix reference_matrix() {
    const GccParams p;
    return steering_matrix(p, theta_grid(p));
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("gccphat_" + name);
}

void expect_format_error(std::span<const unsigned char> bytes, const std::string& needle) {
    try {
        decode_factors(bytes);
        FAIL() << "expected FormatError mentioning " << needle;
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
}

void put_u32(std::vector<unsigned char>& bytes, std::size_t offset, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes[offset + i] = static_cast<unsigned char>(v >> (8 * i));
}

}  // namespace

TEST(Split, ZeroDelayRow) {
    const auto w = reference_matrix();
    const auto [wr, wi] = split_steering(w);
    for (std::size_t k = 0; k < w.cols(); ++k) {
        EXPECT_EQ(wr(90, k), w.gains()[k]);
        EXPECT_EQ(wi(90, k), 0.0);
    }
}

TEST(Split, RecombinesExactly) {
    const auto w = reference_matrix();
    const auto [wr, wi] = split_steering(w);
    for (std::size_t q = 0; q < w.rows(); ++q) {
        for (std::size_t k = 0; k < w.cols(); ++k) {
            EXPECT_EQ(Complex(wr(q, k), wi(q, k)), w.at(q, k));
            const double g = w.gains()[k];
            EXPECT_NEAR(wr(q, k) * wr(q, k) + wi(q, k) * wi(q, k), g * g, 1e-15);
        }
    }
}

TEST(SelectRank, Examples) {
    const std::vector<double> rank1{2.0, 0.0, 0.0};
    for (double d : {0.5, 1e-3, 1e-12}) EXPECT_EQ(select_rank(rank1, 4.0, d), 1u);
    const std::vector<double> two{std::sqrt(3.0), 1.0};
    EXPECT_EQ(select_rank(two, 4.0, 0.3), 1u);
    EXPECT_EQ(select_rank(two, 4.0, 0.2), 2u);
}

TEST(SelectRank, ZeroMatrixKeepsOne) {
    const std::vector<double> zero{0.0, 0.0};
    EXPECT_EQ(select_rank(zero, 0.0, 1e-5), 1u);
}

TEST(SelectRank, MonotoneInDelta) {
    const auto w = reference_matrix();
    const auto [wr, wi] = split_steering(w);
    const auto s = svd(wr);
    std::size_t previous = 0;
    for (double d : {0.5, 1e-1, 1e-2, 1e-3, 1e-5, 1e-8, 1e-12}) {
        const auto k = select_rank(s.sigma, wr.frobenius_sq(), d);
        EXPECT_GE(k, previous);
        previous = k;
    }
}

TEST(Svd, ReconstructsAndIsOrthonormal) {
    RealMatrix a(4, 3);
    double v = 1.0;
    for (auto& x : a.data) x = std::sin(v++);
    const auto s = svd(a);
    ASSERT_EQ(s.sigma.size(), 3u);
    for (std::size_t i = 1; i < 3; ++i) EXPECT_GE(s.sigma[i - 1], s.sigma[i]);
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 0; c < 3; ++c) {
            double acc = 0.0;
            for (std::size_t k = 0; k < 3; ++k) acc += s.u(r, k) * s.sigma[k] * s.vt(k, c);
            EXPECT_NEAR(acc, a(r, c), 1e-12);
        }
    }
}

TEST(Factorize, SingleRow) {
    const std::vector<double> taus{0.7};
    const auto w = SteeringMatrix::from_taus(512, taus);
    const auto f = factorize(w, 1e-5);
    EXPECT_EQ(f.k_r(), 1u);
    EXPECT_EQ(f.k_i(), 1u);
}

TEST(Factorize, ReferenceRanks) {
    FactorReport report;
    const auto f = factorize(reference_matrix(), 1e-5, &report);
    EXPECT_EQ(f.k_r(), 5u);
    EXPECT_EQ(f.k_i(), 4u);
    EXPECT_LT(double(f.k_r() + f.k_i()), std::min(181.0, 257.0) / 2.0 / 4.0);
    EXPECT_LE(report.ratio_r, 1e-5);
    EXPECT_LE(report.ratio_i, 1e-5);
}

TEST(Factorize, RatiosMatchIndependentCheck) {
    const auto w = reference_matrix();
    const auto [wr, wi] = split_steering(w);
    for (double d : {1e-2, 1e-5}) {
        const auto f = factorize(w, d);
        EXPECT_LE(reconstruction_ratio(f.u_r, f.t_r, wr), d);
        EXPECT_LE(reconstruction_ratio(f.u_i, f.t_i, wi), d);
    }
}

TEST(Factorize, RankIsMinimal) {
    const auto w = reference_matrix();
    const auto [wr, wi] = split_steering(w);
    for (double d : {1e-2, 1e-5}) {
        const auto f = factorize(w, d);
        for (const auto* part : {&wr, &wi}) {
            const auto s = svd(*part);
            const std::size_t k = part == &wr ? f.k_r() : f.k_i();
            if (k < 2) continue;
            double kept = 0.0;
            for (std::size_t i = 0; i + 1 < k; ++i) kept += s.sigma[i] * s.sigma[i];
            EXPECT_LT(kept, (1.0 - d) * part->frobenius_sq());
        }
    }
}

TEST(Factorize, SmallerDeltaKeepsMore) {
    const auto w = reference_matrix();
    const auto loose = factorize(w, 1e-2);
    const auto tight = factorize(w, 1e-12);
    EXPECT_GT(tight.k_r() + tight.k_i(), loose.k_r() + loose.k_i());
}

TEST(Factorize, OrthonormalColumns) {
    const auto f = factorize(reference_matrix(), 1e-5);
    for (const auto* u : {&f.u_r, &f.u_i}) {
        for (std::size_t a = 0; a < u->cols; ++a) {
            for (std::size_t b = 0; b < u->cols; ++b) {
                double dot = 0.0;
                for (std::size_t r = 0; r < u->rows; ++r) dot += (*u)(r, a) * (*u)(r, b);
                EXPECT_NEAR(dot, a == b ? 1.0 : 0.0, 1e-8);
            }
        }
    }
}

TEST(FactorFile, RoundTrip) {
    const auto f = factorize(reference_matrix(), 1e-5);
    const auto path = temp_file("roundtrip.bin");
    save_factors(f, path);
    EXPECT_EQ(load_factors(path), f);
    EXPECT_EQ(decode_factors(encode_factors(f)), f);
    std::filesystem::remove(path);
}

TEST(FactorFile, EncodingIsStable) {
    const auto a = encode_factors(factorize(reference_matrix(), 1e-5));
    const auto b = encode_factors(factorize(reference_matrix(), 1e-5));
    EXPECT_EQ(a, b);
    ASSERT_GE(a.size(), 10u);
    EXPECT_EQ(std::string(a.begin(), a.begin() + 9), "GPHAT-SVD");
    EXPECT_EQ(a[9], 0);
}

TEST(FactorFile, TruncatedIsFormatError) {
    const auto bytes = encode_factors(factorize(reference_matrix(), 1e-5));
    for (std::size_t cut : {std::size_t(0), std::size_t(5), std::size_t(12), std::size_t(30),
                            bytes.size() / 2, bytes.size() - 1}) {
        std::span<const unsigned char> part(bytes.data(), cut);
        EXPECT_THROW(decode_factors(part), FormatError) << "cut=" << cut;
    }
    const auto path = temp_file("truncated.bin");
    {
        std::ofstream out(path, std::ios::binary);
        out.write(reinterpret_cast<const char*>(bytes.data()), 40);
    }
    EXPECT_THROW(load_factors(path), FormatError);
    std::filesystem::remove(path);
}

TEST(FactorFile, RankAboveQIsRejected) {
    auto bytes = encode_factors(factorize(reference_matrix(), 1e-5));
    put_u32(bytes, 22, 500);
    expect_format_error(bytes, "K_R");
}

TEST(FactorFile, BadMagicAndVersion) {
    auto bytes = encode_factors(factorize(reference_matrix(), 1e-5));
    auto bad = bytes;
    bad[0] = 'X';
    expect_format_error(bad, "magic");
    bad = bytes;
    put_u32(bad, 10, 2);
    expect_format_error(bad, "version");
    bad = bytes;
    bad.push_back(0);
    EXPECT_THROW(decode_factors(bad), FormatError);
}

TEST(FactorFile, MissingFile) {
    EXPECT_THROW(load_factors(temp_file("does_not_exist.bin")), Error);
}
