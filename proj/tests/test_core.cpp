#include <gtest/gtest.h>

#include <cmath>

#include "gccphat/core.hpp"
#include "gccphat/error.hpp"
#include "oracles.hpp"

using namespace gccphat;

TEST(ThetaGrid, CenterIsZero) {
    const auto grid = theta_grid(GccParams{});
    ASSERT_EQ(grid.size(), 181u);
    EXPECT_EQ(grid.thetas[90], 0.0);
    EXPECT_EQ(grid.taus[90], 0.0);
}

TEST(ThetaGrid, EndpointTdoa) {
    const auto grid = theta_grid(GccParams{});
    EXPECT_NEAR(grid.taus[180], 16000.0 * 0.05 / 343.0, 1e-12);
    EXPECT_NEAR(grid.taus[180], 2.33236, 1e-5);
    EXPECT_NEAR(grid.taus[0], -2.33236, 1e-5);
}

TEST(ThetaGrid, ThreeAngles) {
    GccParams p;
    p.q = 3;
    const auto grid = theta_grid(p);
    EXPECT_DOUBLE_EQ(grid.thetas[0], -kPi / 2);
    EXPECT_EQ(grid.thetas[1], 0.0);
    EXPECT_DOUBLE_EQ(grid.thetas[2], kPi / 2);
}

TEST(ThetaGrid, MatchesOracleAndIsStrictlyIncreasing) {
    const GccParams p;
    const auto grid = theta_grid(p);
    const auto expected = oracle::taus(p.q, p.rate, p.dist, p.speed);
    for (std::size_t q = 0; q < p.q; ++q) {
        EXPECT_NEAR(grid.taus[q], expected[q], 1e-12);
        if (q > 0) EXPECT_GT(grid.taus[q], grid.taus[q - 1]);
        EXPECT_EQ(grid.taus[q], -grid.taus[p.q - 1 - q]);
    }
}

TEST(Params, RejectsInvalid) {
    GccParams p;
    p.q = 1;
    EXPECT_THROW(p.validate(), ConfigError);
    p = GccParams{};
    p.n = 511;
    EXPECT_THROW(p.validate(), ConfigError);
    p = GccParams{};
    p.interp = 3;
    EXPECT_THROW(p.validate(), ConfigError);
    p = GccParams{};
    p.delta = 0.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = GccParams{};
    p.dist = 20.0;
    EXPECT_THROW(p.validate(), ConfigError);
    EXPECT_NO_THROW(GccParams{}.validate());
}

TEST(Gains, ReferenceValues) {
    const auto g = normalization_gains(512);
    ASSERT_EQ(g.size(), 257u);
    EXPECT_NEAR(g[0], 0.0441942, 1e-7);
    EXPECT_NEAR(g[0], 1.0 / std::sqrt(512.0), 1e-15);
    EXPECT_EQ(g[100], 0.0625);
    EXPECT_NEAR(g[256], 1.0 / std::sqrt(512.0), 1e-15);
}

TEST(Gains, SquaresSumToOne) {
    for (std::size_t n : {4u, 8u, 64u, 512u, 1024u}) {
        double s = 0.0;
        for (double g : normalization_gains(n)) s += g * g;
        EXPECT_NEAR(s, 1.0, 1e-12) << "n=" << n;
    }
}

TEST(Steering, ZeroDelayRowIsGainVector) {
    const GccParams p;
    const auto grid = theta_grid(p);
    const auto w = steering_matrix(p, grid);
    const auto g = normalization_gains(p.n);
    for (std::size_t k = 0; k < w.cols(); ++k) {
        EXPECT_EQ(w.at(90, k), Complex(g[k], 0.0));
    }
    for (std::size_t q = 0; q < w.rows(); ++q) EXPECT_EQ(w.at(q, 0), Complex(g[0], 0.0));
}

TEST(Steering, EntriesMatchOracle) {
    const GccParams p;
    const auto grid = theta_grid(p);
    const auto w = steering_matrix(p, grid);
    for (std::size_t q = 0; q < w.rows(); q += 7) {
        for (std::size_t k = 0; k < w.cols(); k += 5) {
            const double phi = 2.0 * oracle::pi * double(k) * grid.taus[q] / double(p.n);
            const auto expect = oracle::gain(k, p.n) * std::polar(1.0, phi);
            EXPECT_NEAR(std::abs(w.at(q, k) - expect), 0.0, 1e-13);
        }
    }
}

TEST(Steering, UnitRowNorms) {
    const GccParams p;
    const auto w = steering_matrix(p, theta_grid(p));
    for (std::size_t q = 0; q < w.rows(); ++q) {
        double s = 0.0;
        for (const auto& v : w.row(q)) s += std::norm(v);
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(Steering, MirroredRowsAreConjugates) {
    const GccParams p;
    const auto w = steering_matrix(p, theta_grid(p));
    for (std::size_t q = 0; q < w.rows(); ++q) {
        const std::size_t m = w.rows() - 1 - q;
        for (std::size_t k = 0; k < w.cols(); ++k) {
            EXPECT_NEAR(std::abs(w.at(q, k) - std::conj(w.at(m, k))), 0.0, 1e-14);
        }
    }
}

TEST(Steering, GridSizeMismatch) {
    GccParams p;
    auto grid = theta_grid(p);
    grid.taus.pop_back();
    grid.thetas.pop_back();
    EXPECT_THROW(steering_matrix(p, grid), ConfigError);
}
