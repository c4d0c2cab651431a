#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "igsv/model.hpp"
#include "igsv/oracles.hpp"

using namespace igsv;

namespace {

ModelParams random_params(std::mt19937_64& rng, double min_ratio = 1.5, double max_ratio = 4.0) {
    std::uniform_real_distribution<double> cdist(1.0, 20.0), ratio(min_ratio, max_ratio), bdist(0.2, 2.0), rdist(-0.9, 0.0);
    ModelParams p;
    p.c = cdist(rng);
    p.a = -ratio(rng) * p.c;
    p.b = bdist(rng);
    p.rho = rdist(rng);
    return p;
}

}  // namespace

TEST(Params, Validation) {
    EXPECT_TRUE(table3_params.valid());
    EXPECT_THROW((ModelParams{1.0, 1.0, 1.0, 0.0}.validate()), ParameterError);
    EXPECT_THROW((ModelParams{-1.0, 0.0, 1.0, 0.0}.validate()), ParameterError);
    EXPECT_THROW((ModelParams{-1.0, 1.0, 0.0, 0.0}.validate()), ParameterError);
    EXPECT_THROW((ModelParams{-1.0, 1.0, 1.0, -1.2}.validate()), ParameterError);
    EXPECT_THROW((ModelParams{-1.0, 1.0, NAN, 0.0}.validate()), ParameterError);
    EXPECT_NO_THROW((ModelParams{-1.0, 1.0, 1.0, -1.0}.validate()));
}

TEST(Params, FandA) {
    const ModelParams p{-2.0, 0.5, 1.0, 0.0};
    EXPECT_DOUBLE_EQ(p.F(0), 0.0);
    EXPECT_DOUBLE_EQ(p.F(1), -2.0);
    EXPECT_DOUBLE_EQ(p.F(2), -3.0);
    EXPECT_DOUBLE_EQ(p.F(3), -3.0);
    EXPECT_DOUBLE_EQ(p.A(3), 1.5);
}

TEST(Derive, Table3Values) {
    const auto d = derive(table3_params);
    EXPECT_NEAR(d.nu, 4.579, 5e-4);
    EXPECT_NEAR(d.tau_L, 0.0864, 5e-5);
    EXPECT_NEAR(d.lambda, 2.0 * 0.8627 / std::sqrt(8.9749), 1e-15);
    EXPECT_NEAR(d.lambda, 0.57594, 5e-6);
    EXPECT_NEAR(d.tau_A1, 0.06226, 5e-6);
    EXPECT_NEAR(d.tau_A2, 0.04320, 5e-6);
    EXPECT_NEAR(d.tau_sigma * trading_days_per_year, 15.0, 0.6);
    EXPECT_EQ(d.n_star, 4);
    EXPECT_EQ(d.beta_range.first, 4);
    EXPECT_EQ(d.beta_range.second, 5);
    ASSERT_EQ(d.F.size(), 7u);
    EXPECT_DOUBLE_EQ(d.F[3], table3_params.F(3));
}

TEST(Derive, IntegerNuGivesStrictlySmallerNStar) {
    // nu = 1 - 2a/c = 5 exactly
    const auto d = derive(ModelParams{-2.0, 1.0, 1.0, 0.0});
    EXPECT_DOUBLE_EQ(d.nu, 5.0);
    EXPECT_EQ(d.n_star, 4);
}

TEST(Derive, NonMeanRevertingRejected) {
    EXPECT_THROW(derive(ModelParams{-1.0, 1.0, 2.0, 0.0}), DivergenceError);
    EXPECT_THROW(derive(ModelParams{-1.0, 1.0, 3.0, 0.0}), DivergenceError);
}

TEST(Derive, TimeRescaling) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) {
        const auto p = random_params(rng);
        const double s = 3.7;
        const auto q = rescale_time(p, s);
        const auto dp = derive(p), dq = derive(q);
        EXPECT_NEAR(dq.nu, dp.nu, 1e-12 * dp.nu);
        EXPECT_NEAR(dq.D, dp.D, 1e-12 * std::abs(dp.D));
        EXPECT_EQ(q.rho, p.rho);
        EXPECT_NEAR(dq.tau_L, s * dp.tau_L, 1e-12 * s * dp.tau_L);
        EXPECT_NEAR(dq.tau_A1, s * dp.tau_A1, 1e-12 * s * dp.tau_A1);
        EXPECT_NEAR(dq.tau_A2, s * dp.tau_A2, 1e-12 * s * dp.tau_A2);
        EXPECT_NEAR(dq.tau_sigma, s * dp.tau_sigma, 1e-12 * s * dp.tau_sigma);
    }
}

TEST(Consistency, Table3IsConsistent) {
    const auto r = check_consistency(table3_params);
    EXPECT_NEAR(r.ratio, 1.7895, 5e-5);
    EXPECT_TRUE(r.consistent());
    EXPECT_TRUE(r.third_moment);
    EXPECT_TRUE(r.ordering);
}

TEST(Consistency, Fig1ParamsThirdMomentDiverges) {
    const auto r = check_consistency(fig1_params);
    EXPECT_FALSE(r.consistent());
    EXPECT_FALSE(r.third_moment);
    EXPECT_GT(fig1_params.F(3), 0.0);
    EXPECT_NEAR(fig1_params.F(3), 3.0 * (fig1_params.a + fig1_params.c), 1e-12);
    EXPECT_NE(r.describe().find("divergent"), std::string::npos);
}

TEST(Consistency, BoundaryIsNotStrictlyConsistent) {
    EXPECT_FALSE(check_consistency(ModelParams{-1.5, 1.0, 1.0, 0.0}).consistent());
}

TEST(Consistency, OrderingHoldsWheneverFourthMomentFinite) {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 200; ++i) {
        const auto p = random_params(rng, 1.5 + 1e-6, 10.0);
        const auto r = check_consistency(p);
        ASSERT_TRUE(r.consistent());
        EXPECT_TRUE(r.ordering) << r.describe();
    }
}

TEST(StationaryMoment, Table3) {
    const auto& p = table3_params;
    EXPECT_NEAR(stationary_moment(p, 1), -p.b / p.a, 1e-16);
    EXPECT_NEAR(stationary_moment(p, 1), 0.053715, 5e-7);
    EXPECT_NEAR(stationary_moment(p, 2), 2.0 * p.b * p.b / (p.a * (2.0 * p.a + p.c)), 1e-16);
    // printed reference, rounded: exact arithmetic gives 0.00400399
    EXPECT_NEAR(stationary_moment(p, 2), 0.0040038, 4e-7);
    EXPECT_GT(stationary_moment(p, 4), 0.0);
    EXPECT_THROW(stationary_moment(p, 5), DivergenceError);
    EXPECT_DOUBLE_EQ(stationary_moment(p, 0), 1.0);
}

TEST(StationaryMoment, FixedPointOfOdeChain) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 30; ++trial) {
        const auto p = random_params(rng);
        const double nu = 1.0 - 2.0 * p.a / p.c;
        const int nmax = static_cast<int>(std::ceil(nu)) - 1;
        // relax from zero over many relaxation times of the slowest mode
        double slowest = 0.0;
        for (int k = 1; k <= nmax; ++k) slowest = std::max(slowest, -1.0 / p.F(k));
        std::vector<double> mu(nmax + 1, 0.0);
        mu[0] = 1.0;
        const double span = 60.0 * slowest;
        rk4_integrate(mu, span, static_cast<long>(span / (0.05 * std::min(slowest, -1.0 / p.F(nmax)))) + 1000,
                      [&](const std::vector<double>& y, std::vector<double>& dy) {
                          dy[0] = 0.0;
                          for (int k = 1; k <= nmax; ++k) dy[k] = p.F(k) * y[k] + p.A(k) * y[k - 1];
                      });
        for (int n = 1; n <= nmax; ++n) {
            const double exact = stationary_moment(p, n);
            EXPECT_NEAR(mu[n], exact, 1e-9 * exact) << "n=" << n;
        }
    }
}

TEST(StationaryMoment, MeanMatchesInverseGammaIdentity) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 50; ++i) {
        const auto p = random_params(rng);
        const auto d = derive(p);
        EXPECT_NEAR(stationary_moment(p, 1), d.lambda / ((d.nu - 1.0) * std::sqrt(p.c)), 1e-13 * stationary_moment(p, 1));
    }
}

TEST(SigmaPdf, DomainError) {
    EXPECT_THROW(stationary_sigma_pdf(table3_params, 0.0), std::domain_error);
    EXPECT_THROW(stationary_sigma_pdf(table3_params, -1.0), std::domain_error);
}

TEST(SigmaPdf, Normalized) {
    std::mt19937_64 rng(2);
    EXPECT_NEAR(sigma_moment_quadrature(table3_params, 0), 1.0, 1e-8);
    for (int i = 0; i < 10; ++i) EXPECT_NEAR(sigma_moment_quadrature(random_params(rng), 0), 1.0, 1e-8);
}

TEST(SigmaPdf, ModeAtLambdaOverNuPlusOne) {
    const auto& p = table3_params;
    const auto d = derive(p);
    // golden-section maximization of the density
    double lo = 1e-3, hi = 1.0;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int i = 0; i < 200; ++i) {
        const double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
        if (stationary_sigma_pdf(p, x1) > stationary_sigma_pdf(p, x2)) hi = x2;
        else lo = x1;
    }
    EXPECT_NEAR(0.5 * (lo + hi), d.lambda / (d.nu + 1.0), 1e-7);
}

TEST(SigmaPdf, MeanByQuadrature) {
    const auto& p = table3_params;
    const auto d = derive(p);
    const double mean = sigma_moment_quadrature(p, 1);
    EXPECT_NEAR(mean, d.lambda / (d.nu - 1.0), 1e-9);
    EXPECT_NEAR(mean, 0.16092, 5e-6);
    EXPECT_NEAR(mean, std::sqrt(p.c) * stationary_moment(p, 1), 1e-9);
}
