#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "igsv/analytics.hpp"
#include "igsv/oracles.hpp"

using namespace igsv;

namespace {

ModelParams random_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> cdist(1.0, 20.0), ratio(1.5, 4.0), bdist(0.2, 2.0), rdist(-0.9, 0.0);
    ModelParams p;
    p.c = cdist(rng);
    p.a = -ratio(rng) * p.c;
    p.b = bdist(rng);
    p.rho = rdist(rng);
    return p;
}

double rel(double x, double ref) { return std::abs(x - ref) / std::max(std::abs(ref), 1e-300); }

}  // namespace

TEST(Volterra, ZeroCorrelationGivesZeroCurve) {
    auto p = table3_params;
    p.rho = 0.0;
    const auto L = volterra_leverage(p, stationary_moment(p, 2), stationary_moment(p, 3), {1e-3, 0.1});
    for (double v : L.values) EXPECT_EQ(v, 0.0);
}

TEST(Volterra, MatchesStationaryClosedForm) {
    const auto& p = table3_params;
    const auto L = volterra_leverage(p, stationary_moment(p, 2), stationary_moment(p, 3), {1e-4, 0.5});
    double worst = 0.0;
    for (std::size_t i = 1; i < L.size(); ++i) worst = std::max(worst, rel(L.values[i], leverage(p, L.grid[i])));
    EXPECT_LE(worst, 1e-4);
}

TEST(Volterra, OriginIsAlgebraicAmplitude) {
    const auto& p = table3_params;
    const double mu2 = stationary_moment(p, 2), mu3 = stationary_moment(p, 3);
    const auto L = volterra_leverage(p, mu2, mu3, {1e-3, 0.1});
    EXPECT_NEAR(L.values[0], 2.0 * p.rho * mu3 / (mu2 * mu2), 1e-12);
    EXPECT_LE(rel(L.values[0], leverage_amplitude(p)), 1e-12);
}

TEST(Volterra, FiniteTimeMomentsMatchFiniteMode) {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 10; ++i) {
        const auto p = random_params(rng);
        const auto start = VolStart::at(-0.05, InitialYMoments::fixed(0.2));
        const auto mu = y_moments_at(p, start, 0.0, 3);
        const double step = std::min(1e-4, 0.04 / p.c);
        const auto L = volterra_leverage(p, mu[2], mu[3], {step, 0.3});
        for (std::size_t k = 1; k < L.size(); k += 97) EXPECT_LE(rel(L.values[k], leverage(p, L.grid[k], 0.0, start)), 1e-4);
    }
}

TEST(Volterra, IntegralEquationResidual) {
    const auto& p = table3_params;
    const double mu2 = stationary_moment(p, 2), mu3 = stationary_moment(p, 3);
    const double h = 1e-3;
    std::vector<double> f;
    volterra_leverage(p, mu2, mu3, {h, 0.2}, &f);
    // residual with the integral evaluated by composite Simpson on the solution grid
    const double kappa = 0.5 * p.c;
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 2; i < f.size(); i += 2) {
        const double tau = i * h;
        double integral = 0.0;
        for (std::size_t j = 0; j <= i; ++j) {
            const double w = (j == 0 || j == i) ? 1.0 : (j % 2 ? 4.0 : 2.0);
            integral += w * f[j] * std::exp(kappa * (tau - j * h));
        }
        integral *= h / 3.0;
        const double residual = f[i] - (p.a + p.c) * integral - std::exp(kappa * tau) * (mu3 + p.b * tau * mu2);
        worst = std::max(worst, std::abs(residual));
        scale = std::max(scale, std::abs(f[i]));
    }
    EXPECT_LE(worst, 5.0 * h * h * scale);
}

TEST(Volterra, RejectsCoarseSteps) {
    const auto& p = table3_params;
    const double mu2 = stationary_moment(p, 2), mu3 = stationary_moment(p, 3);
    EXPECT_THROW(volterra_leverage(p, mu2, mu3, {0.1, 0.5}), std::invalid_argument);
    EXPECT_THROW(volterra_leverage(p, mu2, mu3, {0.02, 0.5}), std::invalid_argument);
}

TEST(OdeOracle, MatchesLattice) {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> y0(0.01, 0.3);
    for (int i = 0; i < 20; ++i) {
        const auto p = random_params(rng);
        const auto init = InitialYMoments::fixed(y0(rng));
        for (int n : {2, 3, 4}) {
            const double t = 5 * one_day, t0 = -25 * one_day;
            const double exact = x_moment(p, n, t, t0, init);
            EXPECT_LE(rel(ode_moment_oracle(p, n, t, t0, init, 1e-5), exact), 1e-8) << "n=" << n;
        }
    }
}

TEST(OdeOracle, OddMomentsVanishWithoutCorrelation) {
    auto p = table3_params;
    p.rho = 0.0;
    EXPECT_LE(std::abs(ode_moment_oracle(p, 3, 0.04, -0.1, InitialYMoments::fixed(0.1), 1e-4)), 1e-12);
}

TEST(OdeOracle, FourthOrderConvergence) {
    // Stationary start, so only the X-phase integration contributes; with a
    // finite start the two phases' errors partly cancel and mask the order.
    const auto& p = table3_params;
    const double t = 0.4;
    for (int n : {3, 4}) {
        const double exact = x_moment(p, n, t, VolStart::stationary());
        const double e1 = std::abs(ode_moment_oracle(p, n, t, VolStart::stationary(), 5e-3) - exact);
        const double e2 = std::abs(ode_moment_oracle(p, n, t, VolStart::stationary(), 2.5e-3) - exact);
        EXPECT_NEAR(e1 / e2, 16.0, 2.0) << n;
    }
}

TEST(OdeOracle, StepPrecondition) {
    EXPECT_THROW(ode_moment_oracle(table3_params, 2, 0.01, -0.01, InitialYMoments::fixed(0.1), 1e-3), std::invalid_argument);
}

TEST(CrossCorrOde, InitialValues) {
    const auto mu = y_moments_at(table3_params, VolStart::stationary(), 0.0, 4);
    const auto c = cross_corr_ode(table3_params, 0.01, mu, 1e-3);
    EXPECT_EQ(c.y2_y1.values[0], mu[3]);
    EXPECT_EQ(c.y2_y2.values[0], mu[4]);
}

TEST(CrossCorrOde, AutocorrelationComposition) {
    // The closed form divides by 3 mu4(t) - mu2(t)^2 and uses mu2(t) for
    // both times, so the exact ratio agrees with it only once the Y chain
    // has equilibrated; start 30 relaxation times back.
    std::mt19937_64 rng(33);
    for (int i = 0; i < 20; ++i) {
        const auto p = random_params(rng);
        const auto start = VolStart::at(-30.0 / std::abs(p.a), InitialYMoments::fixed(0.1));
        const auto mu = y_moments_at(p, start, 0.0, 4);
        const auto c = cross_corr_ode(p, 0.3, mu, 1e-4);
        for (std::size_t k = 0; k < c.autocorrelation.size(); k += 50) {
            const double tau = c.autocorrelation.grid[k];
            EXPECT_NEAR(c.autocorrelation.values[k], autocorrelation(p, tau, 0.0, start), 1e-7);
        }
    }
}

TEST(Quadrature, SigmaMomentsMatchClosedForm) {
    const auto& p = table3_params;
    for (int k = 1; k <= 4; ++k) {
        EXPECT_LE(rel(sigma_moment_quadrature(p, k), std::pow(p.c, 0.5 * k) * stationary_moment(p, k)), 1e-8) << k;
    }
}

TEST(Quadrature, CdfMonotoneAndBounded) {
    std::vector<double> xs;
    for (double x = 0.01; x < 2.0; x += 0.01) xs.push_back(x);
    const auto cdf = stationary_sigma_cdf_sorted(table3_params, xs);
    for (std::size_t i = 1; i < cdf.size(); ++i) EXPECT_GE(cdf[i], cdf[i - 1]);
    EXPECT_LE(cdf.back(), 1.0);
    EXPECT_NEAR(cdf[50], stationary_sigma_cdf(table3_params, xs[50]), 1e-12);
}

TEST(Quadrature, KsDistanceOfExactQuantiles) {
    // points at the midpoint quantiles have KS distance exactly 1/(2n)
    std::vector<double> cdf;
    const int n = 100;
    for (int i = 0; i < n; ++i) cdf.push_back((i + 0.5) / n);
    EXPECT_NEAR(ks_distance(cdf), 0.5 / n, 1e-15);
}
