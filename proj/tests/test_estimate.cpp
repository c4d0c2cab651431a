#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "igsv/estimate.hpp"
#include "igsv/simulate.hpp"
#include "published_tables.hpp"

using namespace igsv;
using namespace igsv::testing;

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

Curve exponential_curve(double L0, double tau_L) {
    Curve c;
    for (int d = 1; d <= 60; ++d) {
        c.grid.push_back(d * one_day);
        c.values.push_back(L0 * std::exp(-d * one_day / tau_L));
    }
    return c;
}

std::vector<double> gaussian(std::size_t n, std::uint64_t seed, double sd) {
    auto rng = substream(seed, 0);
    std::normal_distribution<double> z(0.0, sd);
    std::vector<double> x(n);
    for (auto& v : x) v = z(rng);
    return x;
}

}  // namespace

TEST(Estimators, Table1Ratio) {
    const auto e = table1();
    EXPECT_NEAR(e.D, -1.7832, 5e-5);
    EXPECT_LE(rel(-e.D, 1.7895), 0.004);
}

TEST(Estimators, DegenerateInputs) {
    EXPECT_THROW(sample_estimators(ReturnSeries{std::vector<double>(200, 0.0)}), DataError);
    EXPECT_THROW(sample_estimators(ReturnSeries{std::vector<double>(50, 0.01)}), DataError);
    // constant magnitude: A^2 = B up to the folded-normal constant, not singular
    std::vector<double> alt(200);
    for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 ? 0.01 : -0.01;
    EXPECT_NO_THROW(sample_estimators(ReturnSeries{alt}));
}

TEST(Estimators, ExactIdentities) {
    std::mt19937_64 rng(41);
    for (int i = 0; i < 100; ++i) {
        const auto p = random_params(rng);
        const auto e = exact_estimators(p);
        EXPECT_LE(rel(e.A, std::sqrt(p.c) * stationary_moment(p, 1)), 1e-12);
        EXPECT_LE(rel(e.B, p.c * stationary_moment(p, 2)), 1e-12);
        EXPECT_LE(rel(e.C, std::pow(p.c, 1.5) * stationary_moment(p, 3)), 1e-12);
        EXPECT_LE(rel(e.D, p.a / p.c), 1e-12);
    }
}

TEST(Estimators, ForwardValuesAtTable3) {
    EXPECT_NEAR(exact_estimators(table3_params).A, 0.1609, 5e-5);
}

TEST(Estimators, GaussianDataHaveSmallGap) {
    const auto x = gaussian(200000, 1, 0.01);
    const auto e = sample_estimators(ReturnSeries{x});
    EXPECT_LT(std::abs(e.gap_z), 4.0);
}

TEST(Recover, Table3FromPublishedTables) {
    const auto& t3 = table3_published;
    const auto p = recover_params(table1(), table2());
    EXPECT_LE(rel(p.a, t3.a), 0.01);
    EXPECT_LE(rel(p.c, t3.c), 0.01);
    // b and rho land 1.1% and 1.5% off: D = B / (2 (A^2 - B)) magnifies the
    // rounding of A and B. The published values sit inside the range the
    // rounding allows.
    const auto box = recovery_box();
    EXPECT_TRUE(box.a.contains(t3.a));
    EXPECT_TRUE(box.b.contains(t3.b)) << box.b.lo << " " << box.b.hi;
    EXPECT_TRUE(box.c.contains(t3.c));
    EXPECT_TRUE(box.rho.contains(t3.rho)) << box.rho.lo << " " << box.rho.hi;
    EXPECT_GT(rel(p.b, t3.b), 0.01);
}

TEST(Recover, Table3FromQuotedRatio) {
    // the same tables with D = -|a|/c as quoted from unrounded inputs
    auto e = table1();
    e.D = -quoted_abs_a_over_c;
    const auto p = recover_params(e, table2());
    const auto& t3 = table3_published;
    for (auto [x, ref] : {std::pair{p.a, t3.a}, {p.b, t3.b}, {p.c, t3.c}, {p.rho, t3.rho}}) EXPECT_LE(rel(x, ref), 0.01) << ref;
}

TEST(Recover, ExactRoundTrip) {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 100; ++i) {
        const auto p = random_params(rng);
        const auto q = recover_params(exact_estimators(p), exact_leverage_fit(p));
        EXPECT_LE(rel(q.a, p.a), 1e-10);
        EXPECT_LE(rel(q.b, p.b), 1e-10);
        EXPECT_LE(rel(q.c, p.c), 1e-10);
        EXPECT_LE(std::abs(q.rho - p.rho), 1e-10 * std::max(1e-3, std::abs(p.rho)));
    }
}

TEST(Recover, ExactRoundTripItoClosure) {
    std::mt19937_64 rng(43);
    for (int i = 0; i < 100; ++i) {
        const auto p = random_params(rng);
        LeverageFit fit;
        fit.tau_L = -1.0 / p.a;
        fit.L0 = leverage_amplitude(p);
        const auto q = recover_params(exact_estimators(p), fit, LeverageClosure::Ito);
        EXPECT_LE(rel(q.a, p.a), 1e-10);
        EXPECT_LE(rel(q.b, p.b), 1e-10);
        EXPECT_LE(rel(q.c, p.c), 1e-10);
        EXPECT_LE(std::abs(q.rho - p.rho), 1e-10 * std::max(1e-3, std::abs(p.rho)));
    }
}

TEST(Recover, Preconditions) {
    auto e = table1();
    e.D = -0.4;
    EXPECT_THROW(recover_params(e, table2()), RecoveryError);
    auto f = table2();
    f.L0 = -1000.0;
    EXPECT_THROW(recover_params(table1(), f), RecoveryError);
    f.tau_L = -1.0;
    EXPECT_THROW(recover_params(table1(), f), RecoveryError);
}

TEST(Recover, DependsOnFitOnlyThroughTwoNumbers) {
    auto f = table2();
    const auto p1 = recover_params(table1(), f);
    f.rss = 123.0;
    f.points = 7;
    f.window = {3, 30};
    EXPECT_EQ(recover_params(table1(), f), p1);
}

TEST(Fit, RecoversNoiselessExponential) {
    const auto fit = fit_leverage(exponential_curve(-30.9515, 0.0864));
    EXPECT_NEAR(fit.tau_L, 0.0864, 1e-10 * 0.0864);
    EXPECT_NEAR(fit.L0, -30.9515, 1e-10 * 30.9515);
    EXPECT_EQ(fit.points, 50u);
    EXPECT_FALSE(fit.at_boundary);
}

TEST(Fit, LinearInAmplitude) {
    const auto f1 = fit_leverage(exponential_curve(-30.9515, 0.0864));
    const auto f2 = fit_leverage(exponential_curve(-61.903, 0.0864));
    EXPECT_NEAR(f2.L0, 2.0 * f1.L0, 1e-9);
    EXPECT_NEAR(f2.tau_L, f1.tau_L, 1e-12);
}

TEST(Fit, FlatCurveHitsBoundary) {
    Curve c;
    for (int d = 1; d <= 50; ++d) c.grid.push_back(d * one_day), c.values.push_back(-1.0);
    EXPECT_TRUE(fit_leverage(c).at_boundary);
}

TEST(Fit, TooFewPoints) {
    Curve c;
    for (int d = 1; d <= 4; ++d) c.grid.push_back(d * one_day), c.values.push_back(-1.0);
    EXPECT_THROW(fit_leverage(c), std::invalid_argument);
}

TEST(Empirical, AutocorrelationLagZeroIsOne) {
    const auto x = gaussian(5000, 2, 0.01);
    const auto a = empirical_autocorrelation(ReturnSeries{x}, 10);
    EXPECT_EQ(a.values[0], 1.0);
}

TEST(Empirical, GaussianNoClustering) {
    const auto x = gaussian(200000, 3, 0.01);
    const auto a = empirical_autocorrelation(ReturnsView{x, 1, x.size()}, one_day, 20);
    for (std::size_t k = 1; k < a.curve.size(); ++k) EXPECT_NEAR(a.curve.values[k], 0.0, 3.5 * a.se[k]) << k;
}

TEST(Empirical, InsufficientData) {
    const auto x = gaussian(50, 4, 0.01);
    EXPECT_THROW(empirical_leverage(ReturnSeries{x}, 30), DataError);
    EXPECT_THROW(empirical_autocorrelation(ReturnSeries{x}, 30), DataError);
}

// Standard errors only mean something when the cubic moments have finite
// variance (nu > 6); at Table III nu = 4.58 and the check is qualitative.
TEST(Empirical, LeverageOnSimulatedData) {
    const ModelParams light{-16.06, 0.8627, 2.92, -0.5};
    ASSERT_GT(derive(light).nu, 6.0);
    SimConfig cfg;
    cfg.n_paths = 400;
    cfg.horizon = 1000 * one_day;
    cfg.seed = 21;
    const auto L = empirical_leverage(simulate(light, cfg).view(), one_day, 20, true);
    for (std::size_t i = 0; i < L.curve.size(); ++i) {
        const double tau = L.curve.grid[i];
        if (tau < 0.0)
            EXPECT_NEAR(L.curve.values[i], 0.0, 3.5 * L.se[i]) << tau;
        else
            EXPECT_NEAR(L.curve.values[i], leverage_ito(light, tau), 3.5 * L.se[i]) << tau;
    }

    auto p0 = light;
    p0.rho = 0.0;
    const auto L0 = empirical_leverage(simulate(p0, cfg).view(), one_day, 20);
    for (std::size_t i = 0; i < L0.curve.size(); ++i) EXPECT_NEAR(L0.curve.values[i], 0.0, 3.5 * L0.se[i]);

    const auto T = empirical_leverage(simulate(table3_params, cfg).view(), one_day, 5);
    double mean = 0.0;
    for (double v : T.curve.values) mean += v / static_cast<double>(T.curve.size());
    EXPECT_LT(mean, 0.0);
}

// Simulated paths decay at 1/|a|, not at the published 2/(2|a| - c).
TEST(Empirical, LeverageDecayTimeOnSimulatedData) {
    const ModelParams light{-16.06, 0.8627, 2.92, -0.5};
    SimConfig cfg;
    cfg.n_paths = 1;
    cfg.horizon = 2000000 * one_day;
    cfg.seed = 5;
    const auto fit = fit_leverage(empirical_leverage(simulate(light, cfg).as_series(), 50));
    const double ito = -1.0 / light.a, published = derive(light).tau_L;
    EXPECT_LE(rel(fit.tau_L, ito), 0.06);
    EXPECT_LT(std::abs(fit.tau_L - ito), std::abs(fit.tau_L - published));
    EXPECT_LE(rel(fit.L0, leverage_amplitude(light)), 0.1);
}

TEST(Calibrate, GaussianInputAborts) {
    const auto x = gaussian(200000, 5, 0.01);
    const auto rep = calibrate(ReturnSeries{x});
    EXPECT_FALSE(rep.ok);
    EXPECT_EQ(rep.failed_stage, "sample_estimators");
    EXPECT_NE(rep.failure.find("near-singular"), std::string::npos);
    EXPECT_TRUE(rep.estimators.has_value());
}

TEST(Calibrate, ReportSerialization) {
    CalibrationReport rep;
    rep.ok = true;
    rep.estimators = table1();
    rep.fit = table2();
    rep.params = table3_params;
    rep.derived = derive(table3_params);
    Diagnostics d;
    d.consistency = check_consistency(table3_params);
    d.nu = rep.derived->nu;
    d.n_star = rep.derived->n_star;
    d.beta_range = rep.derived->beta_range;
    d.tau_sigma = rep.derived->tau_sigma;
    rep.diagnostics = d;
    std::ostringstream kv, csv;
    write_report(kv, rep);
    write_report_csv(csv, rep);
    EXPECT_NE(kv.str().find("status=ok"), std::string::npos);
    EXPECT_NE(kv.str().find("diagnostics.tail_index_range=4 < beta <= 5"), std::string::npos);
    EXPECT_NE(kv.str().find("derived.tau_sigma_days=15.5"), std::string::npos);
    EXPECT_NE(csv.str().find("params,a,-16.0608"), std::string::npos);
}
