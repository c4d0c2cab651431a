// igsv command-line front end.
//
// Exit status: 0 success, 1 stage failure (one-line cause on stderr),
// 2 usage error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "igsv/igsv.hpp"

namespace fs = std::filesystem;
using namespace igsv;

namespace {

struct StageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::string out_dir = ".";
    std::string params = "table3";
    std::optional<double> a, b, c, rho;
    std::string command_line;
};

ModelParams resolve_params(const Globals& g) {
    ModelParams p;
    if (auto preset = preset_params(g.params)) p = *preset;
    else p = load_params(g.params);
    if (g.a) p.a = *g.a;
    if (g.b) p.b = *g.b;
    if (g.c) p.c = *g.c;
    if (g.rho) p.rho = *g.rho;
    p.validate();
    return p;
}

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    return os.str();
}

// Every artifact starts with these '#' lines.
void write_header(std::ostream& os, const Globals& g, const ModelParams& p, const std::string& artifact) {
    os << "# tool=igsv " << version << '\n'
       << "# artifact=" << artifact << '\n'
       << "# command=" << g.command_line << '\n'
       << "# a=" << num(p.a) << "\n# b=" << num(p.b) << "\n# c=" << num(p.c) << "\n# rho=" << num(p.rho) << '\n'
       << "# seed=" << g.seed << '\n';
}

std::ofstream open_artifact(const Globals& g, const ModelParams& p, const std::string& name) {
    fs::create_directories(g.out_dir);
    const auto path = fs::path(g.out_dir) / name;
    std::ofstream out(path);
    if (!out) throw StageError("cannot write " + path.string());
    write_header(out, g, p, name);
    return out;
}

std::vector<double> lag_grid(double tau_max, double step) {
    std::vector<double> grid;
    const auto n = static_cast<long>(std::llround(tau_max / step));
    for (long k = 1; k <= n; ++k) grid.push_back(k * step);
    return grid;
}

std::size_t days_of(double years) { return static_cast<std::size_t>(std::llround(years * trading_days_per_year)); }

// ---- simulate ----

struct SimulateOpts {
    std::size_t paths = 1;
    std::string horizon = "1y";
    std::string dt = "1d";
    int substeps = 32;
    std::string init = "stationary";
    double y0 = -1.0;
    std::string burn_in = "0";
    std::string scheme = "milstein";
};

int run_simulate(const Globals& g, const SimulateOpts& o) {
    const auto p = resolve_params(g);
    SimConfig cfg;
    cfg.n_paths = o.paths;
    cfg.horizon = parse_duration(o.horizon);
    cfg.dt_obs = parse_duration(o.dt);
    cfg.substeps = o.substeps;
    cfg.seed = g.seed;
    cfg.threads = g.threads;
    cfg.scheme = o.scheme == "euler" ? Scheme::EulerFT : Scheme::MilsteinFT;
    cfg.init = o.init == "fixed" ? InitKind::FixedY : o.init == "burnin" ? InitKind::BurnIn : InitKind::Stationary;
    cfg.y0 = o.y0 >= 0.0 ? o.y0 : (p.valid() ? stationary_moment(p, 1) : 0.0);
    cfg.burn_in = parse_duration(o.burn_in);
    const auto ens = simulate(p, cfg);

    auto csv = open_artifact(g, p, "ensemble.csv");
    write_ensemble_csv(csv, ens);
    auto meta = open_artifact(g, p, "ensemble.meta");
    write_ensemble_metadata(meta, ens);
    meta << "version=" << version << '\n';
    auto ret = open_artifact(g, p, "returns.csv");
    write_returns(ret, ens.as_series());
    std::cout << "simulated " << ens.n_paths << " paths x " << ens.n_obs << " observations into " << g.out_dir << '\n';
    return 0;
}

// ---- calibrate ----

struct CalibrateOpts {
    std::string input;
    double win_lo = 1.0, win_hi = 50.0;
    std::size_t lags = 50;
    std::string closure = "published";
};

int run_calibrate(const Globals& g, const CalibrateOpts& o) {
    const auto series = load_series(o.input);
    CalibrationOptions opt;
    opt.window = {o.win_lo, o.win_hi};
    opt.leverage_lags = std::max<std::size_t>(o.lags, static_cast<std::size_t>(std::ceil(o.win_hi)));
    opt.autocorr_lags = o.lags;
    opt.closure = o.closure == "ito" ? LeverageClosure::Ito : LeverageClosure::Published;
    const auto rep = calibrate(series, opt);
    const ModelParams shown = rep.params.value_or(ModelParams{});

    auto kv = open_artifact(g, shown, "calibration.txt");
    kv << "# input=" << o.input << '\n';
    write_report(kv, rep);
    auto csv = open_artifact(g, shown, "calibration.csv");
    write_report_csv(csv, rep);
    if (rep.leverage_curve) {
        auto out = open_artifact(g, shown, "leverage_empirical.csv");
        write_curve_csv(out, *rep.leverage_curve);
    }
    if (rep.autocorrelation_curve) {
        auto out = open_artifact(g, shown, "autocorr_empirical.csv");
        write_curve_csv(out, *rep.autocorrelation_curve);
    }
    if (!rep.ok) throw StageError("calibrate failed at " + rep.failed_stage + ": " + rep.failure);
    write_report(std::cout, rep);
    return 0;
}

// ---- moments ----

struct MomentsOpts {
    std::vector<std::string> t{"1d"};
    std::vector<std::string> t0;
    int order = 4;
    double y0 = -1.0;
};

int run_moments(const Globals& g, const MomentsOpts& o) {
    const auto p = resolve_params(g);
    if (o.order < 1) throw StageError("order must be >= 1");
    const double y0 = o.y0 >= 0.0 ? o.y0 : stationary_moment(p, 1);
    const auto init = InitialYMoments::fixed(y0, o.order + 2);

    std::vector<std::optional<double>> starts;
    if (o.t0.empty()) starts.push_back(std::nullopt);
    for (const auto& s : o.t0) starts.push_back(parse_duration(s));

    auto out = open_artifact(g, p, "moments.csv");
    out << "# y0=" << num(y0) << '\n';
    out << "t_yr,t0_yr,n,x_moment,y_moment\n";
    std::cout << std::setprecision(10);
    for (const auto& t0 : starts) {
        const auto start = t0 ? VolStart::at(*t0, init) : VolStart::stationary();
        MomentLattice lattice(p, start);
        for (const auto& ts : o.t) {
            const double t = parse_duration(ts);
            std::vector<double> mu;
            try {
                mu = y_moments_at(p, start, t, o.order);
            } catch (const DivergenceError&) {
            }
            for (int n = 1; n <= o.order; ++n) {
                double xm = std::numeric_limits<double>::quiet_NaN();
                try {
                    xm = lattice.x_moment(n, t);
                } catch (const DivergenceError&) {
                }
                const double ym = mu.empty() ? std::numeric_limits<double>::quiet_NaN() : mu[n];
                out << num(t) << ',' << (t0 ? num(*t0) : std::string("-inf")) << ',' << n << ',' << num(xm) << ',' << num(ym)
                    << '\n';
                std::cout << "t=" << t << " t0=" << (t0 ? num(*t0) : std::string("-inf")) << " <X^" << n << ">=" << xm
                          << " <Y^" << n << ">=" << ym << '\n';
            }
        }
    }
    return 0;
}

// ---- leverage / autocorr ----

struct CurveOpts {
    std::string tau_max = "0.5y";
    std::string step = "1d";
    std::string input;
    std::size_t lags = 50;
};

int run_leverage(const Globals& g, const CurveOpts& o) {
    const auto p = resolve_params(g);
    const auto grid = lag_grid(parse_duration(o.tau_max), parse_duration(o.step));
    auto out = open_artifact(g, p, "leverage_analytic.csv");
    write_curve_csv(out, leverage_curve(p, grid));
    auto iout = open_artifact(g, p, "leverage_ito.csv");
    write_curve_csv(iout, leverage_ito_curve(p, grid));
    if (!o.input.empty()) {
        const auto series = load_series(o.input);
        const auto emp = empirical_leverage(ReturnsView{series.values, 1, series.size()}, series.dt, o.lags, true);
        auto eout = open_artifact(g, p, "leverage_empirical.csv");
        eout << "# input=" << o.input << '\n' << "lag_yr,leverage,se\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
        for (std::size_t i = 0; i < emp.curve.size(); ++i) eout << emp.curve.grid[i] << ',' << emp.curve.values[i] << ',' << emp.se[i] << '\n';
        const auto fit = fit_leverage(emp.curve);
        std::cout << "fit tau_L=" << fit.tau_L << " yr L0=" << fit.L0 << '\n';
    }
    std::cout << "L(0+)=" << leverage_amplitude(p) << " tau_L=" << derive(p).tau_L << " yr (ito " << -1.0 / p.a << " yr)\n";
    return 0;
}

int run_autocorr(const Globals& g, const CurveOpts& o) {
    const auto p = resolve_params(g);
    const auto grid = lag_grid(parse_duration(o.tau_max), parse_duration(o.step));
    auto out = open_artifact(g, p, "autocorr_analytic.csv");
    write_curve_csv(out, autocorrelation_curve(p, grid));
    if (!o.input.empty()) {
        const auto series = load_series(o.input);
        const auto emp = empirical_autocorrelation(ReturnsView{series.values, 1, series.size()}, series.dt, o.lags);
        auto eout = open_artifact(g, p, "autocorr_empirical.csv");
        eout << "# input=" << o.input << '\n' << "lag_yr,autocorrelation,se\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
        for (std::size_t i = 0; i < emp.curve.size(); ++i) eout << emp.curve.grid[i] << ',' << emp.curve.values[i] << ',' << emp.se[i] << '\n';
    }
    const auto k = autocorrelation_coefficients(p);
    std::cout << "A(0+)=" << (k.N1 + k.N2) / k.D << " tau_A1=" << k.tau_A1 << " yr tau_A2=" << k.tau_A2 << " yr\n";
    return 0;
}

// ---- validate ----

struct Check {
    std::string name;
    double error;
    double tol;
};

int run_validate(const Globals& g) {
    const auto p = resolve_params(g);
    std::vector<Check> checks;
    auto rel = [](double x, double ref) { return std::abs(x - ref) / std::max(std::abs(ref), 1e-300); };

    {
        const auto init = InitialYMoments::fixed(stationary_moment(p, 1));
        double worst_h = 0.0, worst_ode = 0.0;
        for (double t : {one_day, 5 * one_day, 25 * one_day})
            for (double t0 : {-5 * one_day, -25 * one_day}) {
                MomentLattice lattice(p, VolStart::at(t0, init));
                for (int n : {2, 3}) worst_h = std::max(worst_h, rel(x_moment_from_h(p, n, t, t0, init), lattice.x_moment(n, t)));
                for (int n : {2, 3, 4})
                    worst_ode = std::max(worst_ode, rel(ode_moment_oracle(p, n, t, VolStart::at(t0, init), 1e-5), lattice.x_moment(n, t)));
            }
        checks.push_back({"moment lattice vs coefficient expansion", worst_h, 1e-9});
        checks.push_back({"moment lattice vs RK4 lattice", worst_ode, 1e-8});
    }
    if (p.F(3) < 0.0) {
        const double step = std::min(1e-4, 0.04 / p.c);
        const auto L = volterra_leverage(p, stationary_moment(p, 2), stationary_moment(p, 3), {step, 0.5});
        double worst = 0.0;
        for (std::size_t i = 1; i < L.size(); ++i) worst = std::max(worst, rel(L.values[i], leverage(p, L.grid[i])));
        checks.push_back({"Volterra leverage vs closed form", worst, 1e-4});
    }
    {
        const auto start = VolStart::at(-0.1, InitialYMoments::fixed(stationary_moment(p, 1)));
        const auto mu = y_moments_at(p, start, 0.0, 4);
        const auto ode = cross_corr_ode(p, 0.3, mu, 1e-4);
        double worst = 0.0;
        for (std::size_t k = 0; k < ode.y2_y1.size(); ++k) {
            worst = std::max(worst, rel(cross_corr_y(p, 1, ode.y2_y1.grid[k], 0.0, start), ode.y2_y1.values[k]));
            worst = std::max(worst, rel(cross_corr_y(p, 2, ode.y2_y2.grid[k], 0.0, start), ode.y2_y2.values[k]));
        }
        checks.push_back({"lagged Y cross-correlations vs ODE", worst, 1e-8});
    }
    if (p.F(3) < 0.0 && 2.0 * std::abs(p.a) > p.c) {
        const auto q = recover_params(exact_estimators(p), exact_leverage_fit(p));
        const double worst = std::max({rel(q.a, p.a), rel(q.b, p.b), rel(q.c, p.c), std::abs(q.rho - p.rho)});
        checks.push_back({"estimator round-trip", worst, 1e-10});
    }
    checks.push_back({"stationary law normalization", std::abs(sigma_moment_quadrature(p, 0) - 1.0), 1e-8});

    auto out = open_artifact(g, p, "validate.csv");
    out << "check,max_error,tolerance,status\n";
    int failures = 0;
    for (const auto& c : checks) {
        const bool ok = c.error <= c.tol;
        failures += !ok;
        std::printf("%s  %-42s max error %.3e (tol %.0e)\n", ok ? "PASS" : "FAIL", c.name.c_str(), c.error, c.tol);
        out << c.name << ',' << num(c.error) << ',' << num(c.tol) << ',' << (ok ? "pass" : "fail") << '\n';
    }
    if (failures) throw StageError(std::to_string(failures) + " oracle check(s) outside tolerance");
    return 0;
}

// ---- reproduce ----

struct ReproduceOpts {
    std::string input;
    std::size_t paths = 200;
    std::string horizon = "1400d";
};

int run_reproduce(const Globals& g, const ReproduceOpts& o) {
    const auto p = resolve_params(g);
    std::optional<CalibrationReport> rep;
    if (o.input.empty()) {
        std::cout << "skip: Table I needs an input return or price series (--input); Tables II/III use published values\n";
    } else {
        rep = calibrate(load_series(o.input));
        auto out = open_artifact(g, p, "table1.txt");
        out << "# input=" << o.input << '\n';
        write_report(out, *rep);
        if (!rep->ok) throw StageError("calibrate failed at " + rep->failed_stage + ": " + rep->failure);
    }

    {
        SampleEstimators e;
        e.A = 0.1457, e.B = 0.0295, e.C = 0.0107;
        e.D = e.B / (2.0 * (e.A * e.A - e.B));
        LeverageFit f;
        f.tau_L = 0.0864, f.L0 = -30.9515;
        auto out = open_artifact(g, p, "table2.csv");
        out << "source,tau_L_yr,L0\n";
        out << "published," << num(f.tau_L) << ',' << num(f.L0) << '\n';
        const auto exact = exact_leverage_fit(p);
        out << "params," << num(exact.tau_L) << ',' << num(exact.L0) << '\n';
        if (rep) out << "input," << num(rep->fit->tau_L) << ',' << num(rep->fit->L0) << '\n';

        const auto q = recover_params(e, f);
        auto t3 = open_artifact(g, p, "table3.csv");
        t3 << "source,a,b,c,rho,nu,abs_a_over_c\n";
        auto row = [&](const char* src, const ModelParams& m) {
            t3 << src << ',' << num(m.a) << ',' << num(m.b) << ',' << num(m.c) << ',' << num(m.rho) << ','
               << num(1.0 - 2.0 * m.a / m.c) << ',' << num(std::abs(m.a) / m.c) << '\n';
        };
        row("recovered_from_published_tables", q);
        if (rep) row("recovered_from_input", *rep->params);
    }

    {
        const auto& f1 = fig1_params;
        const auto init = InitialYMoments::fixed(stationary_moment(f1, 1));
        auto out = open_artifact(g, f1, "fig1.csv");
        out << "# t_yr=" << num(one_day) << " y0=" << num(stationary_moment(f1, 1)) << '\n';
        out << "t0_yr,x2,x3\n";
        MomentLattice* none = nullptr;
        (void)none;
        for (int k = 0; k <= 100; ++k) {
            const double t0 = -0.02 * k;
            MomentLattice lattice(f1, VolStart::at(t0, init));
            out << num(t0) << ',' << num(lattice.x_moment(2, one_day)) << ',' << num(lattice.x_moment(3, one_day)) << '\n';
        }
    }

    const auto grid = lag_grid(0.5, one_day);
    {
        auto out = open_artifact(g, p, "fig2.csv");
        write_curve_csv(out, leverage_curve(p, grid));
        if (rep) {
            auto eout = open_artifact(g, p, "fig2_input.csv");
            write_curve_csv(eout, *rep->leverage_curve);
        }
    }
    {
        auto out = open_artifact(g, p, "fig3.csv");
        write_curve_csv(out, autocorrelation_curve(p, grid));
        if (rep) {
            auto eout = open_artifact(g, p, "fig3_input.csv");
            write_curve_csv(eout, *rep->autocorrelation_curve);
        }
    }
    {
        SimConfig cfg;
        cfg.n_paths = o.paths;
        cfg.horizon = parse_duration(o.horizon);
        cfg.seed = g.seed;
        cfg.threads = g.threads;
        const auto ens = simulate(p, cfg);
        auto summary = open_artifact(g, p, "fig45_moments.csv");
        summary << "days,n,skewness,excess_kurtosis,exact_skewness,exact_excess_kurtosis\n";
        for (std::size_t k : {1, 3, 7, 14}) {
            const auto agg = aggregate(ens, k);
            // standardized returns, as in a linear/log-linear overlay
            const auto m = sample_moments(agg.returns);
            std::vector<double> z(agg.returns.size());
            for (std::size_t i = 0; i < z.size(); ++i) z[i] = (agg.returns[i] - m.mean) / std::sqrt(m.variance);
            auto out = open_artifact(g, p, "fig45_pdf_" + std::to_string(k) + "d.csv");
            out << "# days=" << k << " paths=" << o.paths << " horizon_days=" << days_of(cfg.horizon) << " standardized=1\n";
            write_pdf(out, empirical_pdf(z));
            const auto exact = skewness_kurtosis(p, k * one_day, VolStart::stationary());
            summary << k << ',' << z.size() << ',' << num(m.skewness) << ',' << num(m.excess_kurtosis) << ',' << num(exact.skewness)
                    << ',' << num(exact.excess_kurtosis) << '\n';
        }
    }
    std::cout << "reproduction data written to " << g.out_dir << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Linear stochastic volatility toolkit: simulation, closed forms, oracles, calibration"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);

    Globals g;
    for (int i = 0; i < argc; ++i) g.command_line += (i ? " " : "") + std::string(i ? argv[i] : "igsv");
    app.add_option("--seed", g.seed, "master RNG seed")->capture_default_str();
    app.add_option("--threads", g.threads, "simulation worker threads (results do not depend on it)")->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "directory for artifacts")->capture_default_str();
    app.add_option("--params", g.params, "preset (table3, fig1) or key=value file")->capture_default_str();
    app.add_option("--a", g.a, "override a (1/yr)");
    app.add_option("--b", g.b, "override b (1/yr)");
    app.add_option("--c", g.c, "override c (1/yr)");
    app.add_option("--rho", g.rho, "override rho");

    SimulateOpts so;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo return paths");
    sim->add_option("--paths", so.paths)->capture_default_str();
    sim->add_option("--horizon", so.horizon, "duration, e.g. 250d or 1y")->capture_default_str();
    sim->add_option("--dt", so.dt, "observation spacing")->capture_default_str();
    sim->add_option("--substeps", so.substeps)->capture_default_str()->check(CLI::PositiveNumber);
    sim->add_option("--init", so.init)->capture_default_str()->check(CLI::IsMember({"stationary", "fixed", "burnin"}));
    sim->add_option("--y0", so.y0, "starting Y for fixed/burnin (default: stationary mean)");
    sim->add_option("--burn-in", so.burn_in)->capture_default_str();
    sim->add_option("--scheme", so.scheme)->capture_default_str()->check(CLI::IsMember({"milstein", "euler"}));

    CalibrateOpts co;
    std::string window = "1:50";
    auto* cal = app.add_subcommand("calibrate", "estimate parameters from a return or price series");
    cal->add_option("--input", co.input, "prices (date,close) or returns (index,delta_x) CSV")->required();
    cal->add_option("--window", window, "leverage fit window in days, lo:hi")->capture_default_str();
    cal->add_option("--lags", co.lags, "empirical curve lags (days)")->capture_default_str();
    cal->add_option("--closure", co.closure, "leverage decay time used for recovery: published 2/(2|a|-c), ito 1/|a|")
        ->capture_default_str()
        ->check(CLI::IsMember({"published", "ito"}));

    MomentsOpts mo;
    auto* mom = app.add_subcommand("moments", "tabulate <X^n> and <Y^n>");
    mom->add_option("--t", mo.t, "time(s)")->capture_default_str();
    mom->add_option("--t0", mo.t0, "volatility start time(s) <= 0; omitted = stationary");
    mom->add_option("--order", mo.order)->capture_default_str();
    mom->add_option("--y0", mo.y0, "fixed Y at t0 (default: stationary mean)");

    CurveOpts lo, ao;
    auto* lev = app.add_subcommand("leverage", "leverage curve, analytic and optionally empirical");
    auto* aut = app.add_subcommand("autocorr", "squared-return autocorrelation, analytic and optionally empirical");
    for (auto [cmd, opts] : {std::pair{lev, &lo}, std::pair{aut, &ao}}) {
        cmd->add_option("--tau-max", opts->tau_max)->capture_default_str();
        cmd->add_option("--step", opts->step)->capture_default_str();
        cmd->add_option("--input", opts->input, "series for the empirical curve");
        cmd->add_option("--lags", opts->lags, "empirical lags (observations)")->capture_default_str();
    }

    auto* val = app.add_subcommand("validate", "run the numerical oracle suites");

    ReproduceOpts ro;
    auto* rep = app.add_subcommand("reproduce", "table and figure data");
    rep->add_option("--input", ro.input, "series for the data-dependent table");
    rep->add_option("--paths", ro.paths, "simulated paths for the PDF data")->capture_default_str();
    rep->add_option("--horizon", ro.horizon, "simulated horizon per path")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (cal->parsed()) {
            const auto colon = window.find(':');
            if (colon == std::string::npos) throw CLI::ValidationError("--window", "expected lo:hi");
            co.win_lo = std::stod(window.substr(0, colon));
            co.win_hi = std::stod(window.substr(colon + 1));
            return run_calibrate(g, co);
        }
        if (sim->parsed()) return run_simulate(g, so);
        if (mom->parsed()) return run_moments(g, mo);
        if (lev->parsed()) return run_leverage(g, lo);
        if (aut->parsed()) return run_autocorr(g, ao);
        if (val->parsed()) return run_validate(g);
        if (rep->parsed()) return run_reproduce(g, ro);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "igsv: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        // malformed durations and parameter violations
        std::cerr << "igsv: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "igsv: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
