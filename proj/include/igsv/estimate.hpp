#pragma once

// Calibration from a daily return series: moment estimators A, B, C, D,
// empirical leverage and squared-return autocorrelation, a two-parameter
// exponential fit of the leverage, and closed-form parameter recovery.

#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "igsv/analytics.hpp"
#include "igsv/curve.hpp"
#include "igsv/data.hpp"
#include "igsv/model.hpp"
#include "igsv/stats.hpp"

namespace igsv {

class RecoveryError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct SampleEstimators {
    double A = 0.0;  // 1/yr^(1/2)
    double B = 0.0;  // 1/yr
    double C = 0.0;  // 1/yr^(3/2)
    double D = 0.0;  // a / c
    double dt = one_day;
    std::size_t n_obs = 0;
    // (A^2 - B) divided by its batch-means standard error; small values
    // mean D is statistically undetermined (constant-volatility data).
    double gap_z = std::numeric_limits<double>::infinity();
};

namespace detail {

inline SampleEstimators estimators_from_means(double abs1, double sq, double abs3, double dt) {
    SampleEstimators e;
    e.dt = dt;
    e.A = std::sqrt(std::numbers::pi / (2.0 * dt)) * abs1;
    e.B = sq / dt;
    e.C = std::sqrt(std::numbers::pi / std::pow(2.0 * dt, 3)) * abs3;
    e.D = e.B / (2.0 * (e.A * e.A - e.B));
    return e;
}

}  // namespace detail

inline SampleEstimators sample_estimators(const ReturnSeries& r, std::size_t batches = default_batches) {
    if (r.size() < 100) throw DataError("sample_estimators: need at least 100 returns");
    if (!(r.dt > 0.0)) throw DataError("sample_estimators: dt must be positive");
    double abs1 = 0.0, sq = 0.0, abs3 = 0.0;
    for (double x : r.values) {
        const double ax = std::abs(x);
        abs1 += ax;
        sq += x * x;
        abs3 += ax * ax * ax;
    }
    const double n = static_cast<double>(r.size());
    if (sq == 0.0) throw DataError("sample_estimators: degenerate series (all returns zero)");
    auto e = detail::estimators_from_means(abs1 / n, sq / n, abs3 / n, r.dt);
    e.n_obs = r.size();
    if (std::abs(e.A * e.A - e.B) <= 1e-12 * e.B) {
        throw DataError("sample_estimators: A^2 equals B, the ratio D = a/c is undefined");
    }

    // batch-means spread of the gap A^2 - B
    const std::size_t len = r.size() / batches;
    if (len >= 2) {
        std::vector<double> gaps;
        for (std::size_t b = 0; b < batches; ++b) {
            double s1 = 0.0, s2 = 0.0;
            for (std::size_t i = b * len; i < (b + 1) * len; ++i) {
                s1 += std::abs(r.values[i]);
                s2 += r.values[i] * r.values[i];
            }
            const auto eb = detail::estimators_from_means(s1 / len, s2 / len, 0.0, r.dt);
            gaps.push_back(eb.A * eb.A - eb.B);
        }
        const auto est = detail::batch_estimate(e.A * e.A - e.B, gaps);
        if (est.se > 0.0) e.gap_z = est.value / est.se;
    }
    return e;
}

// Exact estimator values implied by the model under the stationary law.
inline SampleEstimators exact_estimators(const ModelParams& p, double dt = one_day) {
    p.validate();
    const double a = p.a, b = p.b, c = p.c;
    SampleEstimators e;
    e.dt = dt;
    e.A = -std::sqrt(c) * b / a;
    e.B = c * 2.0 * b * b / ((2.0 * a + c) * a);
    e.C = -2.0 * b * b * b * std::pow(c, 1.5) / ((a + c) * (2.0 * a + c) * a);
    e.D = e.B / (2.0 * (e.A * e.A - e.B));
    return e;
}

struct EmpiricalCurve {
    Curve curve;
    std::vector<double> se;
};

// L(tau) = mean[x_t x_{t+tau}^2] / mean[x^2]^2 for tau = 1..tau_max
// observations (and -tau_max..-1 when requested), on a lag grid in yr.
inline EmpiricalCurve empirical_leverage(const ReturnsView& v, double dt, std::size_t tau_max, bool negative_lags = false) {
    if (tau_max < 1 || v.n_obs <= 2 * tau_max) throw DataError("empirical_leverage: insufficient data for the requested lags");
    EmpiricalCurve out;
    out.curve.kind = CurveKind::Leverage;
    const long lo = negative_lags ? -static_cast<long>(tau_max) : 1;
    for (long k = lo; k <= static_cast<long>(tau_max); ++k) {
        if (k == 0) continue;
        const auto e = leverage_estimate(v, k);
        out.curve.grid.push_back(static_cast<double>(k) * dt);
        out.curve.values.push_back(e.value);
        out.se.push_back(e.se);
    }
    return out;
}

inline Curve empirical_leverage(const ReturnSeries& r, std::size_t tau_max, bool negative_lags = false) {
    return empirical_leverage(ReturnsView{r.values, 1, r.size()}, r.dt, tau_max, negative_lags).curve;
}

// Pearson correlation of squared returns at lags 0..tau_max.
inline EmpiricalCurve empirical_autocorrelation(const ReturnsView& v, double dt, std::size_t tau_max) {
    if (v.n_obs <= 2 * tau_max + 2) throw DataError("empirical_autocorrelation: insufficient data for the requested lags");
    EmpiricalCurve out;
    out.curve.kind = CurveKind::Autocorrelation;
    for (std::size_t k = 0; k <= tau_max; ++k) {
        const auto e = squared_autocorrelation_estimate(v, k);
        out.curve.grid.push_back(static_cast<double>(k) * dt);
        out.curve.values.push_back(e.value);
        out.se.push_back(e.se);
    }
    return out;
}

inline Curve empirical_autocorrelation(const ReturnSeries& r, std::size_t tau_max) {
    return empirical_autocorrelation(ReturnsView{r.values, 1, r.size()}, r.dt, tau_max).curve;
}

struct LeverageFit {
    double tau_L = 0.0;  // yr
    double L0 = 0.0;
    double rss = 0.0;
    std::pair<double, double> window{1.0, 50.0};  // trading days
    std::size_t points = 0;
    bool at_boundary = false;  // tau_L pinned to the search bracket
};

struct FitWindow {
    double tau_min_days = 1.0;
    double tau_max_days = 50.0;
};

// Least squares of L0 exp(-tau / tau_L) against the curve inside the window.
// L0 is profiled out in closed form; tau_L by golden section on
// [dt/2, 2 yr] in log scale, polished by bisection on the gradient sign.
inline LeverageFit fit_leverage(const Curve& curve, const FitWindow& window = {}) {
    curve.check();
    std::vector<double> xs, ys;
    const double lo = window.tau_min_days * one_day * (1.0 - 1e-9);
    const double hi = window.tau_max_days * one_day * (1.0 + 1e-9);
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (curve.grid[i] >= lo && curve.grid[i] <= hi) {
            xs.push_back(curve.grid[i]);
            ys.push_back(curve.values[i]);
        }
    }
    if (xs.size() < 5) throw std::invalid_argument("fit_leverage: fewer than 5 curve points inside the window");

    struct Sums {
        double see = 0, sye = 0, syy = 0, dsee = 0, dsye = 0;
    };
    auto sums = [&](double tau) {
        Sums s;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double e = std::exp(-xs[i] / tau);
            s.see += e * e;
            s.sye += ys[i] * e;
            s.syy += ys[i] * ys[i];
            const double w = xs[i] / (tau * tau);
            s.dsee += 2.0 * e * e * w;
            s.dsye += ys[i] * e * w;
        }
        return s;
    };
    auto rss = [&](double tau) {
        const auto s = sums(tau);
        return s.syy - s.sye * s.sye / s.see;
    };

    const double tau_lo = 0.5 * one_day, tau_hi = 2.0;
    double u0 = std::log(tau_lo), u1 = std::log(tau_hi);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double ua = u1 - g * (u1 - u0), ub = u0 + g * (u1 - u0);
    double fa = rss(std::exp(ua)), fb = rss(std::exp(ub));
    for (int it = 0; it < 200 && (u1 - u0) > 1e-12; ++it) {
        if (fa <= fb) {
            u1 = ub, ub = ua, fb = fa;
            ua = u1 - g * (u1 - u0);
            fa = rss(std::exp(ua));
        } else {
            u0 = ua, ua = ub, fa = fb;
            ub = u0 + g * (u1 - u0);
            fb = rss(std::exp(ub));
        }
    }
    double tau = std::exp(0.5 * (u0 + u1));

    // Stationarity of rss in tau: 2 S_ye' S_ee - S_ye S_ee' = 0.
    auto grad = [&](double t) {
        const auto s = sums(t);
        return 2.0 * s.dsye * s.see - s.sye * s.dsee;
    };
    double blo = tau * (1.0 - 1e-5), bhi = tau * (1.0 + 1e-5);
    if (blo > tau_lo && bhi < tau_hi) {
        double glo = grad(blo), ghi = grad(bhi);
        if (glo * ghi < 0.0) {
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (blo + bhi);
                if (mid <= blo || mid >= bhi) break;
                const double gm = grad(mid);
                if (gm == 0.0) {
                    blo = bhi = mid;
                    break;
                }
                if ((gm < 0.0) == (glo < 0.0)) blo = mid, glo = gm;
                else bhi = mid;
            }
            // rss itself cancels to ~sqrt(eps) here, so the root of the
            // gradient is taken as is
            tau = 0.5 * (blo + bhi);
        }
    }

    LeverageFit fit;
    const auto s = sums(tau);
    fit.tau_L = tau;
    fit.L0 = s.sye / s.see;
    fit.rss = s.syy - s.sye * s.sye / s.see;
    fit.window = {window.tau_min_days, window.tau_max_days};
    fit.points = xs.size();
    fit.at_boundary = tau < tau_lo * (1.0 + 1e-6) || tau > tau_hi * (1.0 - 1e-6);
    return fit;
}

// (tau_L, L0) of the stationary leverage implied by the model.
inline LeverageFit exact_leverage_fit(const ModelParams& p) {
    LeverageFit fit;
    fit.tau_L = derive(p).tau_L;
    fit.L0 = leverage_amplitude(p);
    return fit;
}

// c = -1 / (tau_L (D + 1/2)), a = c D, b = -(a + c) C / (sqrt(c) B),
// rho = -b (a + c) / (a (2a + c)) L0.
// Which leverage decay time links tau_L to (a, c): Published is
// tau_L = 2/(2|a| - c), Ito is tau_L = 1/|a| (see leverage_ito).
enum class LeverageClosure { Published, Ito };

inline const char* to_string(LeverageClosure k) { return k == LeverageClosure::Ito ? "ito" : "published"; }

inline ModelParams recover_params(const SampleEstimators& est, const LeverageFit& fit,
                                  LeverageClosure closure = LeverageClosure::Published) {
    if (!(fit.tau_L > 0.0)) throw RecoveryError("leverage time tau_L must be positive");
    if (!(est.B > 0.0)) throw RecoveryError("estimator B must be positive");
    const double shift = closure == LeverageClosure::Ito ? 0.0 : 0.5;
    if (!(est.D < -0.5)) {
        std::ostringstream os;
        os << "D = " << est.D << " >= -1/2: the stationary second moment of Y diverges";
        throw RecoveryError(os.str());
    }
    ModelParams p;
    p.c = -1.0 / (fit.tau_L * (est.D + shift));
    p.a = p.c * est.D;
    p.b = -(p.a + p.c) / std::sqrt(p.c) * est.C / est.B;
    p.rho = -p.b * (p.a + p.c) / (p.a * (2.0 * p.a + p.c)) * fit.L0;
    if (!(p.b > 0.0)) {
        std::ostringstream os;
        os << "b = -(a + c) C / (sqrt(c) B) = " << p.b << " is not positive";
        throw RecoveryError(os.str());
    }
    if (!(p.rho >= -1.0 && p.rho <= 1.0)) {
        std::ostringstream os;
        os << "rho = -b (a + c) / (a (2a + c)) L0 = " << p.rho << " lies outside [-1, 1]";
        throw RecoveryError(os.str());
    }
    return p;
}

struct CalibrationOptions {
    FitWindow window{};
    std::size_t leverage_lags = 50;     // observations
    std::size_t autocorr_lags = 50;
    double min_gap_z = 3.0;             // |A^2 - B| must exceed this many standard errors
    LeverageClosure closure = LeverageClosure::Published;
};

struct Diagnostics {
    ConsistencyReport consistency;
    double nu = 0.0;
    int n_star = 0;
    std::pair<int, int> beta_range{0, 0};
    double tau_sigma = 0.0;  // yr
};

struct CalibrationReport {
    bool ok = false;
    std::string failed_stage;
    std::string failure;
    std::optional<SampleEstimators> estimators;
    std::optional<Curve> leverage_curve;
    std::optional<Curve> autocorrelation_curve;
    std::optional<LeverageFit> fit;
    LeverageClosure closure = LeverageClosure::Published;
    std::optional<ModelParams> params;
    std::optional<DerivedQuantities> derived;
    std::optional<Diagnostics> diagnostics;
    std::vector<std::string> notes;
};

inline CalibrationReport calibrate(const ReturnSeries& returns, const CalibrationOptions& opt = {}) {
    CalibrationReport rep;
    rep.closure = opt.closure;
    std::string stage;
    try {
        stage = "sample_estimators";
        rep.estimators = sample_estimators(returns);
        if (std::abs(rep.estimators->gap_z) < opt.min_gap_z) {
            std::ostringstream os;
            os << "A^2 - B = " << rep.estimators->A * rep.estimators->A - rep.estimators->B << " is within "
               << opt.min_gap_z << " standard errors of zero (z = " << rep.estimators->gap_z
               << "): D = a/c is near-singular, data look like constant volatility";
            throw RecoveryError(os.str());
        }
        stage = "empirical_leverage";
        rep.leverage_curve = empirical_leverage(returns, opt.leverage_lags);
        stage = "empirical_autocorrelation";
        rep.autocorrelation_curve = empirical_autocorrelation(returns, opt.autocorr_lags);
        stage = "fit_leverage";
        rep.fit = fit_leverage(*rep.leverage_curve, opt.window);
        if (rep.fit->at_boundary) rep.notes.push_back("leverage fit: tau_L pinned at search boundary");
        stage = "recover_params";
        rep.params = recover_params(*rep.estimators, *rep.fit, opt.closure);
        stage = "derive";
        rep.derived = derive(*rep.params);
        Diagnostics d;
        d.consistency = check_consistency(*rep.params);
        d.nu = rep.derived->nu;
        d.n_star = rep.derived->n_star;
        d.beta_range = rep.derived->beta_range;
        d.tau_sigma = rep.derived->tau_sigma;
        rep.diagnostics = d;
        if (!d.consistency.fourth_moment) rep.notes.push_back("|a|/c <= 3/2: fourth Y-moment diverges, autocorrelation formula invalid");
        rep.ok = true;
    } catch (const std::exception& e) {
        rep.ok = false;
        rep.failed_stage = stage;
        rep.failure = e.what();
    }
    return rep;
}

// Flat key=value block.
inline void write_report(std::ostream& os, const CalibrationReport& r) {
    os << std::setprecision(10);
    os << "status=" << (r.ok ? "ok" : "failed") << '\n';
    if (!r.ok) os << "failed_stage=" << r.failed_stage << "\nfailure=" << r.failure << '\n';
    if (r.estimators) {
        const auto& e = *r.estimators;
        os << "estimators.A=" << e.A << "\nestimators.B=" << e.B << "\nestimators.C=" << e.C << "\nestimators.D=" << e.D
           << "\nestimators.abs_a_over_c=" << -e.D << "\nestimators.dt=" << e.dt << "\nestimators.n_obs=" << e.n_obs
           << "\nestimators.gap_z=" << e.gap_z << '\n';
    }
    if (r.fit) {
        const auto& f = *r.fit;
        os << "fit.tau_L=" << f.tau_L << "\nfit.tau_L_days=" << f.tau_L * trading_days_per_year << "\nfit.L0=" << f.L0
           << "\nfit.rss=" << f.rss << "\nfit.window_days=" << f.window.first << ':' << f.window.second
           << "\nfit.points=" << f.points << "\nfit.at_boundary=" << (f.at_boundary ? 1 : 0) << '\n';
    }
    if (r.params) {
        const auto& p = *r.params;
        os << "params.closure=" << to_string(r.closure) << "\nparams.a=" << p.a << "\nparams.b=" << p.b << "\nparams.c=" << p.c << "\nparams.rho=" << p.rho << '\n';
    }
    if (r.derived) {
        const auto& d = *r.derived;
        os << "derived.nu=" << d.nu << "\nderived.lambda=" << d.lambda << "\nderived.tau_L=" << d.tau_L
           << "\nderived.tau_A1=" << d.tau_A1 << "\nderived.tau_A2=" << d.tau_A2 << "\nderived.tau_sigma=" << d.tau_sigma
           << "\nderived.tau_sigma_days=" << d.tau_sigma * trading_days_per_year << '\n';
    }
    if (r.diagnostics) {
        const auto& d = *r.diagnostics;
        os << "diagnostics.abs_a_over_c=" << d.consistency.ratio
           << "\ndiagnostics.fourth_moment_finite=" << (d.consistency.fourth_moment ? 1 : 0)
           << "\ndiagnostics.third_moment_finite=" << (d.consistency.third_moment ? 1 : 0)
           << "\ndiagnostics.time_scale_ordering=" << (d.consistency.ordering ? 1 : 0) << "\ndiagnostics.nu=" << d.nu
           << "\ndiagnostics.n_star=" << d.n_star << "\ndiagnostics.tail_index_range=" << d.beta_range.first
           << " < beta <= " << d.beta_range.second << '\n';
    }
    for (const auto& n : r.notes) os << "note=" << n << '\n';
}

// CSV fragments, one section per block: `section,key,value`.
inline void write_report_csv(std::ostream& os, const CalibrationReport& r) {
    std::ostringstream kv;
    write_report(kv, r);
    os << "section,key,value\n";
    std::istringstream in(kv.str());
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        std::string key = line.substr(0, eq), value = line.substr(eq + 1);
        std::string section = "status";
        if (const auto dot = key.find('.'); dot != std::string::npos) {
            section = key.substr(0, dot);
            key = key.substr(dot + 1);
        }
        if (value.find(',') != std::string::npos) value = '"' + value + '"';
        os << section << ',' << key << ',' << value << '\n';
    }
}

}  // namespace igsv
