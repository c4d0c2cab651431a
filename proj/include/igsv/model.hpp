#pragma once

// Parameters of the linear stochastic volatility model
//
//   dX = sqrt(c) Y dW1,                 X_0 = 0
//   dY = (a Y + b) dt + sqrt(c) Y dW2,  <dW1 dW2> = rho dt
//
// and the scalar quantities derived from them. Time is in years
// (1 yr = 250 trading days).

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace igsv {

inline constexpr double trading_days_per_year = 250.0;
inline constexpr double one_day = 1.0 / trading_days_per_year;

class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A moment (or quantity built from one) that is infinite for the
// stationary law.
class DivergenceError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct ModelParams {
    double a = 0.0;    // drift slope, 1/yr
    double b = 0.0;    // drift offset, 1/yr
    double c = 0.0;    // squared noise scale, 1/yr
    double rho = 0.0;  // Wiener correlation

    // Empty string when valid, otherwise the first violated constraint.
    std::string violation() const {
        auto finite = [](double v) { return std::isfinite(v); };
        if (!finite(a) || !finite(b) || !finite(c) || !finite(rho)) return "parameters must be finite";
        if (!(a < 0.0)) return "a must be negative (mean reversion)";
        if (!(b > 0.0)) return "b must be positive (support of Y on [0, inf))";
        if (!(c > 0.0)) return "c must be positive";
        if (rho < -1.0 || rho > 1.0) return "rho must lie in [-1, 1]";
        return {};
    }

    bool valid() const { return violation().empty(); }

    void validate() const {
        if (auto why = violation(); !why.empty()) throw ParameterError(why);
    }

    // F_k = k a + k (k-1) c / 2
    double F(int k) const { return k * a + 0.5 * k * (k - 1) * c; }
    // A_k = k b
    double A(int k) const { return k * b; }

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Calibrated values for the S&P500 1970-2010 daily series.
inline constexpr ModelParams table3_params{-16.0608, 0.8627, 8.9749, -0.5089};
// Parameters used for the t0-scaling illustration (third moment divergent).
inline constexpr ModelParams fig1_params{-16.06, 0.86, 17.84, -0.51};

struct DerivedQuantities {
    double nu = 0.0;        // tail shape of the stationary volatility law
    double lambda = 0.0;    // scale, 1/yr^(1/2)
    double D = 0.0;         // a / c
    std::vector<double> F;  // F_0 .. F_kmax, 1/yr
    std::vector<double> A;  // A_0 .. A_kmax, 1/yr
    double tau_L = 0.0;     // leverage decay time, yr
    double tau_A1 = 0.0;    // autocorrelation times, yr
    double tau_A2 = 0.0;
    double tau_sigma = 0.0;  // volatility relaxation time, yr
    int n_star = 0;          // largest integer strictly below nu
    std::pair<int, int> beta_range{0, 0};  // tail index in (first, second]
};

inline DerivedQuantities derive(const ModelParams& p, int kmax = 6) {
    p.validate();
    if (!(2.0 * std::abs(p.a) > p.c)) {
        throw DivergenceError("non-mean-reverting configuration: 2|a| <= c, leverage time undefined");
    }
    DerivedQuantities d;
    d.nu = 1.0 - 2.0 * p.a / p.c;
    d.lambda = 2.0 * p.b / std::sqrt(p.c);
    d.D = p.a / p.c;
    for (int k = 0; k <= kmax; ++k) {
        d.F.push_back(p.F(k));
        d.A.push_back(p.A(k));
    }
    d.tau_L = 2.0 / (2.0 * std::abs(p.a) - p.c);
    d.tau_A1 = 1.0 / std::abs(p.a);
    d.tau_A2 = 1.0 / (2.0 * std::abs(p.a) - p.c);
    d.tau_sigma = -1.0 / p.a;
    d.n_star = static_cast<int>(std::ceil(d.nu)) - 1;
    d.beta_range = {d.n_star, d.n_star + 1};
    return d;
}

struct ConsistencyReport {
    double ratio = 0.0;            // |a| / c
    bool fourth_moment = false;    // |a|/c > 3/2: autocorrelation formula valid
    bool third_moment = false;     // |a|/c > 1: leverage formula valid
    bool ordering = false;         // tau_A2 < tau_A1 < tau_L and tau_A1 > 2/3 tau_L
    bool consistent() const { return fourth_moment; }

    std::string describe() const {
        std::ostringstream os;
        os << "|a|/c = " << ratio << "; fourth Y-moment " << (fourth_moment ? "finite" : "divergent")
           << "; third Y-moment " << (third_moment ? "finite" : "divergent") << "; time-scale ordering "
           << (ordering ? "holds" : "violated");
        return os.str();
    }
};

inline ConsistencyReport check_consistency(const ModelParams& p) {
    p.validate();
    ConsistencyReport r;
    r.ratio = std::abs(p.a) / p.c;
    r.fourth_moment = r.ratio > 1.5;
    r.third_moment = r.ratio > 1.0;
    if (2.0 * std::abs(p.a) > p.c) {
        const double tau_L = 2.0 / (2.0 * std::abs(p.a) - p.c);
        const double tau_A1 = 1.0 / std::abs(p.a);
        const double tau_A2 = 1.0 / (2.0 * std::abs(p.a) - p.c);
        r.ordering = tau_A2 < tau_A1 && tau_A1 < tau_L && tau_A1 > 2.0 / 3.0 * tau_L;
    }
    return r;
}

// Stationary moment <Y^n> = prod_{k=1..n} (-A_k / F_k), finite only for n < nu.
//
// The product is written with (-1)^k inside in the printed closed form, which
// would make the second moment negative; the coefficient expansions and the
// fixed points of the moment ODEs both give the (-A_k/F_k) convention.
inline double stationary_moment(const ModelParams& p, int n) {
    p.validate();
    if (n < 0) throw std::invalid_argument("moment order must be nonnegative");
    double m = 1.0;
    for (int k = 1; k <= n; ++k) {
        const double Fk = p.F(k);
        if (Fk >= 0.0) {
            std::ostringstream os;
            os << "stationary moment of order " << n << " diverges (F_" << k << " = " << Fk << " >= 0, nu = "
               << 1.0 - 2.0 * p.a / p.c << ")";
            throw DivergenceError(os.str());
        }
        m *= -p.A(k) / Fk;
    }
    return m;
}

// Inverse Gamma(nu, lambda) density of sigma = sqrt(c) Y.
inline double stationary_sigma_pdf(const ModelParams& p, double sigma) {
    p.validate();
    if (!(sigma > 0.0)) throw std::domain_error("stationary_sigma_pdf: sigma must be positive");
    const double nu = 1.0 - 2.0 * p.a / p.c;
    const double lambda = 2.0 * p.b / std::sqrt(p.c);
    const double log_pdf =
        nu * std::log(lambda) - std::lgamma(nu) - lambda / sigma - (nu + 1.0) * std::log(sigma);
    return std::exp(log_pdf);
}

// Stretches the time axis by `factor`: every rate is divided by it, every
// time scale multiplied by it; nu, D and rho are unchanged.
inline ModelParams rescale_time(const ModelParams& p, double factor) {
    return {p.a / factor, p.b / factor, p.c / factor, p.rho};
}

}  // namespace igsv
