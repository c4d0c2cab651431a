#pragma once

// Closed-form moments and correlation functions of the model.
//
// Y-moments obey the triangular chain d mu_k/dt = F_k mu_k + A_k mu_{k-1};
// joint moments <X^p Y^q> obey
//
//   d/dt M(p,q) = F_q M(p,q) + A_q M(p,q-1) + c rho p q M(p-1,q+1)
//                 + p (p-1) c / 2 M(p-2,q+2),     M(p,q)(0) = delta_{p0} mu_q(0).
//
// Both are solved exactly in the exponential-polynomial space.

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "igsv/curve.hpp"
#include "igsv/exppoly.hpp"
#include "igsv/model.hpp"

namespace igsv {

// Moments <Y^k> of the starting value y_{t0}; m[0] = 1.
struct InitialYMoments {
    std::vector<double> m{1.0};

    static InitialYMoments fixed(double y0, int order = 8) {
        InitialYMoments init;
        init.m.resize(order + 1);
        init.m[0] = 1.0;
        for (int k = 1; k <= order; ++k) init.m[k] = init.m[k - 1] * y0;
        return init;
    }

    static InitialYMoments from_list(std::vector<double> moments) {
        InitialYMoments init;
        init.m.insert(init.m.end(), moments.begin(), moments.end());
        return init;
    }

    int order() const { return static_cast<int>(m.size()) - 1; }

    double operator[](int k) const {
        if (k < 0 || k > order()) throw std::out_of_range("initial Y-moment of order " + std::to_string(k) + " not supplied");
        return m[k];
    }
};

// When and how the volatility process was started: either at a finite
// t0 <= 0 from given initial moments, or in the infinite past
// (stationary law substituted directly).
class VolStart {
public:
    static VolStart stationary() { return VolStart{}; }
    static VolStart at(double t0, InitialYMoments init) {
        if (!(t0 <= 0.0)) throw std::invalid_argument("volatility start time t0 must be <= 0");
        VolStart s;
        s.t0_ = t0;
        s.init_ = std::move(init);
        return s;
    }

    bool is_stationary() const { return !t0_.has_value(); }
    double t0() const { return t0_.value(); }
    const InitialYMoments& init() const { return init_; }

private:
    std::optional<double> t0_;
    InitialYMoments init_;
};

namespace detail {
template <class Real>
std::vector<BasicExpPoly<Real>> y_chain(const ModelParams& p, int n, const InitialYMoments& init) {
    std::vector<BasicExpPoly<Real>> mu;
    mu.reserve(n + 1);
    mu.push_back(BasicExpPoly<Real>::constant(1));
    for (int k = 1; k <= n; ++k) {
        mu.push_back(ep_solve_linear_ode(Real(p.F(k)), Real(p.A(k)) * mu[k - 1], Real(init[k])));
    }
    return mu;
}
}  // namespace detail

// mu_0 .. mu_n as exponential polynomials in the elapsed time s = t - t0.
inline std::vector<ExpPoly> y_moment_chain(const ModelParams& p, int n, const InitialYMoments& init) {
    return detail::y_chain<double>(p, n, init);
}

// <Y_t^n> for a volatility started at t0 <= t.
inline double y_moment(const ModelParams& p, int n, double t, double t0, const InitialYMoments& init) {
    p.validate();
    if (n < 1) throw std::invalid_argument("y_moment: order must be >= 1");
    if (!(t >= t0)) throw std::invalid_argument("y_moment: requires t >= t0");
    return static_cast<double>(detail::y_chain<quad>(p, n, init)[n].eval(quad(t - t0)));
}

// mu_0(t) .. mu_n(t).
inline std::vector<double> y_moments_at(const ModelParams& p, const VolStart& start, double t, int n) {
    std::vector<double> mu(n + 1);
    if (start.is_stationary()) {
        for (int k = 0; k <= n; ++k) mu[k] = stationary_moment(p, k);
        return mu;
    }
    if (!(t >= start.t0())) throw std::invalid_argument("moment time precedes volatility start");
    const auto chain = detail::y_chain<quad>(p, n, start.init());
    for (int k = 0; k <= n; ++k) mu[k] = static_cast<double>(chain[k].eval(quad(t) - quad(start.t0())));
    return mu;
}

// Exact joint moments <X_t^p Y_t^q>, t >= 0, built lazily in increasing p.
// Held in quad precision: at short horizons the terms cancel to many digits.
// Not thread-safe; use one instance per thread.
class MomentLattice {
public:
    MomentLattice(const ModelParams& p, VolStart start) : params_(p), start_(std::move(start)) { params_.validate(); }

    const ModelParams& params() const { return params_; }

    const QExpPoly& joint(int px, int qy) {
        if (px < 0 || qy < 0) throw std::invalid_argument("lattice indices must be nonnegative");
        const auto key = std::make_pair(px, qy);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;

        QExpPoly node;
        if (px == 0) {
            if (qy == 0) {
                node = QExpPoly::constant(1);
            } else {
                node = ep_solve_linear_ode(quad(params_.F(qy)), quad(params_.A(qy)) * joint(0, qy - 1), y_at_zero(qy));
            }
        } else {
            std::vector<QExpPoly::ExpTerm> forcing_terms;
            auto add = [&](quad w, const QExpPoly& e) {
                if (w == 0) return;
                for (const auto& term : e.terms()) forcing_terms.push_back({w * term.coef, term.power, term.rate});
            };
            const double c = params_.c;
            if (qy >= 1) add(params_.A(qy), joint(px, qy - 1));
            add(quad(c) * quad(params_.rho) * px * qy, joint(px - 1, qy + 1));
            if (px >= 2) add(quad(c) * (px * (px - 1) / 2), joint(px - 2, qy + 2));
            node = ep_solve_linear_ode(quad(params_.F(qy)), QExpPoly(std::move(forcing_terms)), quad(0));
        }
        return memo_.emplace(key, std::move(node)).first->second;
    }

    ExpPoly x_moment_poly(int n) { return joint(n, 0).cast<double>(); }
    double x_moment(int n, double t) { return static_cast<double>(x_moment_q(n, t)); }
    // Unrounded value, for differences between nearby starts.
    quad x_moment_q(int n, double t) { return joint(n, 0).eval(t); }

private:
    quad y_at_zero(int q) {
        if (static_cast<int>(y0_.size()) <= q) {
            if (start_.is_stationary()) {
                y0_.resize(q + 1);
                for (int k = 0; k <= q; ++k) y0_[k] = stationary_moment_q(q, k);
            } else {
                const auto chain = detail::y_chain<quad>(params_, q, start_.init());
                y0_.resize(q + 1);
                for (int k = 0; k <= q; ++k) y0_[k] = chain[k].eval(-quad(start_.t0()));
            }
        }
        return y0_[q];
    }

    // stationary_moment, with the product formed in quad
    quad stationary_moment_q(int q, int k) const {
        (void)stationary_moment(params_, q);  // divergence check
        quad m = 1;
        for (int j = 1; j <= k; ++j) m *= -quad(params_.A(j)) / quad(params_.F(j));
        return m;
    }

    ModelParams params_;
    VolStart start_;
    std::vector<quad> y0_;
    std::map<std::pair<int, int>, QExpPoly> memo_;
};

// <X_t^n> with the volatility started at t0 from `init`.
inline double x_moment(const ModelParams& p, int n, double t, double t0, const InitialYMoments& init) {
    if (n < 1) throw std::invalid_argument("x_moment: order must be >= 1");
    if (!(t >= 0.0)) throw std::invalid_argument("x_moment: requires t >= 0");
    MomentLattice lattice(p, VolStart::at(t0, init));
    return lattice.x_moment(n, t);
}

inline double x_moment(const ModelParams& p, int n, double t, const VolStart& start) {
    if (n < 1) throw std::invalid_argument("x_moment: order must be >= 1");
    if (!(t >= 0.0)) throw std::invalid_argument("x_moment: requires t >= 0");
    MomentLattice lattice(p, start);
    return lattice.x_moment(n, t);
}

// K_j^(n), j = 0..n, of mu_n(t;t0) = sum_j K_j exp[F_j (t - t0)], n in {2, 3}.
inline std::vector<double> k_coefficients(const ModelParams& p, int n, const InitialYMoments& init) {
    p.validate();
    const double F1 = p.F(1), F2 = p.F(2), F3 = p.F(3);
    const double A1 = p.A(1), A2 = p.A(2), A3 = p.A(3);
    const double mu1 = init[1], mu2 = init[2];
    if (n == 2) {
        return {
            A2 * A1 / (F2 * F1),
            -A2 / (F2 - F1) * (mu1 + A1 / F1),
            mu2 + A2 / (F2 - F1) * (mu1 + A1 / F2),
        };
    }
    if (n == 3) {
        const double mu3 = init[3];
        return {
            // printed with a factor "A_d"; the chain structure requires A_2
            -A3 * A2 * A1 / (F3 * F2 * F1),
            A3 * A2 / ((F3 - F1) * (F2 - F1)) * (mu1 + A1 / F1),
            -A3 / (F3 - F2) * (mu2 + A2 / (F2 - F1) * (mu1 + A1 / F2)),
            mu3 + A3 / (F3 - F2) * (mu2 + A2 / (F3 - F1) * (mu1 + A1 / F3)),
        };
    }
    throw std::invalid_argument("k_coefficients: closed forms exist for n = 2, 3 only");
}

// H_j^(n)(t), j = 0..n, of <X_t^n> = sum_j H_j(t) exp(-F_j t0), n in {2, 3}.
inline std::vector<double> h_coefficients(const ModelParams& p, int n, double t, const InitialYMoments& init) {
    p.validate();
    const double c = p.c, rho = p.rho;
    const double F1 = p.F(1), F2 = p.F(2), F3 = p.F(3);
    const double A2 = p.A(2);
    const double E1 = std::expm1(F1 * t), E2 = std::expm1(F2 * t), E3 = std::expm1(F3 * t);
    if (n == 2) {
        const auto K = k_coefficients(p, 2, init);
        return {c * K[0] * t, c * K[1] * E1 / F1, c * K[2] * E2 / F2};
    }
    if (n == 3) {
        const auto K2 = k_coefficients(p, 2, init);
        const auto K3 = k_coefficients(p, 3, init);
        const double pre = 3.0 * rho * c * c;
        const double d21 = F2 - F1;
        const double H0 = pre * (t / F2 * (A2 * K2[0] / F1 - 2.0 * K3[0]) + 2.0 * K3[0] * E2 / (F2 * F2) +
                                 A2 * K2[0] / d21 * (E2 / (F2 * F2) - E1 / (F1 * F1)));
        const double H1 = pre * (1.0 / d21 * (A2 * K2[1] / d21 + 2.0 * K3[1]) * (E2 / F2 - E1 / F1) +
                                 A2 * K2[1] / (d21 * F1) * (E1 / F1 - t * std::exp(F1 * t)));
        const double H2 = pre * (-A2 * K2[2] / (d21 * d21) * (E2 / F2 - E1 / F1) -
                                 1.0 / F2 * (A2 * K2[2] / d21 + 2.0 * K3[2]) * (E2 / F2 - t * std::exp(F2 * t)));
        const double H3 = 2.0 * pre * K3[3] / (F3 - F2) * (E3 / F3 - E2 / F2);
        return {H0, H1, H2, H3};
    }
    throw std::invalid_argument("h_coefficients: closed forms exist for n = 2, 3 only");
}

// <X_t^n> from the H-coefficient expansion, n in {2, 3}.
inline double x_moment_from_h(const ModelParams& p, int n, double t, double t0, const InitialYMoments& init) {
    const auto H = h_coefficients(p, n, t, init);
    double s = 0.0;
    for (int j = 0; j <= n; ++j) s += H[j] * std::exp(-p.F(j) * t0);
    return s;
}

struct SkewKurt {
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

// Standardized third and fourth moments of X_t.
inline SkewKurt skewness_kurtosis(const ModelParams& p, double t, const VolStart& start) {
    if (!(t > 0.0)) throw std::invalid_argument("skewness_kurtosis: requires t > 0");
    MomentLattice lattice(p, start);
    const double m2 = lattice.x_moment(2, t);
    const double m3 = lattice.x_moment(3, t);
    const double m4 = lattice.x_moment(4, t);
    return {m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0};
}

// Stationary leverage L(tau) = -rho H(tau) a(2a+c)/(b(a+c)) exp(-tau/tau_L).
inline double leverage(const ModelParams& p, double tau) {
    p.validate();
    if (!(p.F(3) < 0.0)) throw DivergenceError("stationary leverage requires nu > 3");
    if (!(tau > 0.0)) return 0.0;
    const double a = p.a, b = p.b, c = p.c;
    const double tau_L = 2.0 / (2.0 * std::abs(a) - c);
    return -p.rho * a * (2.0 * a + c) / (b * (a + c)) * std::exp(-tau / tau_L);
}

// L(0+) of the stationary leverage.
inline double leverage_amplitude(const ModelParams& p) {
    p.validate();
    return -p.rho * p.a * (2.0 * p.a + p.c) / (p.b * (p.a + p.c));
}

// Leverage at time t for a volatility started per `start`, from mu_2(t), mu_3(t).
//
// The printed second exponential reads exp[(a + c/2 tau)]; the Volterra
// solution gives exp[(a + c/2) tau], used here.
inline double leverage(const ModelParams& p, double tau, double t, const VolStart& start) {
    p.validate();
    if (!(tau > 0.0)) return 0.0;
    const auto mu = y_moments_at(p, start, t, 3);
    const double a = p.a, b = p.b, c = p.c;
    const double g = b / (a + c) * mu[2];
    return 2.0 * p.rho / (mu[2] * mu[2]) *
           ((mu[3] + g) * std::exp((2.0 * a + 1.5 * c) * tau) - g * std::exp((a + 0.5 * c) * tau));
}

// Leverage with Y propagated by its stochastic exponential,
// exp[(a - c/2) tau + sqrt(c) dW]. The closed forms above propagate with
// exp[a tau + sqrt(c) dW], which shifts both rates up by c/2. Here the rates
// are 2a + c and a; the amplitude at stationarity is unchanged and the decay
// time is 1/|a|. This is the form a simulated path reproduces.
inline double leverage_ito(const ModelParams& p, double tau, double t, const VolStart& start) {
    p.validate();
    if (!(tau > 0.0)) return 0.0;
    const auto mu = y_moments_at(p, start, t, 3);
    const double a = p.a, b = p.b, c = p.c;
    const double g = b / (a + c) * mu[2];
    return 2.0 * p.rho / (mu[2] * mu[2]) * ((mu[3] + g) * std::exp((2.0 * a + c) * tau) - g * std::exp(a * tau));
}

inline double leverage_ito(const ModelParams& p, double tau) {
    p.validate();
    if (!(p.F(3) < 0.0)) throw DivergenceError("stationary leverage requires nu > 3");
    if (!(tau > 0.0)) return 0.0;
    return leverage_amplitude(p) * std::exp(p.a * tau);
}

struct AutocorrelationCoefficients {
    double D = 0.0;
    double N1 = 0.0;  // weight of exp(-tau / tau_A1)
    double N2 = 0.0;  // weight of exp(-tau / tau_A2)
    double tau_A1 = 0.0;
    double tau_A2 = 0.0;
};

inline AutocorrelationCoefficients autocorrelation_coefficients(const ModelParams& p) {
    p.validate();
    const double a = p.a, c = p.c;
    AutocorrelationCoefficients k;
    k.D = (4.0 * a * a - 2.0 * a * c - 3.0 * c * c) * (a + c) / (c * c);
    k.N1 = -(2.0 * a + 3.0 * c) * (2.0 * a + c) / c;
    k.N2 = a;
    k.tau_A1 = 1.0 / std::abs(a);
    k.tau_A2 = 1.0 / (2.0 * std::abs(a) - c);
    return k;
}

// Stationary squared-return autocorrelation, tau >= 0 (tau = 0 gives the 0+ limit).
inline double autocorrelation(const ModelParams& p, double tau) {
    p.validate();
    if (!(p.F(4) < 0.0)) throw DivergenceError("stationary autocorrelation requires nu > 4");
    if (tau < 0.0) tau = -tau;
    const auto k = autocorrelation_coefficients(p);
    return (k.N1 * std::exp(-tau / k.tau_A1) + k.N2 * std::exp(-tau / k.tau_A2)) / k.D;
}

// Squared-return autocorrelation at time t from mu_1(t)..mu_4(t), with
// Var[dX^2] approximated by c^2 (3 mu_4 - mu_2^2) dt^2.
inline double autocorrelation(const ModelParams& p, double tau, double t, const VolStart& start) {
    p.validate();
    if (tau < 0.0) tau = -tau;
    const auto mu = y_moments_at(p, start, t, 4);
    const double a = p.a, c = p.c;
    const double g = 2.0 * p.b / (a + c);
    const double num = g * (mu[1] * mu[2] - mu[3]) +
                       std::exp((a + c) * tau) * (mu[4] + g * mu[3] - mu[2] * (mu[2] + g * mu[1]));
    return std::exp(a * tau) * num / (3.0 * mu[4] - mu[2] * mu[2]);
}

// <Y_t^2 Y_{t+tau}^n>, n in {1, 2}, tau >= 0.
inline double cross_corr_y(const ModelParams& p, int n, double tau, double t, const VolStart& start) {
    p.validate();
    if (!(tau >= 0.0)) throw std::invalid_argument("cross_corr_y: requires tau >= 0");
    const auto mu = y_moments_at(p, start, t, 4);
    const double a = p.a, b = p.b;
    const double ea = std::exp(a * tau);
    if (n == 1) return ea * mu[3] - b / a * (1.0 - ea) * mu[2];
    if (n == 2) {
        const double F2 = p.F(2), A2 = p.A(2);
        const double e2 = std::exp(F2 * tau);
        return e2 * mu[4] + A2 / (a - F2) * (ea - e2) * mu[3] -
               b / a * (A2 / F2 * (e2 - 1.0) - A2 / (a - F2) * (ea - e2)) * mu[2];
    }
    throw std::invalid_argument("cross_corr_y: n must be 1 or 2");
}

inline Curve leverage_curve(const ModelParams& p, const std::vector<double>& lags) {
    Curve curve{lags, {}, CurveKind::Leverage};
    for (double tau : lags) curve.values.push_back(leverage(p, tau));
    return curve;
}

inline Curve leverage_ito_curve(const ModelParams& p, const std::vector<double>& lags) {
    Curve curve{lags, {}, CurveKind::Leverage};
    for (double tau : lags) curve.values.push_back(leverage_ito(p, tau));
    return curve;
}

inline Curve autocorrelation_curve(const ModelParams& p, const std::vector<double>& lags) {
    Curve curve{lags, {}, CurveKind::Autocorrelation};
    for (double tau : lags) curve.values.push_back(autocorrelation(p, tau));
    return curve;
}

}  // namespace igsv
