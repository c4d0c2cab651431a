#pragma once

// Independent numerical solvers used to certify the closed forms:
// product-trapezoid Volterra solver for the leverage kernel, RK4 on the
// full moment lattice and on the lagged Y cross-correlation chain, and
// quadrature of the stationary volatility law.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "igsv/analytics.hpp"
#include "igsv/curve.hpp"
#include "igsv/model.hpp"

namespace igsv {

// Classic fourth-order Runge-Kutta over [0, span] in `steps` equal steps.
// rhs(state, out) writes the time derivative of an autonomous system.
template <class Rhs>
void rk4_integrate(std::vector<double>& state, double span, long steps, Rhs&& rhs) {
    if (steps <= 0 || span == 0.0) return;
    const double h = span / static_cast<double>(steps);
    const std::size_t n = state.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    for (long s = 0; s < steps; ++s) {
        rhs(state, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * h * k1[i];
        rhs(tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * h * k2[i];
        rhs(tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + h * k3[i];
        rhs(tmp, k4);
        for (std::size_t i = 0; i < n; ++i) state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

struct VolterraConfig {
    double step = 1e-4;  // yr
    double tau_max = 0.5;  // yr
};

// Solves
//   f(tau) - (a+c) int_0^tau f(s) exp[c (tau - s)/2] ds = exp(c tau / 2) [mu3 + b tau mu2]
// with product-trapezoid weights (kernel integrated exactly against the
// piecewise-linear interpolant of f), then maps to
//   L(tau) = 2 rho exp(a tau) f(tau) / mu2^2.
// The tau = 0 grid value is the 0+ limit.
inline Curve volterra_leverage(const ModelParams& p, double mu2, double mu3, const VolterraConfig& cfg,
                               std::vector<double>* f_out = nullptr) {
    p.validate();
    if (!std::isfinite(mu2) || !std::isfinite(mu3) || !(mu2 > 0.0)) {
        throw std::invalid_argument("volterra_leverage: mu2 must be positive and mu3 finite");
    }
    if (!(cfg.step > 0.0) || !(cfg.step <= cfg.tau_max / 10.0)) {
        throw std::invalid_argument("volterra_leverage: need 0 < step <= tau_max / 10");
    }
    const double kappa = 0.5 * p.c;
    if (cfg.step * kappa > 0.05) {
        throw std::invalid_argument("volterra_leverage: step under-resolves the kernel time 2/c");
    }

    const double h = cfg.step;
    const auto n = static_cast<std::size_t>(std::llround(cfg.tau_max / h));
    const double apc = p.a + p.c;
    // int_0^h e^{-kappa u} du and (1/h) int_0^h u e^{-kappa u} du
    const double I0 = -std::expm1(-kappa * h) / kappa;
    const double I1 = (I0 - h * std::exp(-kappa * h)) / (kappa * h);
    const double growth = std::exp(kappa * h);

    auto rhs = [&](double tau) { return std::exp(kappa * tau) * (mu3 + p.b * tau * mu2); };

    std::vector<double> f(n + 1);
    f[0] = rhs(0.0);
    double memory = 0.0;  // kernel-weighted integral of f over [0, tau_i]
    for (std::size_t i = 0; i < n; ++i) {
        const double tau_next = static_cast<double>(i + 1) * h;
        const double known = growth * (memory + (I0 - I1) * f[i]);
        f[i + 1] = (rhs(tau_next) + apc * known) / (1.0 - apc * growth * I1);
        memory = known + growth * I1 * f[i + 1];
    }

    Curve curve;
    curve.kind = CurveKind::Leverage;
    curve.grid.resize(n + 1);
    curve.values.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double tau = static_cast<double>(i) * h;
        curve.grid[i] = tau;
        curve.values[i] = 2.0 * p.rho * std::exp(p.a * tau) * f[i] / (mu2 * mu2);
    }
    if (f_out) *f_out = std::move(f);
    return curve;
}

namespace detail {

// Joint-moment lattice nodes (p, q) with p + q <= n, indexed densely.
class LatticeIndex {
public:
    explicit LatticeIndex(int n) {
        for (int px = 0; px <= n; ++px)
            for (int qy = 0; qy + px <= n; ++qy) index_[{px, qy}] = static_cast<int>(nodes_.size()), nodes_.emplace_back(px, qy);
    }
    int size() const { return static_cast<int>(nodes_.size()); }
    int find(int px, int qy) const {
        auto it = index_.find({px, qy});
        return it == index_.end() ? -1 : it->second;
    }
    const std::pair<int, int>& node(int i) const { return nodes_[i]; }

private:
    std::vector<std::pair<int, int>> nodes_;
    std::map<std::pair<int, int>, int> index_;
};

}  // namespace detail

// <X_t^n> by RK4 integration of the full (p, q) lattice. The Y chain is
// first integrated from t0 to 0 (X = 0 there), then the lattice from 0 to t.
// Steps never exceed `step`.
inline double ode_moment_oracle(const ModelParams& p, int n, double t, const VolStart& start, double step) {
    p.validate();
    if (n < 1 || !(t >= 0.0) || !(step > 0.0)) throw std::invalid_argument("ode_moment_oracle: bad arguments");

    std::vector<double> mu(n + 1);
    if (start.is_stationary()) {
        for (int k = 0; k <= n; ++k) mu[k] = stationary_moment(p, k);
    } else {
        for (int k = 0; k <= n; ++k) mu[k] = start.init()[k];
        const double span = -start.t0();
        const long steps = static_cast<long>(std::ceil(span / step));
        rk4_integrate(mu, span, steps, [&](const std::vector<double>& y, std::vector<double>& dy) {
            dy[0] = 0.0;
            for (int k = 1; k <= n; ++k) dy[k] = p.F(k) * y[k] + p.A(k) * y[k - 1];
        });
    }

    const detail::LatticeIndex lattice(n);
    std::vector<double> state(lattice.size(), 0.0);
    for (int q = 0; q <= n; ++q) state[lattice.find(0, q)] = mu[q];

    struct Link {
        int self, lower_q, rho_node, diff_node;
        double F, A, w_rho, w_diff;
    };
    std::vector<Link> links;
    for (int i = 0; i < lattice.size(); ++i) {
        const auto [px, qy] = lattice.node(i);
        Link l{i, qy >= 1 ? lattice.find(px, qy - 1) : -1, px >= 1 ? lattice.find(px - 1, qy + 1) : -1,
               px >= 2 ? lattice.find(px - 2, qy + 2) : -1, p.F(qy), p.A(qy), p.c * p.rho * px * qy,
               0.5 * px * (px - 1) * p.c};
        links.push_back(l);
    }
    const long steps = static_cast<long>(std::ceil(t / step));
    rk4_integrate(state, t, steps, [&](const std::vector<double>& y, std::vector<double>& dy) {
        for (const auto& l : links) {
            double d = l.F * y[l.self];
            if (l.lower_q >= 0) d += l.A * y[l.lower_q];
            if (l.rho_node >= 0) d += l.w_rho * y[l.rho_node];
            if (l.diff_node >= 0) d += l.w_diff * y[l.diff_node];
            dy[l.self] = d;
        }
    });
    return state[lattice.find(n, 0)];
}

inline double ode_moment_oracle(const ModelParams& p, int n, double t, double t0, const InitialYMoments& init,
                                double step) {
    if (!(step <= (t - t0) / 100.0)) throw std::invalid_argument("ode_moment_oracle: step must be <= (t - t0) / 100");
    return ode_moment_oracle(p, n, t, VolStart::at(t0, init), step);
}

struct CrossCorrelationCurves {
    Curve y2_y1;  // <Y_t^2 Y_{t+tau}>
    Curve y2_y2;  // <Y_t^2 Y_{t+tau}^2>
    // [<Y_t^2 Y_{t+tau}^2> - mu2(t) mu2(t+tau)] / (3 mu4(t) - mu2(t)^2)
    Curve autocorrelation;
};

// RK4 on d/dtau <Y_t^2 Y_{t+tau}^n> = F_n <.> + A_n <. lower>, n = 1, 2,
// together with the forward Y chain mu_1, mu_2 at t + tau.
// `mu` holds mu_0(t) .. mu_4(t).
inline CrossCorrelationCurves cross_corr_ode(const ModelParams& p, double tau_max, std::span<const double> mu,
                                             double step) {
    p.validate();
    if (mu.size() < 5) throw std::invalid_argument("cross_corr_ode: need moments mu_0..mu_4");
    if (!(step > 0.0) || !(tau_max >= step)) throw std::invalid_argument("cross_corr_ode: bad grid");
    const auto n = static_cast<std::size_t>(std::llround(tau_max / step));
    const double F1 = p.F(1), F2 = p.F(2), A1 = p.A(1), A2 = p.A(2);
    const double var = 3.0 * mu[4] - mu[2] * mu[2];

    CrossCorrelationCurves out;
    out.y2_y1.kind = out.y2_y2.kind = CurveKind::YMoment;
    out.autocorrelation.kind = CurveKind::Autocorrelation;

    // state: G1, G2, m1(t+tau), m2(t+tau)
    std::vector<double> s{mu[3], mu[4], mu[1], mu[2]};
    auto rhs = [&](const std::vector<double>& y, std::vector<double>& dy) {
        dy[0] = F1 * y[0] + A1 * mu[2];
        dy[1] = F2 * y[1] + A2 * y[0];
        dy[2] = F1 * y[2] + A1;
        dy[3] = F2 * y[3] + A2 * y[2];
    };
    auto record = [&](double tau) {
        out.y2_y1.grid.push_back(tau);
        out.y2_y1.values.push_back(s[0]);
        out.y2_y2.grid.push_back(tau);
        out.y2_y2.values.push_back(s[1]);
        out.autocorrelation.grid.push_back(tau);
        out.autocorrelation.values.push_back((s[1] - mu[2] * s[3]) / var);
    };
    record(0.0);
    for (std::size_t i = 0; i < n; ++i) {
        rk4_integrate(s, step, 1, rhs);
        record(static_cast<double>(i + 1) * step);
    }
    return out;
}

// ---- quadrature of the stationary volatility law ----

inline double integrate_sigma_pdf(const ModelParams& p, double lo, double hi, unsigned max_depth = 15) {
    auto pdf = [&](double s) { return s > 0.0 ? stationary_sigma_pdf(p, s) : 0.0; };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(pdf, lo, hi, max_depth, 1e-13);
}

// E[sigma^k] under the stationary law by quadrature.
// Double-exponential rule: the integrand decays only algebraically.
inline double sigma_moment_quadrature(const ModelParams& p, int k) {
    p.validate();
    const double nu = 1.0 - 2.0 * p.a / p.c;
    const double lambda = 2.0 * p.b / std::sqrt(p.c);
    const double log_norm = nu * std::log(lambda) - std::lgamma(nu);
    // s^k pdf(s), formed in logs so huge s gives 0 rather than inf * 0
    auto f = [&](double s) {
        if (!(s > 0.0) || !std::isfinite(s)) return 0.0;
        return std::exp(log_norm - lambda / s - (nu + 1.0 - k) * std::log(s));
    };
    boost::math::quadrature::exp_sinh<double> rule;
    return rule.integrate(f, 0.0, std::numeric_limits<double>::infinity());
}

inline double stationary_sigma_cdf(const ModelParams& p, double sigma) {
    if (!(sigma > 0.0)) return 0.0;
    return integrate_sigma_pdf(p, 0.0, sigma);
}

// CDF values at sorted points, accumulated segment by segment.
inline std::vector<double> stationary_sigma_cdf_sorted(const ModelParams& p, std::span<const double> sorted) {
    std::vector<double> cdf(sorted.size());
    double acc = 0.0, prev = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double x = std::max(sorted[i], 0.0);
        // gaps between neighbouring samples are short: little refinement needed
        if (x > prev) acc += integrate_sigma_pdf(p, prev, x, i == 0 ? 15 : 3);
        prev = std::max(prev, x);
        cdf[i] = std::min(acc, 1.0);
    }
    return cdf;
}

// Two-sided Kolmogorov-Smirnov distance between a sample and a model CDF
// evaluated at the sorted sample points.
inline double ks_distance(std::span<const double> cdf_at_sorted) {
    const double n = static_cast<double>(cdf_at_sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < cdf_at_sorted.size(); ++i) {
        const double F = cdf_at_sorted[i];
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - F, F - static_cast<double>(i) / n});
    }
    return d;
}

// 1% critical value of the two-sided KS statistic (asymptotic).
inline double ks_critical_1pct(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

// KS distance of sqrt(c) * y samples against the stationary law.
inline double ks_stationary_sigma(const ModelParams& p, std::vector<double> y_samples) {
    const double sc = std::sqrt(p.c);
    for (auto& y : y_samples) y *= sc;
    std::sort(y_samples.begin(), y_samples.end());
    const auto cdf = stationary_sigma_cdf_sorted(p, y_samples);
    return ks_distance(cdf);
}

}  // namespace igsv
