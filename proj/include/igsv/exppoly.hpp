#pragma once

// Exponential polynomials: finite sums of coef * t^power * exp(rate * t).
//
// This is the closed-form solution space of the triangular linear moment
// ODEs of the model, so everything the moment engine needs (linear
// combination, exponential shift, integration, first-order linear solve)
// stays inside it exactly.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <ostream>
#include <vector>

#include <quadmath.h>

namespace igsv {

// Extended scalar for evaluations that cancel heavily.
using quad = __float128;

namespace detail {
inline double ep_exp(double x) { return std::exp(x); }
inline quad ep_exp(quad x) { return expq(x); }
template <class Real>
Real ep_abs(Real x) { return x < 0 ? -x : x; }
template <class Real>
Real ep_ipow(Real x, int n) {
    Real r = 1;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
}
}  // namespace detail

template <class Real>
struct BasicExpTerm {
    Real coef = 0;
    int power = 0;
    Real rate = 0;  // 1/yr
};

template <class Real>
class BasicExpPoly {
public:
    using ExpTerm = BasicExpTerm<Real>;

    // Rates closer than this are the same exponential (1/yr).
    static constexpr double resonance_tol = 1e-12;
    // Terms with smaller |coef| are dropped.
    static constexpr double drop_tol = 1e-300;

    BasicExpPoly() = default;
    BasicExpPoly(std::initializer_list<ExpTerm> terms) : terms_(terms) { normalize(); }
    explicit BasicExpPoly(std::vector<ExpTerm> terms) : terms_(std::move(terms)) { normalize(); }

    static BasicExpPoly constant(Real v) { return BasicExpPoly{{v, 0, Real(0)}}; }
    static BasicExpPoly exponential(Real coef, Real rate) { return BasicExpPoly{{coef, 0, rate}}; }

    template <class Other>
    BasicExpPoly<Other> cast() const {
        std::vector<BasicExpTerm<Other>> out;
        for (const auto& t : terms_) out.push_back({static_cast<Other>(t.coef), t.power, static_cast<Other>(t.rate)});
        return BasicExpPoly<Other>(std::move(out));
    }

    const std::vector<ExpTerm>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    Real operator()(Real t) const { return eval(t); }

    Real eval(Real t) const {
        Real s = 0;
        for (const auto& term : terms_) {
            Real v = term.coef * detail::ep_exp(term.rate * t);
            if (term.power > 0) v *= detail::ep_ipow(t, term.power);
            s += v;
        }
        return s;
    }

    // Analytic time derivative.
    BasicExpPoly derivative() const {
        std::vector<ExpTerm> out;
        out.reserve(2 * terms_.size());
        for (const auto& term : terms_) {
            if (term.rate != 0) out.push_back({term.coef * term.rate, term.power, term.rate});
            if (term.power > 0) out.push_back({term.coef * term.power, term.power - 1, term.rate});
        }
        return BasicExpPoly(std::move(out));
    }

    // Multiplies every term by exp(shift * t).
    BasicExpPoly shifted(Real shift) const {
        std::vector<ExpTerm> out = terms_;
        for (auto& term : out) term.rate += shift;
        return BasicExpPoly(std::move(out));
    }

    BasicExpPoly scaled(Real alpha) const {
        std::vector<ExpTerm> out = terms_;
        for (auto& term : out) term.coef *= alpha;
        return BasicExpPoly(std::move(out));
    }

    friend BasicExpPoly combine(const BasicExpPoly& p, const BasicExpPoly& q, Real alpha, Real beta) {
        std::vector<ExpTerm> out;
        out.reserve(p.size() + q.size());
        for (const auto& term : p.terms_) out.push_back({alpha * term.coef, term.power, term.rate});
        for (const auto& term : q.terms_) out.push_back({beta * term.coef, term.power, term.rate});
        return BasicExpPoly(std::move(out));
    }

    friend BasicExpPoly operator+(const BasicExpPoly& p, const BasicExpPoly& q) { return combine(p, q, 1, 1); }
    friend BasicExpPoly operator-(const BasicExpPoly& p, const BasicExpPoly& q) { return combine(p, q, 1, -1); }
    friend BasicExpPoly operator*(Real alpha, const BasicExpPoly& p) { return p.scaled(alpha); }

    friend std::ostream& operator<<(std::ostream& os, const BasicExpPoly& p) {
        if (p.empty()) return os << "0";
        bool first = true;
        for (const auto& term : p.terms_) {
            if (!first) os << " + ";
            first = false;
            os << static_cast<double>(term.coef);
            if (term.power > 0) os << "*t^" << term.power;
            if (term.rate != 0) os << "*exp(" << static_cast<double>(term.rate) << "*t)";
        }
        return os;
    }

private:
    // Merge like terms, drop negligible ones, sort by (rate, power).
    void normalize() {
        std::sort(terms_.begin(), terms_.end(), [](const ExpTerm& x, const ExpTerm& y) {
            if (x.rate != y.rate) return x.rate < y.rate;
            return x.power < y.power;
        });
        // Snap rates within resonance_tol of the first rate in their cluster.
        for (std::size_t i = 1; i < terms_.size(); ++i) {
            if (terms_[i].rate - terms_[i - 1].rate <= Real(resonance_tol)) terms_[i].rate = terms_[i - 1].rate;
        }
        std::stable_sort(terms_.begin(), terms_.end(), [](const ExpTerm& x, const ExpTerm& y) {
            if (x.rate != y.rate) return x.rate < y.rate;
            return x.power < y.power;
        });
        std::vector<ExpTerm> merged;
        merged.reserve(terms_.size());
        for (const auto& term : terms_) {
            if (!merged.empty() && merged.back().rate == term.rate && merged.back().power == term.power) {
                merged.back().coef += term.coef;
            } else {
                merged.push_back(term);
            }
        }
        std::erase_if(merged, [](const ExpTerm& term) { return detail::ep_abs(term.coef) < Real(drop_tol); });
        terms_ = std::move(merged);
    }

    std::vector<ExpTerm> terms_;
};

using ExpTerm = BasicExpTerm<double>;
using ExpPoly = BasicExpPoly<double>;
using QExpPoly = BasicExpPoly<quad>;

template <class Real>
Real ep_eval(const BasicExpPoly<Real>& p, Real t) { return p.eval(t); }

template <class Real>
BasicExpPoly<Real> ep_combine(const BasicExpPoly<Real>& p, const BasicExpPoly<Real>& q, Real alpha, Real beta) {
    return combine(p, q, alpha, beta);
}

// Antiderivative P with P(0) = 0.
template <class Real>
BasicExpPoly<Real> ep_integrate(const BasicExpPoly<Real>& p) {
    std::vector<BasicExpTerm<Real>> out;
    for (const auto& term : p.terms()) {
        const int m = term.power;
        if (detail::ep_abs(term.rate) <= Real(BasicExpPoly<Real>::resonance_tol)) {
            out.push_back({term.coef / (m + 1), m + 1, Real(0)});
            continue;
        }
        // int_0^t s^m e^{rs} ds = e^{rt} sum_k (-1)^k m!/(m-k)! t^{m-k} / r^{k+1}  -  (-1)^m m! / r^{m+1}
        const Real r = term.rate;
        Real falling = 1;  // m!/(m-k)!
        Real rpow = r;     // r^{k+1}
        for (int k = 0; k <= m; ++k) {
            const Real sign = (k % 2 == 0) ? 1 : -1;
            out.push_back({term.coef * sign * falling / rpow, m - k, r});
            if (k == m) out.push_back({-term.coef * sign * falling / rpow, 0, Real(0)});
            falling *= (m - k);
            rpow *= r;
        }
    }
    return BasicExpPoly<Real>(std::move(out));
}

// Solves x' = rate * x + forcing(t), x(0) = x0.
template <class Real>
BasicExpPoly<Real> ep_solve_linear_ode(Real rate, const BasicExpPoly<Real>& forcing, Real x0) {
    BasicExpPoly<Real> particular = ep_integrate(forcing.shifted(-rate)).shifted(rate);
    return particular + BasicExpPoly<Real>::exponential(x0, rate);
}

}  // namespace igsv
