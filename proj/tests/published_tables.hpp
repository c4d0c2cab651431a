#pragma once

// Published calibration tables and their rounding intervals.

#include <array>
#include <cmath>

#include "igsv/estimate.hpp"

namespace igsv::testing {

inline constexpr ModelParams table3_published{-16.0608, 0.8627, 8.9749, -0.5089};
// |a|/c as quoted alongside the estimator table, from unrounded inputs
inline constexpr double quoted_abs_a_over_c = 1.7895;

inline SampleEstimators estimators_from(double A, double B, double C) {
    SampleEstimators e;
    e.A = A;
    e.B = B;
    e.C = C;
    e.D = B / (2.0 * (A * A - B));
    return e;
}

inline SampleEstimators table1() { return estimators_from(0.1457, 0.0295, 0.0107); }

inline LeverageFit table2() {
    LeverageFit f;
    f.tau_L = 0.0864;
    f.L0 = -30.9515;
    return f;
}

struct Range {
    double lo = INFINITY, hi = -INFINITY;
    void add(double v) { lo = std::min(lo, v), hi = std::max(hi, v); }
    bool contains(double v) const { return v >= lo && v <= hi; }
};

// Recovered-parameter ranges as every table entry moves within half a unit
// of its last printed digit (3 levels per entry).
struct RecoveryBox {
    Range a, b, c, rho;
};

inline RecoveryBox recovery_box() {
    RecoveryBox box;
    const std::array<double, 3> s{-1.0, 0.0, 1.0};
    for (double dA : s)
        for (double dB : s)
            for (double dC : s)
                for (double dT : s)
                    for (double dL : s) {
                        const auto e = estimators_from(0.1457 + 5e-5 * dA, 0.0295 + 5e-5 * dB, 0.0107 + 5e-5 * dC);
                        LeverageFit f;
                        f.tau_L = 0.0864 + 5e-5 * dT;
                        f.L0 = -30.9515 + 5e-5 * dL;
                        const auto p = recover_params(e, f);
                        box.a.add(p.a), box.b.add(p.b), box.c.add(p.c), box.rho.add(p.rho);
                    }
    return box;
}

}  // namespace igsv::testing
