#pragma once

// Monte Carlo engine for the coupled (X, Y) system with correlated Wiener
// increments and full truncation at Y = 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "igsv/data.hpp"
#include "igsv/model.hpp"
#include "igsv/random.hpp"
#include "igsv/stats.hpp"

namespace igsv {

enum class InitKind { Stationary, FixedY, BurnIn };
enum class Scheme { EulerFT, MilsteinFT };

inline std::string_view to_string(InitKind k) {
    switch (k) {
        case InitKind::Stationary: return "stationary";
        case InitKind::FixedY: return "fixed";
        case InitKind::BurnIn: return "burnin";
    }
    return "?";
}

inline std::string_view to_string(Scheme s) { return s == Scheme::EulerFT ? "euler" : "milstein"; }

struct SimConfig {
    std::size_t n_paths = 1;
    double horizon = 1.0;       // yr
    double dt_obs = one_day;    // yr between recorded returns
    int substeps = 32;          // integration steps per observation
    std::uint64_t seed = 1;
    InitKind init = InitKind::Stationary;
    double y0 = 0.0;            // FixedY and BurnIn starting value
    double burn_in = 0.0;       // BurnIn warm-up length, yr
    Scheme scheme = Scheme::MilsteinFT;
    unsigned threads = 1;       // worker count; does not affect results

    std::size_t n_obs() const { return static_cast<std::size_t>(std::llround(horizon / dt_obs)); }

    void validate() const {
        if (n_paths < 1) throw std::invalid_argument("SimConfig: n_paths must be >= 1");
        if (substeps < 1) throw std::invalid_argument("SimConfig: substeps must be >= 1");
        if (!(dt_obs > 0.0) || !(horizon >= dt_obs * (1.0 - 1e-12))) {
            throw std::invalid_argument("SimConfig: need dt_obs > 0 and horizon >= dt_obs");
        }
        if (init != InitKind::Stationary && !(y0 >= 0.0)) throw std::invalid_argument("SimConfig: y0 must be >= 0");
        if (!(burn_in >= 0.0)) throw std::invalid_argument("SimConfig: burn_in must be >= 0");
    }
};

struct PathEnsemble {
    std::vector<double> returns;  // row-major [n_paths x n_obs]
    std::vector<double> y_terminal;
    std::size_t n_paths = 0;
    std::size_t n_obs = 0;
    SimConfig config;
    ModelParams params;

    double dt_obs() const { return config.dt_obs; }
    ReturnsView view() const { return {returns, n_paths, n_obs}; }
    std::span<const double> path(std::size_t i) const { return std::span<const double>(returns).subspan(i * n_obs, n_obs); }

    // All paths concatenated into one series.
    ReturnSeries as_series() const { return ReturnSeries{returns, config.dt_obs, 0.0}; }
};

// sqrt(c) y0 ~ Inverse Gamma(nu, lambda): draw u ~ Gamma(nu, rate lambda), y0 = 1 / (u sqrt(c)).
template <class Rng>
double sample_stationary_y(const ModelParams& p, Rng& rng) {
    const double nu = 1.0 - 2.0 * p.a / p.c;
    const double lambda = 2.0 * p.b / std::sqrt(p.c);
    const double u = sample_gamma(rng, nu, lambda);
    return 1.0 / (u * std::sqrt(p.c));
}

namespace detail {

struct PathState {
    double x = 0.0;
    double y = 0.0;
};

template <class Rng>
void advance(PathState& s, const ModelParams& p, Scheme scheme, double h, long steps, Rng& rng,
             std::normal_distribution<double>& normal) {
    const double sqh = std::sqrt(h);
    const double sqc = std::sqrt(p.c);
    const double mix = std::sqrt(std::max(0.0, 1.0 - p.rho * p.rho));
    const bool milstein = scheme == Scheme::MilsteinFT;
    for (long i = 0; i < steps; ++i) {
        const double w1 = normal(rng);
        const double z = normal(rng);
        const double dw1 = sqh * w1;
        const double dw2 = sqh * (p.rho * w1 + mix * z);
        const double yp = std::max(s.y, 0.0);
        s.x += sqc * yp * dw1;
        double dy = (p.a * yp + p.b) * h + sqc * yp * dw2;
        if (milstein) dy += 0.5 * p.c * yp * (dw2 * dw2 - h);
        s.y += dy;
    }
}

}  // namespace detail

inline void validate_dynamics(const ModelParams& p, const SimConfig& cfg) {
    // b = 0 is admitted for a fixed start (Y absorbed at zero); the
    // stationary law needs b > 0.
    const bool absorbing = p.b == 0.0 && cfg.init != InitKind::Stationary;
    if (!absorbing) {
        p.validate();
        return;
    }
    ModelParams shifted = p;
    shifted.b = 1.0;
    shifted.validate();
}

inline PathEnsemble simulate(const ModelParams& p, const SimConfig& cfg) {
    cfg.validate();
    validate_dynamics(p, cfg);

    PathEnsemble ens;
    ens.config = cfg;
    ens.params = p;
    ens.n_paths = cfg.n_paths;
    ens.n_obs = cfg.n_obs();
    ens.returns.assign(ens.n_paths * ens.n_obs, 0.0);
    ens.y_terminal.assign(ens.n_paths, 0.0);

    const double h = cfg.dt_obs / cfg.substeps;
    const long burn_steps = static_cast<long>(std::llround(cfg.burn_in / h));

    auto run_path = [&](std::size_t path) {
        auto rng = substream(cfg.seed, path);
        std::normal_distribution<double> normal(0.0, 1.0);
        detail::PathState s;
        s.y = cfg.init == InitKind::Stationary ? sample_stationary_y(p, rng) : cfg.y0;
        if (burn_steps > 0) detail::advance(s, p, cfg.scheme, h, burn_steps, rng, normal);
        double* row = ens.returns.data() + path * ens.n_obs;
        for (std::size_t t = 0; t < ens.n_obs; ++t) {
            const double x_before = s.x;
            detail::advance(s, p, cfg.scheme, h, cfg.substeps, rng, normal);
            row[t] = s.x - x_before;
        }
        ens.y_terminal[path] = std::max(s.y, 0.0);
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(cfg.n_paths)));
    if (workers == 1) {
        for (std::size_t i = 0; i < cfg.n_paths; ++i) run_path(i);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < cfg.n_paths; i += workers) run_path(i);
            });
        }
        for (auto& th : pool) th.join();
    }
    return ens;
}

// Non-overlapping k-step sums along every path.
inline PathEnsemble aggregate(const PathEnsemble& ens, std::size_t k) {
    if (k < 1) throw std::invalid_argument("aggregate: k must be >= 1");
    if (ens.n_obs < k) throw DataError("aggregate: paths shorter than the aggregation window");
    PathEnsemble out;
    out.params = ens.params;
    out.config = ens.config;
    out.config.dt_obs = ens.config.dt_obs * static_cast<double>(k);
    out.config.substeps = ens.config.substeps * static_cast<int>(k);
    out.n_paths = ens.n_paths;
    out.n_obs = ens.n_obs / k;
    out.config.horizon = out.config.dt_obs * static_cast<double>(out.n_obs);
    out.y_terminal = ens.y_terminal;
    out.returns.resize(out.n_paths * out.n_obs);
    for (std::size_t i = 0; i < ens.n_paths; ++i)
        for (std::size_t j = 0; j < out.n_obs; ++j) {
            double s = 0.0;
            for (std::size_t m = 0; m < k; ++m) s += ens.returns[i * ens.n_obs + j * k + m];
            out.returns[i * out.n_obs + j] = s;
        }
    return out;
}

struct StatisticSpec {
    enum class Kind { Moment, AbsMoment, LaggedProduct, Leverage, SquaredAutocorrelation };
    Kind kind = Kind::Moment;
    int order = 2;  // Moment / AbsMoment
    long lag = 1;   // lagged statistics, in observations
};

// Path- and time-averaged functional with a batch-means standard error.
inline Estimate mc_statistic(const PathEnsemble& ens, const StatisticSpec& spec, std::size_t batches = default_batches) {
    if (ens.returns.empty()) throw std::invalid_argument("mc_statistic: empty ensemble");
    const auto v = ens.view();
    using K = StatisticSpec::Kind;
    switch (spec.kind) {
        case K::Moment: {
            const int n = spec.order;
            return mean_of(v, [n](double x) { return std::pow(x, n); }, batches);
        }
        case K::AbsMoment: {
            const int n = spec.order;
            return mean_of(v, [n](double x) { return std::pow(std::abs(x), n); }, batches);
        }
        case K::LaggedProduct:
            return lagged_mean(v, static_cast<std::size_t>(std::labs(spec.lag)), [](double x, double y) { return x * y; }, batches);
        case K::Leverage: return leverage_estimate(v, spec.lag, batches);
        case K::SquaredAutocorrelation:
            return squared_autocorrelation_estimate(v, static_cast<std::size_t>(std::labs(spec.lag)), batches);
    }
    throw std::logic_error("mc_statistic: unknown statistic");
}

// One row per path; metadata goes to a separate key=value sidecar.
inline void write_ensemble_csv(std::ostream& os, const PathEnsemble& ens) {
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (std::size_t i = 0; i < ens.n_paths; ++i) {
        for (std::size_t t = 0; t < ens.n_obs; ++t) {
            if (t) os << ',';
            os << ens.returns[i * ens.n_obs + t];
        }
        os << '\n';
    }
}

inline void write_ensemble_metadata(std::ostream& os, const PathEnsemble& ens) {
    const auto& c = ens.config;
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << "a=" << ens.params.a << "\nb=" << ens.params.b << "\nc=" << ens.params.c << "\nrho=" << ens.params.rho << '\n';
    os << "seed=" << c.seed << "\nn_paths=" << c.n_paths << "\nn_obs=" << ens.n_obs << "\nhorizon=" << c.horizon
       << "\ndt_obs=" << c.dt_obs << "\nsubsteps=" << c.substeps << "\ninit=" << to_string(c.init) << "\ny0=" << c.y0
       << "\nburn_in=" << c.burn_in << "\nscheme=" << to_string(c.scheme) << '\n';
}

}  // namespace igsv
