#pragma once

// Sample statistics over one or many return paths, with batch-means
// standard errors.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace igsv {

// Row-major [n_paths x n_obs] block of returns.
struct ReturnsView {
    std::span<const double> data;
    std::size_t n_paths = 1;
    std::size_t n_obs = 0;

    double operator()(std::size_t path, std::size_t t) const { return data[path * n_obs + t]; }
    std::size_t total() const { return n_paths * n_obs; }
};

struct Estimate {
    double value = 0.0;
    double se = 0.0;  // batch-means standard error
};

struct SampleMoments {
    double mean = 0.0;
    double variance = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

inline SampleMoments sample_moments(std::span<const double> x) {
    if (x.size() < 2) throw std::invalid_argument("sample_moments: need at least two points");
    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - mean, d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    return {mean, m2, m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0};
}

namespace detail {

// Splits the sample into contiguous batches: whole paths when there are
// enough of them, otherwise equal time blocks of every path. Calls
// visit(batch, path, t_begin, t_end) for each piece.
inline std::size_t for_each_batch_piece(const ReturnsView& v, std::size_t batches,
                                        const std::function<void(std::size_t, std::size_t, std::size_t, std::size_t)>& visit) {
    if (v.n_paths >= batches) {
        for (std::size_t path = 0; path < v.n_paths; ++path) visit(path * batches / v.n_paths, path, 0, v.n_obs);
        return batches;
    }
    const std::size_t blocks = std::max<std::size_t>(1, std::min(batches, v.n_obs));
    for (std::size_t path = 0; path < v.n_paths; ++path)
        for (std::size_t b = 0; b < blocks; ++b) visit(b, path, b * v.n_obs / blocks, (b + 1) * v.n_obs / blocks);
    return blocks;
}

inline Estimate batch_estimate(double full, const std::vector<double>& per_batch) {
    const double nb = static_cast<double>(per_batch.size());
    if (per_batch.size() < 2) return {full, 0.0};
    double mean = 0.0;
    for (double v : per_batch) mean += v;
    mean /= nb;
    double ss = 0.0;
    for (double v : per_batch) ss += (v - mean) * (v - mean);
    return {full, std::sqrt(ss / (nb - 1.0) / nb)};
}

}  // namespace detail

inline constexpr std::size_t default_batches = 50;

// Mean of f(x) over all observations.
inline Estimate mean_of(const ReturnsView& v, const std::function<double(double)>& f, std::size_t batches = default_batches) {
    std::vector<double> sum(batches, 0.0), cnt(batches, 0.0);
    const std::size_t nb = detail::for_each_batch_piece(v, batches, [&](std::size_t b, std::size_t path, std::size_t lo, std::size_t hi) {
        for (std::size_t t = lo; t < hi; ++t) sum[b] += f(v(path, t));
        cnt[b] += static_cast<double>(hi - lo);
    });
    double s = 0.0, c = 0.0;
    std::vector<double> per;
    for (std::size_t b = 0; b < nb; ++b) {
        s += sum[b];
        c += cnt[b];
        if (cnt[b] > 0) per.push_back(sum[b] / cnt[b]);
    }
    return detail::batch_estimate(s / c, per);
}

// Mean of g(x_t, x_{t+lag}) over all in-path pairs, lag >= 0.
inline Estimate lagged_mean(const ReturnsView& v, std::size_t lag, const std::function<double(double, double)>& g,
                            std::size_t batches = default_batches) {
    std::vector<double> sum(batches, 0.0), cnt(batches, 0.0);
    const std::size_t nb = detail::for_each_batch_piece(v, batches, [&](std::size_t b, std::size_t path, std::size_t lo, std::size_t hi) {
        for (std::size_t t = lo; t < hi && t + lag < v.n_obs; ++t) {
            sum[b] += g(v(path, t), v(path, t + lag));
            cnt[b] += 1.0;
        }
    });
    double s = 0.0, c = 0.0;
    std::vector<double> per;
    for (std::size_t b = 0; b < nb; ++b) {
        s += sum[b];
        c += cnt[b];
        if (cnt[b] > 0) per.push_back(sum[b] / cnt[b]);
    }
    if (c == 0.0) throw std::invalid_argument("lagged_mean: lag exceeds path length");
    return detail::batch_estimate(s / c, per);
}

// Leverage estimator mean[x_t x_{t+lag}^2] / (mean[x^2])^2; negative lags
// pair x_t with x_{t-|lag|}^2.
inline Estimate leverage_estimate(const ReturnsView& v, long lag, std::size_t batches = default_batches) {
    struct Acc {
        double num = 0, nnum = 0, sq = 0, nsq = 0;
    };
    std::vector<Acc> acc(batches);
    const std::size_t k = static_cast<std::size_t>(std::labs(lag));
    const std::size_t nb = detail::for_each_batch_piece(v, batches, [&](std::size_t b, std::size_t path, std::size_t lo, std::size_t hi) {
        auto& a = acc[b];
        for (std::size_t t = lo; t < hi; ++t) {
            const double x = v(path, t);
            a.sq += x * x;
            a.nsq += 1.0;
            if (t + k < v.n_obs) {
                const double y = v(path, t + k);
                a.num += lag >= 0 ? x * y * y : y * x * x;
                a.nnum += 1.0;
            }
        }
    });
    auto ratio = [](const Acc& a) {
        const double m2 = a.sq / a.nsq;
        return (a.num / a.nnum) / (m2 * m2);
    };
    Acc total;
    std::vector<double> per;
    for (std::size_t b = 0; b < nb; ++b) {
        total.num += acc[b].num, total.nnum += acc[b].nnum, total.sq += acc[b].sq, total.nsq += acc[b].nsq;
        if (acc[b].nnum > 0 && acc[b].sq > 0) per.push_back(ratio(acc[b]));
    }
    if (total.nnum == 0.0) throw std::invalid_argument("leverage_estimate: lag exceeds path length");
    if (!(total.sq > 0.0)) throw std::invalid_argument("leverage_estimate: all-zero returns");
    return detail::batch_estimate(ratio(total), per);
}

// Pearson correlation between x_t^2 and x_{t+lag}^2 over all in-path pairs.
inline Estimate squared_autocorrelation_estimate(const ReturnsView& v, std::size_t lag, std::size_t batches = default_batches) {
    struct Acc {
        double n = 0, su = 0, sv = 0, suu = 0, svv = 0, suv = 0;
    };
    std::vector<Acc> acc(batches);
    const std::size_t nb = detail::for_each_batch_piece(v, batches, [&](std::size_t b, std::size_t path, std::size_t lo, std::size_t hi) {
        auto& a = acc[b];
        for (std::size_t t = lo; t < hi && t + lag < v.n_obs; ++t) {
            const double x = v(path, t), y = v(path, t + lag);
            const double u = x * x, w = y * y;
            a.n += 1.0, a.su += u, a.sv += w, a.suu += u * u, a.svv += w * w, a.suv += u * w;
        }
    });
    auto pearson = [](const Acc& a) {
        const double mu = a.su / a.n, mv = a.sv / a.n;
        const double cov = a.suv / a.n - mu * mv;
        const double vu = a.suu / a.n - mu * mu, vv = a.svv / a.n - mv * mv;
        return cov / std::sqrt(vu * vv);
    };
    Acc total;
    std::vector<double> per;
    for (std::size_t b = 0; b < nb; ++b) {
        const auto& a = acc[b];
        total.n += a.n, total.su += a.su, total.sv += a.sv, total.suu += a.suu, total.svv += a.svv, total.suv += a.suv;
        if (a.n > 2) per.push_back(pearson(a));
    }
    if (total.n < 3) throw std::invalid_argument("squared_autocorrelation_estimate: insufficient data");
    if (lag == 0) return {1.0, 0.0};
    return detail::batch_estimate(pearson(total), per);
}

}  // namespace igsv
