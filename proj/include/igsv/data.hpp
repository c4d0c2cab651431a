#pragma once

// Price and return series: CSV ingestion, detrended log-returns,
// aggregation, and density histograms.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "igsv/model.hpp"

namespace igsv {

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PriceSeries {
    std::vector<std::string> dates;  // ISO-8601 day stamps, strictly increasing
    std::vector<double> closes;      // > 0
    std::size_t size() const { return closes.size(); }
};

// Detrended log-returns at a fixed horizon.
struct ReturnSeries {
    std::vector<double> values;  // Delta X per observation
    double dt = one_day;         // yr per observation
    double detrend_mean = 0.0;   // subtracted sample mean of the raw log-returns
    std::size_t size() const { return values.size(); }
};

struct EmpiricalPDF {
    std::vector<double> bin_centers;
    std::vector<double> densities;
    std::vector<std::size_t> counts;
    double bin_width = 0.0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t' || s.back() == '\n')) s.remove_suffix(1);
    return s;
}

inline bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    // from_chars rejects a leading '+'
    if (s.front() == '+') s.remove_prefix(1);
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

inline bool is_iso_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
        if (s[i] < '0' || s[i] > '9') return false;
    const int month = (s[5] - '0') * 10 + (s[6] - '0');
    const int day = (s[8] - '0') * 10 + (s[9] - '0');
    return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

inline std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        fields.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return fields;
}

inline std::string line_error(std::size_t line_no, const std::string& what) {
    return "line " + std::to_string(line_no) + ": " + what;
}

}  // namespace detail

// Reads `date,close` rows (comma or tab delimited, optional header,
// '#' comment lines ignored).
inline PriceSeries read_prices(std::istream& in) {
    PriceSeries series;
    std::string line;
    std::size_t line_no = 0;
    bool seen_data = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto view = detail::trim(line);
        if (view.empty() || view.front() == '#') continue;
        const char delim = view.find('\t') != std::string_view::npos ? '\t' : ',';
        const auto fields = detail::split(view, delim);
        if (fields.size() < 2) throw DataError(detail::line_error(line_no, "expected two columns date,close"));
        double close = 0.0;
        const bool numeric = detail::parse_double(fields[1], close);
        if (!seen_data && !numeric && !detail::is_iso_date(fields[0])) continue;  // header
        seen_data = true;
        if (!detail::is_iso_date(fields[0])) throw DataError(detail::line_error(line_no, "malformed date '" + std::string(fields[0]) + "'"));
        if (!numeric) throw DataError(detail::line_error(line_no, "malformed close '" + std::string(fields[1]) + "'"));
        if (!(close > 0.0) || !std::isfinite(close)) {
            throw DataError(detail::line_error(line_no, "non-positive price " + std::string(fields[1])));
        }
        std::string date(fields[0]);
        if (!series.dates.empty()) {
            if (date == series.dates.back()) throw DataError(detail::line_error(line_no, "duplicate date " + date));
            if (date < series.dates.back()) throw DataError(detail::line_error(line_no, "dates not increasing at " + date));
        }
        series.dates.push_back(std::move(date));
        series.closes.push_back(close);
    }
    return series;
}

inline PriceSeries load_prices(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    try {
        return read_prices(in);
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

inline void write_prices(std::ostream& os, const PriceSeries& prices) {
    os << "date,close\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (std::size_t i = 0; i < prices.size(); ++i) os << prices.dates[i] << ',' << prices.closes[i] << '\n';
}

// ln(S_{t+1}/S_t) minus its sample mean; one observation per trading day.
inline ReturnSeries log_returns(const PriceSeries& prices) {
    if (prices.size() < 2) throw DataError("need at least two prices for a return");
    ReturnSeries r;
    r.dt = one_day;
    r.values.resize(prices.size() - 1);
    for (std::size_t i = 0; i + 1 < prices.size(); ++i) r.values[i] = std::log(prices.closes[i + 1] / prices.closes[i]);
    const double mean = std::accumulate(r.values.begin(), r.values.end(), 0.0) / static_cast<double>(r.values.size());
    for (auto& v : r.values) v -= mean;
    r.detrend_mean = mean;
    return r;
}

// Non-overlapping sums of k consecutive returns; a trailing partial block is dropped.
inline ReturnSeries aggregate(const ReturnSeries& r, std::size_t k) {
    if (k < 1) throw std::invalid_argument("aggregate: k must be >= 1");
    if (r.size() < k) throw DataError("aggregate: series shorter than the aggregation window");
    ReturnSeries out;
    out.dt = r.dt * static_cast<double>(k);
    out.detrend_mean = r.detrend_mean * static_cast<double>(k);
    const std::size_t blocks = r.size() / k;
    out.values.resize(blocks);
    for (std::size_t i = 0; i < blocks; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) s += r.values[i * k + j];
        out.values[i] = s;
    }
    return out;
}

// `index,delta_x`, preceded by '#' metadata lines (dt, detrend_mean, extras).
inline void write_returns(std::ostream& os, const ReturnSeries& r,
                          const std::vector<std::pair<std::string, std::string>>& meta = {}) {
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& [k, v] : meta) os << "# " << k << '=' << v << '\n';
    os << "# dt=" << r.dt << '\n' << "# detrend_mean=" << r.detrend_mean << '\n';
    os << "index,delta_x\n";
    for (std::size_t i = 0; i < r.size(); ++i) os << i << ',' << r.values[i] << '\n';
}

inline ReturnSeries read_returns(std::istream& in) {
    ReturnSeries r;
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto view = detail::trim(line);
        if (view.empty()) continue;
        if (view.front() == '#') {
            const auto body = detail::trim(view.substr(1));
            const auto eq = body.find('=');
            if (eq == std::string_view::npos) continue;
            const auto key = detail::trim(body.substr(0, eq));
            double v = 0.0;
            if (key == "dt" && detail::parse_double(body.substr(eq + 1), v)) r.dt = v;
            if (key == "detrend_mean" && detail::parse_double(body.substr(eq + 1), v)) r.detrend_mean = v;
            continue;
        }
        const char delim = view.find('\t') != std::string_view::npos ? '\t' : ',';
        const auto fields = detail::split(view, delim);
        double v = 0.0;
        if (fields.size() < 2 || !detail::parse_double(fields[1], v)) {
            if (!header && r.values.empty()) {
                header = true;
                continue;
            }
            throw DataError(detail::line_error(line_no, "malformed return row"));
        }
        if (!std::isfinite(v)) throw DataError(detail::line_error(line_no, "non-finite return"));
        r.values.push_back(v);
    }
    if (!(r.dt > 0.0)) throw DataError("returns file declares non-positive dt");
    return r;
}

inline ReturnSeries load_returns(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    try {
        return read_returns(in);
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

// Reads either a returns file (header `index,delta_x`) or a price file.
inline ReturnSeries load_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    while (std::getline(in, line)) {
        const auto view = detail::trim(line);
        if (view.empty() || view.front() == '#') continue;
        const bool returns = view.find("delta_x") != std::string_view::npos;
        return returns ? load_returns(path) : log_returns(load_prices(path));
    }
    throw DataError(path + ": empty file");
}

struct BinSpec {
    std::size_t bins = 0;        // 0: Freedman-Diaconis width
    double half_range = 0.0;     // 0: max |x|; bins span [-half_range, half_range]
    std::size_t max_bins = 20000;
};

inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - w) + sorted[hi] * w;
}

// Density histogram on a range symmetric about zero.
inline EmpiricalPDF empirical_pdf(const std::vector<double>& x, const BinSpec& spec = {}) {
    if (x.size() < 100) throw DataError("empirical_pdf: need at least 100 points");
    std::vector<double> sorted(x);
    std::sort(sorted.begin(), sorted.end());
    double half = spec.half_range;
    if (half <= 0.0) half = std::max(std::abs(sorted.front()), std::abs(sorted.back()));
    if (!(half > 0.0)) throw DataError("empirical_pdf: degenerate (zero-width) data");

    std::size_t bins = spec.bins;
    if (bins == 0) {
        const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
        if (!(iqr > 0.0)) throw DataError("empirical_pdf: degenerate (zero interquartile range) data");
        const double width = 2.0 * iqr / std::cbrt(static_cast<double>(x.size()));
        bins = static_cast<std::size_t>(std::ceil(2.0 * half / width));
        bins = std::clamp<std::size_t>(bins, 1, spec.max_bins);
    }
    EmpiricalPDF pdf;
    pdf.bin_width = 2.0 * half / static_cast<double>(bins);
    pdf.counts.assign(bins, 0);
    std::size_t used = 0;
    for (double v : x) {
        if (v < -half || v > half) continue;
        auto idx = static_cast<std::size_t>(std::floor((v + half) / pdf.bin_width));
        if (idx >= bins) idx = bins - 1;
        ++pdf.counts[idx];
        ++used;
    }
    const double norm = 1.0 / (static_cast<double>(used) * pdf.bin_width);
    for (std::size_t i = 0; i < bins; ++i) {
        pdf.bin_centers.push_back(-half + (static_cast<double>(i) + 0.5) * pdf.bin_width);
        pdf.densities.push_back(static_cast<double>(pdf.counts[i]) * norm);
    }
    return pdf;
}

inline EmpiricalPDF empirical_pdf(const ReturnSeries& r, const BinSpec& spec = {}) { return empirical_pdf(r.values, spec); }

inline void write_pdf(std::ostream& os, const EmpiricalPDF& pdf) {
    os << "bin_center,density,count\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (std::size_t i = 0; i < pdf.bin_centers.size(); ++i)
        os << pdf.bin_centers[i] << ',' << pdf.densities[i] << ',' << pdf.counts[i] << '\n';
}

}  // namespace igsv
