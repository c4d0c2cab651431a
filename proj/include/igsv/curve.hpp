#pragma once

#include <cstddef>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace igsv {

enum class CurveKind { YMoment, XMoment, Leverage, Autocorrelation, PDF };

inline std::string_view to_string(CurveKind k) {
    switch (k) {
        case CurveKind::YMoment: return "y_moment";
        case CurveKind::XMoment: return "x_moment";
        case CurveKind::Leverage: return "leverage";
        case CurveKind::Autocorrelation: return "autocorrelation";
        case CurveKind::PDF: return "pdf";
    }
    return "unknown";
}

// Sampled function of lag or time (yr).
struct Curve {
    std::vector<double> grid;
    std::vector<double> values;
    CurveKind kind = CurveKind::Leverage;

    std::size_t size() const { return grid.size(); }

    void check() const {
        if (grid.size() != values.size()) throw std::logic_error("curve grid and values differ in length");
        for (std::size_t i = 1; i < grid.size(); ++i) {
            if (!(grid[i] > grid[i - 1])) throw std::logic_error("curve grid must be strictly increasing");
        }
    }

    // Column name of the grid, with units.
    std::string grid_header() const {
        switch (kind) {
            case CurveKind::YMoment:
            case CurveKind::XMoment: return "t_yr";
            case CurveKind::PDF: return "x";
            default: return "lag_yr";
        }
    }
};

inline void write_curve_csv(std::ostream& os, const Curve& curve) {
    curve.check();
    os << curve.grid_header() << ',' << to_string(curve.kind) << '\n';
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (std::size_t i = 0; i < curve.size(); ++i) os << curve.grid[i] << ',' << curve.values[i] << '\n';
}

inline void write_curve_csv(const std::string& path, const Curve& curve) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_curve_csv(out, curve);
}

}  // namespace igsv
