#pragma once

// Flat key=value parameter files and duration strings.

#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "igsv/data.hpp"
#include "igsv/model.hpp"

namespace igsv {

inline std::map<std::string, std::string> read_key_values(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto view = detail::trim(line);
        if (view.empty() || view.front() == '#') continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) throw DataError(detail::line_error(line_no, "expected key=value"));
        kv[std::string(detail::trim(view.substr(0, eq)))] = std::string(detail::trim(view.substr(eq + 1)));
    }
    return kv;
}

// Keys a, b, c, rho; unknown keys are ignored, missing ones are an error.
inline ModelParams read_params(std::istream& in) {
    const auto kv = read_key_values(in);
    ModelParams p;
    auto get = [&](const char* key, double& out) {
        auto it = kv.find(key);
        if (it == kv.end()) throw DataError(std::string("parameter file lacks key '") + key + "'");
        if (!detail::parse_double(it->second, out)) throw DataError(std::string("parameter '") + key + "' is not a number");
    };
    get("a", p.a);
    get("b", p.b);
    get("c", p.c);
    get("rho", p.rho);
    return p;
}

inline ModelParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return read_params(in);
}

inline void write_params(std::ostream& os, const ModelParams& p) {
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << "a=" << p.a << "\nb=" << p.b << "\nc=" << p.c << "\nrho=" << p.rho << '\n';
}

inline std::optional<ModelParams> preset_params(const std::string& name) {
    if (name == "table3") return table3_params;
    if (name == "fig1") return fig1_params;
    return std::nullopt;
}

// "<n>d" trading days or "<x>y" years (a bare number is years); returns yr.
inline double parse_duration(const std::string& text) {
    auto s = detail::trim(text);
    if (s.empty()) throw std::invalid_argument("empty duration");
    double scale = 1.0;
    if (s.back() == 'd' || s.back() == 'D') {
        scale = one_day;
        s.remove_suffix(1);
    } else if (s.back() == 'y' || s.back() == 'Y') {
        s.remove_suffix(1);
    }
    double v = 0.0;
    if (!detail::parse_double(s, v)) throw std::invalid_argument("malformed duration '" + text + "'");
    return v * scale;
}

}  // namespace igsv
