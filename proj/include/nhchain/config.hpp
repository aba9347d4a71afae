#pragma once

#include <cctype>
#include <complex>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nhchain/capacitance.hpp"
#include "nhchain/defect.hpp"
#include "nhchain/errors.hpp"
#include "nhchain/finite.hpp"
#include "nhchain/geometry.hpp"
#include "nhchain/spectra.hpp"

namespace nhchain {

// Experiment description: sectioned key = value text. Every key has a default
// equal to the module-level default, unknown keys are rejected.
struct ExperimentConfig {
    // [geometry]
    double radius = 1.0;
    double gap_in = 0.5;
    double gap_out = 6.0;
    Separation separation = Separation::gap;
    // [material]
    complexd kappa1{1.0, 0.0};
    complexd kappa2{1.0, 0.0};
    double kappa_bg = 7000.0;
    double rho_bg = 7000.0;
    double rho_b = 1.0;
    // [numerics]
    int nmult = 10;
    int grid = 128;
    double gamma_eps = 1e-3;      // units of pi/L
    double green_tol = 1e-10;
    double flatness_threshold = 1e-3;
    int laurent_mmax = 40;
    // [run]
    int cells = 12;               // cells per side (finite) or M (geomdefect)
    int threads = 1;
    std::string out = "out";

    ChainGeometry geometry() const {
        return ChainGeometry(radius, gap_in, gap_out, separation);
    }
    MaterialConfig material() const {
        MaterialConfig m;
        m.kappa1 = kappa1;
        m.kappa2 = kappa2;
        m.kappa_bg = kappa_bg;
        m.rho_bg = rho_bg;
        m.rho_b = rho_b;
        return m;
    }
    CapacitanceOptions cap_options() const {
        CapacitanceOptions o;
        o.nmult = nmult;
        o.gamma_eps_frac = gamma_eps;
        o.green.target_tol = green_tol;
        o.threads = threads;
        return o;
    }
    BandOptions band_options() const {
        BandOptions o;
        o.grid = grid;
        o.cap = cap_options();
        return o;
    }
    DefectOptions defect_options() const {
        DefectOptions o;
        o.grid = grid;
        o.flatness_threshold = flatness_threshold;
        o.cap = cap_options();
        return o;
    }
    FiniteOptions finite_options() const {
        FiniteOptions o;
        o.nmult = nmult;
        o.threads = threads;
        return o;
    }

    std::string canonical() const;
    std::uint64_t hash() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& v, int line) {
    try {
        std::size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size()) throw config_error("trailing characters in number '" + v + "'", line);
        return d;
    } catch (const config_error&) {
        throw;
    } catch (...) {
        throw config_error("cannot parse number '" + v + "'", line);
    }
}

inline int parse_int(const std::string& v, int line) {
    const double d = parse_double(v, line);
    const int i = static_cast<int>(std::lround(d));
    if (std::abs(d - i) > 0) throw config_error("expected an integer, got '" + v + "'", line);
    return i;
}

// complex values in the forms "a", "bi", "a+bi", "a-bi" (spaces allowed)
inline complexd parse_complex(std::string v, int line) {
    std::string s;
    for (char c : v)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw config_error("empty complex value", line);
    const bool has_i = s.back() == 'i' || s.back() == 'I';
    if (!has_i) return {parse_double(s, line), 0.0};
    s.pop_back();
    // split at the sign that separates real and imaginary parts
    std::size_t split = std::string::npos;
    for (std::size_t k = s.size(); k-- > 1;) {
        if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    if (split == std::string::npos) {
        if (s.empty() || s == "+" || s == "-") s += "1";
        return {0.0, parse_double(s, line)};
    }
    std::string im = s.substr(split);
    if (im == "+" || im == "-") im += "1";
    return {parse_double(s.substr(0, split), line), parse_double(im, line)};
}

} // namespace detail

inline ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw config_error("unterminated section header", lineno);
            section = detail::trim(line.substr(1, line.size() - 2));
            if (section != "geometry" && section != "material" && section != "numerics" &&
                section != "run")
                throw config_error("unknown section [" + section + "]", lineno);
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw config_error("expected key = value", lineno);
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        const std::string qual = section.empty() ? key : section + "." + key;

        if (qual == "geometry.radius") cfg.radius = detail::parse_double(val, lineno);
        else if (qual == "geometry.gap_in") cfg.gap_in = detail::parse_double(val, lineno);
        else if (qual == "geometry.gap_out") cfg.gap_out = detail::parse_double(val, lineno);
        else if (qual == "geometry.separation") {
            if (val == "gap") cfg.separation = Separation::gap;
            else if (val == "center") cfg.separation = Separation::center;
            else throw config_error("separation must be 'gap' or 'center'", lineno);
        } else if (qual == "material.kappa1") cfg.kappa1 = detail::parse_complex(val, lineno);
        else if (qual == "material.kappa2") cfg.kappa2 = detail::parse_complex(val, lineno);
        else if (qual == "material.kappa_bg") cfg.kappa_bg = detail::parse_double(val, lineno);
        else if (qual == "material.rho_bg") cfg.rho_bg = detail::parse_double(val, lineno);
        else if (qual == "material.rho_b") cfg.rho_b = detail::parse_double(val, lineno);
        else if (qual == "numerics.nmult") cfg.nmult = detail::parse_int(val, lineno);
        else if (qual == "numerics.grid") cfg.grid = detail::parse_int(val, lineno);
        else if (qual == "numerics.gamma_eps") cfg.gamma_eps = detail::parse_double(val, lineno);
        else if (qual == "numerics.green_tol") cfg.green_tol = detail::parse_double(val, lineno);
        else if (qual == "numerics.flatness_threshold")
            cfg.flatness_threshold = detail::parse_double(val, lineno);
        else if (qual == "numerics.laurent_mmax")
            cfg.laurent_mmax = detail::parse_int(val, lineno);
        else if (qual == "run.cells") cfg.cells = detail::parse_int(val, lineno);
        else if (qual == "run.threads") cfg.threads = detail::parse_int(val, lineno);
        else if (qual == "run.out") cfg.out = val;
        else throw config_error("unknown key '" + qual + "'", lineno);
    }
    if (cfg.nmult < 1) throw config_error("numerics.nmult must be >= 1");
    if (cfg.grid < 8) throw config_error("numerics.grid must be >= 8");
    if (cfg.cells < 1) throw config_error("run.cells must be >= 1");
    if (cfg.threads < 0) throw config_error("run.threads must be >= 0");
    return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

inline std::string ExperimentConfig::canonical() const {
    char buf[640];
    std::snprintf(buf, sizeof buf,
                  "radius=%.17g;gap_in=%.17g;gap_out=%.17g;separation=%s;"
                  "kappa1=%.17g%+.17gi;kappa2=%.17g%+.17gi;kappa_bg=%.17g;rho_bg=%.17g;"
                  "rho_b=%.17g;nmult=%d;grid=%d;gamma_eps=%.17g;green_tol=%.17g;"
                  "flatness_threshold=%.17g;laurent_mmax=%d;cells=%d",
                  radius, gap_in, gap_out, separation == Separation::gap ? "gap" : "center",
                  kappa1.real(), kappa1.imag(), kappa2.real(), kappa2.imag(), kappa_bg, rho_bg,
                  rho_b, nmult, grid, gamma_eps, green_tol, flatness_threshold, laurent_mmax,
                  cells);
    return buf;
}

inline std::uint64_t ExperimentConfig::hash() const {
    // FNV-1a over the canonical form; thread count and output path excluded so
    // re-runs with different parallelism share the hash
    std::uint64_t h = 1469598103934665603ull;
    for (char c : canonical()) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace nhchain
