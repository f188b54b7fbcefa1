#pragma once

// Run configuration: one declarative value set per run, validated with precise
// field paths before anything is computed.

#include "fresco/liouvillian.hpp"

#include <map>
#include <string>

namespace fresco {

enum class RunMode { energy_sweep, spectrum, spectrum_theta_map, g2_scan, g3_scan, oracle_check };

inline RunMode parse_mode(const std::string& name)
{
    if (name == "energy_sweep") return RunMode::energy_sweep;
    if (name == "spectrum") return RunMode::spectrum;
    if (name == "spectrum_theta_map") return RunMode::spectrum_theta_map;
    if (name == "g2_scan") return RunMode::g2_scan;
    if (name == "g3_scan") return RunMode::g3_scan;
    if (name == "oracle_check") return RunMode::oracle_check;
    throw std::invalid_argument("mode: unknown mode '" + name + "'");
}

inline std::string mode_name(RunMode mode)
{
    switch (mode) {
    case RunMode::energy_sweep: return "energy_sweep";
    case RunMode::spectrum: return "spectrum";
    case RunMode::spectrum_theta_map: return "spectrum_theta_map";
    case RunMode::g2_scan: return "g2_scan";
    case RunMode::g3_scan: return "g3_scan";
    case RunMode::oracle_check: return "oracle_check";
    }
    return "?";
}

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct GridSpec {
    double start = 0.0;
    double stop = 2.5;
    double step = 1e-3;

    std::vector<double> points() const
    {
        std::vector<double> p;
        const auto n = size_t(std::floor((stop - start) / step + 0.5)) + 1;
        p.reserve(n);
        for (size_t i = 0; i < n; ++i)
            p.push_back(start + double(i) * step);
        return p;
    }

    void validate(const std::string& field) const
    {
        if (!(step > 0))
            throw ConfigError(field + ".step: must be > 0");
        if (!(stop > start))
            throw ConfigError(field + ".stop: must be > " + field + ".start");
    }
};

struct RunConfig {
    RunMode mode = RunMode::spectrum;
    RabiParams params{1.0, 1.0, 0.3, M_PI / 2};  // the reference configuration
    RateSet rates{5e-3, 5e-3, 5e-3, 5e-4};
    int n_fock = 20;
    int n_levels = 12;
    GridSpec grid;             // omega_1 grid; g grid in energy_sweep mode
    GridSpec theta_grid{0.0, M_PI, M_PI / 60};
    std::map<std::string, std::string> fixed;  // "w2"/"w3" -> symbol or number
    std::string out_dir = "run";
    double oracle_epsilon = 1e-4;
    int oracle_n_fock_spectrum = 10;
    int oracle_n_fock_g2 = 6;
    double oracle_s_tol = 0.02;
    double oracle_g2_tol = 0.05;
    double oracle_scaling_tol = 0.05;
    double peak_floor = 0.005;  // find_peaks prominence floor, fraction of max
    int threads = 1;

    void validate() const
    {
        try {
            params.validate();
        } catch (const std::exception& e) {
            throw ConfigError(std::string("params: ") + e.what());
        }
        const bool needs_sensor =
            mode != RunMode::energy_sweep;
        try {
            rates.validate(needs_sensor);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("rates: ") + e.what());
        }
        if (n_fock < 1)
            throw ConfigError("n_fock: must be >= 1");
        if (n_levels < 2 || n_levels > 2 * (n_fock + 1))
            throw ConfigError("n_levels: must be in [2, dim]");
        grid.validate("grid");
        if (mode == RunMode::spectrum_theta_map)
            theta_grid.validate("theta_grid");
        if (mode == RunMode::g2_scan && fixed.count("w2") == 0)
            throw ConfigError("fixed.w2: required for g2_scan");
        if (mode == RunMode::g3_scan && (fixed.count("w2") == 0 || fixed.count("w3") == 0))
            throw ConfigError("fixed.w2, fixed.w3: required for g3_scan");
        for (const auto& [key, value] : fixed) {
            if (key != "w2" && key != "w3")
                throw ConfigError("fixed." + key + ": unknown fixed-frequency key");
            if (value.empty())
                throw ConfigError("fixed." + key + ": empty value");
        }
        if (out_dir.empty())
            throw ConfigError("out_dir: must not be empty");
        if (!(oracle_epsilon > 0))
            throw ConfigError("oracle_epsilon: must be > 0");
        if (threads < 1)
            throw ConfigError("threads: must be >= 1");
        if (!(peak_floor >= 0 && peak_floor < 1))
            throw ConfigError("peak_floor: must be in [0, 1)");
    }
};

}  // namespace fresco
