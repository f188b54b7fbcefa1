#pragma once

// CSV and JSON serialization of scans, peak lists and oracle reports.
// CSV numbers carry 9 significant digits; output is deterministic for a fixed
// build and config.

#include "fresco/oracle.hpp"
#include "fresco/peaks.hpp"
#include "fresco/rabi.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace fresco {

inline constexpr int kSchemaVersion = 1;

inline std::string fmt9(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open output file " + path.string());
    return out;
}

inline void write_scan_csv(const std::filesystem::path& path, const Scan& scan)
{
    auto out = open_out(path);
    out << "omega_1,value\n";
    for (size_t i = 0; i < scan.omega.size(); ++i)
        out << fmt9(scan.omega[i]) << ',' << fmt9(scan.value[i]) << '\n';
}

inline void write_energy_sweep_csv(const std::filesystem::path& path, const EnergySweep& sweep)
{
    auto out = open_out(path);
    out << "g";
    for (int j = 0; j < 8; ++j)
        out << ",E_" << j;
    for (int j = 0; j < 8; ++j)
        out << ",parity_" << j;
    out << '\n';
    for (size_t i = 0; i < sweep.g.size(); ++i) {
        out << fmt9(sweep.g[i]);
        for (int j = 0; j < 8; ++j)
            out << ',' << fmt9(sweep.energies[i][j]);
        for (int j = 0; j < 8; ++j)
            out << ',' << parity_char(sweep.parity[i][j]);
        out << '\n';
    }
}

inline nlohmann::json params_json(const RabiParams& p)
{
    return {{"omega_c", p.omega_c}, {"omega_q", p.omega_q}, {"g", p.g}, {"theta", p.theta}};
}

inline nlohmann::json rates_json(const RateSet& r)
{
    return {{"kappa", r.kappa}, {"gamma", r.gamma}, {"Gamma", r.Gamma}, {"P_inc", r.P_inc}};
}

inline nlohmann::json peaks_json(const std::vector<PeakAssignment>& peaks)
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : peaks) {
        nlohmann::json item = {{"omega", p.omega_peak}, {"height", p.height}};
        if (p.assigned()) {
            item["upper"] = p.upper;
            item["lower"] = p.lower;
            item["transition"] = std::to_string(p.upper) + "->" + std::to_string(p.lower);
        } else {
            item["transition"] = "unassigned";
        }
        item["label"] = p.label;
        arr.push_back(item);
    }
    return arr;
}

inline nlohmann::json scan_json(const std::string& mode, const Scan& scan,
                                const std::vector<PeakAssignment>& peaks)
{
    nlohmann::json j = {
        {"schema_version", kSchemaVersion},
        {"mode", mode},
        {"params", params_json(scan.meta.params)},
        {"rates", rates_json(scan.meta.rates)},
        {"n_fock", scan.meta.n_fock},
        {"n_levels", scan.meta.n_levels},
        {"Gamma_sensor", scan.Gamma},
        {"fixed_frequencies", scan.meta.fixed_frequencies},
        {"omega", scan.omega},
        {"value", scan.value},
        {"n_failed", scan.n_failed},
        {"peaks", peaks_json(peaks)},
    };
    if (!scan.first_error.empty())
        j["first_error"] = scan.first_error;
    return j;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j)
{
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

inline nlohmann::json discrepancy_json(const DiscrepancyReport& report)
{
    nlohmann::json points = nlohmann::json::array();
    for (const auto& pt : report.points)
        points.push_back({{"omega", pt.omega},
                          {"perturbative", pt.perturbative},
                          {"oracle", pt.oracle},
                          {"rel_err", pt.rel_err},
                          {"pass", pt.pass}});
    return {{"tolerance", report.tolerance}, {"points", points}, {"all_pass", report.all_pass}};
}

}  // namespace fresco
