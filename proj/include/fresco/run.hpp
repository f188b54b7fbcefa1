#pragma once

// Mode orchestration: build the dressed system once, run the requested scan,
// and write one output directory per run (config snapshot, CSV/JSON, peaks).

#include "fresco/run_config.hpp"
#include "fresco/scan_io.hpp"

#include <iostream>

namespace fresco {

struct DressedSystem {
    TruncatedSpace space;
    RabiParams params;
    RateSet rates;
    int n_levels = 0;
    DressedBasis basis;
    Matrix jump;
    Liouvillian l0;
    Vector rho_ss_vec;
};

// require_converged = false skips the cutoff-bump gate; used for reduced-cutoff
// oracle comparisons where both sides share the same truncated basis anyway.
inline DressedSystem build_system(const RabiParams& params, const RateSet& rates, int n_fock,
                                  int n_levels, bool require_converged = true)
{
    DressedSystem sys;
    sys.space = build_space(n_fock);
    sys.params = params;
    sys.rates = rates;
    sys.n_levels = n_levels;
    sys.basis = require_converged ? diagonalize(sys.space, params, n_levels)
                                  : eigensystem(rabi_hamiltonian(sys.space, params), sys.space);
    if (n_levels > sys.basis.dim())
        throw std::invalid_argument("build_system: n_levels exceeds space dimension");
    sys.jump = sensor_jump_op(sys.basis, sys.space, params, n_levels);
    sys.l0 = build_L0(sys.basis, sys.space, params, rates, n_levels);
    sys.rho_ss_vec = vectorize(steady_state(sys.l0));
    return sys;
}

inline nlohmann::json config_json(const RunConfig& c)
{
    return {
        {"schema_version", kSchemaVersion},
        {"mode", mode_name(c.mode)},
        {"params", params_json(c.params)},
        {"rates", rates_json(c.rates)},
        {"n_fock", c.n_fock},
        {"n_levels", c.n_levels},
        {"grid", {{"start", c.grid.start}, {"stop", c.grid.stop}, {"step", c.grid.step}}},
        {"theta_grid",
         {{"start", c.theta_grid.start}, {"stop", c.theta_grid.stop}, {"step", c.theta_grid.step}}},
        {"fixed", c.fixed},
        {"out_dir", c.out_dir},
        {"oracle_epsilon", c.oracle_epsilon},
        {"peak_floor", c.peak_floor},
        {"threads", c.threads},
    };
}

namespace detail {

inline ScanMeta make_meta(const RunConfig& c)
{
    ScanMeta meta;
    meta.params = c.params;
    meta.rates = c.rates;
    meta.n_fock = c.n_fock;
    meta.n_levels = c.n_levels;
    return meta;
}

inline int finish_scan(const RunConfig& c, const std::filesystem::path& dir,
                       const std::string& stem, const Scan& scan, const DressedSystem& sys)
{
    const auto table = transition_table(sys.basis, emission_operator(sys.space, c.params.eta()),
                                        c.n_levels);
    const auto peaks = find_peaks(scan, c.peak_floor, scan.Gamma, table);
    write_scan_csv(dir / (stem + ".csv"), scan);
    write_json(dir / (stem + ".json"), scan_json(mode_name(c.mode), scan, peaks));
    nlohmann::json pj = {{"schema_version", kSchemaVersion}, {"peaks", peaks_json(peaks)}};
    write_json(dir / "peaks.json", pj);
    if (scan.n_failed > 0) {
        std::cerr << stem << ": " << scan.n_failed
                  << " grid points failed (first error: " << scan.first_error << ")\n";
        return 1;
    }
    return 0;
}

inline int run_energy_sweep(const RunConfig& c, const std::filesystem::path& dir)
{
    const TruncatedSpace space = build_space(c.n_fock);
    const EnergySweep sweep =
        energy_sweep(space, c.params.omega_q, c.params.theta, c.grid.points());
    write_energy_sweep_csv(dir / "energy_sweep.csv", sweep);
    return 0;
}

inline int run_spectrum(const RunConfig& c, const std::filesystem::path& dir)
{
    const DressedSystem sys = build_system(c.params, c.rates, c.n_fock, c.n_levels);
    const SensorGrid grid{c.grid.points(), c.rates.Gamma};
    const Scan scan =
        power_spectrum(sys.l0, sys.jump, grid, sys.rho_ss_vec, c.threads, make_meta(c));
    return finish_scan(c, dir, "spectrum", scan, sys);
}

inline int run_theta_map(const RunConfig& c, const std::filesystem::path& dir)
{
    auto out = open_out(dir / "theta_map.csv");
    out << "theta,omega_1,value\n";
    int status = 0;
    for (double theta : c.theta_grid.points()) {
        RabiParams p = c.params;
        p.theta = theta;
        const DressedSystem sys = build_system(p, c.rates, c.n_fock, c.n_levels);
        const SensorGrid grid{c.grid.points(), c.rates.Gamma};
        ScanMeta meta = make_meta(c);
        meta.params = p;
        const Scan scan =
            power_spectrum(sys.l0, sys.jump, grid, sys.rho_ss_vec, c.threads, std::move(meta));
        for (size_t i = 0; i < scan.omega.size(); ++i)
            out << fmt9(theta) << ',' << fmt9(scan.omega[i]) << ',' << fmt9(scan.value[i]) << '\n';
        if (scan.n_failed > 0) {
            std::cerr << "theta_map: " << scan.n_failed << " failed points at theta = " << theta
                      << "\n";
            status = 1;
        }
    }
    return status;
}

inline int run_correlation_scan(const RunConfig& c, const std::filesystem::path& dir)
{
    const DressedSystem sys = build_system(c.params, c.rates, c.n_fock, c.n_levels);
    const SensorGrid grid{c.grid.points(), c.rates.Gamma};
    const double w2 = parse_fixed_frequency(c.fixed.at("w2"), sys.basis);
    Scan scan;
    std::string stem;
    if (c.mode == RunMode::g2_scan) {
        scan = g2_scan(sys.l0, sys.jump, grid, w2, sys.rho_ss_vec, c.threads, make_meta(c));
        stem = "g2_scan";
    } else {
        const double w3 = parse_fixed_frequency(c.fixed.at("w3"), sys.basis);
        scan = g3_scan(sys.l0, sys.jump, grid, w2, w3, sys.rho_ss_vec, c.threads, make_meta(c));
        stem = "g3_scan";
    }
    return finish_scan(c, dir, stem, scan, sys);
}

inline int run_oracle_check(const RunConfig& c, const std::filesystem::path& dir)
{
    nlohmann::json report = {{"schema_version", kSchemaVersion},
                             {"epsilon", c.oracle_epsilon},
                             {"params", params_json(c.params)},
                             {"rates", rates_json(c.rates)}};
    bool all_pass = true;

    // Sensor-population scaling between epsilon and epsilon/2.
    {
        const int n_fock = c.oracle_n_fock_spectrum;
        const DressedSystem sys = build_system(c.params, c.rates, n_fock, c.n_levels, false);
        const double w10 = sys.basis.omega(1, 0);
        auto population = [&](double eps) {
            const SensorSpec sensor{w10, c.rates.Gamma, eps};
            const auto comp = composite_liouvillian(sys.basis, sys.space, c.params, c.rates,
                                                    c.n_levels, {&sensor, 1});
            return sensor_population(comp, steady_state(comp.liou, false), 0);
        };
        const double ratio = population(c.oracle_epsilon) / population(c.oracle_epsilon / 2);
        const bool pass = std::abs(ratio - 4.0) <= 4.0 * c.oracle_scaling_tol;
        all_pass = all_pass && pass;
        report["scaling"] = {{"omega", w10}, {"ratio", ratio}, {"pass", pass}};
        std::cout << "oracle_check scaling: ratio = " << ratio << (pass ? " PASS" : " FAIL")
                  << std::endl;
    }

    // Spectrum at the three largest peaks, reduced cutoff, both methods.
    {
        const int n_fock = c.oracle_n_fock_spectrum;
        const DressedSystem sys = build_system(c.params, c.rates, n_fock, c.n_levels, false);
        const SensorGrid grid{c.grid.points(), c.rates.Gamma};
        const Scan scan =
            power_spectrum(sys.l0, sys.jump, grid, sys.rho_ss_vec, c.threads, make_meta(c));
        const auto table = transition_table(
            sys.basis, emission_operator(sys.space, c.params.eta()), c.n_levels);
        auto peaks = find_peaks(scan, 1e-6, c.rates.Gamma, table);
        std::sort(peaks.begin(), peaks.end(),
                  [](const PeakAssignment& a, const PeakAssignment& b) {
                      return a.height > b.height;
                  });
        peaks.resize(std::min<size_t>(3, peaks.size()));
        std::vector<double> freqs;
        for (const auto& p : peaks)
            freqs.push_back(p.omega_peak);
        std::sort(freqs.begin(), freqs.end());

        Scan pert;
        pert.omega = freqs;
        pert.Gamma = c.rates.Gamma;
        for (double w : freqs) {
            SensorGrid point{{w}, c.rates.Gamma};
            pert.value.push_back(
                power_spectrum(sys.l0, sys.jump, point, sys.rho_ss_vec, 1).value[0]);
        }
        const SensorGrid oracle_grid{freqs, c.rates.Gamma};
        const Scan orac = oracle_spectrum(sys.basis, sys.space, c.params, c.rates, c.n_levels,
                                          oracle_grid, c.oracle_epsilon, c.threads);
        const DiscrepancyReport cmp = compare_reports(pert, orac, c.oracle_s_tol);
        all_pass = all_pass && cmp.all_pass;
        report["spectrum"] = discrepancy_json(cmp);
        std::cout << "oracle_check spectrum: max rel err = " << cmp.max_rel_err()
                  << (cmp.all_pass ? " PASS" : " FAIL") << std::endl;
    }

    // g2 at the reference peak/dip transitions, reduced cutoff, both methods.
    {
        const int n_fock = c.oracle_n_fock_g2;
        const DressedSystem sys = build_system(c.params, c.rates, n_fock, c.n_levels, false);
        const double w2 = c.fixed.count("w2")
                              ? parse_fixed_frequency(c.fixed.at("w2"), sys.basis)
                              : sys.basis.omega(1, 0);
        const std::pair<int, int> pairs[] = {{3, 1}, {4, 1}, {3, 2}, {4, 2}, {2, 0}};
        Scan pert, orac;
        pert.Gamma = orac.Gamma = c.rates.Gamma;
        for (auto [k, j] : pairs) {
            const double w1 = sys.basis.omega(k, j);
            const auto pv = g2(sys.l0, sys.jump, w1, w2, c.rates.Gamma, sys.rho_ss_vec);
            const auto ov = oracle_g2(sys.basis, sys.space, c.params, c.rates, c.n_levels, w1, w2,
                                      c.rates.Gamma, c.oracle_epsilon);
            if (!pv || !ov)
                throw std::runtime_error("oracle_check: no emission at a comparison frequency");
            pert.omega.push_back(w1);
            pert.value.push_back(*pv);
            orac.omega.push_back(w1);
            orac.value.push_back(*ov);
        }
        const DiscrepancyReport cmp = compare_reports(pert, orac, c.oracle_g2_tol);
        all_pass = all_pass && cmp.all_pass;
        report["g2"] = discrepancy_json(cmp);
        std::cout << "oracle_check g2: max rel err = " << cmp.max_rel_err()
                  << (cmp.all_pass ? " PASS" : " FAIL") << std::endl;
    }

    report["all_pass"] = all_pass;
    write_json(dir / "oracle_report.json", report);
    return all_pass ? 0 : 1;
}

}  // namespace detail

// Returns the process exit status: 0 on success, nonzero when any scan point
// or oracle tolerance failed.
inline int run(const RunConfig& config)
{
    config.validate();
    const std::filesystem::path dir(config.out_dir);
    std::filesystem::create_directories(dir);
    write_json(dir / "config.json", config_json(config));

    switch (config.mode) {
    case RunMode::energy_sweep: return detail::run_energy_sweep(config, dir);
    case RunMode::spectrum: return detail::run_spectrum(config, dir);
    case RunMode::spectrum_theta_map: return detail::run_theta_map(config, dir);
    case RunMode::g2_scan:
    case RunMode::g3_scan: return detail::run_correlation_scan(config, dir);
    case RunMode::oracle_check: return detail::run_oracle_check(config, dir);
    }
    return 2;
}

}  // namespace fresco
