// Command-line driver: sweep configuration, orchestration and file output.

#include "fresco/run.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"frequency-resolved emission of an ultrastrongly coupled qubit-cavity system"};
    app.set_config("--config", "", "declarative config file; command-line flags win");
    app.allow_config_extras(false);

    fresco::RunConfig config;
    std::string mode = "spectrum";
    std::vector<std::string> fixed;

    app.add_option("--mode", mode,
                   "energy_sweep | spectrum | spectrum_theta_map | g2_scan | g3_scan | "
                   "oracle_check")
        ->capture_default_str();
    app.add_option("--omega-q", config.params.omega_q, "qubit frequency (units of omega_c)")
        ->capture_default_str();
    app.add_option("--g", config.params.g, "coupling strength (units of omega_c)")
        ->capture_default_str();
    app.add_option("--theta", config.params.theta, "coupling mixing angle (radians)")
        ->capture_default_str();
    app.add_option("--kappa", config.rates.kappa, "cavity decay rate")->capture_default_str();
    app.add_option("--gamma", config.rates.gamma, "qubit decay rate")->capture_default_str();
    app.add_option("--gamma-s", config.rates.Gamma, "sensor linewidth")->capture_default_str();
    app.add_option("--pinc", config.rates.P_inc, "incoherent pumping rate")
        ->capture_default_str();
    app.add_option("--n-fock", config.n_fock, "Fock cutoff")->capture_default_str();
    app.add_option("--n-levels", config.n_levels, "dressed levels kept")->capture_default_str();
    app.add_option("--grid-start", config.grid.start, "scan grid start")->capture_default_str();
    app.add_option("--grid-stop", config.grid.stop, "scan grid stop")->capture_default_str();
    app.add_option("--grid-step", config.grid.step, "scan grid step")->capture_default_str();
    app.add_option("--theta-start", config.theta_grid.start, "theta map start")
        ->capture_default_str();
    app.add_option("--theta-stop", config.theta_grid.stop, "theta map stop")
        ->capture_default_str();
    app.add_option("--theta-step", config.theta_grid.step, "theta map step")
        ->capture_default_str();
    app.add_option("--fixed", fixed,
                   "held sensor frequency, e.g. w2=w10 or w3=0.7 (repeatable)");
    app.add_option("--out", config.out_dir, "output directory for this run")
        ->capture_default_str();
    app.add_option("--oracle-epsilon", config.oracle_epsilon, "explicit-sensor coupling")
        ->capture_default_str();
    app.add_option("--peak-floor", config.peak_floor, "peak prominence floor (fraction of max)")
        ->capture_default_str();
    app.add_option("--threads", config.threads, "worker threads for scans")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        config.mode = fresco::parse_mode(mode);
        for (const auto& item : fixed) {
            if (item.empty())
                continue;
            const auto eq = item.find('=');
            if (eq == std::string::npos)
                throw fresco::ConfigError("fixed: expected KEY=VALUE, got '" + item + "'");
            config.fixed[item.substr(0, eq)] = item.substr(eq + 1);
        }
        config.validate();

        // Full-precision snapshot, reusable as --config input.
        std::filesystem::create_directories(config.out_dir);
        auto snapshot = fresco::open_out(std::filesystem::path(config.out_dir) / "config.ini");
        auto num = [](double v) {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return std::string(buf);
        };
        snapshot << "mode=" << fresco::mode_name(config.mode) << '\n'
                 << "omega-q=" << num(config.params.omega_q) << '\n'
                 << "g=" << num(config.params.g) << '\n'
                 << "theta=" << num(config.params.theta) << '\n'
                 << "kappa=" << num(config.rates.kappa) << '\n'
                 << "gamma=" << num(config.rates.gamma) << '\n'
                 << "gamma-s=" << num(config.rates.Gamma) << '\n'
                 << "pinc=" << num(config.rates.P_inc) << '\n'
                 << "n-fock=" << config.n_fock << '\n'
                 << "n-levels=" << config.n_levels << '\n'
                 << "grid-start=" << num(config.grid.start) << '\n'
                 << "grid-stop=" << num(config.grid.stop) << '\n'
                 << "grid-step=" << num(config.grid.step) << '\n'
                 << "theta-start=" << num(config.theta_grid.start) << '\n'
                 << "theta-stop=" << num(config.theta_grid.stop) << '\n'
                 << "theta-step=" << num(config.theta_grid.step) << '\n'
                 << "oracle-epsilon=" << num(config.oracle_epsilon) << '\n'
                 << "peak-floor=" << num(config.peak_floor) << '\n'
                 << "threads=" << config.threads << '\n';
        for (const auto& [key, value] : config.fixed)
            snapshot << "fixed=" << key << '=' << value << '\n';
        snapshot.close();

        return fresco::run(config);
    } catch (const fresco::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
