// Acceptance suite: one check line per sub-criterion, one PASS/FAIL line per
// criterion. Runs all criteria by default; pass criterion numbers as arguments
// to run a subset. Exit status is the number of failed criteria.
//
// Reference configuration: omega_q = omega_c = 1, g = 0.3, theta in
// {pi/2, pi/6}, kappa = gamma = Gamma = 5e-3, P_inc = 0.1 kappa, n_fock = 20,
// 12 dressed levels.

#include "fresco/oracle.hpp"
#include "fresco/peaks.hpp"
#include "fresco/run.hpp"

#include "../support/two_sensor_reference.hpp"
#include "../support/reference.hpp"

#include <chrono>
#include <cstdio>
#include <random>
#include <set>

using namespace fresco;
using namespace fresco::testing;

namespace {

int checks_failed = 0;

void check(bool ok, const std::string& what)
{
    std::printf("    [%s] %s\n", ok ? " ok " : "FAIL", what.c_str());
    if (!ok)
        ++checks_failed;
}

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

DressedSystem reference_system(double theta, int n_fock = kRefFock, int n_levels = kRefLevels)
{
    return build_system(reference_params(theta), reference_rates(), n_fock, n_levels);
}

const double kGamma = reference_rates().Gamma;

// ---------------------------------------------------------------------------
// 1. Parity selection rules on the sensor jump operator.
void criterion_1()
{
    Timer timer;
    const DressedSystem sym = reference_system(M_PI / 2);
    double worst_same_parity = 0.0;
    for (int j = 0; j < kRefLevels; ++j)
        for (int k = j + 1; k < kRefLevels; ++k)
            if (sym.basis.parity[j] == sym.basis.parity[k])
                worst_same_parity = std::max(worst_same_parity, std::abs(sym.jump(j, k)));
    check(worst_same_parity < 1e-10,
          "theta=pi/2: max |jump| between same-parity states = " + fmt(worst_same_parity)
              + " < 1e-10");

    const DressedSystem asym = reference_system(M_PI / 6);
    for (auto [k, j] : breaking_pairs()) {
        const double amp = std::abs(asym.jump(j, k));
        check(amp > 1e-4, "theta=pi/6: |jump(" + std::to_string(k) + "->" + std::to_string(j)
                              + ")| = " + fmt(amp) + " > 1e-4");
    }
    check(timer.seconds() < 5.0, "runtime " + fmt(timer.seconds()) + " s < 5 s");
}

// ---------------------------------------------------------------------------
// 2. Spectrum reproduction: peak sets at both angles.
void criterion_2()
{
    Timer timer;
    const SensorGrid grid = SensorGrid::uniform(0.0, 2.5, kGamma / 5, kGamma);

    {
        const DressedSystem sys = reference_system(M_PI / 2);
        const Scan scan = power_spectrum(sys.l0, sys.jump, grid, sys.rho_ss_vec, 1);
        check(scan.n_failed == 0, "theta=pi/2 scan completed");
        const auto table = transition_table(
            sys.basis, emission_operator(sys.space, sys.params.eta()), kRefLevels);
        const auto peaks = find_peaks(scan, 1e-6, kGamma, table);

        for (auto [k, j] : allowed_pairs()) {
            const double w = sys.basis.omega(k, j);
            bool found = false;
            for (const auto& p : peaks)
                found = found || std::abs(p.omega_peak - w) <= kGamma;
            check(found, "theta=pi/2: peak within Gamma of w_" + std::to_string(k)
                             + std::to_string(j) + " = " + fmt(w));
        }

        double global_max = 0.0;
        for (double v : scan.value)
            global_max = std::max(global_max, v);
        for (auto [k, j] : {std::pair{2, 1}, {3, 0}}) {
            const double w = sys.basis.omega(k, j);
            double worst = 0.0;
            for (const auto& p : peaks)
                if (std::abs(p.omega_peak - w) <= kGamma)
                    worst = std::max(worst, p.height);
            check(worst < 0.01 * global_max,
                  "theta=pi/2: no peak >= 1% of max within Gamma of w_" + std::to_string(k)
                      + std::to_string(j) + " (largest " + fmt(worst / global_max * 100) + "%)");
        }
    }

    {
        const DressedSystem sys = reference_system(M_PI / 6);
        const Scan scan = power_spectrum(sys.l0, sys.jump, grid, sys.rho_ss_vec, 1);
        check(scan.n_failed == 0, "theta=pi/6 scan completed");
        const auto table = transition_table(
            sys.basis, emission_operator(sys.space, sys.params.eta()), kRefLevels);
        const auto peaks = find_peaks(scan, 1e-6, kGamma, table);
        for (auto [k, j] : breaking_pairs()) {
            const double w = sys.basis.omega(k, j);
            bool found = false;
            for (const auto& p : peaks)
                found = found || std::abs(p.omega_peak - w) <= kGamma;
            check(found, "theta=pi/6: peak within Gamma of w_" + std::to_string(k)
                             + std::to_string(j) + " = " + fmt(w));
        }
    }
    check(timer.seconds() < 600.0,
          "runtime " + fmt(timer.seconds()) + " s < 600 s single-threaded");
}

// ---------------------------------------------------------------------------
// 3. Two-photon correlation structure with the second sensor at w_10.
void criterion_3()
{
    const DressedSystem sym = reference_system(M_PI / 2);
    const double w10 = sym.basis.omega(1, 0);
    auto val = [&](const DressedSystem& sys, double w1, double w2) {
        const auto v = g2(sys.l0, sys.jump, w1, w2, kGamma, sys.rho_ss_vec);
        if (!v)
            throw std::runtime_error("no emission in criterion 3");
        return *v;
    };

    for (auto [k, j] : {std::pair{3, 1}, {4, 1}}) {
        const double g = val(sym, sym.basis.omega(k, j), w10);
        check(g > 1.0, "theta=pi/2: g2(w_" + std::to_string(k) + std::to_string(j)
                           + ", w_10) = " + fmt(g) + " > 1");
    }
    for (auto [k, j] : {std::pair{3, 2}, {4, 2}, {2, 0}}) {
        const double g = val(sym, sym.basis.omega(k, j), w10);
        check(g < 1.0, "theta=pi/2: g2(w_" + std::to_string(k) + std::to_string(j)
                           + ", w_10) = " + fmt(g) + " < 1");
    }

    const DressedSystem asym = reference_system(M_PI / 6);
    const double w10_6 = asym.basis.omega(1, 0);
    for (auto [k, j] : {std::pair{2, 1}, {5, 1}}) {
        const double g = val(asym, asym.basis.omega(k, j), w10_6);
        check(g > 1.0, "theta=pi/6: g2(w_" + std::to_string(k) + std::to_string(j)
                           + ", w_10) = " + fmt(g) + " > 1");
    }

    std::mt19937 rng(2026);
    std::uniform_real_distribution<double> freq(0.1, 2.4);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const double a = freq(rng), b = freq(rng);
        worst = std::max(worst, std::abs(val(sym, a, b) - val(sym, b, a)));
    }
    check(worst < 1e-10,
          "exchange symmetry on 20 random pairs: max |g2(a,b)-g2(b,a)| = " + fmt(worst));
}

// ---------------------------------------------------------------------------
// 4. Three-photon correlation structure.
void criterion_4()
{
    Timer timer;
    const DressedSystem sym = reference_system(M_PI / 2);
    const double w10 = sym.basis.omega(1, 0);
    const double w31 = sym.basis.omega(3, 1);

    auto local_max = [&](auto&& f, double center) {
        double best = -1e300;
        for (double w = center - 3 * kGamma; w <= center + 3 * kGamma + 1e-12; w += kGamma / 5)
            best = std::max(best, f(w));
        return best;
    };

    // the comparison scale: the largest two-photon bunching peak at pi/2
    auto g2_sym = [&](double w) {
        return g2(sym.l0, sym.jump, w, w10, kGamma, sym.rho_ss_vec).value();
    };
    const double g2_peak =
        std::max(local_max(g2_sym, w31), local_max(g2_sym, sym.basis.omega(4, 1)));

    auto g3_sym = [&](double w) {
        return g3(sym.l0, sym.jump, w, w31, w10, kGamma, sym.rho_ss_vec).value();
    };
    for (auto [k, j] : {std::pair{5, 3}, {7, 3}}) {
        const double peak = local_max(g3_sym, sym.basis.omega(k, j));
        check(peak >= 3.0 * g2_peak, "theta=pi/2: g3 peak near w_" + std::to_string(k)
                                         + std::to_string(j) + " = " + fmt(peak) + " >= 3 x "
                                         + fmt(g2_peak) + " (g2 peak max)");
    }

    const DressedSystem asym = reference_system(M_PI / 6);
    const double w10_6 = asym.basis.omega(1, 0);
    const double w21 = asym.basis.omega(2, 1);
    for (auto [k, j] : {std::pair{3, 2}, {4, 2}, {5, 2}}) {
        const double g =
            g3(asym.l0, asym.jump, asym.basis.omega(k, j), w21, w10_6, kGamma, asym.rho_ss_vec)
                .value();
        check(g >= 5.0 && g <= 20.0, "theta=pi/6: g3(w_" + std::to_string(k) + std::to_string(j)
                                         + ", w_21, w_10) = " + fmt(g) + " in [5, 20]");
    }

    const double g3_repeat =
        g3(asym.l0, asym.jump, w21, w21, w10_6, kGamma, asym.rho_ss_vec).value();
    const double g2_repeat = g2(asym.l0, asym.jump, w21, w10_6, kGamma, asym.rho_ss_vec).value();
    check(g3_repeat < 1.0, "theta=pi/6: g3(w_21, w_21, w_10) = " + fmt(g3_repeat) + " < 1");
    check(g2_repeat > 1.0, "theta=pi/6: g2(w_21, w_10) = " + fmt(g2_repeat) + " > 1");

    check(timer.seconds() < 1800.0, "runtime " + fmt(timer.seconds()) + " s < 1800 s");
}

// ---------------------------------------------------------------------------
// 5. Oracle equivalence at matched reduced cutoffs.
void criterion_5()
{
    Timer timer;
    const RabiParams params = reference_params(M_PI / 2);
    const RateSet rates = reference_rates();
    const double eps = 1e-4;

    {
        const DressedSystem sys = build_system(params, rates, 10, kRefLevels, false);
        const double w10 = sys.basis.omega(1, 0);
        auto population = [&](double e) {
            const SensorSpec sensor{w10, rates.Gamma, e};
            const auto comp = composite_liouvillian(sys.basis, sys.space, params, rates,
                                                    kRefLevels, {&sensor, 1});
            return sensor_population(comp, steady_state(comp.liou, false), 0);
        };
        const double ratio = population(eps) / population(eps / 2);
        check(std::abs(ratio - 4.0) <= 0.2,
              "sensor population scaling n(eps)/n(eps/2) = " + fmt(ratio) + " = 4 +- 5%");

        const SensorGrid grid = SensorGrid::uniform(0.0, 2.5, kGamma / 5, kGamma);
        const Scan scan = power_spectrum(sys.l0, sys.jump, grid, sys.rho_ss_vec, 2);
        const auto table =
            transition_table(sys.basis, emission_operator(sys.space, params.eta()), kRefLevels);
        auto peaks = find_peaks(scan, 1e-6, kGamma, table);
        std::sort(peaks.begin(), peaks.end(),
                  [](const PeakAssignment& a, const PeakAssignment& b) {
                      return a.height > b.height;
                  });
        peaks.resize(3);
        for (const auto& p : peaks) {
            const SensorGrid point{{p.omega_peak}, kGamma};
            const double pert =
                power_spectrum(sys.l0, sys.jump, point, sys.rho_ss_vec, 1).value[0];
            const Scan orac =
                oracle_spectrum(sys.basis, sys.space, params, rates, kRefLevels, point, eps, 1);
            const double rel = std::abs(pert - orac.value[0]) / std::max(pert, orac.value[0]);
            check(rel < 0.02, "S at peak w = " + fmt(p.omega_peak) + ": perturbative "
                                  + fmt(pert) + " vs oracle " + fmt(orac.value[0]) + ", rel err "
                                  + fmt(rel) + " < 2%");
        }
    }

    {
        const DressedSystem sys = build_system(params, rates, 6, kRefLevels, false);
        const double w10 = sys.basis.omega(1, 0);
        for (auto [k, j] : {std::pair{3, 1}, {4, 1}, {3, 2}, {4, 2}, {2, 0}}) {
            const double w1 = sys.basis.omega(k, j);
            const double pert = g2(sys.l0, sys.jump, w1, w10, kGamma, sys.rho_ss_vec).value();
            const double orac = oracle_g2(sys.basis, sys.space, params, rates, kRefLevels, w1,
                                          w10, kGamma, eps)
                                    .value();
            const double rel = std::abs(pert - orac) / std::max(std::abs(pert), std::abs(orac));
            check(rel < 0.05, "g2(w_" + std::to_string(k) + std::to_string(j)
                                  + ", w_10): perturbative " + fmt(pert) + " vs oracle "
                                  + fmt(orac) + ", rel err " + fmt(rel) + " < 5%");
        }
    }
    check(timer.seconds() < 1200.0, "runtime " + fmt(timer.seconds()) + " s < 1200 s");
}

// ---------------------------------------------------------------------------
// 6. Physicality suite.
void criterion_6()
{
    for (double theta : {M_PI / 2, M_PI / 6}) {
        const DressedSystem sys = reference_system(theta);
        const std::string tag = theta > 1.0 ? "pi/2" : "pi/6";
        check(sys.l0.trace_defect() < 1e-10,
              "theta=" + tag + ": system generator trace defect = "
                  + fmt(sys.l0.trace_defect()) + " < 1e-10");
        const auto phys = check_physical(devectorize(sys.rho_ss_vec));
        check(phys.hermiticity_defect < 1e-12 && phys.min_eigenvalue > -1e-10
                  && phys.trace_deviation < 1e-12,
              "theta=" + tag + ": steady state Hermitian/PSD/unit-trace (min eig "
                  + fmt(phys.min_eigenvalue) + ")");

        const SensorGrid grid = SensorGrid::uniform(0.0, 2.5, kGamma / 5, kGamma);
        const Scan scan = power_spectrum(sys.l0, sys.jump, grid, sys.rho_ss_vec, 2);
        double min_s = 1e300;
        for (double v : scan.value)
            min_s = std::min(min_s, v);
        check(scan.n_failed == 0 && min_s > -1e-8,
              "theta=" + tag + ": S >= -1e-8 on the full scan (min " + fmt(min_s) + ")");
    }

    {
        // composite generators annihilate the trace dual too
        const DressedSystem sys = build_system(reference_params(M_PI / 2), reference_rates(), 6,
                                               kRefLevels, false);
        const SensorSpec one{0.7, kGamma, 1e-4};
        const auto comp1 = composite_liouvillian(sys.basis, sys.space, sys.params, sys.rates,
                                                 kRefLevels, {&one, 1});
        check(comp1.liou.trace_defect() < 1e-10, "one-sensor composite trace defect = "
                                                     + fmt(comp1.liou.trace_defect())
                                                     + " < 1e-10");
        const SensorSpec two[2] = {{0.7, kGamma, 1e-4}, {0.9, kGamma, 1e-4}};
        const auto comp2 =
            composite_liouvillian(sys.basis, sys.space, sys.params, sys.rates, kRefLevels, two);
        check(comp2.liou.trace_defect() < 1e-10, "two-sensor composite trace defect = "
                                                     + fmt(comp2.liou.trace_defect())
                                                     + " < 1e-10");
    }

    {
        RateSet rates = reference_rates();
        rates.P_inc = 0.0;
        const DressedSystem sys =
            build_system(reference_params(M_PI / 2), rates, kRefFock, kRefLevels);
        const double fidelity = devectorize(sys.rho_ss_vec)(0, 0).real();
        check(fidelity > 1.0 - 1e-8,
              "P_inc=0: ground-state fidelity = " + fmt(fidelity) + " > 1 - 1e-8");
    }
}

// ---------------------------------------------------------------------------
// 7. Structural cross-check of the generic ladder against the hand-unrolled
// two-sensor relations.
void criterion_7()
{
    const DressedSystem sys = reference_system(M_PI / 2);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> freq(0.1, 2.3);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const double w1 = freq(rng), w2 = freq(rng);
        ShiftedSolver solver(sys.l0);
        const double freqs[] = {w1, w2};
        const auto ladder =
            solve_ladder(sys.l0, sys.jump, freqs, kGamma, sys.rho_ss_vec, solver);
        const auto ref = two_sensor_reference(sys.l0, sys.jump, w1, w2, kGamma, sys.rho_ss_vec);
        for (const auto& [key, value] : ref)
            worst = std::max(
                worst, (ladder.entry(key.first, key.second) - value).cwiseAbs().maxCoeff());
    }
    check(worst < 1e-10,
          "generic ladder vs unrolled two-sensor relations on 10 random pairs: max entrywise "
          "deviation = " + fmt(worst) + " < 1e-10");
}

// ---------------------------------------------------------------------------
// 8. Cutoff convergence of eigenvalues and spectral peaks.
void criterion_8()
{
    const RabiParams params = reference_params(M_PI / 2);
    const DressedBasis basis20 =
        eigensystem(rabi_hamiltonian(build_space(20), params), build_space(20));
    const DressedBasis basis24 =
        eigensystem(rabi_hamiltonian(build_space(24), params), build_space(24));
    double worst = 0.0;
    for (int j = 0; j < 8; ++j)
        worst = std::max(worst, std::abs(basis20.energies[j] - basis24.energies[j]));
    check(worst < 1e-8,
          "first 8 eigenvalues move " + fmt(worst) + " < 1e-8 under n_fock 20 -> 24");

    auto peaks_at = [&](int n_fock) {
        const DressedSystem sys = build_system(params, reference_rates(), n_fock, kRefLevels);
        const SensorGrid grid = SensorGrid::uniform(0.0, 2.5, kGamma / 5, kGamma);
        const Scan scan = power_spectrum(sys.l0, sys.jump, grid, sys.rho_ss_vec, 2);
        const auto table = transition_table(
            sys.basis, emission_operator(sys.space, params.eta()), kRefLevels);
        return find_peaks(scan, 1e-6, kGamma, table);
    };
    const auto p20 = peaks_at(20);
    const auto p24 = peaks_at(24);

    double worst_shift = 0.0;
    size_t matched = 0;
    for (const auto& a : p20) {
        if (!a.assigned())
            continue;
        for (const auto& b : p24)
            if (a.upper == b.upper && a.lower == b.lower) {
                worst_shift = std::max(worst_shift, std::abs(a.omega_peak - b.omega_peak));
                ++matched;
            }
    }
    check(matched >= 8, "matched " + std::to_string(matched) + " assigned peaks across cutoffs");
    check(worst_shift < kGamma / 10, "peak positions shift " + fmt(worst_shift)
                                         + " < Gamma/10 under n_fock 20 -> 24");
}

}  // namespace

int main(int argc, char** argv)
{
    std::set<int> selected;
    for (int i = 1; i < argc; ++i)
        selected.insert(std::atoi(argv[i]));

    struct Entry {
        int number;
        const char* name;
        void (*fn)();
    };
    const Entry entries[] = {
        {1, "parity selection rules", criterion_1},
        {2, "spectrum reproduction", criterion_2},
        {3, "two-photon correlation structure", criterion_3},
        {4, "three-photon correlation structure", criterion_4},
        {5, "oracle equivalence", criterion_5},
        {6, "physicality suite", criterion_6},
        {7, "ladder structural cross-check", criterion_7},
        {8, "cutoff convergence", criterion_8},
    };

    int criteria_failed = 0;
    for (const auto& entry : entries) {
        if (!selected.empty() && !selected.count(entry.number))
            continue;
        std::printf("criterion %d: %s\n", entry.number, entry.name);
        const int before = checks_failed;
        try {
            entry.fn();
        } catch (const std::exception& e) {
            check(false, std::string("unexpected error: ") + e.what());
        }
        const bool pass = checks_failed == before;
        std::printf("criterion %d: %s -- %s\n", entry.number, entry.name,
                    pass ? "PASS" : "FAIL");
        if (!pass)
            ++criteria_failed;
    }
    return criteria_failed;
}
