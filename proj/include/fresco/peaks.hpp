#pragma once

// Peak finding on frequency scans, assignment to dressed-state transitions and
// the canonical peak labels, and symbolic transition-frequency resolution.

#include "fresco/sensor_cascade.hpp"

#include <map>
#include <string>

namespace fresco {

struct PeakAssignment {
    double omega_peak = 0.0;  // parabola-refined position
    double height = 0.0;
    int upper = -1;           // matched transition k -> j, or -1/-1 if unassigned
    int lower = -1;
    std::string label;        // canonical letter where applicable

    bool assigned() const { return upper >= 0; }
};

// Canonical letters for the transition peaks of the resonant reference
// configuration: A-J are the parity-allowed lines in ascending frequency
// order at theta = pi/2; K-O are the symmetry-breaking-induced lines.
inline const std::map<std::pair<int, int>, std::string>& canonical_peak_labels()
{
    static const std::map<std::pair<int, int>, std::string> labels = {
        {{5, 4}, "A"}, {{3, 2}, "B"}, {{1, 0}, "C"}, {{3, 1}, "D"}, {{5, 3}, "E"},
        {{7, 4}, "F"}, {{4, 2}, "G"}, {{2, 0}, "H"}, {{4, 1}, "I"}, {{7, 3}, "J"},
        {{2, 1}, "K"}, {{4, 3}, "L"}, {{5, 2}, "M"}, {{3, 0}, "N"}, {{5, 1}, "O"},
    };
    return labels;
}

// Local maxima above prominence_floor * global max, refined by a parabola
// through the three samples around each maximum and matched to the nearest
// tabulated transition within Gamma.
inline std::vector<PeakAssignment> find_peaks(const Scan& scan, double prominence_floor,
                                              double gamma_s,
                                              const std::vector<Transition>& table)
{
    if (scan.omega.size() < 3)
        throw std::invalid_argument("find_peaks: need at least 3 grid points");
    for (size_t i = 1; i < scan.omega.size(); ++i)
        if (scan.omega[i] - scan.omega[i - 1] > gamma_s / 5 * (1 + 1e-9))
            throw std::invalid_argument("find_peaks: grid step exceeds Gamma/5");

    double global_max = 0.0;
    for (double v : scan.value)
        if (std::isfinite(v))
            global_max = std::max(global_max, v);
    const double floor = prominence_floor * global_max;

    std::vector<PeakAssignment> peaks;
    for (size_t i = 1; i + 1 < scan.value.size(); ++i) {
        const double lo = scan.value[i - 1], mid = scan.value[i], hi = scan.value[i + 1];
        if (!(mid > lo && mid > hi) || !(mid >= floor))
            continue;
        PeakAssignment peak;
        // Parabolic refinement on the grid triple.
        const double denom = lo - 2 * mid + hi;
        double shift = 0.0;
        if (denom < 0.0)
            shift = 0.5 * (lo - hi) / denom;
        const double step = scan.omega[i + 1] - scan.omega[i];
        peak.omega_peak = scan.omega[i] + shift * step;
        peak.height = mid - 0.25 * (lo - hi) * shift;

        double best = std::numeric_limits<double>::infinity();
        for (const auto& t : table) {
            const double d = std::abs(t.omega - peak.omega_peak);
            if (d < best && d <= gamma_s) {
                best = d;
                peak.upper = t.upper;
                peak.lower = t.lower;
            }
        }
        if (peak.assigned()) {
            const auto it = canonical_peak_labels().find({peak.upper, peak.lower});
            if (it != canonical_peak_labels().end())
                peak.label = it->second;
        }
        peaks.push_back(peak);
    }
    return peaks;
}

// "w31" -> E_3 - E_1. Levels are single decimal digits with k > j.
inline double resolve_symbolic_frequency(const std::string& symbol, const DressedBasis& basis)
{
    if (symbol.size() != 3 || symbol[0] != 'w' || !std::isdigit(symbol[1])
        || !std::isdigit(symbol[2]))
        throw std::invalid_argument("resolve_symbolic_frequency: bad symbol '" + symbol
                                    + "' (expected w<k><j>)");
    const int k = symbol[1] - '0';
    const int j = symbol[2] - '0';
    if (k <= j)
        throw std::invalid_argument("resolve_symbolic_frequency: need k > j in '" + symbol + "'");
    if (k >= basis.n_converged)
        throw std::invalid_argument("resolve_symbolic_frequency: level " + std::to_string(k)
                                    + " not converged");
    return basis.omega(k, j);
}

// Fixed sensor frequencies may be symbolic ("w31") or plain numbers.
inline double parse_fixed_frequency(const std::string& text, const DressedBasis& basis)
{
    if (!text.empty() && text[0] == 'w' && text.size() == 3)
        return resolve_symbolic_frequency(text, basis);
    size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("parse_fixed_frequency: cannot parse '" + text + "'");
    }
    if (used != text.size())
        throw std::invalid_argument("parse_fixed_frequency: cannot parse '" + text + "'");
    return value;
}

}  // namespace fresco
