#pragma once

// Frequency-resolved emission via the sensor cascade: power spectrum S(w1) and
// correlations g2/g3/gN from the ladder of auxiliary conditional states.
//
// Entries are indexed by sensor ket/bra occupation bit masks (m, m'). The
// entry of weight W = popcount(m) + popcount(m') solves
//
//   (L0 - z I) |rho_m^m'>> = i [ sum_{k: m_k=1} J |rho_{m-e_k}^m'>>
//                              - sum_{k: m'_k=1} |rho_m^{m'-e_k}>> J^dag ],
//   z = i sum_k (m_k - m'_k) w_k + W Gamma / 2,
//
// with J the sensor jump operator, solved in order of increasing W from the
// steady state at (0,0). Entries with m and m' swapped are adjoints of each
// other, which halves the solve count.

#include "fresco/liouvillian.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <functional>
#include <mutex>
#include <span>
#include <thread>

namespace fresco {

struct SensorGrid {
    std::vector<double> frequencies;
    double Gamma = 0.0;

    static SensorGrid uniform(double start, double stop, double step, double gamma_s)
    {
        if (step <= 0.0 || stop <= start)
            throw std::invalid_argument("SensorGrid: need stop > start and step > 0");
        SensorGrid g;
        g.Gamma = gamma_s;
        const auto n = size_t(std::floor((stop - start) / step + 0.5)) + 1;
        g.frequencies.reserve(n);
        for (size_t i = 0; i < n; ++i)
            g.frequencies.push_back(start + double(i) * step);
        g.validate(false);
        return g;
    }

    void validate(bool peak_resolution) const
    {
        if (Gamma <= 0.0)
            throw std::invalid_argument("SensorGrid: Gamma must be > 0");
        if (frequencies.empty())
            throw std::invalid_argument("SensorGrid: empty grid");
        for (size_t i = 1; i < frequencies.size(); ++i)
            if (frequencies[i] <= frequencies[i - 1])
                throw std::invalid_argument("SensorGrid: frequencies must be strictly increasing");
        if (peak_resolution)
            for (size_t i = 1; i < frequencies.size(); ++i)
                if (frequencies[i] - frequencies[i - 1] > Gamma / 5 * (1 + 1e-9))
                    throw std::invalid_argument("SensorGrid: step exceeds Gamma/5; peaks may be missed");
    }
};

class ConditionalLadder {
public:
    ConditionalLadder(int n_sensors, std::vector<double> freqs, double gamma_s)
        : n_sensors_(n_sensors), freqs_(std::move(freqs)), Gamma_(gamma_s),
          entries_(size_t(1) << (2 * n_sensors)), have_(entries_.size(), false)
    {
        if (n_sensors < 1 || n_sensors > 8)
            throw std::invalid_argument("ConditionalLadder: need 1..8 sensors");
        if (int(freqs_.size()) != n_sensors)
            throw std::invalid_argument("ConditionalLadder: one frequency per sensor");
    }

    int n_sensors() const { return n_sensors_; }
    const std::vector<double>& frequencies() const { return freqs_; }
    double Gamma() const { return Gamma_; }

    const Vector& entry(unsigned ket, unsigned bra) const
    {
        const size_t i = index(ket, bra);
        if (!have_[i])
            throw std::logic_error("ConditionalLadder: entry not solved");
        return entries_[i];
    }

    void set(unsigned ket, unsigned bra, Vector v)
    {
        const size_t i = index(ket, bra);
        entries_[i] = std::move(v);
        have_[i] = true;
    }

    bool has(unsigned ket, unsigned bra) const { return have_[index(ket, bra)]; }

    complexd trace(unsigned ket, unsigned bra) const { return vec_trace(entry(ket, bra)); }

private:
    size_t index(unsigned ket, unsigned bra) const
    {
        const unsigned n = 1u << n_sensors_;
        if (ket >= n || bra >= n)
            throw std::out_of_range("ConditionalLadder: bad sensor mask");
        return size_t(ket) * n + bra;
    }

    int n_sensors_;
    std::vector<double> freqs_;
    double Gamma_;
    std::vector<Vector> entries_;
    std::vector<bool> have_;
};

// Solve the full ladder. When `seed` is given, entries supported on the sensor
// subset `seed_mask` (i.e. (ket|bra) & ~seed_mask == 0) are copied instead of
// re-solved; the seed must share the frequencies of those sensors.
inline ConditionalLadder solve_ladder(const Liouvillian& l0, const Matrix& jump,
                                      std::span<const double> freqs, double gamma_s,
                                      const Vector& rho_ss_vec, ShiftedSolver& solver,
                                      const ConditionalLadder* seed = nullptr,
                                      unsigned seed_mask = 0)
{
    const int n_sensors = int(freqs.size());
    ConditionalLadder ladder(n_sensors, {freqs.begin(), freqs.end()}, gamma_s);
    if (gamma_s <= 0.0)
        throw std::invalid_argument("solve_ladder: Gamma must be > 0");
    ladder.set(0, 0, rho_ss_vec);

    const unsigned n = 1u << n_sensors;
    for (int weight = 1; weight <= 2 * n_sensors; ++weight) {
        // Canonical entries (ket >= bra) are solved; the rest follow by adjoint.
        for (unsigned ket = 0; ket < n; ++ket) {
            for (unsigned bra = 0; bra <= ket; ++bra) {
                if (std::popcount(ket) + std::popcount(bra) != weight)
                    continue;
                if (seed && ((ket | bra) & ~seed_mask) == 0) {
                    ladder.set(ket, bra, seed->entry(ket, bra));
                    continue;
                }
                Vector rhs = Vector::Zero(l0.gen.rows());
                complexd detuning = 0.0;
                for (int k = 0; k < n_sensors; ++k) {
                    const unsigned bit = 1u << k;
                    if (ket & bit)
                        rhs += im * apply_left(jump, ladder.entry(ket ^ bit, bra));
                    if (bra & bit)
                        rhs -= im * apply_right_dagger(jump, ladder.entry(ket, bra ^ bit));
                    detuning += im * freqs[k] * (double((ket & bit) != 0) - double((bra & bit) != 0));
                }
                const complexd z = detuning + 0.5 * weight * gamma_s;
                ladder.set(ket, bra, solver.solve(z, rhs));
            }
        }
        for (unsigned ket = 0; ket < n; ++ket)
            for (unsigned bra = ket + 1; bra < n; ++bra)
                if (std::popcount(ket) + std::popcount(bra) == weight)
                    ladder.set(ket, bra, vectorize(devectorize(ladder.entry(bra, ket)).adjoint()));
    }
    return ladder;
}

struct ScanMeta {
    RabiParams params;
    RateSet rates;
    int n_fock = 0;
    int n_levels = 0;
    std::vector<double> fixed_frequencies;  // held sensors (empty for S)
};

struct Scan {
    std::vector<double> omega;
    std::vector<double> value;
    double Gamma = 0.0;
    ScanMeta meta;
    size_t n_failed = 0;        // grid points where the solve failed (value = NaN)
    std::string first_error;
};

using SpectrumScan = Scan;
using CorrelationScan = Scan;

namespace detail {

// Index-parallel map with deterministic output ordering.
inline void parallel_for(size_t count, int n_threads, const std::function<void(size_t, int)>& body)
{
    if (n_threads <= 1) {
        for (size_t i = 0; i < count; ++i)
            body(i, 0);
        return;
    }
    std::vector<std::thread> workers;
    std::atomic<size_t> next{0};
    for (int t = 0; t < n_threads; ++t)
        workers.emplace_back([&, t] {
            for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1))
                body(i, t);
        });
    for (auto& w : workers)
        w.join();
}

inline double real_trace_checked(complexd tr, const char* what)
{
    if (std::abs(tr.imag()) > 1e-6 * std::max(1.0, std::abs(tr.real())))
        throw std::runtime_error(std::string(what) + ": trace has a large imaginary part ("
                                 + std::to_string(tr.imag()) + ")");
    return tr.real();
}

}  // namespace detail

// S(w1) = (Gamma / 2 pi) Tr[rho_1^1] on the grid.
inline SpectrumScan power_spectrum(const Liouvillian& l0, const Matrix& jump,
                                   const SensorGrid& grid, const Vector& rho_ss_vec,
                                   int n_threads = 1, ScanMeta meta = {})
{
    grid.validate(false);
    Scan scan;
    scan.omega = grid.frequencies;
    scan.value.assign(grid.frequencies.size(), std::numeric_limits<double>::quiet_NaN());
    scan.Gamma = grid.Gamma;
    scan.meta = std::move(meta);

    std::vector<ShiftedSolver> solvers;
    const int workers = std::max(1, n_threads);
    solvers.reserve(workers);
    for (int t = 0; t < workers; ++t)
        solvers.emplace_back(l0);

    std::atomic<size_t> failed{0};
    std::mutex err_mutex;
    detail::parallel_for(scan.omega.size(), workers, [&](size_t i, int t) {
        try {
            const double w1[] = {scan.omega[i]};
            const auto ladder = solve_ladder(l0, jump, w1, grid.Gamma, rho_ss_vec, solvers[t]);
            scan.value[i] = grid.Gamma / (2.0 * M_PI)
                          * detail::real_trace_checked(ladder.trace(1, 1), "power_spectrum");
        } catch (const std::exception& e) {
            failed.fetch_add(1);
            std::lock_guard<std::mutex> lock(err_mutex);
            if (scan.first_error.empty())
                scan.first_error = e.what();
        }
    });
    scan.n_failed = failed.load();
    return scan;
}

inline constexpr double kTraceFloor = 1e-30;

// g2 at (w1, w2); empty when a denominator underflows (no emission at the
// requested frequency).
inline std::optional<double> g2_from_ladder(const ConditionalLadder& ladder)
{
    const double num = detail::real_trace_checked(ladder.trace(3, 3), "g2");
    const double d1 = detail::real_trace_checked(ladder.trace(1, 1), "g2");
    const double d2 = detail::real_trace_checked(ladder.trace(2, 2), "g2");
    if (!(d1 > kTraceFloor) || !(d2 > kTraceFloor))
        return std::nullopt;
    return num / (d1 * d2);
}

inline std::optional<double> g2(const Liouvillian& l0, const Matrix& jump, double w1, double w2,
                                double gamma_s, const Vector& rho_ss_vec)
{
    ShiftedSolver solver(l0);
    const double freqs[] = {w1, w2};
    return g2_from_ladder(solve_ladder(l0, jump, freqs, gamma_s, rho_ss_vec, solver));
}

// g^(N) for identical sensors at the given frequencies.
inline std::optional<double> g_n(const Liouvillian& l0, const Matrix& jump,
                                 std::span<const double> freqs, double gamma_s,
                                 const Vector& rho_ss_vec, ShiftedSolver* solver = nullptr)
{
    std::optional<ShiftedSolver> own;
    if (!solver)
        own.emplace(l0);
    ShiftedSolver& s = solver ? *solver : *own;
    const auto ladder = solve_ladder(l0, jump, freqs, gamma_s, rho_ss_vec, s);
    const unsigned full = (1u << freqs.size()) - 1;
    const double num = detail::real_trace_checked(ladder.trace(full, full), "g_n");
    double denom = 1.0;
    for (size_t k = 0; k < freqs.size(); ++k) {
        const double d = detail::real_trace_checked(ladder.trace(1u << k, 1u << k), "g_n");
        if (!(d > kTraceFloor))
            return std::nullopt;
        denom *= d;
    }
    return num / denom;
}

inline std::optional<double> g3(const Liouvillian& l0, const Matrix& jump, double w1, double w2,
                                double w3, double gamma_s, const Vector& rho_ss_vec)
{
    const double freqs[] = {w1, w2, w3};
    return g_n(l0, jump, freqs, gamma_s, rho_ss_vec);
}

namespace detail {

// Scan w1 with the remaining sensor frequencies held fixed. Ladder entries not
// involving sensor 1 are solved once and reused across the grid.
inline Scan correlation_scan(const Liouvillian& l0, const Matrix& jump, const SensorGrid& grid,
                             std::span<const double> fixed, const Vector& rho_ss_vec,
                             int n_threads, ScanMeta meta)
{
    grid.validate(false);
    Scan scan;
    scan.omega = grid.frequencies;
    scan.value.assign(grid.frequencies.size(), std::numeric_limits<double>::quiet_NaN());
    scan.Gamma = grid.Gamma;
    scan.meta = std::move(meta);
    scan.meta.fixed_frequencies.assign(fixed.begin(), fixed.end());

    std::vector<double> freqs(1 + fixed.size());
    std::copy(fixed.begin(), fixed.end(), freqs.begin() + 1);
    const unsigned seed_mask = ((1u << freqs.size()) - 1u) & ~1u;

    // Entries supported on the fixed sensors only; frequency of sensor 1 is a
    // placeholder and never enters the seeded entries.
    freqs[0] = grid.frequencies.front();
    ShiftedSolver seed_solver(l0);
    const ConditionalLadder base =
        solve_ladder(l0, jump, freqs, grid.Gamma, rho_ss_vec, seed_solver);

    const int workers = std::max(1, n_threads);
    std::vector<ShiftedSolver> solvers;
    solvers.reserve(workers);
    for (int t = 0; t < workers; ++t)
        solvers.emplace_back(l0);

    std::atomic<size_t> failed{0};
    std::mutex err_mutex;
    detail::parallel_for(scan.omega.size(), workers, [&](size_t i, int t) {
        try {
            std::vector<double> point_freqs = freqs;
            point_freqs[0] = scan.omega[i];
            const auto ladder = solve_ladder(l0, jump, point_freqs, grid.Gamma, rho_ss_vec,
                                             solvers[t], &base, seed_mask);
            const unsigned full = (1u << point_freqs.size()) - 1;
            const double num = real_trace_checked(ladder.trace(full, full), "correlation_scan");
            double denom = 1.0;
            bool ok = true;
            for (size_t k = 0; k < point_freqs.size(); ++k) {
                const double d =
                    real_trace_checked(ladder.trace(1u << k, 1u << k), "correlation_scan");
                if (!(d > kTraceFloor)) {
                    ok = false;
                    break;
                }
                denom *= d;
            }
            if (ok)
                scan.value[i] = num / denom;
        } catch (const std::exception& e) {
            failed.fetch_add(1);
            std::lock_guard<std::mutex> lock(err_mutex);
            if (scan.first_error.empty())
                scan.first_error = e.what();
        }
    });
    scan.n_failed = failed.load();
    return scan;
}

}  // namespace detail

inline CorrelationScan g2_scan(const Liouvillian& l0, const Matrix& jump, const SensorGrid& grid,
                               double w2, const Vector& rho_ss_vec, int n_threads = 1,
                               ScanMeta meta = {})
{
    const double fixed[] = {w2};
    return detail::correlation_scan(l0, jump, grid, fixed, rho_ss_vec, n_threads, std::move(meta));
}

inline CorrelationScan g3_scan(const Liouvillian& l0, const Matrix& jump, const SensorGrid& grid,
                               double w2, double w3, const Vector& rho_ss_vec, int n_threads = 1,
                               ScanMeta meta = {})
{
    const double fixed[] = {w2, w3};
    return detail::correlation_scan(l0, jump, grid, fixed, rho_ss_vec, n_threads, std::move(meta));
}

}  // namespace fresco
