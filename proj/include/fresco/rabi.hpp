#pragma once

// Extended quantum Rabi Hamiltonian: construction, diagonalization with
// deterministic level ordering, parity classification and transition tables.

#include "fresco/fock_space.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <string>
#include <vector>

namespace fresco {

struct RabiParams {
    double omega_c = 1.0;  // cavity frequency; the global frequency unit
    double omega_q = 1.0;  // qubit frequency, in units of omega_c
    double g = 0.0;        // coupling strength, in units of omega_c
    double theta = M_PI / 2;  // coupling mixing angle, radians

    double eta() const { return g / omega_c; }

    void validate() const
    {
        if (omega_c <= 0.0)
            throw std::invalid_argument("RabiParams: omega_c must be > 0");
        if (omega_q <= 0.0)
            throw std::invalid_argument("RabiParams: omega_q must be > 0");
        if (g < 0.0)
            throw std::invalid_argument("RabiParams: g must be >= 0");
    }
};

// H = omega_c a^dag a + omega_q sigma+ sigma- - i g (a - a^dag) sigma_p
inline Matrix rabi_hamiltonian(const TruncatedSpace& space, const RabiParams& p)
{
    p.validate();
    const Matrix a = annihilation(space);
    const Matrix ad = a.adjoint();
    const Matrix sp = qubit_op(space, QubitOp::splus);
    const Matrix sm = qubit_op(space, QubitOp::sminus);
    return p.omega_c * (ad * a) + p.omega_q * (sp * sm)
         - im * p.g * ((a - ad) * sigma_p(space, p.theta));
}

// Parity of the total excitation number: diagonal with entries (-1)^(n + qubit).
inline Matrix parity_operator(const TruncatedSpace& space)
{
    Matrix pi = Matrix::Zero(space.dim(), space.dim());
    for (int q = 0; q < 2; ++q)
        for (int n = 0; n < space.dim_cavity(); ++n)
            pi(space.index(q, n), space.index(q, n)) = ((n + q) % 2 == 0) ? 1.0 : -1.0;
    return pi;
}

enum class Parity { even, odd, none };

inline char parity_char(Parity p)
{
    switch (p) {
    case Parity::even: return '+';
    case Parity::odd: return '-';
    default: return '0';
    }
}

struct DressedBasis {
    Eigen::VectorXd energies;   // ascending
    Matrix states;              // columns are eigenvectors in the bare basis
    std::vector<Parity> parity; // per level
    int n_converged = 0;        // levels trusted under the Fock cutoff

    int dim() const { return int(energies.size()); }
    // omega_kj = E_k - E_j, positive for k > j
    double omega(int k, int j) const { return energies[k] - energies[j]; }
};

namespace detail {

// Deterministic ordering inside (near-)degenerate clusters: rotate the cluster
// into the parity eigenbasis, then order even before odd, ties broken by the
// bare-basis component of largest magnitude.
inline void fix_degenerate_clusters(const Matrix& pi, Eigen::VectorXd& energies, Matrix& states)
{
    const int dim = int(energies.size());
    int start = 0;
    while (start < dim) {
        int stop = start + 1;
        const double scale = std::max(1.0, std::abs(energies[start]));
        while (stop < dim && energies[stop] - energies[stop - 1] < 1e-9 * scale)
            ++stop;
        const int m = stop - start;
        if (m > 1) {
            auto block = states.middleCols(start, m);
            const Matrix pi_block = block.adjoint() * pi * block;
            Eigen::SelfAdjointEigenSolver<Matrix> es(pi_block);
            Matrix rotated = block * es.eigenvectors();
            struct Member { double parity_exp; int bare_argmax; int col; };
            std::vector<Member> members(m);
            for (int c = 0; c < m; ++c) {
                int argmax = 0;
                rotated.col(c).cwiseAbs().maxCoeff(&argmax);
                members[c] = {(rotated.col(c).adjoint() * pi * rotated.col(c))(0).real(), argmax, c};
            }
            std::stable_sort(members.begin(), members.end(), [](const Member& a, const Member& b) {
                auto rank = [](double p) { return p > 0.5 ? 0 : (p < -0.5 ? 1 : 2); };
                if (rank(a.parity_exp) != rank(b.parity_exp))
                    return rank(a.parity_exp) < rank(b.parity_exp);
                return a.bare_argmax < b.bare_argmax;
            });
            Matrix reordered(rotated.rows(), m);
            for (int c = 0; c < m; ++c)
                reordered.col(c) = rotated.col(members[c].col);
            block = reordered;
        }
        start = stop;
    }
    // Fix each column's global phase: largest-magnitude component real positive.
    for (int c = 0; c < dim; ++c) {
        int argmax = 0;
        states.col(c).cwiseAbs().maxCoeff(&argmax);
        const complexd v = states(argmax, c);
        if (std::abs(v) > 0.0)
            states.col(c) *= std::conj(v) / std::abs(v);
    }
}

}  // namespace detail

// Eigen decomposition of a Hermitian H on the given space, with parity labels.
// No convergence information; n_converged is set to the full dimension.
inline DressedBasis eigensystem(const Matrix& h, const TruncatedSpace& space)
{
    if (!is_hermitian(h, 1e-10))
        throw std::invalid_argument("eigensystem: Hamiltonian is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigensystem: eigensolver failed");

    DressedBasis basis;
    basis.energies = es.eigenvalues();
    basis.states = es.eigenvectors();
    const Matrix pi = parity_operator(space);
    detail::fix_degenerate_clusters(pi, basis.energies, basis.states);

    basis.parity.resize(basis.dim());
    for (int j = 0; j < basis.dim(); ++j) {
        const double pexp = (basis.states.col(j).adjoint() * pi * basis.states.col(j))(0).real();
        if (std::abs(pexp) > 1.0 - 1e-6)
            basis.parity[j] = pexp > 0 ? Parity::even : Parity::odd;
        else
            basis.parity[j] = Parity::none;
    }
    basis.n_converged = basis.dim();
    return basis;
}

// Diagonalize with the cutoff-bump convergence test: a level is converged when
// its energy moves by less than 1e-8 omega_c under n_fock -> n_fock + 4.
// Throws when fewer than n_levels_requested levels pass.
inline DressedBasis diagonalize(const TruncatedSpace& space, const RabiParams& p,
                                int n_levels_requested)
{
    if (n_levels_requested < 1 || n_levels_requested > space.dim())
        throw std::invalid_argument("diagonalize: n_levels_requested out of range");

    DressedBasis basis = eigensystem(rabi_hamiltonian(space, p), space);
    const TruncatedSpace bumped = build_space(space.n_fock + 4);
    const DressedBasis check = eigensystem(rabi_hamiltonian(bumped, p), bumped);

    int n_conv = 0;
    while (n_conv < basis.dim()
           && std::abs(basis.energies[n_conv] - check.energies[n_conv]) < 1e-8 * p.omega_c)
        ++n_conv;
    basis.n_converged = n_conv;

    if (n_levels_requested > n_conv)
        throw std::runtime_error("diagonalize: only " + std::to_string(n_conv)
                                 + " levels converged at n_fock = " + std::to_string(space.n_fock)
                                 + ", requested " + std::to_string(n_levels_requested));
    return basis;
}

// Matrix of <j|op|k> over the first n_levels dressed states.
inline Matrix to_dressed(const DressedBasis& basis, const Matrix& bare_op, int n_levels)
{
    if (n_levels < 1 || n_levels > basis.dim())
        throw std::invalid_argument("to_dressed: n_levels out of range");
    const auto cols = basis.states.leftCols(n_levels);
    return cols.adjoint() * bare_op * cols;
}

struct Transition {
    int upper = 0;  // k
    int lower = 0;  // j
    double omega = 0.0;
    complexd amplitude;  // <j|op|k>
};

// All pairs k > j among the first n_levels with |<j|op|k>| above the floor,
// sorted by transition frequency.
inline std::vector<Transition> transition_table(const DressedBasis& basis, const Matrix& bare_op,
                                                int n_levels, double amplitude_floor = 1e-8)
{
    if (n_levels > basis.n_converged)
        throw std::invalid_argument("transition_table: n_levels exceeds converged levels");
    const Matrix dressed = to_dressed(basis, bare_op, n_levels);
    std::vector<Transition> table;
    for (int j = 0; j < n_levels; ++j)
        for (int k = j + 1; k < n_levels; ++k)
            if (std::abs(dressed(j, k)) > amplitude_floor)
                table.push_back({k, j, basis.omega(k, j), dressed(j, k)});
    std::sort(table.begin(), table.end(),
              [](const Transition& a, const Transition& b) { return a.omega < b.omega; });
    return table;
}

struct EnergySweep {
    std::vector<double> g;                          // grid
    std::vector<std::array<double, 8>> energies;    // first 8 levels per point
    std::vector<std::array<Parity, 8>> parity;
};

inline EnergySweep energy_sweep(const TruncatedSpace& space, double omega_q, double theta,
                                const std::vector<double>& g_grid)
{
    if (g_grid.empty())
        throw std::invalid_argument("energy_sweep: empty grid");
    EnergySweep sweep;
    sweep.g = g_grid;
    sweep.energies.resize(g_grid.size());
    sweep.parity.resize(g_grid.size());
    for (size_t i = 0; i < g_grid.size(); ++i) {
        RabiParams p{1.0, omega_q, g_grid[i], theta};
        const DressedBasis basis = eigensystem(rabi_hamiltonian(space, p), space);
        for (int j = 0; j < 8; ++j) {
            sweep.energies[i][j] = basis.energies[j];
            sweep.parity[i][j] = basis.parity[j];
        }
    }
    return sweep;
}

}  // namespace fresco
