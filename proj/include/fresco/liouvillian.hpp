#pragma once

// Dressed-basis dissipation operators, the generalized Liouvillian and the
// Liouville-space solve primitives (steady state, shifted resolvent).
//
// Vectorization is column-stacking: vec(rho) stacks columns, so
//   vec(A rho B) = (B^T kron A) vec(rho).
// Every superoperator below is written against that convention and the
// round-trip tests pin it.

#include "fresco/rabi.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <map>
#include <memory>
#include <optional>
#include <utility>

namespace fresco {

struct RateSet {
    double kappa = 0.0;   // cavity decay
    double gamma = 0.0;   // qubit decay
    double Gamma = 0.0;   // sensor linewidth
    double P_inc = 0.0;   // incoherent pumping rate

    void validate(bool need_sensor = false) const
    {
        if (kappa < 0 || gamma < 0 || Gamma < 0 || P_inc < 0)
            throw std::invalid_argument("RateSet: rates must be >= 0");
        if (need_sensor && Gamma <= 0)
            throw std::invalid_argument("RateSet: Gamma must be > 0 for sensor computations");
    }

    // Smallest positive decay scale; bounds the sensor coupling below.
    double min_positive() const
    {
        double m = std::numeric_limits<double>::infinity();
        for (double r : {kappa, gamma, Gamma, P_inc})
            if (r > 0)
                m = std::min(m, r);
        return m;
    }
};

// The system operator every emission channel couples through:
// i(a^dag - a) + 2 eta sx. Hermitian.
inline Matrix emission_operator(const TruncatedSpace& space, double eta)
{
    const Matrix a = annihilation(space);
    return im * (a.adjoint() - a) + 2.0 * eta * qubit_op(space, QubitOp::sx);
}

enum class FrequencyWeight { omega_over_c, omega_over_q, unweighted };

// Positive-frequency (lowering) component of a bare operator in the dressed
// basis: sum over k > j of <j|op|k> |j><k|, optionally weighted by the
// transition frequency. Strictly upper triangular.
inline Matrix positive_component(const DressedBasis& basis, const Matrix& bare_op,
                                 FrequencyWeight weight, int n_levels,
                                 double omega_c = 1.0, double omega_q = 1.0)
{
    const Matrix dressed = to_dressed(basis, bare_op, n_levels);
    Matrix out = Matrix::Zero(n_levels, n_levels);
    for (int j = 0; j < n_levels; ++j) {
        for (int k = j + 1; k < n_levels; ++k) {
            double w = 1.0;
            if (weight == FrequencyWeight::omega_over_c)
                w = basis.omega(k, j) / omega_c;
            else if (weight == FrequencyWeight::omega_over_q)
                w = basis.omega(k, j) / omega_q;
            out(j, k) = dressed(j, k) * w;
        }
    }
    return out;
}

// Cavity decay channel, frequency-weighted.
inline Matrix cavity_decay_op(const DressedBasis& basis, const TruncatedSpace& space,
                              const RabiParams& p, int n_levels)
{
    return positive_component(basis, emission_operator(space, p.eta()),
                              FrequencyWeight::omega_over_c, n_levels, p.omega_c, p.omega_q);
}

// Qubit decay channel, frequency-weighted.
inline Matrix qubit_decay_op(const DressedBasis& basis, const TruncatedSpace& space,
                             const RabiParams& p, int n_levels)
{
    return positive_component(basis, Matrix(qubit_op(space, QubitOp::sx)),
                              FrequencyWeight::omega_over_q, n_levels, p.omega_c, p.omega_q);
}

// Unweighted lowering part of the emission operator; the jump operator a
// sensor detects through.
inline Matrix sensor_jump_op(const DressedBasis& basis, const TruncatedSpace& space,
                             const RabiParams& p, int n_levels)
{
    return positive_component(basis, emission_operator(space, p.eta()),
                              FrequencyWeight::unweighted, n_levels, p.omega_c, p.omega_q);
}

inline Vector vectorize(const Matrix& rho)
{
    return Eigen::Map<const Vector>(rho.data(), rho.size());
}

inline Matrix devectorize(const Vector& v)
{
    const auto d = Eigen::Index(std::llround(std::sqrt(double(v.size()))));
    if (d * d != v.size())
        throw std::invalid_argument("devectorize: length is not a perfect square");
    return Eigen::Map<const Matrix>(v.data(), d, d);
}

inline complexd vec_trace(const Vector& v)
{
    const auto d = Eigen::Index(std::llround(std::sqrt(double(v.size()))));
    complexd tr = 0.0;
    for (Eigen::Index i = 0; i < d; ++i)
        tr += v[i * d + i];
    return tr;
}

// vec(X rho) = (I kron X) vec(rho)
inline Matrix left_super(const Matrix& x)
{
    return kron(Matrix::Identity(x.rows(), x.cols()), x);
}

// vec(rho X^dag) = (conj(X) kron I) vec(rho)
inline Matrix right_super_dagger(const Matrix& x)
{
    return kron(x.conjugate(), Matrix::Identity(x.rows(), x.cols()));
}

// Left/right multiplication without forming the d^2 x d^2 superoperator.
inline Vector apply_left(const Matrix& x, const Vector& v)
{
    return vectorize(x * devectorize(v));
}

inline Vector apply_right_dagger(const Matrix& x, const Vector& v)
{
    return vectorize(devectorize(v) * x.adjoint());
}

// L[O] rho = O rho O^dag - 1/2 {O^dag O, rho}, as a superoperator.
inline Matrix lindblad_dissipator(const Matrix& o)
{
    const Matrix odo = o.adjoint() * o;
    const Matrix id = Matrix::Identity(o.rows(), o.cols());
    return kron(o.conjugate(), o) - 0.5 * kron(id, odo) - 0.5 * kron(odo.transpose(), id);
}

// -i[H, rho] as a superoperator.
inline Matrix hamiltonian_super(const Matrix& h)
{
    const Matrix id = Matrix::Identity(h.rows(), h.cols());
    return -im * (kron(id, h) - kron(h.transpose(), id));
}

struct Liouvillian {
    Matrix gen;  // dim^2 x dim^2 generator
    int dim = 0; // Hilbert-space dimension

    // The vectorized identity; trace preservation reads trace_dual^T gen = 0.
    Vector trace_dual() const
    {
        Vector t = Vector::Zero(Eigen::Index(dim) * dim);
        for (int i = 0; i < dim; ++i)
            t[Eigen::Index(i) * dim + i] = 1.0;
        return t;
    }

    double trace_defect() const
    {
        return (trace_dual().transpose() * gen).cwiseAbs().maxCoeff();
    }
};

// L0 = -i[H, .] + kappa L[X+] + gamma L[D+] + P_inc L[X-], all operators in the
// same (dressed, truncated) basis. X- is the adjoint of X+.
inline Liouvillian build_liouvillian(const Matrix& h, const RateSet& rates,
                                     const Matrix& cavity_decay, const Matrix& qubit_decay)
{
    rates.validate();
    Matrix gen = hamiltonian_super(h);
    if (rates.kappa > 0)
        gen += rates.kappa * lindblad_dissipator(cavity_decay);
    if (rates.gamma > 0)
        gen += rates.gamma * lindblad_dissipator(qubit_decay);
    if (rates.P_inc > 0)
        gen += rates.P_inc * lindblad_dissipator(cavity_decay.adjoint());
    return Liouvillian{std::move(gen), int(h.rows())};
}

inline Liouvillian build_L0(const DressedBasis& basis, const TruncatedSpace& space,
                            const RabiParams& p, const RateSet& rates, int n_levels)
{
    const Matrix h = basis.energies.head(n_levels).cast<complexd>().asDiagonal();
    return build_liouvillian(h, rates, cavity_decay_op(basis, space, p, n_levels),
                             qubit_decay_op(basis, space, p, n_levels));
}

namespace detail {

struct TraceRowSolve {
    Vector x;
    double pivot_ratio = 0.0;  // min/max |U_ii| of the trace-constrained LU
    bool residual_ok = false;

    bool nonsingular() const { return pivot_ratio > 1e-12; }
};

inline TraceRowSolve solve_with_trace_row(const Liouvillian& l, Eigen::Index row)
{
    Matrix m = l.gen;
    m.row(row) = l.trace_dual().transpose();
    Vector rhs = Vector::Zero(m.rows());
    rhs[row] = 1.0;
    Eigen::PartialPivLU<Matrix> lu(m);
    TraceRowSolve result;
    result.x = lu.solve(rhs);
    const auto pivots = lu.matrixLU().diagonal().cwiseAbs();
    const double pivot_max = pivots.maxCoeff();
    result.pivot_ratio = pivot_max > 0 ? pivots.minCoeff() / pivot_max : 0.0;
    const double gen_scale = std::max(1.0, l.gen.cwiseAbs().maxCoeff());
    const double residual = (l.gen * result.x).norm() / std::max(1e-300, result.x.norm());
    result.residual_ok = residual < 1e-8 * gen_scale;
    return result;
}

}  // namespace detail

// Ratio of the two smallest singular values (second-smallest over smallest).
// Expensive; diagnostic use only.
inline double null_space_ratio(const Liouvillian& l)
{
    Eigen::JacobiSVD<Matrix> svd(l.gen);
    const auto& s = svd.singularValues();
    const double smallest = s[s.size() - 1];
    const double second = s[s.size() - 2];
    if (smallest <= 0.0)
        return std::numeric_limits<double>::infinity();
    return second / smallest;
}

// Null vector of L0 normalized to a physical density operator.
//
// The trace-constrained matrix (one population equation replaced by the trace
// functional) is singular whenever the generator's null space has dimension
// >= 2, so a nonsingular constrained LU certifies uniqueness: a degenerate
// null space is reported, never silently resolved.
inline Matrix steady_state(const Liouvillian& l, bool check_unique = true)
{
    // Candidate equations to replace: a handful of population rows (k,k).
    std::vector<Eigen::Index> candidates;
    for (int k = 0; k < l.dim && candidates.size() < 4; k += std::max(1, l.dim / 4))
        candidates.push_back(Eigen::Index(k) * l.dim + k);

    std::optional<Vector> fallback;
    std::optional<Vector> x;
    for (const Eigen::Index row : candidates) {
        const auto attempt = detail::solve_with_trace_row(l, row);
        if (!attempt.residual_ok)
            continue;
        if (attempt.nonsingular()) {
            x = attempt.x;
            break;
        }
        if (!fallback)
            fallback = attempt.x;
        if (!check_unique)
            break;
    }
    if (!x) {
        if (fallback && !check_unique)
            x = fallback;
        else if (fallback)
            throw std::runtime_error(
                "steady_state: degenerate null space (every trace-constrained system is "
                "numerically singular; the steady state is not unique)");
        else
            throw std::runtime_error("steady_state: no steady state found (all "
                                     "trace-constrained solves failed)");
    }

    Matrix rho = devectorize(*x);
    rho = 0.5 * (rho + Matrix(rho.adjoint()));  // Hermitize
    const double tr = rho.trace().real();
    if (std::abs(tr) < 1e-300)
        throw std::runtime_error("steady_state: traceless null vector");
    return rho / tr;
}

struct PhysicalityCheck {
    double hermiticity_defect = 0.0;
    double min_eigenvalue = 0.0;
    double trace_deviation = 0.0;

    bool ok(double herm_tol = 1e-12, double psd_floor = -1e-10, double trace_tol = 1e-12) const
    {
        return hermiticity_defect < herm_tol && min_eigenvalue > psd_floor
            && trace_deviation < trace_tol;
    }
};

inline PhysicalityCheck check_physical(const Matrix& rho)
{
    PhysicalityCheck c;
    c.hermiticity_defect = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + Matrix(rho.adjoint())));
    c.min_eigenvalue = es.eigenvalues().minCoeff();
    c.trace_deviation = std::abs(rho.trace() - 1.0);
    return c;
}

// Shifted resolvent solves (L0 - z I) x = rhs with the factorization cached per
// shift and reused across right-hand sides. Not thread-safe; use one instance
// per worker.
class ShiftedSolver {
public:
    explicit ShiftedSolver(const Liouvillian& l, size_t cache_cap = 64)
        : gen_(&l.gen), cache_cap_(cache_cap)
    {
    }

    Vector solve(complexd z, const Vector& rhs)
    {
        if (!(z.real() > 0.0))
            throw std::domain_error("ShiftedSolver: shift must have positive real part");
        const auto& lu = factorization(z);
        Vector x = lu.solve(rhs);
        const double rhs_norm = rhs.norm();
        if (rhs_norm > 0.0) {
            const double res = ((*gen_) * x - z * x - rhs).norm() / rhs_norm;
            if (!(res < 1e-8))
                throw std::runtime_error("ShiftedSolver: ill-conditioned solve, residual "
                                         + std::to_string(res) + " at Re(z) = "
                                         + std::to_string(z.real()));
        }
        return x;
    }

private:
    const Eigen::PartialPivLU<Matrix>& factorization(complexd z)
    {
        const auto key = std::make_pair(z.real(), z.imag());
        auto it = cache_.find(key);
        if (it == cache_.end()) {
            if (cache_.size() >= cache_cap_)
                cache_.clear();
            Matrix shifted = *gen_;
            shifted.diagonal().array() -= z;
            it = cache_.emplace(key, std::make_unique<Eigen::PartialPivLU<Matrix>>(shifted)).first;
        }
        return *it->second;
    }

    const Matrix* gen_;
    std::map<std::pair<double, double>, std::unique_ptr<Eigen::PartialPivLU<Matrix>>> cache_;
    size_t cache_cap_;
};

}  // namespace fresco
