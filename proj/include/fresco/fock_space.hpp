#pragma once

// Truncated qubit-cavity Hilbert space and the elementary operators on it.
// Tensor ordering is fixed globally as qubit (x) cavity:
//   basis index = qubit * (n_fock + 1) + fock,  qubit in {0 (g), 1 (e)}.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>

namespace fresco {

using complexd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr complexd im{0.0, 1.0};

struct TruncatedSpace {
    int n_fock = 1;  // highest retained Fock state |n_fock>

    int dim_cavity() const { return n_fock + 1; }
    int dim() const { return 2 * (n_fock + 1); }
    int index(int qubit, int fock) const { return qubit * dim_cavity() + fock; }
};

inline TruncatedSpace build_space(int n_fock)
{
    if (n_fock < 1)
        throw std::invalid_argument("build_space: n_fock must be >= 1");
    return TruncatedSpace{n_fock};
}

inline Matrix kron(const Matrix& a, const Matrix& b)
{
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline Matrix qubit_identity() { return Matrix::Identity(2, 2); }

// a|n> = sqrt(n)|n-1> on the cavity factor, identity on the qubit.
inline Matrix annihilation(const TruncatedSpace& space)
{
    Matrix a = Matrix::Zero(space.dim_cavity(), space.dim_cavity());
    for (int n = 1; n < space.dim_cavity(); ++n)
        a(n - 1, n) = std::sqrt(double(n));
    return kron(qubit_identity(), a);
}

// Built independently of annihilation() so the adjoint relation is testable.
inline Matrix creation(const TruncatedSpace& space)
{
    Matrix ad = Matrix::Zero(space.dim_cavity(), space.dim_cavity());
    for (int n = 1; n < space.dim_cavity(); ++n)
        ad(n, n - 1) = std::sqrt(double(n));
    return kron(qubit_identity(), ad);
}

enum class QubitOp { sx, sz, splus, sminus };

// sigma+ = |e><g|, sigma- = |g><e|, sx = sigma+ + sigma-, sz = |e><e| - |g><g|,
// identity on the cavity factor.
inline Matrix qubit_op(const TruncatedSpace& space, QubitOp which)
{
    Matrix q = Matrix::Zero(2, 2);
    switch (which) {
    case QubitOp::sx:
        q(0, 1) = 1.0;
        q(1, 0) = 1.0;
        break;
    case QubitOp::sz:
        q(0, 0) = -1.0;
        q(1, 1) = 1.0;
        break;
    case QubitOp::splus:
        q(1, 0) = 1.0;
        break;
    case QubitOp::sminus:
        q(0, 1) = 1.0;
        break;
    }
    return kron(q, Matrix::Identity(space.dim_cavity(), space.dim_cavity()));
}

// sigma_p = cos(theta) sz - sin(theta) sx; interpolates between longitudinal
// and transverse qubit-cavity coupling.
inline Matrix sigma_p(const TruncatedSpace& space, double theta)
{
    return std::cos(theta) * qubit_op(space, QubitOp::sz)
         - std::sin(theta) * qubit_op(space, QubitOp::sx);
}

inline bool is_hermitian(const Matrix& a, double rel_tol = 1e-12)
{
    const double scale = a.cwiseAbs().maxCoeff();
    if (scale == 0.0)
        return true;
    return (a - a.adjoint()).cwiseAbs().maxCoeff() < rel_tol * scale;
}

}  // namespace fresco
