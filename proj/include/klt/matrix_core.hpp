#pragma once

// Small dense symmetric positive-definite linear algebra on top of Eigen.

#include <klt/errors.hpp>
#include <klt/rng.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <string>

namespace klt {

inline constexpr Eigen::Index kMaxDim = 64;

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Condition number above which SpdMatrix emits a warning.
inline constexpr double kConditionWarnThreshold = 1e12;

using WarningHandler = void (*)(const char*);

namespace detail {

inline void default_warning(const char* msg) { std::fprintf(stderr, "klt warning: %s\n", msg); }

inline std::atomic<WarningHandler>& warning_handler()
{
    static std::atomic<WarningHandler> handler{&default_warning};
    return handler;
}

inline void check_dim(Eigen::Index n)
{
    if (n < 1 || n > kMaxDim) {
        throw DimensionError("dimension must be in [1, " + std::to_string(kMaxDim) + "], got " + std::to_string(n));
    }
}

} // namespace detail

/// Replaces the warning sink (stderr by default). Pass nullptr to silence.
inline void set_warning_handler(WarningHandler handler) { detail::warning_handler().store(handler); }

inline void warn(const std::string& msg)
{
    if (auto* h = detail::warning_handler().load()) h(msg.c_str());
}

template <class Derived>
typename Derived::Scalar max_abs(const Eigen::MatrixBase<Derived>& a)
{
    return a.size() == 0 ? typename Derived::Scalar(0) : a.cwiseAbs().maxCoeff();
}

/// Immutable symmetric positive-definite matrix with its Cholesky factor.
///
/// The factor is computed once at construction; a matrix that fails the
/// factorization never becomes an SpdMatrix.
template <class Scalar>
class SpdMatrix
{
public:
    using matrix_type = Matrix<Scalar>;
    using vector_type = Vector<Scalar>;

    /// Symmetrizes `a` after checking |a - a^T| <= sym_tol * max(1, |a|_max).
    explicit SpdMatrix(const matrix_type& a, Scalar sym_tol = Scalar(1e-9))
    {
        if (a.rows() != a.cols()) {
            throw DimensionMismatch("SpdMatrix requires a square matrix, got "
                + std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
        }
        detail::check_dim(a.rows());
        if (!a.allFinite()) throw NotPositiveDefinite("matrix has non-finite entries");
        const Scalar asym = max_abs(a - a.transpose());
        if (asym > sym_tol * std::max(Scalar(1), max_abs(a))) {
            throw NotPositiveDefinite("matrix is not symmetric (max asymmetry "
                + std::to_string(static_cast<double>(asym)) + ")");
        }
        entries_ = (a + a.transpose()) / Scalar(2);
        factorize();
    }

    static SpdMatrix identity(Eigen::Index n) { return SpdMatrix(matrix_type::Identity(n, n)); }

    static SpdMatrix diagonal(const vector_type& d) { return SpdMatrix(matrix_type(d.asDiagonal())); }

    Eigen::Index dim() const { return entries_.rows(); }
    const matrix_type& matrix() const { return entries_; }
    /// Lower-triangular L with L L^T = A.
    const matrix_type& cholesky() const { return chol_; }
    Scalar log_det() const { return log_det_; }

    /// Estimate from the squared Cholesky diagonal.
    Scalar condition_estimate() const
    {
        const auto d2 = chol_.diagonal().array().square();
        return d2.maxCoeff() / d2.minCoeff();
    }

    vector_type solve(const vector_type& b) const
    {
        if (b.size() != dim()) {
            throw DimensionMismatch("solve: rhs has length " + std::to_string(b.size())
                + ", matrix has dimension " + std::to_string(dim()));
        }
        vector_type y = chol_.template triangularView<Eigen::Lower>().solve(b);
        return chol_.transpose().template triangularView<Eigen::Upper>().solve(y);
    }

    /// L^{-1} b.
    template <class Derived>
    Matrix<Scalar> solve_lower(const Eigen::MatrixBase<Derived>& b) const
    {
        return chol_.template triangularView<Eigen::Lower>().solve(b);
    }

private:
    void factorize()
    {
        Eigen::LLT<matrix_type> llt(entries_);
        if (llt.info() != Eigen::Success) throw NotPositiveDefinite("Cholesky factorization failed");
        chol_ = llt.matrixL();
        const auto diag = chol_.diagonal();
        // Pivots are the squared diagonal entries.
        if ((diag.array() <= Scalar(1e-150)).any() || !diag.allFinite()) {
            throw NotPositiveDefinite("Cholesky pivot at or below 1e-300");
        }
        log_det_ = Scalar(2) * diag.array().log().sum();
        if (condition_estimate() > Scalar(kConditionWarnThreshold)) {
            warn("ill-conditioned covariance (condition estimate "
                + std::to_string(static_cast<double>(condition_estimate())) + ")");
        }
    }

    matrix_type entries_;
    matrix_type chol_;
    Scalar log_det_{0};
};

using SpdMatrixd = SpdMatrix<double>;

/// Square matrix with Q^T Q = I.
template <class Scalar>
class OrthogonalMatrix
{
public:
    using matrix_type = Matrix<Scalar>;

    /// Checks |Q^T Q - I| <= tol entrywise.
    explicit OrthogonalMatrix(const matrix_type& q, Scalar tol = Scalar(1e-10))
        : entries_(q)
    {
        if (q.rows() != q.cols()) throw DimensionMismatch("orthogonal matrix must be square");
        detail::check_dim(q.rows());
        const Scalar err = max_abs(q.transpose() * q - matrix_type::Identity(q.rows(), q.cols()));
        if (!(err <= tol)) {
            throw NumericalError("matrix is not orthogonal (max |Q^T Q - I| = "
                + std::to_string(static_cast<double>(err)) + ")");
        }
    }

    static OrthogonalMatrix identity(Eigen::Index n) { return OrthogonalMatrix(matrix_type::Identity(n, n)); }

    Eigen::Index dim() const { return entries_.rows(); }
    const matrix_type& matrix() const { return entries_; }

private:
    matrix_type entries_;
};

using OrthogonalMatrixd = OrthogonalMatrix<double>;

template <class Scalar>
struct EigenDecomposition
{
    /// Descending.
    Vector<Scalar> eigenvalues;
    /// Column i pairs with eigenvalues[i].
    Matrix<Scalar> eigenvectors;
};

template <class Scalar>
Matrix<Scalar> cholesky(const SpdMatrix<Scalar>& a)
{
    return a.cholesky();
}

template <class Scalar>
Scalar log_det(const SpdMatrix<Scalar>& a)
{
    return a.log_det();
}

template <class Scalar>
Vector<Scalar> solve_spd(const SpdMatrix<Scalar>& a, const Vector<Scalar>& b)
{
    return a.solve(b);
}

/// Symmetric eigendecomposition, eigenvalues sorted descending.
/// Positive definiteness is not required.
template <class Derived>
EigenDecomposition<typename Derived::Scalar> sym_eigen(const Eigen::MatrixBase<Derived>& a)
{
    using Scalar = typename Derived::Scalar;
    if (a.rows() != a.cols()) throw DimensionMismatch("sym_eigen requires a square matrix");
    detail::check_dim(a.rows());
    const Matrix<Scalar> sym = (a + a.transpose()) / Scalar(2);
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(sym);
    if (solver.info() != Eigen::Success) throw ConvergenceError("symmetric eigensolver did not converge");
    // Eigen returns ascending order.
    return {solver.eigenvalues().reverse(), solver.eigenvectors().rowwise().reverse()};
}

template <class Scalar>
EigenDecomposition<Scalar> sym_eigen(const SpdMatrix<Scalar>& a)
{
    return sym_eigen(a.matrix());
}

/// Haar-distributed orthogonal matrix: sign-corrected QR of a Gaussian matrix.
template <class Scalar = double>
OrthogonalMatrix<Scalar> random_orthogonal(Eigen::Index n, Stream& rng)
{
    detail::check_dim(n);
    for (;;) {
        Matrix<Scalar> g(n, n);
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i) g(i, j) = Scalar(rng.normal());
        Eigen::HouseholderQR<Matrix<Scalar>> qr(g);
        const Matrix<Scalar> r = qr.matrixQR().template triangularView<Eigen::Upper>();
        const auto rdiag = r.diagonal();
        if ((rdiag.array().abs() < Scalar(1e-12)).any()) continue;
        Matrix<Scalar> q = qr.householderQ();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (rdiag(j) < 0) q.col(j) *= Scalar(-1);
        }
        return OrthogonalMatrix<Scalar>(q);
    }
}

/// M M^T + n I with standard normal M; the test-suite's SPD generator.
template <class Scalar = double>
SpdMatrix<Scalar> random_spd(Eigen::Index n, Stream& rng)
{
    detail::check_dim(n);
    Matrix<Scalar> m(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) m(i, j) = Scalar(rng.normal());
    return SpdMatrix<Scalar>(m * m.transpose() + Scalar(n) * Matrix<Scalar>::Identity(n, n));
}

} // namespace klt
