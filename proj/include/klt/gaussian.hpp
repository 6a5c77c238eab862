#pragma once

#include <klt/errors.hpp>
#include <klt/matrix_core.hpp>
#include <klt/rng.hpp>

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

namespace klt {

/// N(mean, cov).
template <class Scalar>
class Gaussian
{
public:
    using vector_type = Vector<Scalar>;
    using matrix_type = Matrix<Scalar>;

    Gaussian(vector_type mean, SpdMatrix<Scalar> cov)
        : mean_(std::move(mean)), cov_(std::move(cov))
    {
        if (mean_.size() != cov_.dim()) {
            throw DimensionMismatch("mean has length " + std::to_string(mean_.size())
                + " but covariance has dimension " + std::to_string(cov_.dim()));
        }
        if (!mean_.allFinite()) throw DomainError("mean has non-finite entries");
    }

    Gaussian(vector_type mean, const matrix_type& cov)
        : Gaussian(std::move(mean), SpdMatrix<Scalar>(cov))
    {}

    static Gaussian standard(Eigen::Index n)
    {
        return Gaussian(vector_type::Zero(n), SpdMatrix<Scalar>::identity(n));
    }

    Eigen::Index dim() const { return mean_.size(); }
    const vector_type& mean() const { return mean_; }
    const SpdMatrix<Scalar>& cov() const { return cov_; }

    /// log density at x.
    Scalar log_density(const vector_type& x) const
    {
        const vector_type z = cov_.solve_lower(x - mean_);
        const Scalar n = Scalar(dim());
        return Scalar(-0.5) * (n * std::log(2 * std::numbers::pi_v<Scalar>) + cov_.log_det() + z.squaredNorm());
    }

private:
    vector_type mean_;
    SpdMatrix<Scalar> cov_;
};

using Gaussiand = Gaussian<double>;

/// x -> A x + b with A invertible.
template <class Scalar>
class AffineMap
{
public:
    using vector_type = Vector<Scalar>;
    using matrix_type = Matrix<Scalar>;

    AffineMap(matrix_type matrix, vector_type offset)
        : matrix_(std::move(matrix)), offset_(std::move(offset))
    {
        if (matrix_.rows() != matrix_.cols() || matrix_.rows() != offset_.size()) {
            throw DimensionMismatch("affine map needs square A and matching offset");
        }
        detail::check_dim(matrix_.rows());
        // A^T A must factor: |det A| > 0.
        Eigen::LLT<matrix_type> llt(matrix_.transpose() * matrix_);
        if (llt.info() != Eigen::Success || !(llt.matrixL().toDenseMatrix().diagonal().array() > Scalar(0)).all()) {
            throw SingularMap("affine map matrix is singular");
        }
    }

    static AffineMap identity(Eigen::Index n) { return AffineMap(matrix_type::Identity(n, n), vector_type::Zero(n)); }

    Eigen::Index dim() const { return offset_.size(); }
    const matrix_type& matrix() const { return matrix_; }
    const vector_type& offset() const { return offset_; }

private:
    matrix_type matrix_;
    vector_type offset_;
};

using AffineMapd = AffineMap<double>;

template <class Scalar>
void check_same_dim(const Gaussian<Scalar>& p, const Gaussian<Scalar>& q)
{
    if (p.dim() != q.dim()) {
        throw DimensionMismatch("Gaussians have dimensions " + std::to_string(p.dim())
            + " and " + std::to_string(q.dim()));
    }
}

/// KL(p || q) in nats.
///
/// 0.5 (log|S_q| - log|S_p| + |L_q^{-1} L_p|_F^2 - n + |L_q^{-1}(m_q - m_p)|^2),
/// with triangular solves only. Round-off negatives above -1e-12 clamp to 0.
template <class Scalar>
Scalar kl(const Gaussian<Scalar>& p, const Gaussian<Scalar>& q)
{
    check_same_dim(p, q);
    const Scalar trace_term = q.cov().solve_lower(p.cov().cholesky()).squaredNorm();
    const Scalar mahalanobis = q.cov().solve_lower(q.mean() - p.mean()).squaredNorm();
    const Scalar value = Scalar(0.5)
        * ((q.cov().log_det() - p.cov().log_det()) + (trace_term - Scalar(p.dim())) + mahalanobis);
    if (value >= 0) return value;
    if (value >= Scalar(-1e-12)) return Scalar(0);
    throw NumericalError("KL evaluated to " + std::to_string(static_cast<double>(value)));
}

/// N(A m + b, A S A^T).
template <class Scalar>
Gaussian<Scalar> affine_transform(const Gaussian<Scalar>& p, const AffineMap<Scalar>& t)
{
    if (p.dim() != t.dim()) throw DimensionMismatch("affine map and Gaussian dimensions differ");
    const auto& a = t.matrix();
    // (A L)(A L)^T keeps the product symmetric to round-off.
    const Matrix<Scalar> al = a * p.cov().cholesky();
    return Gaussian<Scalar>(a * p.mean() + t.offset(), SpdMatrix<Scalar>(al * al.transpose()));
}

/// x -> L^{-1}(x - m) where L is the Cholesky factor of q's covariance.
template <class Scalar>
AffineMap<Scalar> whitening_map(const Gaussian<Scalar>& q)
{
    const auto n = q.dim();
    const Matrix<Scalar> l_inv = q.cov().solve_lower(Matrix<Scalar>::Identity(n, n));
    return AffineMap<Scalar>(l_inv, -(l_inv * q.mean()));
}

/// count x n matrix of draws mean + L z.
template <class Scalar>
Matrix<Scalar> sample(const Gaussian<Scalar>& p, Eigen::Index count, Stream& rng)
{
    if (count < 1) throw DomainError("sample count must be >= 1");
    const auto n = p.dim();
    Matrix<Scalar> z(n, count);
    for (Eigen::Index j = 0; j < count; ++j)
        for (Eigen::Index i = 0; i < n; ++i) z(i, j) = Scalar(rng.normal());
    Matrix<Scalar> x = p.cov().cholesky().template triangularView<Eigen::Lower>() * z;
    x.colwise() += p.mean();
    return x.transpose();
}

} // namespace klt
