#pragma once

// Gaussian triples that attain the supremum, and the one-dimensional
// constrained families around N(0, 1).

#include <klt/bound.hpp>
#include <klt/gaussian.hpp>
#include <klt/matrix_core.hpp>

#include <vector>

namespace klt {

/// (N1, N2, N3) with KL(N1||N2) = d1, KL(N2||N3) = d2 and KL(N1||N3) equal to
/// the supremum. The achieved values are recomputed from the Gaussians.
struct ExtremalTriple
{
    Gaussiand n1;
    Gaussiand n2;
    Gaussiand n3;
    OrthogonalMatrixd q;
    BudgetPaird budgets;
    double achieved12;
    double achieved23;
    double achieved13;
};

/// Sigma1 = B Q diag(w2(2 d1), 1, ..., 1) Q^T B^T,
/// Sigma3 = B Q diag(1 / w2(2 d2), 1, ..., 1) Q^T B^T, equal means,
/// where B is the lower Cholesky factor of the center's covariance.
ExtremalTriple construct_triple(const Gaussiand& center, const BudgetPaird& budgets, const OrthogonalMatrixd& q);

enum class FamilySide { left_of_pivot, right_of_pivot };

const char* to_string(FamilySide side);

struct Family1dPoint
{
    double mu;
    double sigma_sq;
    FamilySide side;
};

/// N(mu1, w2(2 d1 - mu1^2)): KL(. || N(0, 1)) = d1 on |mu1| <= sqrt(2 d1).
Family1dPoint family_1d_left(double mu1, double delta1);

/// N(mu2, s2) with 1/s2 = w2(2 d2 - log(1 + mu2^2)) / (1 + mu2^2):
/// KL(N(0, 1) || .) = d2 on |mu2| <= sqrt(e^{2 d2} - 1).
Family1dPoint family_1d_right(double mu2, double delta2);

double family_left_half_width(double delta1);
double family_right_half_width(double delta2);

/// Evenly spaced, exactly antisymmetric grid over [-half_width, half_width].
std::vector<double> symmetric_grid(double half_width, int count);

/// KL(N1(mu1) || N3(mu2)) over grid x grid points of the two families.
/// Row index follows mu1, column index follows mu2.
Matrix<double> kl_grid_1d(double delta1, double delta2, int grid);

} // namespace klt
