#include <klt/extremal.hpp>

#include <cmath>
#include <string>

namespace klt {

ExtremalTriple construct_triple(const Gaussiand& center, const BudgetPaird& budgets, const OrthogonalMatrixd& q)
{
    const auto n = center.dim();
    if (q.dim() != n) {
        throw DimensionMismatch("Q has dimension " + std::to_string(q.dim())
            + " but the center has dimension " + std::to_string(n));
    }

    const Matrix<double> bq = center.cov().cholesky() * q.matrix();
    auto stretched = [&](double first) {
        Vector<double> d = Vector<double>::Ones(n);
        d(0) = first;
        const Matrix<double> half = bq * d.cwiseSqrt().asDiagonal();
        return SpdMatrixd(half * half.transpose());
    };

    Gaussiand n1(center.mean(), stretched(w2(2 * budgets.delta1())));
    Gaussiand n3(center.mean(), stretched(1.0 / w2(2 * budgets.delta2())));

    const double k12 = kl(n1, center);
    const double k23 = kl(center, n3);
    const double k13 = kl(n1, n3);
    return {std::move(n1), center, std::move(n3), q, budgets, k12, k23, k13};
}

const char* to_string(FamilySide side)
{
    return side == FamilySide::left_of_pivot ? "left" : "right";
}

namespace {

// |x| <= half_width up to round-off at the endpoint.
double remaining_budget(double budget, double used, const char* what)
{
    const double r = budget - used;
    if (r >= 0) return r;
    if (r >= -1e-12 * std::max(1.0, budget)) return 0.0;
    throw DomainError(std::string(what) + " lies outside its admissible interval");
}

} // namespace

double family_left_half_width(double delta1)
{
    return std::sqrt(2 * delta1);
}

double family_right_half_width(double delta2)
{
    return std::sqrt(std::expm1(2 * delta2));
}

Family1dPoint family_1d_left(double mu1, double delta1)
{
    if (!(delta1 > 0)) throw DomainError("family_1d_left requires delta1 > 0");
    // The grid endpoint itself spends the whole budget on the mean.
    const double t = std::abs(mu1) == family_left_half_width(delta1) ? 0.0 : remaining_budget(2 * delta1, mu1 * mu1, "mu1");
    return {mu1, w2(t), FamilySide::left_of_pivot};
}

Family1dPoint family_1d_right(double mu2, double delta2)
{
    if (!(delta2 > 0)) throw DomainError("family_1d_right requires delta2 > 0");
    const double shift = std::log1p(mu2 * mu2);
    const double t = std::abs(mu2) == family_right_half_width(delta2) ? 0.0 : remaining_budget(2 * delta2, shift, "mu2");
    const double precision = w2(t) / (1 + mu2 * mu2);
    return {mu2, 1.0 / precision, FamilySide::right_of_pivot};
}

std::vector<double> symmetric_grid(double half_width, int count)
{
    if (count < 2) throw DomainError("grid must have at least 2 points");
    std::vector<double> out(static_cast<std::size_t>(count));
    const int span = count - 1;
    for (int i = 0; i < count; ++i) {
        out[static_cast<std::size_t>(i)] = half_width * static_cast<double>(2 * i - span) / span;
    }
    return out;
}

Matrix<double> kl_grid_1d(double delta1, double delta2, int grid)
{
    const auto mu1 = symmetric_grid(family_left_half_width(delta1), grid);
    const auto mu2 = symmetric_grid(family_right_half_width(delta2), grid);

    std::vector<Gaussiand> left, right;
    left.reserve(mu1.size());
    right.reserve(mu2.size());
    for (double m : mu1) {
        const auto p = family_1d_left(m, delta1);
        left.emplace_back(Vector<double>::Constant(1, p.mu), Matrix<double>::Constant(1, 1, p.sigma_sq));
    }
    for (double m : mu2) {
        const auto p = family_1d_right(m, delta2);
        right.emplace_back(Vector<double>::Constant(1, p.mu), Matrix<double>::Constant(1, 1, p.sigma_sq));
    }

    Matrix<double> out(grid, grid);
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j) out(i, j) = kl(left[static_cast<std::size_t>(i)], right[static_cast<std::size_t>(j)]);
    return out;
}

} // namespace klt
