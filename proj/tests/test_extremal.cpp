#include <klt/extremal.hpp>

#include <doctest.h>

#include "oracles.hpp"

#include <cmath>

using namespace klt;
using Mat = Matrix<double>;
using Vec = Vector<double>;

namespace {

Gaussiand scalar(double mu, double var)
{
    return Gaussiand(Vec::Constant(1, mu), Mat::Constant(1, 1, var));
}

Gaussiand random_gaussian(int n, Stream& rng)
{
    Vec mu(n);
    for (int i = 0; i < n; ++i) mu(i) = rng.normal();
    return Gaussiand(mu, random_spd(n, rng));
}

void check_invariants(const ExtremalTriple& t)
{
    const double d1 = t.budgets.delta1();
    const double d2 = t.budgets.delta2();
    const double s = supremum(t.budgets);
    CHECK(std::abs(t.achieved12 - d1) <= 1e-10 * std::max(1.0, d1));
    CHECK(std::abs(t.achieved23 - d2) <= 1e-10 * std::max(1.0, d2));
    CHECK(std::abs(t.achieved13 - s) <= 1e-9 * std::max(1.0, s));
    CHECK(t.n1.mean() == t.n2.mean());
    CHECK(t.n3.mean() == t.n2.mean());
}

// Half of tr(S) - n - log|S|, i.e. KL(N(0, S) || N(0, I)).
double cov_budget(const Mat& s)
{
    return 0.5 * (s.trace() - double(s.rows()) - std::log(s.determinant()));
}

} // namespace

TEST_CASE("construct_triple in one dimension")
{
    const auto t = construct_triple(Gaussiand::standard(1), BudgetPaird(0.1, 0.1), OrthogonalMatrixd::identity(1));
    CHECK(t.n1.cov().matrix()(0, 0) == doctest::Approx(oracle::w2(0.2)).epsilon(1e-13));
    CHECK(t.n1.cov().matrix()(0, 0) == doctest::Approx(1.7722).epsilon(1e-4));
    CHECK(t.n3.cov().matrix()(0, 0) == doctest::Approx(1.0 / oracle::w2(0.2)).epsilon(1e-13));
    CHECK(t.n3.cov().matrix()(0, 0) == doctest::Approx(0.5643).epsilon(1e-4));
    CHECK(std::abs(t.achieved13 - 0.4982) <= 5e-5);
    check_invariants(t);
}

TEST_CASE("construct_triple in two dimensions stretches the first axis")
{
    const auto t = construct_triple(Gaussiand::standard(2), BudgetPaird(0.1, 0.1), OrthogonalMatrixd::identity(2));
    Mat s1 = Mat::Identity(2, 2);
    s1(0, 0) = oracle::w2(0.2);
    Mat s3 = Mat::Identity(2, 2);
    s3(0, 0) = 1.0 / oracle::w2(0.2);
    CHECK(max_abs(t.n1.cov().matrix() - s1) <= 1e-13);
    CHECK(max_abs(t.n3.cov().matrix() - s3) <= 1e-13);
    CHECK(std::abs(t.achieved13 - 0.4982) <= 5e-5);
    check_invariants(t);
}

TEST_CASE("construct_triple with a general center")
{
    Stream rng(1);
    const auto center = random_gaussian(5, rng);
    const auto t = construct_triple(center, BudgetPaird(0.01, 1.0), random_orthogonal(5, rng));
    CHECK(std::abs(t.achieved13 - 1.3843) <= 5e-5);
    check_invariants(t);
    CHECK(max_abs(t.n2.cov().matrix() - center.cov().matrix()) == 0.0);
}

TEST_CASE("achieved divergences do not depend on Q")
{
    Stream rng(2);
    const auto center = random_gaussian(4, rng);
    const BudgetPaird b(0.3, 0.7);
    const auto a = construct_triple(center, b, random_orthogonal(4, rng));
    const auto c = construct_triple(center, b, random_orthogonal(4, rng));
    CHECK(max_abs(a.n1.cov().matrix() - c.n1.cov().matrix()) > 1e-3);
    CHECK(std::abs(a.achieved13 - c.achieved13) <= 1e-10);
}

TEST_CASE("construct_triple rejects a mismatched Q")
{
    CHECK_THROWS_AS(construct_triple(Gaussiand::standard(3), BudgetPaird(0.1, 0.1), OrthogonalMatrixd::identity(2)),
                    DimensionMismatch);
}

TEST_CASE("attainment across dimensions and budgets")
{
    Stream rng(3);
    for (int n = 1; n <= 8; ++n) {
        for (double d1 : {0.001, 0.1, 1.0}) {
            for (double d2 : {0.001, 0.1, 1.0}) {
                for (int rep = 0; rep < 3; ++rep) {
                    const auto t = construct_triple(random_gaussian(n, rng), BudgetPaird(d1, d2), random_orthogonal(n, rng));
                    check_invariants(t);
                }
            }
        }
    }
}

TEST_CASE("perturbing the extremal N1 off its optimum lowers KL13")
{
    // Whitened frame: N2 = N(0, I). Perturb Sigma1, then move along the
    // segment I + s (Sigma1' - I) until KL(N1 || N2) is back at delta1.
    Stream rng(4);
    int probes = 0;
    for (int n : {2, 3, 4, 5}) {
        for (int rep = 0; rep < 25; ++rep) {
            const BudgetPaird b(0.05 + rng.uniform(), 0.05 + rng.uniform());
            const auto t = construct_triple(Gaussiand::standard(n), b, random_orthogonal(n, rng));

            Mat e(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) e(i, j) = rng.normal();
            e = (e + e.transpose()).eval();
            e *= 1e-3 / e.norm();

            const Mat dir = t.n1.cov().matrix() + e - Mat::Identity(n, n);
            double lo = 0, hi = 2;
            for (int k = 0; k < 200; ++k) {
                const double mid = 0.5 * (lo + hi);
                if (cov_budget(Mat::Identity(n, n) + mid * dir) < b.delta1()) lo = mid;
                else hi = mid;
            }
            const Mat s1 = Mat::Identity(n, n) + 0.5 * (lo + hi) * dir;
            const Gaussiand n1(Vec::Zero(n), s1);
            CHECK(std::abs(kl(n1, t.n2) - b.delta1()) <= 1e-12);
            CHECK(kl(n1, t.n3) < supremum(b));
            ++probes;
        }
    }
    CHECK(probes == 100);
}

TEST_CASE("family_1d_left")
{
    CHECK(family_1d_left(0.0, 0.1).sigma_sq == doctest::Approx(oracle::w2(0.2)).epsilon(1e-13));
    const double edge = family_left_half_width(0.1);
    CHECK(family_1d_left(edge, 0.1).sigma_sq == 1.0);
    CHECK(family_1d_left(-edge, 0.1).sigma_sq == 1.0);
    CHECK(family_1d_left(0.0, 0.1).side == FamilySide::left_of_pivot);
    CHECK(std::string(to_string(FamilySide::left_of_pivot)) == "left");
    CHECK_THROWS_AS(family_1d_left(0.5, 0.1), DomainError);
    CHECK_THROWS_AS(family_1d_left(0.0, 0.0), DomainError);
}

TEST_CASE("family_1d_right")
{
    CHECK(family_1d_right(0.0, 0.1).sigma_sq == doctest::Approx(1.0 / oracle::w2(0.2)).epsilon(1e-13));
    CHECK(family_1d_right(0.0, 0.1).sigma_sq == doctest::Approx(0.5643).epsilon(1e-4));
    const double edge = family_right_half_width(0.1);
    CHECK(family_1d_right(edge, 0.1).sigma_sq == doctest::Approx(1 + edge * edge).epsilon(1e-14));
    CHECK(family_1d_right(0.0, 0.1).side == FamilySide::right_of_pivot);
    CHECK(std::string(to_string(FamilySide::right_of_pivot)) == "right");
    CHECK_THROWS_AS(family_1d_right(1.0, 0.1), DomainError);
    CHECK_THROWS_AS(family_1d_right(0.0, -1.0), DomainError);
}

TEST_CASE("family coverage over 1000 admissible means")
{
    Stream rng(5);
    const auto ref = Gaussiand::standard(1);
    for (int i = 0; i < 1000; ++i) {
        const double d1 = 0.001 + 2 * rng.uniform();
        const double d2 = 0.001 + 2 * rng.uniform();
        const auto l = family_1d_left(rng.uniform(-1, 1) * family_left_half_width(d1), d1);
        const auto r = family_1d_right(rng.uniform(-1, 1) * family_right_half_width(d2), d2);
        CHECK(std::abs(kl(scalar(l.mu, l.sigma_sq), ref) - d1) <= 1e-12 * std::max(1.0, d1));
        CHECK(std::abs(kl(ref, scalar(r.mu, r.sigma_sq)) - d2) <= 1e-12 * std::max(1.0, d2));
    }
}

TEST_CASE("symmetric_grid")
{
    const auto g = symmetric_grid(2.0, 5);
    REQUIRE(g.size() == 5);
    CHECK(g[0] == -2.0);
    CHECK(g[2] == 0.0);
    CHECK(g[4] == 2.0);
    const auto h = symmetric_grid(0.3, 101);
    for (std::size_t i = 0; i < h.size(); ++i) CHECK(h[i] == -h[h.size() - 1 - i]);
    CHECK_THROWS_AS(symmetric_grid(1.0, 1), DomainError);
}

TEST_CASE("kl_grid_1d peaks at the centre")
{
    const auto k = kl_grid_1d(0.1, 0.1, 101);
    REQUIRE(k.rows() == 101);
    Eigen::Index r = 0, c = 0;
    k.maxCoeff(&r, &c);
    CHECK(r == 50);
    CHECK(c == 50);
    CHECK(k(50, 50) == doctest::Approx(supremum(0.1, 0.1)).epsilon(1e-12));
    CHECK(std::abs(k(50, 50) - 0.4982) <= 5e-5);

    for (int i = 0; i < 101; ++i)
        for (int j = 0; j < 101; ++j) CHECK(std::abs(k(i, j) - k(100 - i, 100 - j)) <= 1e-12);

    const auto corners = kl_grid_1d(0.1, 0.1, 2);
    CHECK((corners.array() < 0.4982).all());
}
