#include <klt/gaussian.hpp>
#include <klt/special_functions.hpp>

#include <doctest.h>

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

AffineMapd random_map(int n, Stream& rng)
{
    Mat a(n, n);
    Vec b(n);
    for (int i = 0; i < n; ++i) {
        b(i) = rng.normal();
        for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
    }
    a += 2.0 * Mat::Identity(n, n);
    return AffineMapd(a, b);
}

// Eq. form with explicit inverse, test-side only.
double kl_by_inverse(const Gaussiand& p, const Gaussiand& q)
{
    const Mat qi = q.cov().matrix().inverse();
    const Vec d = q.mean() - p.mean();
    const double n = double(p.dim());
    return 0.5 * (-std::log((qi * p.cov().matrix()).determinant()) + (qi * p.cov().matrix()).trace() - n + d.dot(qi * d));
}

} // namespace

TEST_CASE("kl examples")
{
    Stream rng(1);
    const auto p = random_gaussian(3, rng);
    CHECK(kl(p, p) == 0.0);

    Vec mu(2);
    mu << 1, 1;
    CHECK(kl(Gaussiand(mu, SpdMatrixd::identity(2)), Gaussiand::standard(2)) == doctest::Approx(1.0).epsilon(1e-15));

    CHECK(kl(scalar(0, 2), scalar(0, 1)) == doctest::Approx(0.5 * (2.0 - 1.0 - std::log(2.0))).epsilon(1e-15));
    CHECK(kl(scalar(0, 2), scalar(0, 1)) == doctest::Approx(0.153426409720027).epsilon(1e-13));

    // Table II cell (0.1, 0.1).
    const double s = w2(0.2);
    CHECK(kl(scalar(0, s), scalar(0, 1 / s)) == doctest::Approx(0.4982).epsilon(1e-4));
}

TEST_CASE("kl dimension mismatch")
{
    CHECK_THROWS_AS(kl(Gaussiand::standard(2), Gaussiand::standard(3)), DimensionMismatch);
    CHECK_THROWS_AS(Gaussiand(Vec::Zero(2), SpdMatrixd::identity(3)), DimensionMismatch);
}

TEST_CASE("kl agrees with the explicit-inverse formula")
{
    Stream rng(2);
    for (int n = 1; n <= 6; ++n) {
        const auto p = random_gaussian(n, rng);
        const auto q = random_gaussian(n, rng);
        CHECK(kl(p, q) == doctest::Approx(kl_by_inverse(p, q)).epsilon(1e-10));
    }
}

TEST_CASE("kl nonnegativity on random pairs")
{
    Stream rng(3);
    for (int trial = 0; trial < 10000; ++trial) {
        const int n = 1 + trial % 8;
        const auto p = random_gaussian(n, rng);
        const auto q = random_gaussian(n, rng);
        CHECK(kl(p, q) >= 0.0);
        CHECK(kl(p, p) <= 1e-12);
    }
}

TEST_CASE("affine invariance")
{
    Stream rng(4);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 1 + trial % 6;
        const auto p = random_gaussian(n, rng);
        const auto q = random_gaussian(n, rng);
        const auto t = random_map(n, rng);
        const double before = kl(p, q);
        const double after = kl(affine_transform(p, t), affine_transform(q, t));
        CHECK(std::abs(before - after) <= 1e-9 * std::max(1.0, before));
    }
}

TEST_CASE("asymmetry witness")
{
    Stream rng(5);
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + trial % 5;
        const auto p = random_gaussian(n, rng);
        const auto q = random_gaussian(n, rng);
        if (max_abs(p.cov().matrix() - q.cov().matrix()) <= 0.1) continue;
        ++checked;
        CHECK(std::abs(kl(p, q) - kl(q, p)) > 1e-6);
    }
    CHECK(checked > 100);
}

TEST_CASE("kl against N(0, I) matches the constraint form")
{
    Stream rng(6);
    for (int n = 1; n <= 8; ++n) {
        const auto p = random_gaussian(n, rng);
        const double expected = 0.5 * (-p.cov().log_det() + p.cov().matrix().trace() - n + p.mean().squaredNorm());
        CHECK(std::abs(kl(p, Gaussiand::standard(n)) - expected) <= 1e-12 * std::max(1.0, expected));
    }
}

TEST_CASE("affine_transform")
{
    Stream rng(7);
    const auto p = random_gaussian(3, rng);
    const auto same = affine_transform(p, AffineMapd::identity(3));
    CHECK(max_abs(same.mean() - p.mean()) == 0.0);
    CHECK(max_abs(same.cov().matrix() - p.cov().matrix()) <= 1e-14 * max_abs(p.cov().matrix()));

    const auto scaled = affine_transform(Gaussiand::standard(3), AffineMapd(2.0 * Mat::Identity(3, 3), Vec::Ones(3)));
    CHECK(max_abs(scaled.mean() - Vec::Ones(3)) == 0.0);
    CHECK(max_abs(scaled.cov().matrix() - 4.0 * Mat::Identity(3, 3)) == 0.0);

    CHECK_THROWS_AS(AffineMapd(Mat::Zero(2, 2), Vec::Zero(2)), SingularMap);
    Mat rank1(2, 2);
    rank1 << 1, 2, 2, 4;
    CHECK_THROWS_AS(AffineMapd(rank1, Vec::Zero(2)), SingularMap);
    CHECK_THROWS_AS(affine_transform(p, AffineMapd::identity(2)), DimensionMismatch);
}

TEST_CASE("whitening_map")
{
    const auto id = whitening_map(Gaussiand::standard(2));
    CHECK(max_abs(id.matrix() - Mat::Identity(2, 2)) == 0.0);
    CHECK(max_abs(id.offset()) == 0.0);

    const auto m = whitening_map(scalar(3, 4));
    CHECK(m.matrix()(0, 0) == 0.5);
    CHECK(m.offset()(0) == -1.5);

    Stream rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = random_gaussian(3, rng);
        const auto w = affine_transform(p, whitening_map(p));
        CHECK(max_abs(w.mean()) <= 1e-10);
        CHECK(max_abs(w.cov().matrix() - Mat::Identity(3, 3)) <= 1e-10);
    }
}

TEST_CASE("sample")
{
    Stream rng(10);
    const auto x = sample(Gaussiand::standard(2), 10000, rng);
    CHECK(x.rows() == 10000);
    CHECK(x.cols() == 2);
    const Vec mean = x.colwise().mean();
    CHECK(std::abs(mean(0)) <= 4.0 / 100.0);
    CHECK(std::abs(mean(1)) <= 4.0 / 100.0);

    const auto tight = sample(scalar(5, 1e-4), 10, rng);
    CHECK(((tight.array() - 5.0).abs() <= 0.1).all());

    Stream a(123), b(123);
    const auto p = scalar(1, 2);
    CHECK(sample(p, 50, a) == sample(p, 50, b));

    CHECK_THROWS_AS(sample(p, 0, a), DomainError);
}

TEST_CASE("log_density of N(0,1) at 0")
{
    CHECK(Gaussiand::standard(1).log_density(Vec::Zero(1)) == doctest::Approx(-0.5 * std::log(2 * M_PI)));
}

TEST_CASE("templated on scalar")
{
    using G = Gaussian<long double>;
    const G p(Vector<long double>::Zero(1), Matrix<long double>::Constant(1, 1, 2.0L));
    const G q = G::standard(1);
    CHECK(static_cast<double>(kl(p, q)) == doctest::Approx(0.153426409720027).epsilon(1e-14));
}
