#include <klt/verify.hpp>

#include <klt/parallel.hpp>
#include <klt/special_functions.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace klt {

double covariance_budget(const Vector<double>& log_eigenvalues)
{
    double sum = 0;
    for (Eigen::Index i = 0; i < log_eigenvalues.size(); ++i) sum += detail::excess(log_eigenvalues(i));
    return sum;
}

namespace {

struct BudgetSplit
{
    Matrix<double> basis;
    /// log eigenvalues after interpolation toward 1.
    Vector<double> log_eigs;
    /// Left over for the mean term.
    double mean_budget;
};

// Eigenvalues log-uniform in [e^-2, e^2], pulled toward 1 by lambda -> lambda^s
// so that the covariance term spends `fraction` of `budget`.
BudgetSplit split_budget(Eigen::Index dim, double budget, Stream& rng, const SamplerOptions& opts)
{
    if (!(budget >= 0) || !std::isfinite(budget)) throw DomainError("constraint budget must be finite and >= 0");
    Matrix<double> basis = random_orthogonal(dim, rng).matrix();
    Vector<double> a(dim);
    do {
        for (Eigen::Index i = 0; i < dim; ++i) a(i) = rng.uniform(-2.0, 2.0);
    } while (a.cwiseAbs().maxCoeff() < 1e-6);

    double fraction = opts.covariance_fraction ? *opts.covariance_fraction : rng.uniform();
    if (!(fraction >= 0 && fraction <= 1)) throw DomainError("covariance_fraction must lie in [0, 1]");
    const double target = fraction * budget;

    double s = 0;
    if (target > 0) {
        double lo = 0;
        double hi = 1;
        while (covariance_budget(hi * a) < target) hi *= 2;
        for (int iter = 0; iter < 200 && hi - lo > 0; ++iter) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            (covariance_budget(mid * a) <= target ? lo : hi) = mid;
        }
        s = lo;
    }
    Vector<double> log_eigs = s * a;
    double rest = budget - covariance_budget(log_eigs);
    if (rest < 1e-14 * std::max(1.0, budget)) rest = 0;
    return {std::move(basis), std::move(log_eigs), rest};
}

Vector<double> random_direction(Eigen::Index dim, Stream& rng)
{
    Vector<double> v(dim);
    double norm = 0;
    do {
        for (Eigen::Index i = 0; i < dim; ++i) v(i) = rng.normal();
        norm = v.norm();
    } while (norm < 1e-12);
    return v / norm;
}

} // namespace

Gaussiand sample_constrained_left(Eigen::Index dim, double delta1, Stream& rng, const SamplerOptions& opts)
{
    auto split = split_budget(dim, 2 * delta1, rng, opts);
    const Vector<double> root = (0.5 * split.log_eigs.array()).exp().matrix();
    const Matrix<double> half = split.basis * root.asDiagonal();
    Vector<double> mean = std::sqrt(split.mean_budget) * random_direction(dim, rng);
    return Gaussiand(std::move(mean), SpdMatrixd(half * half.transpose()));
}

Gaussiand sample_constrained_right(Eigen::Index dim, double delta2, Stream& rng, const SamplerOptions& opts)
{
    // The budget is spent on the precision matrix; the mean term is Mahalanobis.
    auto split = split_budget(dim, 2 * delta2, rng, opts);
    const Vector<double> inv_root = (-0.5 * split.log_eigs.array()).exp().matrix();
    const Matrix<double> half = split.basis * inv_root.asDiagonal();
    const Vector<double> dir = std::sqrt(split.mean_budget) * random_direction(dim, rng);
    Vector<double> mean = half * (split.basis.transpose() * dir);
    return Gaussiand(std::move(mean), SpdMatrixd(half * half.transpose()));
}

namespace {

struct ChunkResult
{
    TrialRecord best;
    double residual_max = 0;
};

void consider(TrialRecord& best, std::int64_t trial, const Gaussiand& n1, const Gaussiand& n3,
              double k12, double k23, double k13)
{
    if (best.trial < 0 || k13 > best.kl13) best = {trial, n1, n3, k12, k23, k13};
}

// Moves (n1, N(0, I), n3) by a random invertible affine map and reports the
// largest change in any of the three divergences.
double affine_spot_check(const Gaussiand& n1, const Gaussiand& n3, Stream& rng)
{
    const auto dim = n1.dim();
    const Gaussiand center = Gaussiand::standard(dim);
    const auto target = random_spd(dim, rng);
    Vector<double> offset(dim);
    for (Eigen::Index i = 0; i < dim; ++i) offset(i) = rng.normal();
    const AffineMapd map(target.cholesky() * random_orthogonal(dim, rng).matrix(), offset);

    const auto m1 = affine_transform(n1, map);
    const auto m2 = affine_transform(center, map);
    const auto m3 = affine_transform(n3, map);
    return std::max({std::abs(kl(m1, m2) - kl(n1, center)),
                     std::abs(kl(m2, m3) - kl(center, n3)),
                     std::abs(kl(m1, m3) - kl(n1, n3))});
}

} // namespace

VerifyReport verify_triangle(Eigen::Index dim, const BudgetPaird& budgets, std::int64_t trials, std::uint64_t seed,
                             const VerifyOptions& opts)
{
    if (trials < 1) throw DomainError("verify_triangle needs trials >= 1");
    if (opts.chunk_size < 1) throw DomainError("chunk_size must be >= 1");
    detail::check_dim(dim);

    const double d1 = budgets.delta1();
    const double d2 = budgets.delta2();
    const Gaussiand center = Gaussiand::standard(dim);

    VerifyReport report;
    report.seed = seed;
    report.dim = dim;
    report.trials = trials;
    report.budgets = budgets;
    report.supremum = supremum(budgets);

    // Trial 0: the attaining configuration.
    const auto extremal = construct_triple(center, budgets, OrthogonalMatrixd::identity(dim));
    TrialRecord best;
    consider(best, 0, extremal.n1, extremal.n3, extremal.achieved12, extremal.achieved23, extremal.achieved13);
    double residual_max = std::max(std::abs(extremal.achieved12 - d1), std::abs(extremal.achieved23 - d2));

    const std::int64_t random_trials = trials - 1;
    const std::int64_t chunks = (random_trials + opts.chunk_size - 1) / opts.chunk_size;
    std::vector<ChunkResult> results(static_cast<std::size_t>(chunks));
    const unsigned threads = opts.threads == 0 ? default_thread_count() : opts.threads;

    parallel_for(static_cast<std::size_t>(chunks), threads, [&](std::size_t c) {
        Stream rng(seed, c + 1);
        ChunkResult out;
        const std::int64_t first = 1 + static_cast<std::int64_t>(c) * opts.chunk_size;
        const std::int64_t last = std::min(trials, first + opts.chunk_size);
        for (std::int64_t t = first; t < last; ++t) {
            const auto n1 = sample_constrained_left(dim, d1, rng);
            const auto n3 = sample_constrained_right(dim, d2, rng);
            const double k12 = kl(n1, center);
            const double k23 = kl(center, n3);
            const double k13 = kl(n1, n3);
            out.residual_max = std::max({out.residual_max, std::abs(k12 - d1), std::abs(k23 - d2)});
            consider(out.best, t, n1, n3, k12, k23, k13);
        }
        results[c] = std::move(out);
    });

    // Reduction in chunk order keeps the report independent of scheduling.
    double random_max = -1;
    for (const auto& r : results) {
        residual_max = std::max(residual_max, r.residual_max);
        random_max = std::max(random_max, r.best.kl13);
        if (r.best.kl13 > best.kl13) best = r.best;
    }

    if (random_trials > 0) {
        Stream spot_rng(seed, 0);
        const auto n1 = sample_constrained_left(dim, d1, spot_rng);
        const auto n3 = sample_constrained_right(dim, d2, spot_rng);
        report.affine_spot_check_residual = affine_spot_check(n1, n3, spot_rng);
    } else {
        Stream spot_rng(seed, 0);
        report.affine_spot_check_residual = affine_spot_check(extremal.n1, extremal.n3, spot_rng);
    }

    report.max_kl13 = best.kl13;
    report.random_max_kl13 = random_trials > 0 ? random_max : best.kl13;
    report.margin = report.supremum - report.max_kl13;
    report.worst_triple = std::move(best);
    report.constraint_residual_max = residual_max;
    return report;
}

McEstimate mc_kl(const Gaussiand& p, const Gaussiand& q, std::int64_t samples, std::uint64_t seed)
{
    if (samples < 100) throw DomainError("mc_kl needs at least 100 samples");
    check_same_dim(p, q);
    Stream rng(seed);
    const auto draws = sample(p, samples, rng);

    // Welford running mean / variance.
    double mean = 0;
    double m2 = 0;
    for (Eigen::Index k = 0; k < draws.rows(); ++k) {
        const Vector<double> x = draws.row(k).transpose();
        const double v = p.log_density(x) - q.log_density(x);
        const double delta = v - mean;
        mean += delta / static_cast<double>(k + 1);
        m2 += delta * (v - mean);
    }
    const double n = static_cast<double>(samples);
    const double sd = std::sqrt(m2 / (n - 1));
    return {mean, sd / std::sqrt(n)};
}

HScanReport scan_h(const BudgetPaird& budgets, int grid, unsigned threads)
{
    if (grid < 11) throw DomainError("scan_h needs grid >= 11");
    const double d1 = budgets.delta1();
    const double d2 = budgets.delta2();
    if (!(d1 > 0 && d2 > 0)) throw DomainError("scan_h needs delta1, delta2 > 0");

    const auto g = static_cast<std::size_t>(grid);
    std::vector<double> coord(g), xs(g), ys(g), wx(g), wy(g);
    for (std::size_t i = 0; i < g; ++i) {
        coord[i] = 2.0 * static_cast<double>(i) / static_cast<double>(grid - 1);
        xs[i] = coord[i] * d1;
        ys[i] = coord[i] * d2;
    }
    // Exact corner so the radicands vanish.
    xs.back() = 2 * d1;
    ys.back() = 2 * d2;
    for (std::size_t i = 0; i < g; ++i) {
        wx[i] = w2_minus_one(xs[i]);
        wy[i] = w2_minus_one(ys[i]);
    }
    const double norm = f_func(2 * d1, 2 * d2);

    HScanReport report;
    report.budgets = budgets;
    report.grid = grid;
    report.values.resize(grid, grid);
    parallel_for(g, threads == 0 ? default_thread_count() : threads, [&](std::size_t i) {
        for (std::size_t j = 0; j < g; ++j) {
            const double f = wx[i] * wy[j] + (xs[i] + ys[j]);
            const double h = 0.5 * (f + detail::g_from_w2(xs[i], ys[j], wy[j] + 1, budgets));
            report.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = h / norm;
        }
    });

    const auto& v = report.values;
    Eigen::Index bi = 0, bj = 0;
    for (Eigen::Index i = 0; i < grid; ++i)
        for (Eigen::Index j = 0; j < grid; ++j)
            if (v(i, j) > v(bi, bj)) { bi = i; bj = j; }
    report.argmax = {coord[static_cast<std::size_t>(bi)], coord[static_cast<std::size_t>(bj)]};
    report.max_value = v(bi, bj);

    std::vector<Eigen::Index> y_star(g), x_star(g);
    for (Eigen::Index i = 0; i < grid; ++i) v.row(i).maxCoeff(&y_star[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < grid; ++j) v.col(j).maxCoeff(&x_star[static_cast<std::size_t>(j)]);
    for (Eigen::Index i = 1; i + 1 < grid; ++i) {
        const Eigen::Index j = y_star[static_cast<std::size_t>(i)];
        if (j >= 1 && j + 1 < grid && x_star[static_cast<std::size_t>(j)] == i) ++report.grid_coincident_cells;
    }

    auto hbar = [&](double xb, double yb) {
        return h_func(std::min(xb * d1, 2 * d1), std::min(yb * d2, 2 * d2), budgets) / norm;
    };
    // Continuous maximizer along a line, bracketed by the cells next to the
    // best node.
    auto refine = [&](auto&& f, std::size_t k) {
        double a = coord[k == 0 ? 0 : k - 1];
        double b = coord[std::min(k + 1, g - 1)];
        const double r = 0.5 * (std::sqrt(5.0) - 1);
        double c = b - r * (b - a), e = a + r * (b - a);
        double fc = f(c), fe = f(e);
        for (int iter = 0; iter < 200 && b - a > 1e-13; ++iter) {
            if (fc > fe) {
                b = e; e = c; fe = fc;
                c = b - r * (b - a); fc = f(c);
            } else {
                a = c; c = e; fc = fe;
                e = a + r * (b - a); fe = f(e);
            }
        }
        double best = 0.5 * (a + b), fbest = f(best);
        for (double z : {coord[k], coord[k == 0 ? 0 : k - 1], coord[std::min(k + 1, g - 1)]}) {
            const double fz = f(z);
            if (fz > fbest) { best = z; fbest = fz; }
        }
        return best;
    };
    auto row_argmax = [&](double yb) {
        std::size_t k = 0;
        double fk = -INFINITY;
        for (std::size_t i = 0; i < g; ++i) {
            const double fi = hbar(coord[i], yb);
            if (fi > fk) { k = i; fk = fi; }
        }
        return refine([&](double xb) { return hbar(xb, yb); }, k);
    };

    report.curve_x.resize(g);
    report.curve_y.resize(g);
    std::vector<double> gap(g, 0.0);
    parallel_for(g, threads == 0 ? default_thread_count() : threads, [&](std::size_t k) {
        const double ys = refine([&](double yb) { return hbar(coord[k], yb); }, static_cast<std::size_t>(y_star[k]));
        const double xs = refine([&](double xb) { return hbar(xb, coord[k]); }, static_cast<std::size_t>(x_star[k]));
        report.curve_x[k] = {coord[k], ys};
        report.curve_y[k] = {xs, coord[k]};
        if (k >= 1 && k + 1 < g) gap[k] = row_argmax(ys) - coord[k];
    });
    for (std::size_t k = 1; k + 1 < g; ++k) {
        if (gap[k] == 0) ++report.interior_intersections;
        if (k + 2 < g && gap[k] * gap[k + 1] < 0) ++report.interior_intersections;
    }
    return report;
}

} // namespace klt
