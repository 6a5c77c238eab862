#pragma once

// Real branches of the Lambert W function and the two roots w1 <= 1 <= w2 of
//
//     x - log x = 1 + t,   t >= 0.
//
// w1/w2 are solved directly in u = log x, where the equation reads
// h(u) = e^u - u - 1 = t. The small-|u| series for h avoids the cancellation
// in x - log x near x = 1 and keeps w2 - 1 and 1 - w1 accurate to a few ulps
// relative, which the bound functions rely on. The Lambert identities
// w1(t) = -W0(-e^{-(1+t)}), w2(t) = -W_{-1}(-e^{-(1+t)}) are checked by tests
// only.

#include <klt/errors.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace klt {

template <class Scalar>
struct BranchValue
{
    Scalar value;
    Scalar residual;
};

namespace detail {

inline constexpr int kMaxHalleyIterations = 100;

template <class Scalar>
constexpr Scalar step_tolerance() { return Scalar(1e-14); }

template <class Scalar>
constexpr Scalar residual_tolerance() { return Scalar(1e-13); }

// e^u - u - 1, accurate near u = 0.
template <class Scalar>
Scalar excess(Scalar u)
{
    using std::abs;
    using std::expm1;
    if (abs(u) < Scalar(0.5)) {
        Scalar term = u * u / 2;
        Scalar sum = term;
        for (int k = 3; k < 40; ++k) {
            term *= u / Scalar(k);
            sum += term;
            if (abs(term) <= std::numeric_limits<Scalar>::epsilon() * abs(sum)) break;
        }
        return sum;
    }
    return expm1(u) - u;
}

// Inverts the series h(u) = u^2/2 + u^3/6 + ... around u = 0 with s = +-sqrt(2t).
template <class Scalar>
Scalar excess_series_guess(Scalar s)
{
    return s - s * s / Scalar(6) + s * s * s / Scalar(36);
}

enum class Branch { lower, upper };

// Solves excess(u) = t on u <= 0 (lower) or u >= 0 (upper).
template <class Scalar>
BranchValue<Scalar> solve_excess(Scalar t, Branch branch)
{
    using std::abs;
    using std::exp;
    using std::expm1;
    using std::log;
    using std::max;
    using std::sqrt;

    if (!(t >= 0) || !std::isfinite(static_cast<double>(t))) {
        throw DomainError("w1/w2 require finite t >= 0, got " + std::to_string(static_cast<double>(t)));
    }
    if (t == 0) return {Scalar(0), Scalar(0)};

    const bool upper = branch == Branch::upper;

    Scalar u;
    if (t < Scalar(1)) {
        const Scalar s = sqrt(2 * t);
        u = excess_series_guess(upper ? s : -s);
    } else if (upper) {
        Scalar x = 1 + t + log(1 + t);
        x = 1 + t + log(x);
        u = log(x);
    } else {
        u = -1 - t + exp(-1 - t);
    }

    // Bracket used when an iterate leaves the branch.
    Scalar lo, hi;
    if (upper) {
        lo = 0;
        hi = max(Scalar(1), log(2 * (t + 2)) + 1);
        while (excess(hi) < t) hi *= 2;
    } else {
        lo = -(t + 2);
        hi = 0;
    }

    for (int iter = 0; iter < kMaxHalleyIterations; ++iter) {
        const Scalar g = excess(u) - t;
        if (g == 0) break;
        if (upper == (g > 0)) hi = u; else lo = u;

        const Scalar d1 = expm1(u);
        const Scalar d2 = exp(u);
        Scalar next = u - 2 * g * d1 / (2 * d1 * d1 - g * d2);
        const bool finite = std::isfinite(static_cast<double>(next));
        if (finite && abs(next - u) <= step_tolerance<Scalar>() * max(Scalar(1), abs(u))) {
            u = next;
            break;
        }
        if (!finite || next <= lo || next >= hi) next = (lo + hi) / 2;
        u = next;
        if (abs(excess(u) - t) <= residual_tolerance<Scalar>() * std::min(Scalar(1), t)) break;
        if (iter + 1 == kMaxHalleyIterations) {
            throw ConvergenceError("w1/w2 root did not converge for t = " + std::to_string(static_cast<double>(t)));
        }
    }
    return {u, abs(excess(u) - t)};
}

} // namespace detail

/// Principal branch W0 on [-1/e, inf).
template <class Scalar>
Scalar lambert_w0(Scalar y)
{
    using std::abs;
    using std::exp;
    using std::log;
    using std::max;
    using std::sqrt;

    constexpr Scalar inv_e = Scalar(1) / std::numbers::e_v<Scalar>;
    const Scalar slack = 4 * std::numeric_limits<Scalar>::epsilon() * inv_e;
    if (!(y >= -inv_e - slack) || !std::isfinite(static_cast<double>(y))) {
        throw DomainError("lambert_w0 requires y >= -1/e, got " + std::to_string(static_cast<double>(y)));
    }
    if (y == 0) return Scalar(0);
    if (y <= -inv_e) return Scalar(-1);

    Scalar w;
    const Scalar p2 = 2 * (std::numbers::e_v<Scalar> * y + 1);
    if (y < Scalar(-0.25)) {
        const Scalar p = sqrt(max(p2, Scalar(0)));
        w = -1 + p - p * p / 3 + Scalar(11) / 72 * p * p * p;
    } else if (y < Scalar(3)) {
        w = std::log1p(y);
    } else {
        const Scalar l1 = log(y);
        const Scalar l2 = log(l1);
        w = l1 - l2 + l2 / l1;
    }

    Scalar lo = -1;
    Scalar hi = max(Scalar(1), std::log1p(max(y, Scalar(0)))) + 1;
    for (int iter = 0; iter < detail::kMaxHalleyIterations; ++iter) {
        const Scalar ew = exp(w);
        const Scalar f = w * ew - y;
        if (f == 0) break;
        if (f > 0) hi = w; else lo = w;
        Scalar next = w - f / (ew * (w + 1) - (w + 2) * f / (2 * w + 2));
        const bool finite = std::isfinite(static_cast<double>(next));
        if (finite && abs(next - w) <= detail::step_tolerance<Scalar>() * max(Scalar(1), abs(w))) {
            w = next;
            break;
        }
        if (!finite || next <= lo || next >= hi) next = (lo + hi) / 2;
        w = next;
        if (iter + 1 == detail::kMaxHalleyIterations) {
            throw ConvergenceError("lambert_w0 did not converge");
        }
    }
    return w;
}

/// Lower branch W_{-1} on [-1/e, 0).
template <class Scalar>
Scalar lambert_w_m1(Scalar y)
{
    using std::abs;
    using std::exp;
    using std::log;
    using std::max;
    using std::sqrt;

    constexpr Scalar inv_e = Scalar(1) / std::numbers::e_v<Scalar>;
    const Scalar slack = 4 * std::numeric_limits<Scalar>::epsilon() * inv_e;
    if (!(y >= -inv_e - slack && y < 0)) {
        throw DomainError("lambert_w_m1 requires -1/e <= y < 0, got " + std::to_string(static_cast<double>(y)));
    }
    if (y <= -inv_e) return Scalar(-1);

    Scalar w;
    if (y < Scalar(-0.25)) {
        const Scalar p = sqrt(max(2 * (std::numbers::e_v<Scalar> * y + 1), Scalar(0)));
        w = -1 - p - p * p / 3 - Scalar(11) / 72 * p * p * p;
    } else {
        const Scalar l1 = log(-y);
        const Scalar l2 = log(-l1);
        w = l1 - l2 + l2 / l1;
    }

    // w e^w is decreasing on (-inf, -1].
    Scalar lo = std::min(w, Scalar(-1)) - 1;
    while (lo * exp(lo) < y) lo *= 2;
    Scalar hi = -1;
    for (int iter = 0; iter < detail::kMaxHalleyIterations; ++iter) {
        const Scalar ew = exp(w);
        const Scalar f = w * ew - y;
        if (f == 0) break;
        if (f < 0) hi = w; else lo = w;
        Scalar next = w - f / (ew * (w + 1) - (w + 2) * f / (2 * w + 2));
        const bool finite = std::isfinite(static_cast<double>(next));
        if (finite && abs(next - w) <= detail::step_tolerance<Scalar>() * max(Scalar(1), abs(w))) {
            w = next;
            break;
        }
        if (!finite || next <= lo || next >= hi) next = (lo + hi) / 2;
        w = next;
        if (iter + 1 == detail::kMaxHalleyIterations) {
            throw ConvergenceError("lambert_w_m1 did not converge");
        }
    }
    return w;
}

/// Smaller root of x - log x = 1 + t with its residual |f(x) - (1 + t)|.
template <class Scalar>
BranchValue<Scalar> w1_checked(Scalar t)
{
    const auto r = detail::solve_excess(t, detail::Branch::lower);
    return {std::exp(r.value), r.residual};
}

/// Larger root of x - log x = 1 + t with its residual |f(x) - (1 + t)|.
template <class Scalar>
BranchValue<Scalar> w2_checked(Scalar t)
{
    const auto r = detail::solve_excess(t, detail::Branch::upper);
    return {std::exp(r.value), r.residual};
}

template <class Scalar>
Scalar w1(Scalar t) { return w1_checked(t).value; }

template <class Scalar>
Scalar w2(Scalar t) { return w2_checked(t).value; }

/// w2(t) - 1 without cancellation for small t.
template <class Scalar>
Scalar w2_minus_one(Scalar t)
{
    return std::expm1(detail::solve_excess(t, detail::Branch::upper).value);
}

/// 1 - w1(t) without cancellation for small t.
template <class Scalar>
Scalar one_minus_w1(Scalar t)
{
    return -std::expm1(detail::solve_excess(t, detail::Branch::lower).value);
}

/// d w2 / dt = w2 / (w2 - 1); diverges at t = 0.
template <class Scalar>
Scalar w2_derivative(Scalar t)
{
    if (!(t > 0)) {
        throw DomainError("w2_derivative requires t > 0, got " + std::to_string(static_cast<double>(t)));
    }
    const auto u = detail::solve_excess(t, detail::Branch::upper).value;
    return std::exp(u) / std::expm1(u);
}

} // namespace klt
