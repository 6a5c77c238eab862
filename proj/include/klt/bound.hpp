#pragma once

// Bound functions for the relaxed triangle inequality of KL divergence
// between Gaussians.
//
//   F(x, y)        = [w2(x) - 1][w2(y) - 1] + x + y
//   G(x, y; d1,d2) = ( sqrt(w2(y)(2 d1 - x)) + sqrt(2 d2 - y) )^2
//   H              = (F + G) / 2,   (x, y) in [0, 2 d1] x [0, 2 d2]
//
// H is maximised at the corner (2 d1, 2 d2), giving the tight value
// supremum(d1, d2) = F(2 d1, 2 d2) / 2.

#include <klt/errors.hpp>
#include <klt/special_functions.hpp>

#include <cmath>
#include <span>
#include <string>

namespace klt {

/// The two fixed KL values (d1, d2), both finite and >= 0, in nats.
template <class Scalar>
class BudgetPair
{
public:
    BudgetPair(Scalar delta1, Scalar delta2)
        : delta1_(delta1), delta2_(delta2)
    {
        check("delta1", delta1);
        check("delta2", delta2);
    }

    Scalar delta1() const { return delta1_; }
    Scalar delta2() const { return delta2_; }

    bool operator==(const BudgetPair&) const = default;

private:
    static void check(const char* name, Scalar v)
    {
        if (!(v >= 0) || !std::isfinite(static_cast<double>(v))) {
            throw DomainError(std::string(name) + " must be finite and >= 0, got " + std::to_string(static_cast<double>(v)));
        }
    }

    Scalar delta1_;
    Scalar delta2_;
};

using BudgetPaird = BudgetPair<double>;

template <class Scalar>
struct BoundReport
{
    Scalar supremum;
    Scalar asymptotic;
    Scalar legacy;
    BudgetPair<Scalar> inputs;
};

namespace detail {

template <class Scalar>
void require_nonnegative(const char* fn, Scalar x, Scalar y)
{
    if (!(x >= 0) || !(y >= 0)) {
        throw DomainError(std::string(fn) + " requires nonnegative arguments, got ("
            + std::to_string(static_cast<double>(x)) + ", " + std::to_string(static_cast<double>(y)) + ")");
    }
}

// Radicands within 1e-12 below zero are round-off at the Omega boundary.
template <class Scalar>
Scalar clamp_radicand(Scalar r)
{
    if (r >= 0) return r;
    if (r >= Scalar(-1e-12)) return Scalar(0);
    throw DomainError("point lies outside [0, 2 delta1] x [0, 2 delta2]");
}

template <class Scalar>
void require_in_omega(Scalar x, Scalar y, const BudgetPair<Scalar>& b)
{
    require_nonnegative("g_func/h_func", x, y);
    clamp_radicand(2 * b.delta1() - x);
    clamp_radicand(2 * b.delta2() - y);
}

// G given precomputed w2(y).
template <class Scalar>
Scalar g_from_w2(Scalar x, Scalar y, Scalar w2y, const BudgetPair<Scalar>& b)
{
    const Scalar s = std::sqrt(w2y * clamp_radicand(2 * b.delta1() - x)) + std::sqrt(clamp_radicand(2 * b.delta2() - y));
    return s * s;
}

} // namespace detail

template <class Scalar>
Scalar f_func(Scalar x, Scalar y)
{
    detail::require_nonnegative("f_func", x, y);
    return w2_minus_one(x) * w2_minus_one(y) + (x + y);
}

template <class Scalar>
Scalar g_func(Scalar x, Scalar y, const BudgetPair<Scalar>& budgets)
{
    detail::require_in_omega(x, y, budgets);
    return detail::g_from_w2(x, y, w2(y), budgets);
}

template <class Scalar>
Scalar h_func(Scalar x, Scalar y, const BudgetPair<Scalar>& budgets)
{
    detail::require_in_omega(x, y, budgets);
    const Scalar a = w2_minus_one(x);
    const Scalar b = w2_minus_one(y);
    const Scalar f = a * b + (x + y);
    return Scalar(0.5) * (f + detail::g_from_w2(x, y, b + 1, budgets));
}

/// Tight upper bound on KL(N1 || N3) given KL(N1 || N2) = d1 and
/// KL(N2 || N3) = d2. Exactly d1 + d2 when d1 * d2 = 0.
template <class Scalar>
Scalar supremum(const BudgetPair<Scalar>& budgets)
{
    const Scalar d1 = budgets.delta1();
    const Scalar d2 = budgets.delta2();
    // Grouped so that swapping d1 and d2 is bit-exact.
    return Scalar(0.5) * (w2_minus_one(2 * d1) * w2_minus_one(2 * d2)) + (d1 + d2);
}

template <class Scalar>
Scalar supremum(Scalar delta1, Scalar delta2)
{
    return supremum(BudgetPair<Scalar>(delta1, delta2));
}

/// Small-budget form (sqrt(e1) + sqrt(e2))^2.
template <class Scalar>
Scalar asymptotic_supremum(Scalar eps1, Scalar eps2)
{
    detail::require_nonnegative("asymptotic_supremum", eps1, eps2);
    return (eps1 + eps2) + 2 * std::sqrt(eps1 * eps2);
}

/// The earlier, looser relaxed bound built from both branches w1 and w2.
template <class Scalar>
Scalar legacy_bound(Scalar eps1, Scalar eps2)
{
    detail::require_nonnegative("legacy_bound", eps1, eps2);
    const Scalar a = w2_minus_one(2 * eps1);
    const Scalar b = w2_minus_one(2 * eps2);
    // sqrt(2 e2 / w1(2 e2)) -> 0 as e2 -> 0 since w1(0) = 1.
    const Scalar cross = eps2 == 0 ? Scalar(0) : std::sqrt(2 * eps2 / w1(2 * eps2));
    const Scalar s = std::sqrt(2 * eps1) + cross;
    return Scalar(0.5) * (a * b + (b + 1) * s * s) + eps1 + eps2;
}

template <class Scalar>
BoundReport<Scalar> bound_report(const BudgetPair<Scalar>& budgets)
{
    return {supremum(budgets),
            asymptotic_supremum(budgets.delta1(), budgets.delta2()),
            legacy_bound(budgets.delta1(), budgets.delta2()),
            budgets};
}

/// Multi-step guarantee: acc <- supremum(acc, e_k), folded left from e_1.
template <class Scalar>
Scalar compose_budgets(std::span<const Scalar> steps)
{
    if (steps.empty()) throw DomainError("compose_budgets needs at least one step");
    Scalar acc = BudgetPair<Scalar>(steps.front(), Scalar(0)).delta1();
    for (std::size_t k = 1; k < steps.size(); ++k) acc = supremum(acc, steps[k]);
    return acc;
}

} // namespace klt
