#pragma once

#include <array>
#include <span>
#include <vector>

#include "tiltprice/utility.hpp"

namespace tiltprice {

/*!
 * One-period three-state market: S_1 / S_0 in {1+u, 1, 1-u}, claim
 * {h_u, h_m, h_d}, and P^n masses (1/2)(1 - e^{-q}), e^{-q},
 * (1/2)(1 - e^{-q}) tied to the position size q. S is a P^n-martingale,
 * so the optimal holding in S is zero and the value functions are
 * explicit.
 */
struct TrinomialModel {
    double u = 0.5;
    double h_u = 2.0;
    double h_m = 0.0;
    double h_d = 0.0;

    double h_bar() const { return 0.5 * (h_u + h_d); }

    //! Throws DomainError unless 0 < u < 1 and h_m <= h_bar.
    void validate() const;

    //! {P(up), P(middle), P(down)} for position q.
    std::array<double, 3> masses(double q) const;
};

//! Model with h_u = h_d = h_bar.
TrinomialModel symmetric_trinomial(double h_bar, double h_m, double u = 0.5);

struct TrinomialValues {
    double no_claim = 0.0;
    double with_claim = 0.0;
};

//! U(x) and (1 - e^{-q}) U(x + q h_bar) + e^{-q} U(x + q h_m).
TrinomialValues tri_value(const UtilitySpec& spec, double x, double q,
                          const TrinomialModel& model);

//! Exponential indifference price per unit,
//! -(1/(alpha q)) log((1 - e^{-q}) e^{-alpha q h_bar} + e^{-q} e^{-alpha q h_m}).
double tri_price_exp(double alpha, double q, const TrinomialModel& model);

//! min{h_bar, 1/alpha + h_m}.
double tri_limit(double alpha, const TrinomialModel& model);

//! tri_price_exp - tri_limit evaluated without cancellation, so the gap
//! stays resolvable after it drops below one ulp of the limit.
double tri_limit_gap(double alpha, double q, const TrinomialModel& model);

inline constexpr double kDefaultTrinomialTol = 1e-12;

/*!
 * Indifference price for a general utility: the root in beta of
 *
 *   U(x) = (1 - e^{-q}) U(x + q (h_bar - beta)) + e^{-q} U(x - q (beta - h_m)),
 *
 * found by bisection on [h_m - 1, h_bar + 1]. Both sides are compared
 * through log(-U) so large q does not overflow. Throws NumericalError if
 * the bracket endpoints do not straddle the root.
 */
double tri_price_general(const UtilitySpec& spec, double x, double q,
                         const TrinomialModel& model,
                         double tol = kDefaultTrinomialTol);

struct TrinomialRow {
    double q = 0.0;
    double price_exponential = 0.0;
    double price_general = 0.0;
    double limit = 0.0;
};

//! Prices along a q schedule; the exponential reference uses spec.alpha().
std::vector<TrinomialRow> trinomial_schedule(const UtilitySpec& spec, double x,
                                             const TrinomialModel& model,
                                             std::span<const double> qs,
                                             double tol = kDefaultTrinomialTol);

struct NonConvergenceRow {
    double q = 0.0;
    double price = 0.0;
    //! Limits exponential investors with rate alpha and 2 alpha reach.
    double limit_rate_alpha = 0.0;
    double limit_rate_2alpha = 0.0;
};

//! Utility whose decay rate is 2 alpha on even bands [-4^{k+1}, -4^k] of
//! negative wealth and alpha elsewhere.
UtilitySpec nonconvergence_utility(double alpha);

//! Prices of the alternating-rate utility along a q schedule. The prices
//! track the band the losing state lands in and need not converge.
//! Requires alpha (h_bar - h_m) > 1: the smaller decay rate must exceed
//! 1 / (h_bar - h_m).
std::vector<NonConvergenceRow> nonconvergence_demo(double alpha, double x,
                                                   const TrinomialModel& model,
                                                   std::span<const double> qs);

} // namespace tiltprice
