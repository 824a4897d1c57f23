#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tiltprice/claim.hpp"
#include "tiltprice/market.hpp"
#include "tiltprice/montecarlo.hpp"
#include "tiltprice/tilt.hpp"

namespace tiltprice {

//! Average indifference (bid) price per unit of claim.
struct PriceResult {
    double price = 0.0;
    double std_error = 0.0;
    double alpha = 0.0;
    double q = 0.0;
    double rho = 0.0;
    //! Exponential prices do not depend on wealth; left empty.
    std::optional<double> x;
};

/*!
 * Exponential-utility value function in the basis-risk model,
 *
 *   u(x, q) = -(e^{-alpha x} / alpha)
 *             * E[ Z(rho) exp(-(1-rho^2)(alpha q h(Y_T) + I2 / 2)) ]^{1/(1-rho^2)}.
 *
 * The expectation is taken in the log domain and raised to 1/(1-rho^2)
 * there. The result factorises exactly as u(x) = e^{-alpha x} u(0).
 */
Estimate exp_value_function(const PathBatch& batch, double alpha, double x,
                            double q, const ClaimSpec& claim, double rho);

//! Closed-form exponential indifference price. Throws DomainError for
//! |rho| >= 1 or q == 0.
PriceResult exp_indifference_price(const PathBatch& batch, double alpha, double q,
                                   const ClaimSpec& claim, double rho);

struct QuantityResult {
    double q = 0.0;
    double beta = 0.0;
    double beta_std_error = 0.0;
    double alpha = 0.0;
    double p = 0.0;
    double rho = 0.0;
};

//! q_n(p) = beta_n / (alpha (1 - rho_n^2)).
QuantityResult optimal_quantity(const PathBatch& batch, double alpha, double p,
                                double rho_n, const ClaimSpec& claim,
                                double tol = kDefaultTiltTol);

struct QuantityLimitRow {
    double rho = 0.0;
    double q_n = 0.0;
    //! q_n (1 - rho_n^2) = beta_n / alpha
    double product = 0.0;
    double product_se = 0.0;
    //! |product - beta_* / alpha|
    double gap = 0.0;
    //! sqrt(product_se^2 + target_se^2)
    double joint_se = 0.0;
};

struct QuantityLimitTable {
    double alpha = 0.0;
    double p = 0.0;
    //! beta_* / alpha at rho = 1
    double target = 0.0;
    double target_se = 0.0;
    std::vector<QuantityLimitRow> rows;
};

//! q_n(p)(1 - rho_n^2) along a rho sequence, against beta_* / alpha at
//! rho = 1, all on one batch.
QuantityLimitTable quantity_limit_product(const PathBatch& batch, double alpha,
                                          double p, const ClaimSpec& claim,
                                          std::span<const double> rhos,
                                          double tol = kDefaultTiltTol);

//! -(1 / (gamma alpha)) log E_Q[exp(-gamma alpha h)], with E_Q the
//! self-normalised mean under the given weights. Throws DomainError when
//! gamma_alpha == 0.
Estimate limit_price(std::span<const double> q_weights,
                     std::span<const double> claim_samples, double gamma_alpha);

struct PiPm {
    Estimate p_i;
    Estimate p_m;
};

//! p_i(beta) = -(1/beta) log E_Q[e^{-beta h}] and
//! p_m(beta) = E_Q[h e^{-beta h}] / E_Q[e^{-beta h}].
//! At beta = 0 both are the Q-mean (continuity convention).
PiPm pi_pm_curves(std::span<const double> q_weights,
                  std::span<const double> claim_samples, double beta);

struct DifferentialCheck {
    double residual = 0.0;
    double step = 0.0;
    //! Standard error of p_m(beta), the scale for Monte Carlo comparisons.
    double p_m_std_error = 0.0;
};

//! Central-difference residual of d/dbeta (beta p_i(beta)) - p_m(beta).
DifferentialCheck differential_check(std::span<const double> q_weights,
                                     std::span<const double> claim_samples,
                                     double beta, double step);

//! p_i(beta_*) - p_m(beta_*).
double entropy_gap(std::span<const double> q_weights,
                   std::span<const double> claim_samples, double beta_star);

struct FixedMarketRow {
    double q = 0.0;
    double price = 0.0;
    double std_error = 0.0;
    double sample_min = 0.0;
};

//! Exponential prices for increasing q in a fixed market.
std::vector<FixedMarketRow> fixed_market_price_decay(const PathBatch& batch,
                                                     double alpha,
                                                     const ClaimSpec& claim,
                                                     double rho_fixed,
                                                     std::span<const double> qs);

struct PriceLimitRow {
    double rho = 0.0;
    double q_n = 0.0;
    double price = 0.0;
    double price_se = 0.0;
    //! |price - limit|
    double gap = 0.0;
    double joint_se = 0.0;
};

struct PriceLimitTable {
    double alpha = 0.0;
    double gamma = 0.0;
    Estimate limit;
    std::vector<PriceLimitRow> rows;
};

//! Prices at q_n = gamma / (1 - rho_n^2) against the certainty
//! equivalent under Q with risk aversion gamma alpha.
PriceLimitTable price_limit_study(const PathBatch& batch, double alpha,
                                  double gamma, const ClaimSpec& claim,
                                  std::span<const double> rhos);

} // namespace tiltprice
