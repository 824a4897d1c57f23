#include "tiltprice/pricing.hpp"

#include "tiltprice/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tiltprice {

namespace {

void require_pre_limit_rho(double rho)
{
    if (!(std::abs(rho) < 1.0)) {
        std::ostringstream os;
        os << "|rho| must be < 1 (got " << rho
           << "); the formula divides by 1 - rho^2, use limit_price for the "
              "complete limit";
        throw DomainError(os.str());
    }
}

void require_alpha(double alpha)
{
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw DomainError("risk aversion alpha must be positive and finite");
    }
}

// -(1/k) log( sum e^{lb} e^{-k h} / sum e^{lb} ), referenced to the extreme
// of h that keeps the tilt exponent non-positive.
Estimate certainty_equivalent(std::span<const double> log_base,
                              std::span<const double> h, double k)
{
    auto [lo, hi] = std::minmax_element(h.begin(), h.end());
    const double h_ref = k > 0.0 ? *lo : *hi;
    std::vector<double> t(h.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = -k * (h[i] - h_ref);
    }
    auto ratio = log_tilted_ratio(log_base, t);
    return {h_ref - ratio.value / k, ratio.std_error / std::abs(k), ratio.n};
}

std::vector<double> log_of(std::span<const double> w)
{
    std::vector<double> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!(w[i] > 0.0) || !std::isfinite(w[i])) {
            throw DomainError("measure weights must be positive and finite");
        }
        out[i] = std::log(w[i]);
    }
    return out;
}

void require_matching(std::span<const double> w, std::span<const double> h)
{
    if (w.size() != h.size() || w.empty()) {
        throw DomainError("weights and claim samples must be non-empty and of "
                          "equal length");
    }
}

// log Z(rho) - (1 - rho^2) I2 / 2
std::vector<double> base_log_weights(const PathBatch& batch, double rho)
{
    const double c = 1.0 - rho * rho;
    auto lb = log_stochastic_exponential(batch, rho);
    for (std::size_t i = 0; i < lb.size(); ++i) {
        lb[i] -= 0.5 * c * batch.I2[i];
    }
    return lb;
}

} // namespace

Estimate exp_value_function(const PathBatch& batch, double alpha, double x,
                            double q, const ClaimSpec& claim, double rho)
{
    require_alpha(alpha);
    require_pre_limit_rho(rho);
    const double c = 1.0 - rho * rho;
    auto e = log_stochastic_exponential(batch, rho);
    for (std::size_t i = 0; i < e.size(); ++i) {
        e[i] -= c * (alpha * q * claim(batch.y_T[i]) + 0.5 * batch.I2[i]);
    }
    auto lme = log_mean_exp_estimate(e);
    const double base = -std::exp(lme.value / c) / alpha;
    const double u = std::exp(-alpha * x) * base;
    return {u, std::abs(u) * lme.std_error / c, lme.n};
}

PriceResult exp_indifference_price(const PathBatch& batch, double alpha, double q,
                                   const ClaimSpec& claim, double rho)
{
    require_alpha(alpha);
    require_pre_limit_rho(rho);
    if (q == 0.0 || !std::isfinite(q)) {
        throw DomainError("position size q must be finite and non-zero");
    }
    const double c = 1.0 - rho * rho;
    const double k = alpha * q * c;
    auto ce = certainty_equivalent(base_log_weights(batch, rho),
                                   claim.evaluate(batch.y_T), k);
    PriceResult r;
    r.price = ce.value;
    r.std_error = ce.std_error;
    r.alpha = alpha;
    r.q = q;
    r.rho = rho;
    return r;
}

QuantityResult optimal_quantity(const PathBatch& batch, double alpha, double p,
                                double rho_n, const ClaimSpec& claim, double tol)
{
    require_alpha(alpha);
    auto sol = beta_n(batch, claim, rho_n, p, tol);
    const double c = 1.0 - rho_n * rho_n;
    QuantityResult r;
    r.beta = sol.beta;
    r.beta_std_error = sol.std_error;
    r.q = sol.beta / (alpha * c);
    r.alpha = alpha;
    r.p = p;
    r.rho = rho_n;
    return r;
}

QuantityLimitTable quantity_limit_product(const PathBatch& batch, double alpha,
                                          double p, const ClaimSpec& claim,
                                          std::span<const double> rhos, double tol)
{
    require_alpha(alpha);
    QuantityLimitTable table;
    table.alpha = alpha;
    table.p = p;
    auto star = beta_star(batch, claim, 1.0, p, tol);
    table.target = star.beta / alpha;
    table.target_se = star.std_error / alpha;
    for (double rho : rhos) {
        auto qr = optimal_quantity(batch, alpha, p, rho, claim, tol);
        QuantityLimitRow row;
        row.rho = rho;
        row.q_n = qr.q;
        row.product = qr.q * (1.0 - rho * rho);
        row.product_se = qr.beta_std_error / alpha;
        row.gap = std::abs(row.product - table.target);
        row.joint_se = std::hypot(row.product_se, table.target_se);
        table.rows.push_back(row);
    }
    return table;
}

Estimate limit_price(std::span<const double> q_weights,
                     std::span<const double> claim_samples, double gamma_alpha)
{
    require_matching(q_weights, claim_samples);
    if (gamma_alpha == 0.0 || !std::isfinite(gamma_alpha)) {
        throw DomainError("gamma * alpha must be finite and non-zero; the "
                          "zero-risk-aversion limit is the Q-mean of the claim");
    }
    return certainty_equivalent(log_of(q_weights), claim_samples, gamma_alpha);
}

PiPm pi_pm_curves(std::span<const double> q_weights,
                  std::span<const double> claim_samples, double beta)
{
    require_matching(q_weights, claim_samples);
    auto lw = log_of(q_weights);
    if (beta == 0.0) {
        auto mean = weighted_mean_log(claim_samples, lw);
        return {mean, mean};
    }
    PiPm out;
    out.p_i = certainty_equivalent(lw, claim_samples, beta);
    for (std::size_t i = 0; i < lw.size(); ++i) {
        lw[i] -= beta * claim_samples[i];
    }
    out.p_m = weighted_mean_log(claim_samples, lw);
    return out;
}

DifferentialCheck differential_check(std::span<const double> q_weights,
                                     std::span<const double> claim_samples,
                                     double beta, double step)
{
    require_matching(q_weights, claim_samples);
    if (!(step > 0.0)) {
        throw DomainError("differential step must be positive");
    }
    auto lw = log_of(q_weights);
    // beta p_i(beta) = beta h_ref - log E_Q[e^{-beta (h - h_ref)}]; the
    // linear part is differentiated exactly.
    const double h_ref = *std::min_element(claim_samples.begin(), claim_samples.end());
    auto centred = [&](double b) {
        std::vector<double> t(claim_samples.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
            t[i] = -b * (claim_samples[i] - h_ref);
        }
        return -log_tilted_ratio(lw, t).value;
    };
    const double derivative = h_ref
        + (centred(beta + step) - centred(beta - step)) / (2.0 * step);
    auto pm = pi_pm_curves(q_weights, claim_samples, beta).p_m;
    return {derivative - pm.value, step, pm.std_error};
}

double entropy_gap(std::span<const double> q_weights,
                   std::span<const double> claim_samples, double beta_star)
{
    auto c = pi_pm_curves(q_weights, claim_samples, beta_star);
    return c.p_i.value - c.p_m.value;
}

std::vector<FixedMarketRow> fixed_market_price_decay(const PathBatch& batch,
                                                     double alpha,
                                                     const ClaimSpec& claim,
                                                     double rho_fixed,
                                                     std::span<const double> qs)
{
    for (std::size_t i = 1; i < qs.size(); ++i) {
        if (!(qs[i] > qs[i - 1])) {
            throw DomainError("q sequence must be strictly increasing");
        }
    }
    auto h = claim.evaluate(batch.y_T);
    const double h_min = *std::min_element(h.begin(), h.end());
    std::vector<FixedMarketRow> rows;
    rows.reserve(qs.size());
    for (double q : qs) {
        auto pr = exp_indifference_price(batch, alpha, q, claim, rho_fixed);
        rows.push_back({q, pr.price, pr.std_error, h_min});
    }
    return rows;
}

PriceLimitTable price_limit_study(const PathBatch& batch, double alpha,
                                  double gamma, const ClaimSpec& claim,
                                  std::span<const double> rhos)
{
    require_alpha(alpha);
    PriceLimitTable table;
    table.alpha = alpha;
    table.gamma = gamma;
    auto h = claim.evaluate(batch.y_T);
    table.limit = limit_price(q_measure_weights(batch), h, gamma * alpha);
    for (double rho : rhos) {
        require_pre_limit_rho(rho);
        PriceLimitRow row;
        row.rho = rho;
        row.q_n = gamma / (1.0 - rho * rho);
        auto pr = exp_indifference_price(batch, alpha, row.q_n, claim, rho);
        row.price = pr.price;
        row.price_se = pr.std_error;
        row.gap = std::abs(row.price - table.limit.value);
        row.joint_se = std::hypot(row.price_se, table.limit.std_error);
        table.rows.push_back(row);
    }
    return table;
}

} // namespace tiltprice
