#include "tiltprice/trinomial.hpp"

#include "tiltprice/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tiltprice {

namespace {

double log_add_exp(double a, double b)
{
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

void require_position(double q)
{
    if (!(q > 0.0) || !std::isfinite(q)) {
        throw DomainError("trinomial position q must be positive and finite");
    }
}

} // namespace

void TrinomialModel::validate() const
{
    if (!(u > 0.0 && u < 1.0)) {
        throw DomainError("trinomial up-move u must lie in (0, 1)");
    }
    if (!std::isfinite(h_u) || !std::isfinite(h_m) || !std::isfinite(h_d)) {
        throw DomainError("trinomial payoffs must be finite");
    }
    if (!(h_m <= h_bar())) {
        std::ostringstream os;
        os << "trinomial model needs h_m <= h_bar; got h_m=" << h_m
           << ", h_bar=" << h_bar();
        throw DomainError(os.str());
    }
}

std::array<double, 3> TrinomialModel::masses(double q) const
{
    const double middle = std::exp(-q);
    const double side = 0.5 * -std::expm1(-q);
    return {side, middle, side};
}

TrinomialModel symmetric_trinomial(double h_bar, double h_m, double u)
{
    TrinomialModel m;
    m.u = u;
    m.h_u = h_bar;
    m.h_d = h_bar;
    m.h_m = h_m;
    m.validate();
    return m;
}

TrinomialValues tri_value(const UtilitySpec& spec, double x, double q,
                          const TrinomialModel& model)
{
    model.validate();
    TrinomialValues v;
    v.no_claim = eval_utility(spec, x);
    if (q == 0.0) {
        v.with_claim = v.no_claim;
        return v;
    }
    auto w = model.masses(q);
    v.with_claim = 2.0 * w[0] * eval_utility(spec, x + q * model.h_bar())
        + w[1] * eval_utility(spec, x + q * model.h_m);
    return v;
}

double tri_price_exp(double alpha, double q, const TrinomialModel& model)
{
    model.validate();
    require_position(q);
    if (!(alpha > 0.0)) {
        throw DomainError("risk aversion alpha must be positive");
    }
    const double aq = alpha * q;
    const double up = std::log(-std::expm1(-q)) - aq * model.h_bar();
    const double mid = -q - aq * model.h_m;
    return -log_add_exp(up, mid) / aq;
}

double tri_limit(double alpha, const TrinomialModel& model)
{
    model.validate();
    if (!(alpha > 0.0)) {
        throw DomainError("risk aversion alpha must be positive");
    }
    return std::min(model.h_bar(), 1.0 / alpha + model.h_m);
}

double tri_limit_gap(double alpha, double q, const TrinomialModel& model)
{
    model.validate();
    require_position(q);
    if (!(alpha > 0.0)) {
        throw DomainError("risk aversion alpha must be positive");
    }
    const double aq = alpha * q;
    // beta = -(1/aq) log(A + B) with log A = log(1-e^{-q}) - aq h_bar and
    // log B = -q - aq h_m; subtract the dominant exponent analytically.
    const double log1m = std::log(-std::expm1(-q));
    const double up = log1m - aq * model.h_bar();
    const double mid = -q - aq * model.h_m;
    const double limit = tri_limit(alpha, model);
    if (model.h_bar() <= 1.0 / alpha + model.h_m) {
        // limit = h_bar; beta - h_bar = -(log1m + log1p(B/A)) / aq
        return -(log1m + std::log1p(std::exp(mid - up))) / aq
            + (model.h_bar() - limit);
    }
    // limit = 1/alpha + h_m; beta - limit = -log1p(A/B) / aq
    return -std::log1p(std::exp(up - mid)) / aq;
}

double tri_price_general(const UtilitySpec& spec, double x, double q,
                         const TrinomialModel& model, double tol)
{
    model.validate();
    require_position(q);
    const double h_bar = model.h_bar();
    const double log_side = std::log(-std::expm1(-q));
    const double target = log_neg_utility(spec, x);

    // log(-RHS) - log(-U(x)); increasing in beta since U is increasing
    auto excess = [&](double beta) {
        double up = log_side + log_neg_utility(spec, x + q * (h_bar - beta));
        double down = -q + log_neg_utility(spec, x - q * (beta - model.h_m));
        return log_add_exp(up, down) - target;
    };

    double lo = model.h_m - 1.0;
    double hi = h_bar + 1.0;
    double f_lo = excess(lo);
    double f_hi = excess(hi);
    if (!(f_lo < 0.0 && f_hi > 0.0)) {
        std::ostringstream os;
        os << "trinomial bracket [" << lo << ", " << hi
           << "] does not straddle the indifference price: excess(lo)=" << f_lo
           << ", excess(hi)=" << f_hi;
        throw NumericalError(os.str());
    }
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        double f = excess(mid);
        if (f < 0.0) {
            lo = mid;
        } else if (f > 0.0) {
            hi = mid;
        } else {
            return mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<TrinomialRow> trinomial_schedule(const UtilitySpec& spec, double x,
                                             const TrinomialModel& model,
                                             std::span<const double> qs, double tol)
{
    std::vector<TrinomialRow> rows;
    rows.reserve(qs.size());
    for (double q : qs) {
        TrinomialRow r;
        r.q = q;
        r.price_exponential = tri_price_exp(spec.alpha(), q, model);
        r.price_general = tri_price_general(spec, x, q, model, tol);
        r.limit = tri_limit(spec.alpha(), model);
        rows.push_back(r);
    }
    return rows;
}

UtilitySpec nonconvergence_utility(double alpha)
{
    return UtilitySpec::piecewise_rate(2.0 * alpha, alpha, 1.0, 4.0);
}

std::vector<NonConvergenceRow> nonconvergence_demo(double alpha, double x,
                                                   const TrinomialModel& model,
                                                   std::span<const double> qs)
{
    model.validate();
    if (!(alpha * (model.h_bar() - model.h_m) > 1.0)) {
        std::ostringstream os;
        os << "non-convergence demo needs alpha (h_bar - h_m) > 1 so the lower "
              "decay rate exceeds 1 / (h_bar - h_m); got alpha="
           << alpha << ", h_bar - h_m=" << model.h_bar() - model.h_m;
        throw DomainError(os.str());
    }
    auto spec = nonconvergence_utility(alpha);
    std::vector<NonConvergenceRow> rows;
    rows.reserve(qs.size());
    for (double q : qs) {
        NonConvergenceRow r;
        r.q = q;
        r.price = tri_price_general(spec, x, q, model);
        r.limit_rate_alpha = tri_limit(alpha, model);
        r.limit_rate_2alpha = tri_limit(2.0 * alpha, model);
        rows.push_back(r);
    }
    return rows;
}

} // namespace tiltprice
