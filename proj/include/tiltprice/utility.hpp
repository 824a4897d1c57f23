#pragma once

#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace tiltprice {

enum class UtilityFamily {
    exponential,
    perturbed_exponential,
    tabulated,
    piecewise_rate,
};

class TabulatedCurve;

/*!
 * A utility function on the whole real line with exponential decay rate
 * `alpha` at negative infinity.
 *
 * The analytic families are
 *   - exponential:            U(x) = -exp(-alpha x) / alpha
 *   - perturbed exponential:  U(x) = -exp(-alpha (x + K sin x)) / (alpha (1 + K))
 *   - piecewise rate:         log(-U) piecewise linear, with the rate on the
 *                             negative axis alternating between two values
 *                             over geometrically growing bands. Used only for
 *                             the trinomial non-convergence experiment.
 *
 * Tabulated utilities are interpolated with a monotone cubic Hermite
 * spline and are only defined inside the table.
 */
class UtilitySpec {
public:
    static UtilitySpec exponential(double alpha);
    //! Throws DomainError unless 0 <= K <= 0.2 and alpha (1-K) > K / (1-K).
    static UtilitySpec perturbed(double alpha, double K);
    //! Rows of (wealth, value); wealth strictly increasing, at least 4 rows.
    static UtilitySpec tabulated(std::vector<std::pair<double, double>> table,
                                 double alpha);
    //! Rates alternate low/high on bands [-band_base r^{k+1}, -band_base r^k].
    static UtilitySpec piecewise_rate(double rate_low, double rate_high,
                                      double band_base, double band_ratio);

    UtilityFamily family() const { return family_; }
    double alpha() const { return alpha_; }
    double perturbation() const { return K_; }
    bool is_analytic() const { return family_ != UtilityFamily::tabulated; }

    //! Tabulated only.
    const TabulatedCurve& table() const;

    // piecewise-rate parameters
    double rate_low() const { return rate_low_; }
    double rate_high() const { return rate_high_; }
    double band_base() const { return band_base_; }
    double band_ratio() const { return band_ratio_; }

private:
    UtilitySpec() = default;

    UtilityFamily family_ = UtilityFamily::exponential;
    double alpha_ = 1.0;
    double K_ = 0.0;
    double rate_low_ = 0.0;
    double rate_high_ = 0.0;
    double band_base_ = 1.0;
    double band_ratio_ = 2.0;
    std::shared_ptr<const TabulatedCurve> table_;
};

//! Monotone cubic interpolant of a (wealth, value) table.
class TabulatedCurve {
public:
    explicit TabulatedCurve(std::vector<std::pair<double, double>> table);

    double operator()(double x) const;
    double prime(double x) const;
    double double_prime(double x) const;

    double x_min() const { return xs_.front(); }
    double x_max() const { return xs_.back(); }
    std::span<const double> xs() const { return xs_; }
    std::span<const double> values() const { return ys_; }

    //! Secant slopes strictly positive.
    bool increasing() const { return increasing_; }
    //! Secant slopes strictly decreasing.
    bool concave() const { return concave_; }

private:
    void check_range(double x) const;

    std::vector<double> xs_;
    std::vector<double> ys_;
    bool increasing_ = true;
    bool concave_ = true;
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

double eval_utility(const UtilitySpec& spec, double x);

//! log(-U(x)); finite where U(x) itself would overflow.
double log_neg_utility(const UtilitySpec& spec, double x);

double marginal_utility(const UtilitySpec& spec, double x);

//! Absolute risk aversion -U''(x) / U'(x).
double risk_aversion(const UtilitySpec& spec, double x);

//! V_alpha(y) = y (log y - 1) / alpha, with V_alpha(0) = 0.
double conjugate_exp(double alpha, double y);

struct MembershipReport {
    double u_prime_at_zero = 0.0;
    bool u_prime_ok = false;

    double risk_aversion_min = 0.0;
    double risk_aversion_max = 0.0;
    //! Empirical K_U = max(ra_max, 1 / ra_min).
    double k_u = 0.0;
    bool risk_aversion_bounded = false;

    bool negative = false;
    bool increasing = false;
    bool concave = false;

    //! Two most negative grid points, deepest first.
    double deepest_x = 0.0;
    double next_x = 0.0;
    //! -log(-U(x)) / x at the deepest point.
    double decay_rate_point = 0.0;
    //! -log(-U(x)) / x at the next point.
    double decay_rate_next = 0.0;
    //! Slope of -log(-U) between the two deepest points.
    double decay_rate_secant = 0.0;
    bool decay_rate_ok = false;
    //! Grid reaches -50 / alpha.
    bool grid_depth_ok = false;

    bool member() const
    {
        return u_prime_ok && risk_aversion_bounded && negative && increasing
            && concave && decay_rate_ok && grid_depth_ok;
    }
};

//! Numerical check of the class conditions on a wealth grid. The grid is
//! sorted internally; failures are carried in the report.
MembershipReport check_membership(const UtilitySpec& spec,
                                  std::span<const double> grid);

//! Default grid: 2001 points on [-max(60/alpha, 1e3), 10/alpha].
std::vector<double> default_membership_grid(const UtilitySpec& spec);

} // namespace tiltprice
