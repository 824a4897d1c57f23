#include "tiltprice/utility.hpp"

#include "tiltprice/errors.hpp"

#include <cmath>

// Boost 1.74 pchip calls isnan unqualified.
using std::isnan;

#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <limits>
#include <sstream>

namespace tiltprice {

namespace {

constexpr double kMaxPerturbation = 0.2;
constexpr double kAnalyticSlopeTol = 1e-8;
constexpr double kTabulatedSlopeTol = 1e-4;
constexpr double kDecayRateRelTol = 0.1;

void require_positive_alpha(double alpha)
{
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        std::ostringstream os;
        os << "risk aversion alpha must be positive and finite, got " << alpha;
        throw DomainError(os.str());
    }
}

// Rate of the piecewise-rate family at wealth x.
double piecewise_rate_at(const UtilitySpec& spec, double x)
{
    if (x >= -spec.band_base()) {
        return spec.rate_high();
    }
    double k = std::floor(std::log(-x / spec.band_base())
                          / std::log(spec.band_ratio()));
    return (static_cast<long long>(k) % 2 == 0) ? spec.rate_low()
                                                : spec.rate_high();
}

double piecewise_log_neg(const UtilitySpec& spec, double x)
{
    const double high = spec.rate_high();
    double ell = -std::log(high);
    if (x >= -spec.band_base()) {
        return ell - high * x;
    }
    // integrate the rate from x up to 0 band by band
    ell += high * spec.band_base();
    double inner = spec.band_base();
    long long k = 0;
    const double depth = -x;
    while (inner < depth) {
        double outer = std::min(inner * spec.band_ratio(), depth);
        double rate = (k % 2 == 0) ? spec.rate_low() : spec.rate_high();
        ell += rate * (outer - inner);
        inner = outer;
        ++k;
    }
    return ell;
}

} // namespace

//---------------------------------------------------------------------------//
// TabulatedCurve
//---------------------------------------------------------------------------//

struct TabulatedCurve::Impl {
    boost::math::interpolators::pchip<std::vector<double>> spline;
};

TabulatedCurve::TabulatedCurve(std::vector<std::pair<double, double>> table)
{
    if (table.size() < 4) {
        throw DomainError("tabulated utility needs at least 4 rows");
    }
    xs_.reserve(table.size());
    ys_.reserve(table.size());
    for (auto const& [x, y] : table) {
        if (!std::isfinite(x) || !std::isfinite(y)) {
            throw DomainError("tabulated utility contains a non-finite entry");
        }
        if (!xs_.empty() && !(x > xs_.back())) {
            throw DomainError("tabulated wealth grid must be strictly increasing");
        }
        xs_.push_back(x);
        ys_.push_back(y);
    }
    double prev_slope = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < xs_.size(); ++i) {
        double slope = (ys_[i] - ys_[i - 1]) / (xs_[i] - xs_[i - 1]);
        increasing_ = increasing_ && slope > 0.0;
        concave_ = concave_ && slope < prev_slope;
        prev_slope = slope;
    }
    auto x = xs_;
    auto y = ys_;
    impl_ = std::make_shared<const Impl>(
        Impl{boost::math::interpolators::pchip<std::vector<double>>(
            std::move(x), std::move(y))});
}

void TabulatedCurve::check_range(double x) const
{
    if (!(x >= xs_.front() && x <= xs_.back())) {
        std::ostringstream os;
        os << "wealth " << x << " outside tabulated range [" << xs_.front()
           << ", " << xs_.back() << "]";
        throw OutOfRangeError(os.str());
    }
}

double TabulatedCurve::operator()(double x) const
{
    check_range(x);
    return impl_->spline(x);
}

double TabulatedCurve::prime(double x) const
{
    check_range(x);
    return impl_->spline.prime(x);
}

double TabulatedCurve::double_prime(double x) const
{
    check_range(x);
    const double h = 1e-5 * std::max(1.0, std::abs(x));
    double lo = std::max(x - h, xs_.front());
    double hi = std::min(x + h, xs_.back());
    return (impl_->spline.prime(hi) - impl_->spline.prime(lo)) / (hi - lo);
}

//---------------------------------------------------------------------------//
// UtilitySpec
//---------------------------------------------------------------------------//

UtilitySpec UtilitySpec::exponential(double alpha)
{
    require_positive_alpha(alpha);
    UtilitySpec spec;
    spec.family_ = UtilityFamily::exponential;
    spec.alpha_ = alpha;
    return spec;
}

UtilitySpec UtilitySpec::perturbed(double alpha, double K)
{
    require_positive_alpha(alpha);
    if (!(K >= 0.0 && K <= kMaxPerturbation)) {
        std::ostringstream os;
        os << "perturbation K must lie in [0, " << kMaxPerturbation << "], got "
           << K;
        throw DomainError(os.str());
    }
    // alpha_U(x) = alpha (1 + K cos x) + K sin x / (1 + K cos x)
    if (!(alpha * (1.0 - K) - K / (1.0 - K) > 0.0)) {
        std::ostringstream os;
        os << "perturbation K=" << K << " too large for alpha=" << alpha
           << ": risk aversion lower bound alpha(1-K) - K/(1-K) is not positive";
        throw DomainError(os.str());
    }
    UtilitySpec spec;
    spec.family_ = UtilityFamily::perturbed_exponential;
    spec.alpha_ = alpha;
    spec.K_ = K;
    return spec;
}

UtilitySpec UtilitySpec::tabulated(std::vector<std::pair<double, double>> table,
                                   double alpha)
{
    require_positive_alpha(alpha);
    UtilitySpec spec;
    spec.family_ = UtilityFamily::tabulated;
    spec.alpha_ = alpha;
    spec.table_ = std::make_shared<const TabulatedCurve>(std::move(table));
    return spec;
}

UtilitySpec UtilitySpec::piecewise_rate(double rate_low, double rate_high,
                                        double band_base, double band_ratio)
{
    require_positive_alpha(rate_low);
    require_positive_alpha(rate_high);
    if (!(band_base > 0.0) || !(band_ratio > 1.0)) {
        throw DomainError("piecewise-rate bands need base > 0 and ratio > 1");
    }
    UtilitySpec spec;
    spec.family_ = UtilityFamily::piecewise_rate;
    spec.alpha_ = std::min(rate_low, rate_high);
    spec.rate_low_ = rate_low;
    spec.rate_high_ = rate_high;
    spec.band_base_ = band_base;
    spec.band_ratio_ = band_ratio;
    return spec;
}

const TabulatedCurve& UtilitySpec::table() const
{
    if (!table_) {
        throw DomainError("utility spec is not tabulated");
    }
    return *table_;
}

//---------------------------------------------------------------------------//
// Evaluation
//---------------------------------------------------------------------------//

double log_neg_utility(const UtilitySpec& spec, double x)
{
    const double a = spec.alpha();
    switch (spec.family()) {
    case UtilityFamily::exponential:
        return -a * x - std::log(a);
    case UtilityFamily::perturbed_exponential: {
        const double K = spec.perturbation();
        return -a * (x + K * std::sin(x)) - std::log(a * (1.0 + K));
    }
    case UtilityFamily::piecewise_rate:
        return piecewise_log_neg(spec, x);
    case UtilityFamily::tabulated: {
        double u = spec.table()(x);
        if (!(u < 0.0)) {
            std::ostringstream os;
            os << "tabulated utility is not negative at wealth " << x;
            throw InvalidUtilityError(os.str());
        }
        return std::log(-u);
    }
    }
    return 0.0;
}

double eval_utility(const UtilitySpec& spec, double x)
{
    switch (spec.family()) {
    case UtilityFamily::exponential:
        return -std::exp(-spec.alpha() * x) / spec.alpha();
    case UtilityFamily::tabulated:
        return spec.table()(x);
    default:
        return -std::exp(log_neg_utility(spec, x));
    }
}

double marginal_utility(const UtilitySpec& spec, double x)
{
    const double a = spec.alpha();
    switch (spec.family()) {
    case UtilityFamily::exponential:
        return std::exp(-a * x);
    case UtilityFamily::perturbed_exponential: {
        const double K = spec.perturbation();
        return (1.0 + K * std::cos(x)) * std::exp(-a * (x + K * std::sin(x)))
            / (1.0 + K);
    }
    case UtilityFamily::piecewise_rate:
        return piecewise_rate_at(spec, x) * std::exp(log_neg_utility(spec, x));
    case UtilityFamily::tabulated:
        return spec.table().prime(x);
    }
    return 0.0;
}

double risk_aversion(const UtilitySpec& spec, double x)
{
    const double a = spec.alpha();
    switch (spec.family()) {
    case UtilityFamily::exponential:
        return a;
    case UtilityFamily::perturbed_exponential: {
        const double K = spec.perturbation();
        const double c = 1.0 + K * std::cos(x);
        return a * c + K * std::sin(x) / c;
    }
    case UtilityFamily::piecewise_rate:
        return piecewise_rate_at(spec, x);
    case UtilityFamily::tabulated: {
        auto const& curve = spec.table();
        if (!curve.increasing() || !curve.concave()) {
            throw InvalidUtilityError(
                "tabulated utility is not increasing and strictly concave");
        }
        return -curve.double_prime(x) / curve.prime(x);
    }
    }
    return 0.0;
}

double conjugate_exp(double alpha, double y)
{
    require_positive_alpha(alpha);
    if (std::isnan(y) || y < 0.0) {
        std::ostringstream os;
        os << "conjugate argument must be non-negative, got " << y;
        throw DomainError(os.str());
    }
    if (y == 0.0) {
        return 0.0;
    }
    return y * (std::log(y) - 1.0) / alpha;
}

//---------------------------------------------------------------------------//
// Membership
//---------------------------------------------------------------------------//

std::vector<double> default_membership_grid(const UtilitySpec& spec)
{
    if (spec.family() == UtilityFamily::tabulated) {
        auto xs = spec.table().xs();
        return {xs.begin(), xs.end()};
    }
    const double a = spec.alpha();
    const double lo = -std::max(60.0 / a, 1e3);
    const double hi = 10.0 / a;
    constexpr int n = 2001;
    std::vector<double> grid(n);
    for (int i = 0; i < n; ++i) {
        grid[i] = lo + (hi - lo) * i / (n - 1);
    }
    return grid;
}

MembershipReport check_membership(const UtilitySpec& spec,
                                  std::span<const double> grid_in)
{
    std::vector<double> grid(grid_in.begin(), grid_in.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    MembershipReport r;
    const double a = spec.alpha();
    if (grid.size() < 2) {
        return r;
    }
    r.grid_depth_ok = grid.front() <= -50.0 / a;

    r.u_prime_at_zero = marginal_utility(spec, 0.0);
    const double slope_tol = spec.is_analytic() ? kAnalyticSlopeTol
                                                : kTabulatedSlopeTol;
    r.u_prime_ok = std::abs(r.u_prime_at_zero - 1.0) <= slope_tol;

    // Work with log(-U): U itself overflows at depth.
    std::vector<double> ell(grid.size());
    r.negative = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (spec.family() == UtilityFamily::tabulated) {
            double u = spec.table()(grid[i]);
            r.negative = r.negative && u < 0.0;
            ell[i] = u < 0.0 ? std::log(-u)
                             : -std::numeric_limits<double>::infinity();
        } else {
            ell[i] = log_neg_utility(spec, grid[i]);
        }
    }
    r.increasing = r.negative;
    for (std::size_t i = 1; i < grid.size() && r.increasing; ++i) {
        r.increasing = ell[i] < ell[i - 1];
    }

    r.risk_aversion_min = std::numeric_limits<double>::infinity();
    r.risk_aversion_max = -std::numeric_limits<double>::infinity();
    if (spec.family() == UtilityFamily::tabulated) {
        auto const& curve = spec.table();
        r.concave = curve.concave() && curve.increasing();
        for (double x : grid) {
            double ra = -curve.double_prime(x) / curve.prime(x);
            r.risk_aversion_min = std::min(r.risk_aversion_min, ra);
            r.risk_aversion_max = std::max(r.risk_aversion_max, ra);
        }
    } else {
        for (double x : grid) {
            double ra = risk_aversion(spec, x);
            r.risk_aversion_min = std::min(r.risk_aversion_min, ra);
            r.risk_aversion_max = std::max(r.risk_aversion_max, ra);
        }
        r.concave = r.risk_aversion_min > 0.0;
    }
    if (r.risk_aversion_min > 0.0) {
        r.k_u = std::max(r.risk_aversion_max, 1.0 / r.risk_aversion_min);
        r.risk_aversion_bounded = std::isfinite(r.k_u);
    }

    r.deepest_x = grid[0];
    r.next_x = grid[1];
    if (r.negative) {
        r.decay_rate_point = -ell[0] / grid[0];
        r.decay_rate_next = -ell[1] / grid[1];
        r.decay_rate_secant = -(ell[0] - ell[1]) / (grid[0] - grid[1]);
        r.decay_rate_ok = r.deepest_x < 0.0
            && std::abs(r.decay_rate_point - a) <= kDecayRateRelTol * a;
    }
    return r;
}

} // namespace tiltprice
