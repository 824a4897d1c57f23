#include "tiltprice/tilt.hpp"

#include "tiltprice/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tiltprice {

TiltSample::TiltSample(std::vector<double> x, std::vector<double> y,
                       std::vector<double> z)
    : x_(std::move(x)), y_(std::move(y)), z_(std::move(z))
{
    if (x_.empty()) {
        throw DomainError("tilt sample is empty");
    }
    if (y_.size() != x_.size() || z_.size() != x_.size()) {
        throw DomainError("tilt sample columns differ in length");
    }
    log_zy_.resize(x_.size());
    min_x_ = max_x_ = x_.front();
    for (std::size_t i = 0; i < x_.size(); ++i) {
        if (!std::isfinite(x_[i]) || !std::isfinite(y_[i])) {
            throw DomainError("tilt sample has a non-finite x or y");
        }
        if (!(z_[i] > 0.0) || !std::isfinite(z_[i])) {
            throw DomainError("tilt sample weights must be positive and finite");
        }
        min_x_ = std::min(min_x_, x_[i]);
        max_x_ = std::max(max_x_, x_[i]);
        log_zy_[i] = std::log(z_[i]) + y_[i];
    }
}

TiltSample TiltSample::plain(std::vector<double> x)
{
    std::vector<double> y(x.size(), 0.0);
    std::vector<double> z(x.size(), 1.0);
    return {std::move(x), std::move(y), std::move(z)};
}

std::vector<double> TiltSample::log_weights(double beta) const
{
    std::vector<double> lw(x_.size());
    for (std::size_t i = 0; i < lw.size(); ++i) {
        lw[i] = log_zy_[i] - beta * x_[i];
    }
    return lw;
}

Estimate tilt_mean(const TiltSample& sample, double beta)
{
    auto est = weighted_mean_log(sample.x(), sample.log_weights(beta));
    // rounding can push the ratio a hair outside the sample range
    est.value = std::clamp(est.value, sample.min_x(), sample.max_x());
    return est;
}

namespace {

double tilt_std_error(const TiltSample& sample, double beta, double p)
{
    const std::size_t n = sample.size();
    if (n < 2) {
        return 0.0;
    }
    auto lw = sample.log_weights(beta);
    double shift = *std::max_element(lw.begin(), lw.end());
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = std::exp(lw[i] - shift);
    }
    const double wbar = pairwise_sum(w) / static_cast<double>(n);
    // g'(beta) = -Var_tilted(x); influence of sample i on beta is
    // w_i (x_i - p) / (wbar Var_tilted(x)).
    std::vector<double> m2(n);
    for (std::size_t i = 0; i < n; ++i) {
        double d = sample.x()[i] - p;
        m2[i] = w[i] / wbar * d * d;
    }
    const double var = pairwise_sum(m2) / static_cast<double>(n);
    if (!(var > 0.0)) {
        return 0.0;
    }
    std::vector<double> psi2(n);
    for (std::size_t i = 0; i < n; ++i) {
        double psi = w[i] / wbar * (sample.x()[i] - p) / var;
        psi2[i] = psi * psi;
    }
    return std::sqrt(pairwise_sum(psi2) / static_cast<double>(n - 1)
                     / static_cast<double>(n));
}

} // namespace

TiltSolution solve_tilt(const TiltSample& sample, double p, double tol)
{
    if (!(tol > 0.0)) {
        throw DomainError("tilt tolerance must be positive");
    }
    if (!std::isfinite(p)) {
        throw DomainError("tilt target p must be finite");
    }
    TiltSolution sol;
    sol.n = sample.size();
    if (sample.constant()) {
        if (p == sample.min_x()) {
            return sol;
        }
        std::ostringstream os;
        os << "claim is constant (" << sample.min_x()
           << "); no tilt reaches p=" << p;
        throw DegenerateClaimError(os.str());
    }
    if (!(p > sample.min_x())) {
        std::ostringstream os;
        os << "p=" << p << " is not above the sample minimum " << sample.min_x();
        throw NoSolutionError(os.str());
    }
    if (!(p < sample.max_x())) {
        std::ostringstream os;
        os << "p=" << p << " is not below the sample maximum " << sample.max_x();
        throw NoSolutionError(os.str());
    }

    // g is decreasing: g(lo) > p > g(hi) brackets the root.
    double lo = -1.0;
    double hi = 1.0;
    while (tilt_mean(sample, lo).value <= p) {
        lo *= 2.0;
        if (lo < -kMaxTiltBracket) {
            std::ostringstream os;
            os << "tilt bracket exceeded |beta| = " << kMaxTiltBracket
               << " below p=" << p << "; target too close to the sample maximum";
            throw NoSolutionError(os.str());
        }
    }
    while (tilt_mean(sample, hi).value >= p) {
        hi *= 2.0;
        if (hi > kMaxTiltBracket) {
            std::ostringstream os;
            os << "tilt bracket exceeded |beta| = " << kMaxTiltBracket
               << " above p=" << p << "; target too close to the sample minimum";
            throw NoSolutionError(os.str());
        }
    }
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        double g = tilt_mean(sample, mid).value;
        if (g > p) {
            lo = mid;
        } else if (g < p) {
            hi = mid;
        } else {
            lo = hi = mid;
        }
        ++sol.iterations;
    }
    sol.beta = 0.5 * (lo + hi);
    sol.std_error = tilt_std_error(sample, sol.beta, p);
    return sol;
}

TiltSample tilt_sample_from_batch(const PathBatch& batch, const ClaimSpec& claim,
                                  double rho)
{
    if (!(std::abs(rho) <= 1.0)) {
        throw DomainError("correlation rho must lie in [-1, 1]");
    }
    const double incompleteness = 1.0 - rho * rho;
    std::vector<double> y(batch.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = -0.5 * incompleteness * batch.I2[i];
    }
    return {claim.evaluate(batch.y_T), std::move(y),
            stochastic_exponential(batch, rho)};
}

TiltSolution beta_n(const PathBatch& batch, const ClaimSpec& claim, double rho_n,
                    double p, double tol)
{
    if (!(std::abs(rho_n) < 1.0)) {
        throw DomainError("beta_n needs |rho_n| < 1; use beta_star for the limit");
    }
    return solve_tilt(tilt_sample_from_batch(batch, claim, rho_n), p, tol);
}

TiltSolution beta_star(const PathBatch& batch, const ClaimSpec& claim, double rho,
                       double p, double tol)
{
    return solve_tilt(tilt_sample_from_batch(batch, claim, rho), p, tol);
}

} // namespace tiltprice
