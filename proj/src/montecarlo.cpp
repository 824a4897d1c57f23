#include "tiltprice/montecarlo.hpp"

#include "tiltprice/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace tiltprice {

namespace {

constexpr std::size_t kPairwiseBlock = 64;

void require_same_length(std::size_t a, std::size_t b)
{
    if (a != b) {
        std::ostringstream os;
        os << "length mismatch: " << a << " values vs " << b << " weights";
        throw DomainError(os.str());
    }
}

void require_nonempty(std::size_t n)
{
    if (n == 0) {
        throw DomainError("empty sample");
    }
}

double max_finite(std::span<const double> e)
{
    double m = -INFINITY;
    for (double v : e) {
        if (std::isnan(v) || v == INFINITY) {
            throw DomainError("exponent is NaN or +inf");
        }
        m = std::max(m, v);
    }
    if (!std::isfinite(m)) {
        throw DomainError("all exponents are -inf");
    }
    return m;
}

} // namespace

double pairwise_sum(std::span<const double> values)
{
    if (values.size() <= kPairwiseBlock) {
        double s = 0.0;
        for (double v : values) {
            s += v;
        }
        return s;
    }
    std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

Estimate sample_mean(std::span<const double> values)
{
    require_nonempty(values.size());
    const std::size_t n = values.size();
    const double mean = pairwise_sum(values) / static_cast<double>(n);
    Estimate est{mean, 0.0, n};
    if (n > 1) {
        std::vector<double> sq(n);
        for (std::size_t i = 0; i < n; ++i) {
            double d = values[i] - mean;
            sq[i] = d * d;
        }
        double var = pairwise_sum(sq) / static_cast<double>(n - 1);
        est.std_error = std::sqrt(var / static_cast<double>(n));
    }
    return est;
}

Estimate weighted_mean(std::span<const double> values,
                       std::span<const double> weights)
{
    require_same_length(values.size(), weights.size());
    if (values.size() < 2) {
        throw DomainError("weighted mean needs at least 2 samples");
    }
    std::vector<double> logw(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
            std::ostringstream os;
            os << "weight " << i << " is not positive and finite: " << weights[i];
            throw DomainError(os.str());
        }
        logw[i] = std::log(weights[i]);
    }
    // Values are centred on the first one so a constant sample is exact.
    const std::size_t n = values.size();
    const double ref = values[0];
    std::vector<double> wv(n);
    for (std::size_t i = 0; i < n; ++i) {
        wv[i] = weights[i] * (values[i] - ref);
    }
    const double wsum = pairwise_sum(weights);
    if (!std::isfinite(wsum) || wsum <= 0.0) {
        return weighted_mean_log(values, logw);
    }
    const double ratio = ref + pairwise_sum(wv) / wsum;
    const double wbar = wsum / static_cast<double>(n);
    std::vector<double> r2(n);
    for (std::size_t i = 0; i < n; ++i) {
        double d = weights[i] / wbar * (values[i] - ratio);
        r2[i] = d * d;
    }
    double se = std::sqrt(pairwise_sum(r2) / static_cast<double>(n - 1)
                          / static_cast<double>(n));
    return {ratio, se, n};
}

Estimate weighted_mean_log(std::span<const double> values,
                           std::span<const double> log_weights)
{
    require_same_length(values.size(), log_weights.size());
    require_nonempty(values.size());
    const std::size_t n = values.size();
    const double shift = max_finite(log_weights);
    const double ref = values[0];
    std::vector<double> w(n);
    std::vector<double> wv(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = std::exp(log_weights[i] - shift);
        wv[i] = w[i] * (values[i] - ref);
    }
    const double wsum = pairwise_sum(w);
    const double ratio = ref + pairwise_sum(wv) / wsum;
    Estimate est{ratio, 0.0, n};
    if (n > 1) {
        const double wbar = wsum / static_cast<double>(n);
        std::vector<double> r2(n);
        for (std::size_t i = 0; i < n; ++i) {
            double d = w[i] / wbar * (values[i] - ratio);
            r2[i] = d * d;
        }
        est.std_error = std::sqrt(pairwise_sum(r2) / static_cast<double>(n - 1)
                                  / static_cast<double>(n));
    }
    return est;
}

double log_mean_exp(std::span<const double> exponents,
                    std::span<const double> weights)
{
    require_same_length(exponents.size(), weights.size());
    require_nonempty(exponents.size());
    const std::size_t n = exponents.size();
    std::vector<double> e(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
            std::ostringstream os;
            os << "weight " << i << " is not positive and finite: " << weights[i];
            throw DomainError(os.str());
        }
        e[i] = exponents[i] + std::log(weights[i]);
    }
    const double shift = max_finite(e);
    for (double& v : e) {
        v = std::exp(v - shift);
    }
    double log_wsum = std::log(pairwise_sum(weights));
    return shift + std::log(pairwise_sum(e)) - log_wsum;
}

double log_mean_exp(std::span<const double> exponents)
{
    require_nonempty(exponents.size());
    const double shift = max_finite(exponents);
    std::vector<double> e(exponents.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        e[i] = std::exp(exponents[i] - shift);
    }
    return shift + std::log(pairwise_sum(e) / static_cast<double>(e.size()));
}

Estimate log_mean_exp_estimate(std::span<const double> exponents)
{
    const double lme = log_mean_exp(exponents);
    Estimate est{lme, 0.0, exponents.size()};
    if (exponents.size() > 1) {
        // d log M = dM / M; the normalised terms have mean 1.
        std::vector<double> r(exponents.size());
        for (std::size_t i = 0; i < r.size(); ++i) {
            r[i] = std::exp(exponents[i] - lme);
        }
        est.std_error = sample_mean(r).std_error;
    }
    return est;
}

Estimate log_tilted_ratio(std::span<const double> log_weights,
                          std::span<const double> exponents)
{
    require_same_length(log_weights.size(), exponents.size());
    require_nonempty(log_weights.size());
    const std::size_t n = log_weights.size();
    const double t_shift = max_finite(exponents);
    std::vector<double> e(n);
    for (std::size_t i = 0; i < n; ++i) {
        e[i] = log_weights[i] + (exponents[i] - t_shift);
    }
    const double num_shift = max_finite(e);
    const double den_shift = max_finite(log_weights);
    std::vector<double> num(n);
    std::vector<double> den(n);
    for (std::size_t i = 0; i < n; ++i) {
        num[i] = std::exp(e[i] - num_shift);
        den[i] = std::exp(log_weights[i] - den_shift);
    }
    const double num_sum = pairwise_sum(num);
    const double den_sum = pairwise_sum(den);
    Estimate est{t_shift + (num_shift - den_shift) + std::log(num_sum / den_sum),
                 0.0, n};
    if (n > 1) {
        // influence of sample i on log(ratio): (w_i / wbar) (e^{t_i} / M - 1)
        const double scale = static_cast<double>(n) / den_sum;
        const double tilt_scale = static_cast<double>(n) / num_sum;
        std::vector<double> psi2(n);
        for (std::size_t i = 0; i < n; ++i) {
            double psi = num[i] * tilt_scale - den[i] * scale;
            psi2[i] = psi * psi;
        }
        est.std_error = std::sqrt(pairwise_sum(psi2) / static_cast<double>(n - 1)
                                  / static_cast<double>(n));
    }
    return est;
}

} // namespace tiltprice
