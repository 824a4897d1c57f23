#pragma once

#include <cstddef>
#include <span>

namespace tiltprice {

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

//! Pairwise (fixed-tree) summation; result independent of how callers
//! partition work.
double pairwise_sum(std::span<const double> values);

//! Plain sample mean with its standard error.
Estimate sample_mean(std::span<const double> values);

//! Self-normalised weighted mean sum(w v) / sum(w). The standard error is
//! the delta-method (ratio estimator) error.
Estimate weighted_mean(std::span<const double> values,
                       std::span<const double> weights);

//! As weighted_mean, with weights given by their logarithms. Weights may
//! underflow relative to the largest one; at least one stays positive.
Estimate weighted_mean_log(std::span<const double> values,
                           std::span<const double> log_weights);

//! log( sum(w exp(e)) / sum(w) ), evaluated with a max shift.
double log_mean_exp(std::span<const double> exponents,
                    std::span<const double> weights);

//! log( mean(exp(e)) ).
double log_mean_exp(std::span<const double> exponents);

//! log_mean_exp with the standard error of the log, via the delta method
//! on the linear-domain mean.
Estimate log_mean_exp_estimate(std::span<const double> exponents);

//! log( sum(w exp(t)) / sum(w) ) with w_i = exp(log_weights_i), shifted so
//! that neither sum overflows. The error is the delta-method error of the
//! log of the ratio. If every t_i is equal the result is exactly that value.
Estimate log_tilted_ratio(std::span<const double> log_weights,
                          std::span<const double> exponents);

} // namespace tiltprice
