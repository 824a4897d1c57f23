#pragma once

#include <cstddef>
#include <vector>

#include "tiltprice/claim.hpp"
#include "tiltprice/market.hpp"
#include "tiltprice/montecarlo.hpp"

namespace tiltprice {

/*!
 * Weighted sample (x_i, y_i, z_i) for the exponential tilt
 *
 *   g(beta) = sum z x exp(-beta x + y) / sum z exp(-beta x + y),
 *
 * which is strictly decreasing in beta whenever x is not constant.
 */
class TiltSample {
public:
    //! Throws DomainError on length mismatch, empty input, non-finite x or
    //! y, or non-positive z.
    TiltSample(std::vector<double> x, std::vector<double> y, std::vector<double> z);

    //! y = 0, z = 1.
    static TiltSample plain(std::vector<double> x);

    std::size_t size() const { return x_.size(); }
    const std::vector<double>& x() const { return x_; }
    const std::vector<double>& y() const { return y_; }
    const std::vector<double>& z() const { return z_; }
    double min_x() const { return min_x_; }
    double max_x() const { return max_x_; }
    bool constant() const { return min_x_ == max_x_; }

    //! log z_i + y_i - beta x_i.
    std::vector<double> log_weights(double beta) const;

private:
    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> z_;
    std::vector<double> log_zy_;
    double min_x_ = 0.0;
    double max_x_ = 0.0;
};

//! g(beta) with its ratio-estimator standard error.
Estimate tilt_mean(const TiltSample& sample, double beta);

struct TiltSolution {
    double beta = 0.0;
    //! Delta-method error of beta through the estimating equation.
    double std_error = 0.0;
    std::size_t n = 0;
    int iterations = 0;
};

inline constexpr double kDefaultTiltTol = 1e-10;
inline constexpr double kMaxTiltBracket = 1e6;

/*!
 * Solve g(beta) = p by bracket expansion from [-1, 1] and bisection to a
 * bracket width of `tol`.
 *
 * Throws NoSolutionError if p is outside (min x, max x) or the bracket
 * reaches |beta| = 1e6, and DegenerateClaimError for constant x with
 * p != x. Constant x with p == x returns beta = 0.
 */
TiltSolution solve_tilt(const TiltSample& sample, double p,
                        double tol = kDefaultTiltTol);

//! Sample with x = h(y_T), y = -(1 - rho^2) I2 / 2, z = Z(rho).
TiltSample tilt_sample_from_batch(const PathBatch& batch, const ClaimSpec& claim,
                                  double rho);

//! Tilt for the pre-limit market; requires |rho_n| < 1.
TiltSolution beta_n(const PathBatch& batch, const ClaimSpec& claim, double rho_n,
                    double p, double tol = kDefaultTiltTol);

//! Tilt for the rho-limit market; rho = +-1 allowed.
TiltSolution beta_star(const PathBatch& batch, const ClaimSpec& claim, double rho,
                       double p, double tol = kDefaultTiltTol);

} // namespace tiltprice
