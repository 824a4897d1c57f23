#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace tiltprice {

//! Coefficient of the form c (constant) or c * y (proportional).
struct Coefficient {
    enum class Kind { constant, proportional };

    Kind kind = Kind::constant;
    double c = 0.0;

    static Coefficient constant(double c) { return {Kind::constant, c}; }
    static Coefficient proportional(double c) { return {Kind::proportional, c}; }

    double operator()(double y) const
    {
        return kind == Kind::constant ? c : c * y;
    }
};

//! Open interval (lo, hi); either end may be infinite.
struct StateInterval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double y) const { return y > lo && y < hi; }
};

/*!
 * Two-factor basis-risk diffusion
 *
 *   dS/S = mu(Y) dt + sigma(Y) (rho dW + sqrt(1 - rho^2) dB)
 *   dY   = b(Y) dt + a(Y) dW
 *
 * with market price of risk lambda(y) = mu(y) / sigma(y). Only Y and the
 * W-functionals of lambda are simulated; rho enters the pricing formulas
 * and is not needed to generate paths.
 */
struct BasisRiskModel {
    Coefficient mu;
    Coefficient sigma;
    Coefficient b;
    Coefficient a;
    double rho = 0.0;
    double y0 = 1.0;
    double T = 1.0;
    StateInterval E;

    double lambda(double y) const { return mu(y) / sigma(y); }

    //! Throws DomainError if sigma is not positive on E, lambda is
    //! unbounded on E, y0 is outside E, or T / rho are out of range.
    void validate() const;

    //! Stable 64-bit hash of the path-generating parameters (excludes rho).
    std::uint64_t path_hash() const;
};

//! The geometric basis-risk example: mu=0.08, sigma=0.2, b=0.03y, a=0.3y,
//! y0=1, T=1 on E=(0, inf).
BasisRiskModel gbm_example_model();

enum class Measure {
    physical, //!< simulate Y under P
    pricing,  //!< simulate Y under dQ/dP = Z(1): drift b - lambda a
};

struct SimulationSettings {
    std::size_t n_paths = 10000;
    std::size_t n_steps = 100;
    std::uint64_t seed = 1;
    //! 0 selects WORKER_COUNT from the environment, else hardware threads.
    unsigned workers = 0;
    Measure measure = Measure::physical;
};

/*!
 * Per-path functionals of one simulated batch, stored column-wise:
 * terminal state Y_T, I2 = int lambda(Y)^2 dt and IW = int lambda(Y) dW.
 */
struct PathBatch {
    std::vector<double> y_T;
    std::vector<double> I2;
    std::vector<double> IW;

    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    std::uint64_t seed = 0;
    std::uint64_t model_hash = 0;
    std::string scheme = "euler-maruyama";
    Measure measure = Measure::physical;
    std::size_t clamp_count = 0;

    std::size_t size() const { return y_T.size(); }
};

//! Fraction of path steps that may be clamped back into E.
inline constexpr double kMaxClampFraction = 1e-3;

/*!
 * Euler-Maruyama simulation with left-endpoint quadrature for I2 and Ito
 * increments for IW. Path i draws its normals from a counter-based stream
 * keyed by (seed, i), so output is identical for any worker count.
 */
PathBatch simulate(const BasisRiskModel& model, const SimulationSettings& settings);

//! Worker count from WORKER_COUNT, else std::thread::hardware_concurrency.
unsigned default_worker_count();

//! log Z(rho)_i = -rho IW_i - rho^2 / 2 I2_i.
std::vector<double> log_stochastic_exponential(const PathBatch& batch, double rho);

//! Z(rho)_i = exp(-rho IW_i - rho^2 / 2 I2_i).
std::vector<double> stochastic_exponential(const PathBatch& batch, double rho);

//! dQ/dP = Z(1) for the complete-limit pricing measure.
std::vector<double> q_measure_weights(const PathBatch& batch);

//! CSV with a metadata comment line and a (y_T, I2, IW) header.
void write_batch_csv(const PathBatch& batch, const std::filesystem::path& path);
PathBatch read_batch_csv(const std::filesystem::path& path);

std::string to_string(Measure m);

} // namespace tiltprice
