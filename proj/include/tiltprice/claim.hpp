#pragma once

#include <span>
#include <utility>
#include <vector>

#include "tiltprice/market.hpp"

namespace tiltprice {

/*!
 * Bounded continuous payoff h(y) of the non-traded state.
 *
 *   capped_linear  min(y, cap)
 *   digital        1 / (1 + exp(-(y - threshold) / width)), a smoothed 1{y >= K}
 *   tabulated      piecewise-linear through (y, h) rows, flat outside
 *   constant       h == value
 */
class ClaimSpec {
public:
    enum class Form { capped_linear, digital, tabulated, constant };

    static ClaimSpec capped_linear(double cap);
    static ClaimSpec digital(double threshold, double width);
    static ClaimSpec tabulated(std::vector<std::pair<double, double>> table);
    static ClaimSpec constant(double value);

    Form form() const { return form_; }
    double operator()(double y) const;

    //! (inf h, sup h) over the interval E.
    std::pair<double, double> bounds(const StateInterval& E) const;

    //! h(y_T) for every path of a batch.
    std::vector<double> evaluate(std::span<const double> y) const;

private:
    ClaimSpec() = default;

    Form form_ = Form::constant;
    double p0_ = 0.0;
    double p1_ = 0.0;
    std::vector<double> ys_;
    std::vector<double> hs_;
};

//! Open interval I(h) = (inf h, sup h) of arbitrage-free prices.
struct ArbitrageBounds {
    double lo = 0.0;
    double hi = 0.0;
    //! True when inf h == sup h (constant payoff): the interval is empty.
    bool degenerate = false;
};

ArbitrageBounds arbitrage_bounds(const ClaimSpec& claim, const StateInterval& E);

} // namespace tiltprice
