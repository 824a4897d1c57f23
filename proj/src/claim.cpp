#include "tiltprice/claim.hpp"

#include "tiltprice/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tiltprice {

ClaimSpec ClaimSpec::capped_linear(double cap)
{
    if (!std::isfinite(cap)) {
        throw DomainError("capped-linear claim needs a finite cap");
    }
    ClaimSpec c;
    c.form_ = Form::capped_linear;
    c.p0_ = cap;
    return c;
}

ClaimSpec ClaimSpec::digital(double threshold, double width)
{
    if (!std::isfinite(threshold) || !(width > 0.0) || !std::isfinite(width)) {
        throw DomainError("digital claim needs a finite threshold and width > 0");
    }
    ClaimSpec c;
    c.form_ = Form::digital;
    c.p0_ = threshold;
    c.p1_ = width;
    return c;
}

ClaimSpec ClaimSpec::tabulated(std::vector<std::pair<double, double>> table)
{
    if (table.size() < 2) {
        throw DomainError("tabulated claim needs at least 2 rows");
    }
    ClaimSpec c;
    c.form_ = Form::tabulated;
    for (auto const& [y, h] : table) {
        if (!std::isfinite(y) || !std::isfinite(h)) {
            throw DomainError("tabulated claim contains a non-finite entry");
        }
        if (!c.ys_.empty() && !(y > c.ys_.back())) {
            throw DomainError("tabulated claim grid must be strictly increasing");
        }
        c.ys_.push_back(y);
        c.hs_.push_back(h);
    }
    return c;
}

ClaimSpec ClaimSpec::constant(double value)
{
    if (!std::isfinite(value)) {
        throw DomainError("constant claim must be finite");
    }
    ClaimSpec c;
    c.form_ = Form::constant;
    c.p0_ = value;
    return c;
}

double ClaimSpec::operator()(double y) const
{
    switch (form_) {
    case Form::capped_linear:
        return std::min(y, p0_);
    case Form::digital:
        return 1.0 / (1.0 + std::exp(-(y - p0_) / p1_));
    case Form::constant:
        return p0_;
    case Form::tabulated: {
        if (y <= ys_.front()) {
            return hs_.front();
        }
        if (y >= ys_.back()) {
            return hs_.back();
        }
        auto it = std::upper_bound(ys_.begin(), ys_.end(), y);
        std::size_t i = static_cast<std::size_t>(it - ys_.begin());
        double t = (y - ys_[i - 1]) / (ys_[i] - ys_[i - 1]);
        return hs_[i - 1] + t * (hs_[i] - hs_[i - 1]);
    }
    }
    return 0.0;
}

std::pair<double, double> ClaimSpec::bounds(const StateInterval& E) const
{
    switch (form_) {
    case Form::capped_linear:
        if (!std::isfinite(E.lo) && E.lo < 0.0) {
            throw DomainError("min(y, cap) is unbounded below on E");
        }
        return {std::min(E.lo, p0_), std::min(E.hi, p0_)};
    case Form::digital:
        return {(*this)(E.lo), (*this)(E.hi)};
    case Form::constant:
        return {p0_, p0_};
    case Form::tabulated: {
        // Extremes of a piecewise-linear function sit at knots inside E or
        // at the ends of E.
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        auto visit = [&](double y) {
            double h = (*this)(y);
            lo = std::min(lo, h);
            hi = std::max(hi, h);
        };
        visit(std::clamp(E.lo, ys_.front(), ys_.back()));
        visit(std::clamp(E.hi, ys_.front(), ys_.back()));
        for (double y : ys_) {
            if (E.contains(y)) {
                visit(y);
            }
        }
        return {lo, hi};
    }
    }
    return {0.0, 0.0};
}

std::vector<double> ClaimSpec::evaluate(std::span<const double> y) const
{
    std::vector<double> out(y.size());
    std::transform(y.begin(), y.end(), out.begin(),
                   [this](double v) { return (*this)(v); });
    return out;
}

ArbitrageBounds arbitrage_bounds(const ClaimSpec& claim, const StateInterval& E)
{
    auto [lo, hi] = claim.bounds(E);
    return {lo, hi, !(lo < hi)};
}

} // namespace tiltprice
