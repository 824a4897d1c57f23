#include "doctest.h"

#include "oracles.hpp"

#include "tiltprice/errors.hpp"
#include "tiltprice/utility.hpp"

#include <cmath>
#include <vector>

using namespace tiltprice;

TEST_CASE("exponential utility values")
{
    CHECK(eval_utility(UtilitySpec::exponential(1.0), 0.0) == -1.0);
    CHECK(eval_utility(UtilitySpec::exponential(2.0), 0.0) == -0.5);
    auto u = UtilitySpec::exponential(0.7);
    for (double x : {-30.0, -1.0, 0.0, 2.5, 40.0}) {
        CHECK(eval_utility(u, x) == -std::exp(-0.7 * x) / 0.7);
        CHECK(log_neg_utility(u, x) == doctest::Approx(-0.7 * x - std::log(0.7)));
    }
    // far below any double range of U itself
    CHECK(log_neg_utility(u, -5000.0) == doctest::Approx(3500.0 - std::log(0.7)));
}

TEST_CASE("perturbed utility at zero")
{
    auto u = UtilitySpec::perturbed(1.0, 0.1);
    // -1 / (alpha (1 + K))
    CHECK(eval_utility(u, 0.0) == doctest::Approx(-0.9090909090909091).epsilon(1e-15));
    CHECK(marginal_utility(u, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("perturbed utility admissibility")
{
    CHECK_THROWS_AS(UtilitySpec::perturbed(1.0, 0.25), DomainError);
    CHECK_THROWS_AS(UtilitySpec::perturbed(1.0, -0.01), DomainError);
    // alpha (1 - K) must exceed K / (1 - K)
    CHECK_THROWS_AS(UtilitySpec::perturbed(0.1, 0.2), DomainError);
    CHECK_NOTHROW(UtilitySpec::perturbed(1.0, 0.2));
    CHECK_THROWS_AS(UtilitySpec::exponential(0.0), DomainError);
    CHECK_THROWS_AS(UtilitySpec::exponential(-1.0), DomainError);
}

TEST_CASE("risk aversion")
{
    auto e15 = UtilitySpec::exponential(1.5);
    for (double x : {-50.0, -10.0, 0.0, 3.0}) {
        CHECK(risk_aversion(e15, x) == 1.5);
    }
    CHECK(risk_aversion(UtilitySpec::exponential(2.0), -10.0) == 2.0);

    auto p = UtilitySpec::perturbed(1.0, 0.1);
    for (double x : {-7.0, -1.3, 0.0, 0.4, 2.0, 5.5}) {
        double ra = risk_aversion(p, x);
        CHECK(ra == doctest::Approx(oracle::perturbed_risk_aversion(1.0, 0.1, x))
                        .epsilon(1e-12));
        // central differences at step 1e-5 on U itself
        const double h = 1e-5;
        double up = eval_utility(p, x + h), mid = eval_utility(p, x),
               dn = eval_utility(p, x - h);
        double d1 = (up - dn) / (2 * h);
        double d2 = (up - 2 * mid + dn) / (h * h);
        CHECK(ra == doctest::Approx(-d2 / d1).epsilon(1e-4));
        CHECK(marginal_utility(p, x) == doctest::Approx(d1).epsilon(1e-6));
    }
}

TEST_CASE("conjugate of the exponential utility")
{
    CHECK(conjugate_exp(1.0, 1.0) == -1.0);
    CHECK(conjugate_exp(2.0, 1.0) == -0.5);
    CHECK(conjugate_exp(1.0, std::exp(1.0)) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(conjugate_exp(1.0, 0.0) == 0.0);
    CHECK_THROWS_AS(conjugate_exp(1.0, -1e-3), DomainError);
}

TEST_CASE("Fenchel inequality on a product grid")
{
    for (double alpha : {0.5, 1.0, 2.0}) {
        auto u = UtilitySpec::exponential(alpha);
        for (int i = 0; i <= 40; ++i) {
            double x = -10.0 + 0.5 * i;
            for (int j = 1; j <= 40; ++j) {
                double y = 0.25 * j;
                CHECK(eval_utility(u, x) <= conjugate_exp(alpha, y) + x * y + 1e-12);
            }
            // equality at y = U'(x) once magnitudes are moderate
            double y = marginal_utility(u, x);
            if (y < 1e6) {
                double lhs = eval_utility(u, x);
                double rhs = conjugate_exp(alpha, y) + x * y;
                CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
            }
        }
    }
}

TEST_CASE("membership of the exponential utility")
{
    auto u = UtilitySpec::exponential(1.0);
    auto report = check_membership(u, default_membership_grid(u));
    CHECK(report.member());
    CHECK(report.decay_rate_point == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(report.decay_rate_secant == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(report.risk_aversion_min == 1.0);
    CHECK(report.risk_aversion_max == 1.0);
    CHECK(report.k_u == 1.0);
}

TEST_CASE("membership of the perturbed utility")
{
    auto u = UtilitySpec::perturbed(1.0, 0.1);
    auto report = check_membership(u, default_membership_grid(u));
    CHECK(report.member());
    CHECK(report.decay_rate_point >= 0.9);
    CHECK(report.decay_rate_point <= 1.1);
    CHECK(report.risk_aversion_min >= 0.8);
    CHECK(report.risk_aversion_max <= 1.2);
}

TEST_CASE("perturbed decay-rate error shrinks with depth")
{
    auto u = UtilitySpec::perturbed(1.0, 0.1);
    double prev = INFINITY;
    for (int k = 2; k <= 4; ++k) {
        double x = -std::pow(10.0, k);
        double err = std::abs(-log_neg_utility(u, x) / x - 1.0);
        CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("membership flags a shallow grid")
{
    auto u = UtilitySpec::exponential(1.0);
    std::vector<double> grid;
    for (int i = 0; i <= 100; ++i) {
        grid.push_back(-10.0 + 0.2 * i);
    }
    auto report = check_membership(u, grid);
    CHECK_FALSE(report.grid_depth_ok);
    CHECK_FALSE(report.member());
}

namespace {

std::vector<std::pair<double, double>> exp_table(double alpha, double lo, double hi,
                                                 int n)
{
    std::vector<std::pair<double, double>> t;
    for (int i = 0; i < n; ++i) {
        double x = lo + (hi - lo) * i / (n - 1);
        t.emplace_back(x, -std::exp(-alpha * x) / alpha);
    }
    return t;
}

} // namespace

TEST_CASE("tabulated utility")
{
    auto u = UtilitySpec::tabulated(exp_table(1.0, -60.0, 10.0, 2801), 1.0);
    CHECK(eval_utility(u, 0.0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(eval_utility(u, 0.3) == doctest::Approx(-std::exp(-0.3)).epsilon(1e-5));
    CHECK(marginal_utility(u, 0.0) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(risk_aversion(u, -2.0) == doctest::Approx(1.0).epsilon(2e-2));
    CHECK_THROWS_AS(eval_utility(u, 10.5), OutOfRangeError);
    CHECK_THROWS_AS(eval_utility(u, -61.0), OutOfRangeError);

    auto report = check_membership(u, default_membership_grid(u));
    CHECK(report.u_prime_ok);
    CHECK(report.increasing);
    CHECK(report.concave);
    CHECK(report.decay_rate_ok);
    CHECK(report.grid_depth_ok);
}

TEST_CASE("convex table is flagged")
{
    std::vector<std::pair<double, double>> t;
    for (int i = 0; i < 200; ++i) {
        double x = -60.0 + 0.35 * i;
        // increasing and convex
        t.emplace_back(x, std::exp(0.05 * x) - 30.0);
    }
    auto u = UtilitySpec::tabulated(t, 1.0);
    auto report = check_membership(u, default_membership_grid(u));
    CHECK_FALSE(report.concave);
    CHECK_FALSE(report.member());
    CHECK_THROWS_AS(risk_aversion(u, -10.0), InvalidUtilityError);
}

TEST_CASE("all families negative and increasing")
{
    std::vector<UtilitySpec> specs = {UtilitySpec::exponential(0.5),
                                      UtilitySpec::perturbed(2.0, 0.2),
                                      UtilitySpec::piecewise_rate(2.0, 1.0, 1.0, 4.0)};
    for (const auto& u : specs) {
        double prev = -INFINITY;
        for (int i = 0; i <= 400; ++i) {
            double x = -40.0 + 0.2 * i;
            double v = eval_utility(u, x);
            CHECK(v < 0.0);
            CHECK(v > prev);
            prev = v;
        }
    }
}

TEST_CASE("piecewise-rate utility")
{
    auto u = UtilitySpec::piecewise_rate(2.0, 1.0, 1.0, 4.0);
    CHECK(u.alpha() == 1.0);
    // rate 1 above -1, rate 2 on [-4, -1], rate 1 on [-16, -4]
    CHECK(log_neg_utility(u, 0.5) == doctest::Approx(-0.5));
    CHECK(log_neg_utility(u, -1.0) == doctest::Approx(1.0));
    CHECK(log_neg_utility(u, -4.0) == doctest::Approx(7.0));
    CHECK(log_neg_utility(u, -16.0) == doctest::Approx(19.0));
    CHECK(risk_aversion(u, -2.0) == 2.0);
    CHECK(risk_aversion(u, -8.0) == 1.0);
}
