#include "doctest.h"

#include "oracles.hpp"

#include "tiltprice/errors.hpp"
#include "tiltprice/pricing.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace tiltprice;

namespace {

const PathBatch& gbm_batch()
{
    static const PathBatch batch = [] {
        SimulationSettings st;
        st.n_paths = 20000;
        st.n_steps = 50;
        st.seed = 424242;
        st.workers = 1;
        return simulate(gbm_example_model(), st);
    }();
    return batch;
}

PathBatch zero_lambda_batch(std::size_t n)
{
    BasisRiskModel m;
    m.mu = Coefficient::constant(0.0);
    m.sigma = Coefficient::constant(0.3);
    m.b = Coefficient::constant(0.0);
    m.a = Coefficient::constant(0.5);
    SimulationSettings st;
    st.n_paths = n;
    st.n_steps = 10;
    st.seed = 3;
    st.workers = 1;
    return simulate(m, st);
}

const std::vector<double> kTwoPointWeights = {1.0, 1.0};
const std::vector<double> kTwoPointClaim = {0.0, 1.0};

} // namespace

TEST_CASE("value function without claim or market")
{
    auto batch = zero_lambda_batch(100);
    auto claim = ClaimSpec::capped_linear(1.0);
    for (double alpha : {1.0, 0.5, 2.0}) {
        for (double x : {-3.0, 0.0, 1.7}) {
            auto u = exp_value_function(batch, alpha, x, 0.0, claim, 0.0);
            CHECK(u.value == -std::exp(-alpha * x) / alpha);
        }
    }
}

TEST_CASE("value function with a constant claim")
{
    auto batch = zero_lambda_batch(100);
    auto claim = ClaimSpec::constant(0.8);
    for (double rho : {0.0, 0.5, 0.95}) {
        auto u = exp_value_function(batch, 1.3, 0.4, 2.0, claim, rho);
        CHECK(u.value == doctest::Approx(-std::exp(-1.3 * (0.4 + 2.0 * 0.8)) / 1.3)
                             .epsilon(1e-14));
    }
}

TEST_CASE("value function factorises in wealth")
{
    const auto& batch = gbm_batch();
    auto claim = ClaimSpec::capped_linear(2.0);
    for (double rho : {-0.4, 0.0, 0.9, 0.99}) {
        auto u0 = exp_value_function(batch, 0.7, 0.0, 1.5, claim, rho).value;
        for (double x : {-2.0, 0.3, 5.0}) {
            auto ux = exp_value_function(batch, 0.7, x, 1.5, claim, rho).value;
            CHECK(ux == std::exp(-0.7 * x) * u0);
            CHECK(ux < 0.0);
        }
    }
    CHECK_THROWS_AS(exp_value_function(batch, 1.0, 0.0, 1.0, claim, 1.0), DomainError);
}

TEST_CASE("value function matches direct summation")
{
    const auto& batch = gbm_batch();
    auto claim = ClaimSpec::capped_linear(2.0);
    auto h = claim.evaluate(batch.y_T);
    for (double rho : {0.0, 0.5, 0.9}) {
        double lib = exp_value_function(batch, 1.0, 0.2, 3.0, claim, rho).value;
        double ref = oracle::exp_value(h, batch.I2, batch.IW, 1.0, 0.2, 3.0, rho);
        CHECK(lib == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("indifference price basics")
{
    const auto& batch = gbm_batch();
    auto c = exp_indifference_price(batch, 1.0, 3.0, ClaimSpec::constant(1.5), 0.3);
    CHECK(c.price == 1.5);
    CHECK(c.std_error == 0.0);
    CHECK_FALSE(c.x.has_value());

    auto claim = ClaimSpec::capped_linear(2.0);
    CHECK_THROWS_AS(exp_indifference_price(batch, 1.0, 0.0, claim, 0.3), DomainError);
    CHECK_THROWS_AS(exp_indifference_price(batch, 1.0, 1.0, claim, 1.0), DomainError);
    CHECK_THROWS_AS(exp_indifference_price(batch, 1.0, 1.0, claim, -1.0), DomainError);
    CHECK_THROWS_AS(exp_indifference_price(batch, 0.0, 1.0, claim, 0.0), DomainError);

    auto h = claim.evaluate(batch.y_T);
    double lo = *std::min_element(h.begin(), h.end());
    double hi = *std::max_element(h.begin(), h.end());
    for (double q : {-5.0, -1.0, 0.5, 4.0, 60.0}) {
        auto r = exp_indifference_price(batch, 1.0, q, claim, 0.6);
        CHECK(r.price >= lo - 4.0 * r.std_error);
        CHECK(r.price <= hi + 4.0 * r.std_error);
    }
}

TEST_CASE("interchange of risk aversion and position")
{
    const auto& batch = gbm_batch();
    auto claim = ClaimSpec::capped_linear(2.0);
    for (double alpha : {0.3, 1.0, 2.5}) {
        for (double q : {0.5, 3.0, 7.0}) {
            CHECK(exp_indifference_price(batch, alpha, q, claim, 0.7).price
                  == exp_indifference_price(batch, q * alpha, 1.0, claim, 0.7).price);
        }
    }
}

TEST_CASE("closed form agrees with the bisection oracle on the GBM case")
{
    const auto& batch = gbm_batch();
    auto claim = ClaimSpec::capped_linear(2.0);
    auto h = claim.evaluate(batch.y_T);
    double lib = exp_indifference_price(batch, 1.0, 1.0, claim, 0.0).price;
    double ref = oracle::indifference_by_bisection(h, batch.I2, batch.IW, 1.0, 1.0, 0.0);
    CHECK(std::abs(lib - ref) <= 1e-9);
}

TEST_CASE("optimal quantity")
{
    const auto& batch = gbm_batch();
    auto claim = ClaimSpec::capped_linear(2.0);
    auto sample = tilt_sample_from_batch(batch, claim, 0.5);
    double p_hat = tilt_mean(sample, 0.0).value;
    CHECK(std::abs(optimal_quantity(batch, 1.0, p_hat, 0.5, claim).q) <= 1e-9);

    auto below = optimal_quantity(batch, 1.0, p_hat - 0.05, 0.5, claim);
    auto above = optimal_quantity(batch, 1.0, p_hat + 0.05, 0.5, claim);
    CHECK(below.q > 0.0);
    CHECK(above.q < 0.0);

    auto a1 = optimal_quantity(batch, 1.3, p_hat - 0.05, 0.5, claim);
    auto a2 = optimal_quantity(batch, 2.6, p_hat - 0.05, 0.5, claim);
    CHECK(a2.q == 0.5 * a1.q);
    CHECK(a1.q == doctest::Approx(a1.beta / (1.3 * 0.75)));
}

TEST_CASE("optimal quantity for a two-point claim without a market")
{
    // lambda == 0 and rho == 0: q = beta / alpha with the plain two-point tilt
    PathBatch batch;
    batch.y_T = {0.0, 2.0};
    batch.I2 = {0.0, 0.0};
    batch.IW = {0.0, 0.0};
    batch.n_paths = 2;
    auto claim = ClaimSpec::capped_linear(1.0);
    auto r = optimal_quantity(batch, 2.0, 0.25, 0.0, claim);
    CHECK(r.beta > 0.0);
    CHECK(std::abs(r.beta - std::log(3.0)) <= 1e-10);
    CHECK(r.q == r.beta / 2.0);
}

TEST_CASE("quantity-limit product")
{
    const auto& batch = gbm_batch();
    CHECK_THROWS_AS(quantity_limit_product(batch, 1.0, 0.9, ClaimSpec::constant(1.0),
                                           std::vector<double>{0.0, 0.9}),
                    DegenerateClaimError);

    auto claim = ClaimSpec::capped_linear(2.0);
    auto q_mean = weighted_mean(claim.evaluate(batch.y_T), q_measure_weights(batch));
    std::vector<double> rhos = {0.0, 0.9, 0.99, 0.999};
    auto table = quantity_limit_product(batch, 1.0, q_mean.value, claim, rhos);
    CHECK(std::abs(table.target) <= 1e-9);
    CHECK(table.rows.size() == rhos.size());
    CHECK(std::abs(table.rows.back().product) < std::abs(table.rows.front().product));
}

TEST_CASE("limit price")
{
    std::vector<double> w = {0.4, 1.1, 2.0}, c = {0.75, 0.75, 0.75};
    CHECK(limit_price(w, c, 3.0).value == 0.75);
    CHECK(limit_price(w, c, -3.0).value == 0.75);

    // -log((1 + e^{-1}) / 2)
    CHECK(limit_price(kTwoPointWeights, kTwoPointClaim, 1.0).value
          == doctest::Approx(0.3798854930417225).epsilon(1e-13));
    CHECK_THROWS_AS(limit_price(kTwoPointWeights, kTwoPointClaim, 0.0), DomainError);

    const auto& batch = gbm_batch();
    auto h = ClaimSpec::capped_linear(2.0).evaluate(batch.y_T);
    auto wq = q_measure_weights(batch);
    double mean = weighted_mean(h, wq).value;
    double prev = INFINITY;
    for (double ga : {1e-1, 1e-2, 1e-3}) {
        double d = std::abs(limit_price(wq, h, ga).value - mean);
        CHECK(d < prev);
        prev = d;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("indifference and marginal curves")
{
    auto zero = pi_pm_curves(kTwoPointWeights, kTwoPointClaim, 0.0);
    CHECK(zero.p_i.value == 0.5);
    CHECK(zero.p_m.value == 0.5);

    auto one = pi_pm_curves(kTwoPointWeights, kTwoPointClaim, 1.0);
    CHECK(one.p_i.value == doctest::Approx(oracle::two_point_p_i(1.0)).epsilon(1e-14));
    CHECK(one.p_m.value == doctest::Approx(oracle::two_point_p_m(1.0)).epsilon(1e-14));
    CHECK(one.p_i.value == doctest::Approx(0.3798854930417225).epsilon(1e-13));
    CHECK(one.p_m.value == doctest::Approx(0.2689414213699951).epsilon(1e-13));

    std::vector<double> w = {1.0, 3.0}, c = {2.0, 2.0};
    for (double b : {-1.0, 0.0, 2.0}) {
        auto r = pi_pm_curves(w, c, b);
        CHECK(r.p_i.value == 2.0);
        CHECK(r.p_m.value == 2.0);
    }
}

TEST_CASE("differential relation")
{
    for (double b : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
        auto r = differential_check(kTwoPointWeights, kTwoPointClaim, b, 1e-4);
        CHECK(std::abs(r.residual) <= 1e-6);
        CHECK(r.step == 1e-4);
    }
    std::vector<double> w = {1.0, 3.0}, c = {2.0, 2.0};
    CHECK(differential_check(w, c, 0.7, 1e-4).residual == 0.0);
    CHECK_THROWS_AS(differential_check(w, c, 0.7, 0.0), DomainError);
}

TEST_CASE("entropy gap")
{
    CHECK(entropy_gap(kTwoPointWeights, kTwoPointClaim, 0.0) == 0.0);
    // p_i(1) - p_m(1) for the two-point claim
    CHECK(entropy_gap(kTwoPointWeights, kTwoPointClaim, 1.0)
          == doctest::Approx(0.1109440716717274).epsilon(1e-12));
    CHECK(entropy_gap(kTwoPointWeights, kTwoPointClaim, -1.0) < 0.0);
}

TEST_CASE("ordering of the curves on random claims")
{
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unif(0.1, 2.0), val(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> w(30), h(30);
        for (std::size_t i = 0; i < w.size(); ++i) {
            w[i] = unif(rng);
            h[i] = val(rng);
        }
        for (double b : {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0}) {
            double gap = entropy_gap(w, h, b);
            CHECK((b > 0.0 ? gap > 0.0 : gap < 0.0));
        }
    }
}

TEST_CASE("fixed-market decay")
{
    const auto& batch = gbm_batch();
    std::vector<double> qs = {1.0, 5.0, 25.0};
    auto flat = fixed_market_price_decay(batch, 1.0, ClaimSpec::constant(0.6), 0.5, qs);
    for (const auto& r : flat) {
        CHECK(r.price == 0.6);
    }
    auto claim = ClaimSpec::capped_linear(2.0);
    auto a1 = fixed_market_price_decay(batch, 1.0, claim, 0.5, std::vector<double>{5.0});
    auto a5 = fixed_market_price_decay(batch, 5.0, claim, 0.5, std::vector<double>{1.0});
    CHECK(a1[0].price == a5[0].price);
    std::vector<double> bad = {1.0, 1.0};
    CHECK_THROWS_AS(fixed_market_price_decay(batch, 1.0, claim, 0.5, bad), DomainError);
}

TEST_CASE("price-limit table shape")
{
    const auto& batch = gbm_batch();
    auto table = price_limit_study(batch, 1.0, 0.5, ClaimSpec::capped_linear(2.0),
                                   std::vector<double>{0.0, 0.9});
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0].q_n == 0.5);
    CHECK(table.rows[1].q_n == doctest::Approx(0.5 / 0.19));
    CHECK_THROWS_AS(price_limit_study(batch, 1.0, 0.5, ClaimSpec::capped_linear(2.0),
                                      std::vector<double>{1.0}),
                    DomainError);
}
