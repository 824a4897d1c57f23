#include "doctest.h"

#include "tiltprice/errors.hpp"
#include "tiltprice/market.hpp"
#include "tiltprice/montecarlo.hpp"
#include "tiltprice/philox.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

using namespace tiltprice;

namespace {

SimulationSettings settings(std::size_t n_paths, std::size_t n_steps,
                            std::uint64_t seed, unsigned workers = 1)
{
    SimulationSettings s;
    s.n_paths = n_paths;
    s.n_steps = n_steps;
    s.seed = seed;
    s.workers = workers;
    return s;
}

BasisRiskModel constant_lambda_model(double lambda0)
{
    BasisRiskModel m;
    m.mu = Coefficient::constant(lambda0 * 0.25);
    m.sigma = Coefficient::constant(0.25);
    m.b = Coefficient::constant(0.1);
    m.a = Coefficient::constant(0.0);
    m.y0 = 2.0;
    m.T = 1.5;
    return m;
}

} // namespace

TEST_CASE("Philox4x32-10 known-answer vectors")
{
    using P = Philox4x32;
    CHECK(P::apply({0u, 0u, 0u, 0u}, {0u, 0u})
          == P::counter_type{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(P::apply({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                   {0xffffffffu, 0xffffffffu})
          == P::counter_type{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(P::apply({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                   {0xa4093822u, 0x299f31d0u})
          == P::counter_type{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("path normal streams")
{
    PathNormalStream a(7, 3), b(7, 3), c(7, 4), d(8, 3);
    double sum = 0.0, sum_sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double x = a.next();
        CHECK_EQ(x, b.next());
        sum += x;
        sum_sq += x * x;
    }
    CHECK(std::abs(sum / n) < 4.0 / std::sqrt(double(n)));
    CHECK(sum_sq / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(c.next() != PathNormalStream(7, 3).next());
    CHECK(d.next() != PathNormalStream(7, 3).next());
}

TEST_CASE("GBM example has constant I2")
{
    auto model = gbm_example_model();
    CHECK(model.lambda(0.3) == doctest::Approx(0.4));
    auto batch = simulate(model, settings(2000, 64, 99));
    for (double v : batch.I2) {
        CHECK(v == batch.I2[0]);
    }
    CHECK(batch.I2[0] == doctest::Approx(0.16).epsilon(1e-14));
    CHECK(batch.clamp_count == 0);
}

TEST_CASE("deterministic state with constant lambda")
{
    const double lambda0 = 0.6;
    auto model = constant_lambda_model(lambda0);
    const std::size_t n = 40000;
    auto batch = simulate(model, settings(n, 50, 4));
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(batch.y_T[i] == doctest::Approx(2.0 + 0.1 * 1.5).epsilon(1e-14));
        CHECK(batch.I2[i] == doctest::Approx(lambda0 * lambda0 * 1.5).epsilon(1e-14));
    }
    auto iw = sample_mean(batch.IW);
    CHECK(std::abs(iw.value) <= 4.0 * lambda0 * std::sqrt(1.5 / n));
}

TEST_CASE("simulation is reproducible and independent of worker count")
{
    auto model = gbm_example_model();
    auto a = simulate(model, settings(3000, 40, 12345, 1));
    auto b = simulate(model, settings(3000, 40, 12345, 3));
    auto c = simulate(model, settings(3000, 40, 12345, 1));
    CHECK(a.y_T == b.y_T);
    CHECK(a.IW == b.IW);
    CHECK(a.I2 == b.I2);
    CHECK(a.y_T == c.y_T);
    auto d = simulate(model, settings(3000, 40, 12346, 1));
    CHECK(a.y_T != d.y_T);
}

TEST_CASE("stochastic exponential algebra")
{
    auto batch = simulate(gbm_example_model(), settings(5000, 20, 8));
    auto z0 = stochastic_exponential(batch, 0.0);
    CHECK(std::all_of(z0.begin(), z0.end(), [](double z) { return z == 1.0; }));

    auto zp = stochastic_exponential(batch, 1.0);
    auto zm = stochastic_exponential(batch, -1.0);
    auto lz = log_stochastic_exponential(batch, 0.7);
    auto z7 = stochastic_exponential(batch, 0.7);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        CHECK(zp[i] * zm[i] == doctest::Approx(std::exp(-batch.I2[i])).epsilon(1e-14));
        CHECK(z7[i] == std::exp(-0.7 * batch.IW[i] - 0.5 * 0.49 * batch.I2[i]));
        CHECK(z7[i] == std::exp(lz[i]));
        CHECK(batch.I2[i] >= 0.0);
    }
    CHECK(q_measure_weights(batch) == zp);
}

TEST_CASE("Girsanov: weighted P-paths match Q-simulated paths")
{
    auto model = gbm_example_model();
    const std::size_t n = 100000;
    auto p = simulate(model, settings(n, 50, 31));
    auto qs = settings(n, 50, 32);
    qs.measure = Measure::pricing;
    auto q = simulate(model, qs);

    auto weighted = weighted_mean(p.y_T, q_measure_weights(p));
    auto direct = sample_mean(q.y_T);
    double joint = std::hypot(weighted.std_error, direct.std_error);
    CHECK(std::abs(weighted.value - direct.value) <= 4.0 * joint);

    // constant claim 1 under Q
    std::vector<double> ones(n, 1.0);
    auto one = weighted_mean(ones, q_measure_weights(p));
    CHECK(one.value == doctest::Approx(1.0).epsilon(1e-14));
    auto z = sample_mean(q_measure_weights(p));
    CHECK(std::abs(z.value - 1.0) <= 4.0 * z.std_error);
}

TEST_CASE("lambda == 0 gives Q == P")
{
    BasisRiskModel m;
    m.mu = Coefficient::constant(0.0);
    m.sigma = Coefficient::constant(0.2);
    m.b = Coefficient::constant(0.0);
    m.a = Coefficient::constant(0.3);
    auto batch = simulate(m, settings(500, 10, 1));
    auto w = q_measure_weights(batch);
    CHECK(std::all_of(w.begin(), w.end(), [](double z) { return z == 1.0; }));
}

TEST_CASE("discretisation levels agree under Q")
{
    // The Euler weak bias for this model is of order 1e-4, below what a
    // desk-sized batch resolves, so the check is agreement within noise.
    auto model = gbm_example_model();
    std::vector<double> means, ses;
    for (std::size_t steps : {50u, 200u, 800u}) {
        auto batch = simulate(model, settings(20000, steps, 77));
        std::vector<double> h(batch.size());
        for (std::size_t i = 0; i < h.size(); ++i) {
            h[i] = std::min(batch.y_T[i], 2.0);
        }
        auto e = weighted_mean(h, q_measure_weights(batch));
        means.push_back(e.value);
        ses.push_back(e.std_error);
    }
    for (std::size_t i = 1; i < means.size(); ++i) {
        CHECK(std::abs(means[i] - means[i - 1]) <= 4.0 * std::hypot(ses[i], ses[i - 1]));
    }
}

TEST_CASE("model validation")
{
    auto m = gbm_example_model();
    CHECK_NOTHROW(m.validate());

    auto bad_sigma = m;
    bad_sigma.sigma = Coefficient::constant(0.0);
    CHECK_THROWS_AS(bad_sigma.validate(), DomainError);

    auto neg_sigma = m;
    neg_sigma.sigma = Coefficient::proportional(-0.2);
    CHECK_THROWS_AS(neg_sigma.validate(), DomainError);

    auto unbounded = m;
    unbounded.mu = Coefficient::proportional(0.08);
    unbounded.sigma = Coefficient::constant(0.2);
    CHECK_THROWS_AS(unbounded.validate(), DomainError);

    auto outside = m;
    outside.y0 = -1.0;
    CHECK_THROWS_AS(outside.validate(), DomainError);

    auto bad_rho = m;
    bad_rho.rho = 1.5;
    CHECK_THROWS_AS(bad_rho.validate(), DomainError);

    auto bad_T = m;
    bad_T.T = 0.0;
    CHECK_THROWS_AS(bad_T.validate(), DomainError);

    CHECK_THROWS_AS(simulate(m, settings(0, 10, 1)), DomainError);
}

TEST_CASE("path hash ignores rho only")
{
    auto m = gbm_example_model();
    auto r = m;
    r.rho = 0.9;
    CHECK(m.path_hash() == r.path_hash());
    auto s = m;
    s.y0 = 1.5;
    CHECK(m.path_hash() != s.path_hash());
}

TEST_CASE("clamping beyond the threshold rejects the batch")
{
    BasisRiskModel m;
    m.mu = Coefficient::constant(0.05);
    m.sigma = Coefficient::constant(0.2);
    m.b = Coefficient::constant(0.0);
    m.a = Coefficient::constant(3.0);
    m.y0 = 0.05;
    m.E = {0.0, std::numeric_limits<double>::infinity()};
    CHECK_THROWS_AS(simulate(m, settings(1000, 50, 2)), NumericalError);
}

TEST_CASE("path batch CSV round trip")
{
    auto batch = simulate(gbm_example_model(), settings(257, 16, 2024));
    auto dir = std::filesystem::temp_directory_path() / "tiltprice_market_test";
    std::filesystem::create_directories(dir);
    auto path = dir / "batch.csv";
    write_batch_csv(batch, path);

    std::ifstream in(path);
    std::string first, header;
    std::getline(in, first);
    std::getline(in, header);
    CHECK(first.rfind("# tiltprice-pathbatch v1 seed=2024 n_paths=257 n_steps=16", 0) == 0);
    CHECK(header == "y_T,I2,IW");

    auto back = read_batch_csv(path);
    CHECK(back.y_T == batch.y_T);
    CHECK(back.I2 == batch.I2);
    CHECK(back.IW == batch.IW);
    CHECK(back.seed == batch.seed);
    CHECK(back.n_steps == batch.n_steps);
    CHECK(back.model_hash == batch.model_hash);
    CHECK(back.measure == batch.measure);

    std::ofstream bad(dir / "bad.csv");
    bad << "y_T,I2,IW\n1,2,3\n";
    bad.close();
    CHECK_THROWS_AS(read_batch_csv(dir / "bad.csv"), ConfigError);
    std::filesystem::remove_all(dir);
}
