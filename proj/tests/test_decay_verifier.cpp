#include "doctest.h"

#include "fujita/critical_exponent.hpp"
#include "fujita/decay_verifier.hpp"
#include "fujita/errors.hpp"

#include <cmath>
#include <numbers>

using namespace fujita;

namespace {

EvolutionOperator heat(int n) { return EvolutionOperator(1, n, {{0, {SpatialTerm::fractional(1, 1.0)}}}); }

EvolutionOperator damped_wave(int n) {
    return EvolutionOperator(2, n, {{0, {SpatialTerm::fractional(1, 1.0)}}, {1, {SpatialTerm::monomial({}, 1.0)}}});
}

// Closed form of ||e^{t Delta} g_w||_{L^2(R)} for the unit-mass gaussian of width w.
double heat_l2(double t, double w) {
    return std::sqrt(std::sqrt(std::numbers::pi / (2 * t + w * w)) / (2 * std::numbers::pi));
}

}  // namespace

TEST_CASE("Plancherel constants") {
    CHECK(plancherel_constant(1) == doctest::Approx(1.0 / std::numbers::pi));
    CHECK(plancherel_constant(2) == doctest::Approx(1.0 / (2 * std::numbers::pi)));
    CHECK(plancherel_constant(3) == doctest::Approx(1.0 / (2 * std::numbers::pi * std::numbers::pi)));
}

TEST_CASE("heat flow L2 norm matches the closed form") {
    const auto times = log_uniform_times(0.1, 1e4, 12);
    const auto curve = l2_decay_curve(heat(1), RadialProfile{1.0}, times);
    for (const auto& [t, v] : curve) CHECK(v == doctest::Approx(heat_l2(t, 1.0)).epsilon(1e-10));
}

TEST_CASE("panel refinement changes the quadrature by less than 1e-8") {
    const auto times = log_uniform_times(1.0, 1e3, 6);
    RadialProfile coarse{1.0}, fine{1.0};
    fine.panel_ratio = std::sqrt(coarse.panel_ratio);
    const auto a = l2_decay_curve(damped_wave(1), coarse, times);
    const auto b = l2_decay_curve(damped_wave(1), fine, times);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i].second / b[i].second - 1) < 1e-8);
}

TEST_CASE("synthetic power law and exponential series") {
    Series power, expo;
    for (const double t : log_uniform_times(10, 1e4, 40)) power.emplace_back(t, 3.0 * std::pow(1 + t, -0.25));
    const auto fit = fit_decay(power, 2.0, {10, 1e4}, -0.25, 0.05);
    CHECK(std::abs(fit.beta_hat + 0.25) < 1e-3);
    CHECK(fit.power_law);
    CHECK(fit.pass);
    CHECK(fit.samples == 40);

    for (int i = 0; i <= 40; ++i) {
        const double t = 1.0 + i * 0.5;
        expo.emplace_back(t, 2.0 * std::exp(-0.7 * t));
    }
    const auto pf = fit_decay(expo, 2.0, {1, 21}, -0.25, 0.05);
    CHECK_FALSE(pf.power_law);
    const auto ef = fit_exponential(expo, {1, 21}, 0.7, 0.05);
    CHECK(ef.rate_hat == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(ef.pass);
    CHECK_FALSE(fit_exponential(expo, {1, 21}, 0.5, 0.05).pass);
}

TEST_CASE("fit needs enough samples in the window") {
    Series s{{1.0, 1.0}, {2.0, 0.5}};
    CHECK_THROWS_AS(fit_decay(s, 2.0, {10, 100}, 0.0, 0.1), ValidationError);
}

TEST_CASE("damped wave shows the diffusion phenomenon in L2") {
    const auto times = log_uniform_times(1e2, 1e4, 30);
    const auto curve = l2_decay_curve(damped_wave(1), RadialProfile{1.0}, times);
    const auto fit = fit_decay(curve, 2.0, {1e2, 1e4}, -0.25, 0.05);
    CHECK(fit.pass);
    CHECK(fit.power_law);
}

TEST_CASE("torus curves agree with whole space below the box horizon") {
    const Grid grid{1, 512, 200.0};
    const std::vector<double> times{1.0, 5.0, 20.0, 50.0};
    const auto torus = torus_decay_curves(heat(1), grid, DataProfile::gaussian(1.0), times, {2.0});
    const auto whole = l2_decay_curve(heat(1), RadialProfile{1.0}, times);
    REQUIRE(torus.size() == 1u);
    for (std::size_t i = 0; i < times.size(); ++i)
        CHECK(torus[0][i].second == doctest::Approx(whole[i].second).epsilon(0.01));
}

TEST_CASE("spectral gap of the damped Klein-Gordon operator") {
    EvolutionOperator kg(2, 1,
                         {{0, {SpatialTerm::fractional(1, 1.0), SpatialTerm::fractional(0, 0.75)}},
                          {1, {SpatialTerm::monomial({}, 2.0)}}});
    CHECK(spectral_gap(kg, 10.0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(spectral_gap(damped_wave(1), 10.0) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("free wave in three dimensions fails the decay hypothesis") {
    EvolutionOperator wave(2, 3, {{0, {SpatialTerm::fractional(1, 1.0)}}});
    const auto pc = critical_exponent(wave, 0).p_c;
    REQUIRE(pc.value() == Rational(2));
    const auto fits = hypothesis_check(wave, 0, pc, {2.0}, RadialProfile{1.0});
    REQUIRE(fits.size() == 1u);
    CHECK_FALSE(fits[0].pass);
    CHECK(std::abs(fits[0].beta_hat) < 0.05);
}

TEST_CASE("structural damping sigma = 2 in three dimensions") {
    // L2 decay follows exp(-t rho^4): (1+t)^{-3/8}, compared against -1/p_c = -3/7
    EvolutionOperator op(2, 3, {{0, {SpatialTerm::fractional(2, 1.0)}}, {1, {SpatialTerm::monomial({}, 1.0)}}});
    const auto pc = critical_exponent(op, 0).p_c;
    Rational expected(7, 3);
    expected.canonicalize();
    REQUIRE(pc.value() == expected);
    const auto fits = hypothesis_check(op, 0, pc, {2.0}, RadialProfile{1.0}, {1e2, 1e4});
    CHECK(fits[0].beta_hat == doctest::Approx(-0.375).epsilon(0.03));
    CHECK(fits[0].pass == (fits[0].beta_hat <= -3.0 / 7.0 + 0.05));
    CHECK(fits[0].target == doctest::Approx(-3.0 / 7.0));
}

TEST_CASE("whole-space check only handles q = 2") {
    const auto pc = critical_exponent(damped_wave(1), 0).p_c;
    CHECK_THROWS_AS(hypothesis_check(damped_wave(1), 0, pc, {3.0}, RadialProfile{1.0}), ValidationError);
    EvolutionOperator transport(1, 1, {{0, {SpatialTerm::monomial({1}, 1.0)}}});
    CHECK_THROWS_AS(l2_decay_curve(transport, RadialProfile{1.0}, {1.0}), ValidationError);
}

TEST_CASE("log-uniform times hit both endpoints") {
    const auto t = log_uniform_times(10, 1000, 3);
    REQUIRE(t.size() == 3u);
    CHECK(t[0] == doctest::Approx(10));
    CHECK(t[1] == doctest::Approx(100));
    CHECK(t[2] == doctest::Approx(1000));
}
