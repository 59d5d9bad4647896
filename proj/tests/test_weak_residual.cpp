#include "doctest.h"

#include "fujita/critical_exponent.hpp"
#include "fujita/errors.hpp"
#include "fujita/weak_residual.hpp"

#include <cmath>

using namespace fujita;

namespace {

EvolutionOperator damped_wave() {
    return EvolutionOperator(2, 1, {{0, {SpatialTerm::fractional(1, 1.0)}}, {1, {SpatialTerm::monomial({}, 1.0)}}});
}

RunConfig recorded_config(int N, double dt, double amplitude) {
    RunConfig cfg;
    cfg.grid = Grid{1, N, 32.0};
    cfg.dt = dt;
    cfg.T = 5.0;
    cfg.cadence = 10;
    cfg.profile = DataProfile::gaussian(1.0);
    cfg.amplitude = amplitude;
    cfg.record_fields = true;
    return cfg;
}

}  // namespace

TEST_CASE("default test exponent") {
    const auto op = damped_wave();
    CHECK(default_test_exponent(op, 0, ExtRational(Rational(3))) == 3);
    CHECK(default_test_exponent(op, 0, ExtRational::infinity()) == 2);
    CHECK_THROWS_AS(default_test_exponent(op, 0, ExtRational(Rational(1))), ValidationError);
}

TEST_CASE("test function is identically one near the origin") {
    const TestFunctionSpec tf{4.0, 3, 2.0};
    const std::vector<double> x{0.5};
    const auto d = test_function_time_derivatives(tf, 0.1, x, 3);
    CHECK(d[0] == 1.0);
    CHECK(d[1] == 0.0);
    CHECK(d[2] == 0.0);
    CHECK(d[3] == 0.0);
    const std::vector<double> far{2.1};
    CHECK(test_function_time_derivatives(tf, 0.0, far, 0)[0] == 0.0);
}

TEST_CASE("test function time derivatives match finite differences") {
    const TestFunctionSpec tf{4.0, 3, 2.0};
    const std::vector<double> x{0.7};
    const double t = 2.2, h = 1e-4;
    const auto d = test_function_time_derivatives(tf, t, x, 2);
    const double fp = test_function_time_derivatives(tf, t + h, x, 0)[0];
    const double fm = test_function_time_derivatives(tf, t - h, x, 0)[0];
    CHECK(d[0] > 0.0);
    CHECK(d[0] < 1.0);
    CHECK(d[1] == doctest::Approx((fp - fm) / (2 * h)).epsilon(1e-6));
    CHECK(d[2] == doctest::Approx((fp - 2 * d[0] + fm) / (h * h)).epsilon(1e-4));
}

TEST_CASE("zero data gives a zero residual") {
    const auto rec = run(damped_wave(), recorded_config(64, 0.1, 0.0));
    const auto r = weak_residual(rec, {4.0, 3, 2.0}, damped_wave(), SourceTerm{});
    CHECK(r.residual == 0.0);
    CHECK(r.boundary_term == 0.0);
}

TEST_CASE("linear run satisfies the weak identity and improves under refinement") {
    const auto op = damped_wave();
    const TestFunctionSpec tf{4.0, 3, 2.0};
    const auto coarse = weak_residual(run(op, recorded_config(128, 0.05, 1.0)), tf, op, SourceTerm{});
    const auto fine = weak_residual(run(op, recorded_config(256, 0.025, 1.0)), tf, op, SourceTerm{});
    CHECK(coarse.residual < 1e-3);
    CHECK(fine.residual * 2 < coarse.residual);
    CHECK(coarse.boundary_term < 0.0);
    CHECK(coarse.level_terms.size() == 3u);
    CHECK(coarse.quadrature_error < 1e-2);
}

TEST_CASE("nonlinear run satisfies the weak identity") {
    const auto op = damped_wave();
    auto cfg = recorded_config(128, 0.025, 0.5);
    cfg.nonlinearity = NonlinearitySpec{3.0, MuSpec::iterated_log(0, 2.0), 0};
    SourceTerm src;
    src.nonlinearity = cfg.nonlinearity;
    const auto r = weak_residual(run(op, cfg), {4.0, 3, 2.0}, op, src);
    CHECK(r.rhs > 0.0);
    CHECK(r.residual < 1e-3);
}

TEST_CASE("support and recording errors") {
    const auto op = damped_wave();
    const auto rec = run(op, recorded_config(64, 0.1, 1.0));
    CHECK_THROWS_AS(weak_residual(rec, {5.0, 3, 2.0}, op, SourceTerm{}), ValidationError);
    CHECK_THROWS_AS(weak_residual(rec, {4.0, 3, 0.5}, op, SourceTerm{}), ValidationError);
    auto plain = recorded_config(64, 0.1, 1.0);
    plain.record_fields = false;
    CHECK_THROWS_AS(weak_residual(run(op, plain), {4.0, 3, 2.0}, op, SourceTerm{}), ValidationError);
    CHECK_THROWS_AS(TestFunctionSpec({0.0, 3, 2.0}).validate(), ValidationError);
    CHECK_THROWS_AS(TestFunctionSpec({1.0, 0, 2.0}).validate(), ValidationError);
}
