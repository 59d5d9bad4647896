#include "doctest.h"

#include "fujita/errors.hpp"
#include "fujita/spectral_solver.hpp"

#include <cmath>
#include <numbers>

using namespace fujita;

namespace {

EvolutionOperator damped_wave() {
    return EvolutionOperator(2, 1, {{0, {SpatialTerm::fractional(1, 1.0)}}, {1, {SpatialTerm::monomial({}, 1.0)}}});
}

// d_t^2 + 2 d_t + (-Delta) + 3/4
EvolutionOperator damped_kg() {
    return EvolutionOperator(2, 1,
                             {{0, {SpatialTerm::fractional(1, 1.0), SpatialTerm::fractional(0, 0.75)}},
                              {1, {SpatialTerm::monomial({}, 2.0)}}});
}

// Classical RK4 for y' = A y, used as an independent reference for exp(tA).
Eigen::MatrixXcd rk4_flow(const Eigen::MatrixXcd& A, double t, int steps) {
    const double h = t / steps;
    Eigen::MatrixXcd Y = Eigen::MatrixXcd::Identity(A.rows(), A.cols());
    for (int i = 0; i < steps; ++i) {
        const Eigen::MatrixXcd k1 = A * Y;
        const Eigen::MatrixXcd k2 = A * (Y + 0.5 * h * k1);
        const Eigen::MatrixXcd k3 = A * (Y + 0.5 * h * k2);
        const Eigen::MatrixXcd k4 = A * (Y + h * k3);
        Y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return Y;
}

double l2_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

// u* = t e^{-t} cos x solves u_tt + u_t - u_xx = u^2 + g with g below, u(0) = 0, u_t(0) = cos x.
double manufactured_error(double dt) {
    Grid grid{1, 32, 2 * std::numbers::pi};
    std::vector<double> f(grid.N);
    for (int i = 0; i < grid.N; ++i) f[i] = std::cos(grid.position(i)[0]);
    const auto op = damped_wave();
    SourceTerm src;
    src.ell = 0;
    src.nonlinearity = NonlinearitySpec{2.0, MuSpec::constant(), 0};
    src.forcing = [](double t, std::span<const double> x) {
        const double c = std::cos(x[0]);
        const double u = t * std::exp(-t) * c;
        return (t - 1) * std::exp(-t) * c - u * u;
    };
    ModePropagator prop(op, grid, dt);
    Fft fft(1, grid.N);
    SimState s = init_state(op, grid, DataProfile::custom(f), 1.0);
    const int steps = static_cast<int>(std::lround(1.0 / dt));
    for (int i = 0; i < steps; ++i) s = nonlinear_step(s, prop, src, fft);
    const auto u = physical_layer(s, 0, fft);
    std::vector<double> exact(grid.N);
    for (int i = 0; i < grid.N; ++i) exact[i] = std::exp(-1.0) * f[i];
    return l2_diff(u, exact) / l2_diff(exact, std::vector<double>(grid.N, 0.0));
}

}  // namespace

TEST_CASE("exp_and_phi matches an RK4 flow and satisfies Phi A + I = E") {
    Eigen::MatrixXcd A(3, 3);
    A << 0, 1, 0, 0, 0, 1, Complex(-2, 0.5), -3, Complex(-1, 0.2);
    const double dt = 0.3;
    const auto [E, Phi] = exp_and_phi(A, dt);
    CHECK((E - rk4_flow(A, dt, 2000)).norm() < 1e-12);
    const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(3, 3);
    CHECK((Phi * A + I - E).norm() < 1e-13);

    // a singular A is fine: Phi(0 matrix) = dt I
    const auto [E0, Phi0] = exp_and_phi(Eigen::MatrixXcd::Zero(2, 2), dt);
    CHECK((E0 - Eigen::MatrixXcd::Identity(2, 2)).norm() < 1e-15);
    CHECK((Phi0 - dt * Eigen::MatrixXcd::Identity(2, 2)).norm() < 1e-15);
}

TEST_CASE("damped Klein-Gordon propagator against the closed form") {
    const auto op = damped_kg();
    const double t = 1.7;
    {
        // xi = 0: roots -1/2, -3/2, so u = e^{-t/2} - e^{-3t/2} for u(0)=0, u'(0)=1
        const auto [E, Phi] = exp_and_phi(companion_matrix(op, std::vector<double>{0.0}), t);
        CHECK(std::abs(E(0, 1) - (std::exp(-0.5 * t) - std::exp(-1.5 * t))) < 1e-13);
    }
    {
        // xi = 1: roots -1 +- i sqrt(3/4)
        const double w = std::sqrt(0.75);
        const auto [E, Phi] = exp_and_phi(companion_matrix(op, std::vector<double>{1.0}), t);
        CHECK(std::abs(E(0, 1) - std::exp(-t) * std::sin(w * t) / w) < 1e-13);
        CHECK(std::abs(E(1, 1) - std::exp(-t) * (std::cos(w * t) - std::sin(w * t) / w)) < 1e-13);
    }
}

TEST_CASE("semigroup property of the stepped propagator") {
    const auto op = damped_wave();
    const Grid grid{1, 64, 20.0};
    const auto s0 = init_state(op, grid, DataProfile::gaussian(1.0), 1.0);
    ModePropagator p1(op, grid, 0.05), p2(op, grid, 0.1);
    const auto a = linear_step(linear_step(s0, p1), p1);
    const auto b = linear_step(s0, p2);
    Fft fft(1, grid.N);
    for (int j = 0; j < 2; ++j) {
        const auto ua = physical_layer(a, j, fft);
        const auto ub = physical_layer(b, j, fft);
        CHECK(l2_diff(ua, ub) < 1e-12);
    }
    double ratio = 1.0;
    physical_layer(a, 0, fft, &ratio);
    CHECK(ratio < 1e-12);
}

TEST_CASE("dealiasing leaves exact zeros outside the mask") {
    const auto op = damped_wave();
    const Grid grid{1, 48, 16.0};
    ModePropagator prop(op, grid, 0.05);
    Fft fft(1, grid.N);
    auto s = init_state(op, grid, DataProfile::gaussian(0.5), 2.0);
    const NonlinearitySpec nl{3.0, MuSpec::iterated_log(0, 2.0), 0};
    for (int i = 0; i < 5; ++i) s = nonlinear_step(s, prop, nl, fft);
    int zeros = 0;
    for (int i = 0; i < grid.total(); ++i)
        if (!grid.retained(i))
            for (const auto& layer : s.layers) {
                CHECK(layer[i] == Complex(0.0, 0.0));
                ++zeros;
            }
    CHECK(zeros > 0);
    CHECK(prop.modes().size() == 33u);  // |k| <= 16
}

TEST_CASE("two-dimensional mask") {
    const Grid grid{2, 12, 6.0};
    int kept = 0;
    for (int i = 0; i < grid.total(); ++i) kept += grid.retained(i);
    CHECK(kept == 81);  // (2*4+1)^2
}

TEST_CASE("manufactured semilinear problem converges at second order") {
    const double e1 = manufactured_error(0.1);
    const double e2 = manufactured_error(0.05);
    const double e3 = manufactured_error(0.025);
    CHECK(e3 < 1e-3);
    CHECK(std::log2(e1 / e2) >= 1.9);
    CHECK(std::log2(e2 / e3) >= 1.9);
}

TEST_CASE("blow-up time of a spatially uniform problem matches an ODE oracle") {
    // u'' + u' = u^2, u(0) = 0, u'(0) = a; the spectral run only has the zero mode
    const double a = 20.0;
    const double threshold = 1e6 * a;
    double u = 0, v = a, t = 0;
    const double h = 1e-5;
    auto fu = [](double, double vv) { return vv; };
    auto fv = [](double uu, double vv) { return uu * uu - vv; };
    while (std::abs(u) <= threshold) {
        const double k1u = fu(u, v), k1v = fv(u, v);
        const double k2u = fu(u + h / 2 * k1u, v + h / 2 * k1v), k2v = fv(u + h / 2 * k1u, v + h / 2 * k1v);
        const double k3u = fu(u + h / 2 * k2u, v + h / 2 * k2v), k3v = fv(u + h / 2 * k2u, v + h / 2 * k2v);
        const double k4u = fu(u + h * k3u, v + h * k3v), k4v = fv(u + h * k3u, v + h * k3v);
        u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
        v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
        t += h;
    }

    RunConfig cfg;
    cfg.grid = Grid{1, 16, 8.0};
    cfg.dt = 0.001;
    cfg.T = 5.0;
    cfg.cadence = 100;
    cfg.profile = DataProfile::custom(std::vector<double>(16, 1.0));
    cfg.amplitude = a;
    cfg.nonlinearity = NonlinearitySpec{2.0, MuSpec::constant(), 0};
    const auto rep = run(damped_wave(), cfg);
    REQUIRE(rep.outcome == RunReport::Outcome::blowup_detected);
    REQUIRE(rep.blowup_time);
    CHECK(*rep.blowup_time == doctest::Approx(t).epsilon(0.01));
}

TEST_CASE("small data run completes with bounded diagnostics") {
    RunConfig cfg;
    cfg.grid = Grid{1, 128, 64.0};
    cfg.dt = 0.05;
    cfg.T = 5.0;
    cfg.cadence = 10;
    cfg.profile = DataProfile::gaussian(1.0);
    cfg.amplitude = 0.1;
    cfg.nonlinearity = NonlinearitySpec{3.0, MuSpec::iterated_log(0, 2.0), 0};
    const auto rep = run(damped_wave(), cfg);
    CHECK(rep.outcome == RunReport::Outcome::completed);
    CHECK(rep.steps == 100);
    CHECK(rep.series.size() == 11u);
    CHECK(rep.series.back().t == doctest::Approx(5.0));
    CHECK(rep.max_imag_ratio < 1e-10);
    CHECK(rep.sign_functional == doctest::Approx(0.1).epsilon(1e-6));
    for (std::size_t i = 1; i < rep.series.size(); ++i) CHECK(rep.series[i].x_norm >= rep.series[i - 1].x_norm);
    // the L^1 mass of u_t = f at t = 0
    CHECK(rep.series.front().norms[0][0] == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("input errors are reported") {
    const auto op = damped_wave();
    CHECK_THROWS_AS(init_state(op, Grid{1, 64, 4.0}, DataProfile::gaussian(1.0), 1.0), ValidationError);
    CHECK_THROWS_AS(init_state(op, Grid{1, 8, 4.0}, DataProfile::custom({1.0, 2.0}), 1.0), ValidationError);
    CHECK_THROWS_AS(init_state(op, Grid{1, 1, 4.0}, DataProfile::gaussian(0.1), 1.0), ValidationError);

    RunConfig cfg;
    cfg.grid = Grid{1, 64, 20.0};
    cfg.dt = 0.03;
    cfg.T = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.dt = 0.05;
    cfg.ell = 2;
    CHECK_THROWS_AS(run(op, cfg), ValidationError);
}

TEST_CASE("norms") {
    const std::vector<double> f{1.0, -2.0, 2.0};
    CHECK(lq_norm(f, 1, 0.5) == doctest::Approx(2.5));
    CHECK(lq_norm(f, 2, 0.5) == doctest::Approx(std::sqrt(4.5)));
    CHECK(lq_norm(f, std::numeric_limits<double>::infinity(), 0.5) == 2.0);
}
