#include "fujita/decay_verifier.hpp"

#include "fujita/errors.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fujita {

using nlohmann::json;

double RadialProfile::amplitude(double rho) const { return std::exp(-width * width * rho * rho / 2); }

double RadialProfile::cutoff() const { return std::sqrt(40 * std::log(10.0)) / width; }

double plancherel_constant(int n) {
    if (n < 1) throw ValidationError("dimension must be >= 1");
    const double sphere = 2 * std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0);
    return sphere / std::pow(2 * std::numbers::pi, n);
}

Series l2_decay_curve(const EvolutionOperator& op, const RadialProfile& profile, const std::vector<double>& times,
                      int ell) {
    if (!is_radial(op)) throw ValidationError("whole-space L2 curves need a radial operator");
    if (ell < 0 || ell >= op.m()) throw ValidationError("ell outside 0..m-1");
    if (!(profile.width > 0)) throw ValidationError("profile width must be positive");
    if (!(profile.panel_ratio > 1)) throw ValidationError("panel ratio must exceed 1");
    const int n = op.n();
    const int m = op.m();
    const double P = profile.cutoff();
    const double cn = plancherel_constant(n);

    Series out;
    for (double t : times) {
        if (!(t >= 0)) throw ValidationError("times must be non-negative");
        auto integrand = [&](double rho) {
            std::vector<double> xi(n, 0.0);
            xi[0] = rho;
            const Eigen::MatrixXcd E = (companion_matrix(op, xi) * t).exp();
            const double k = std::abs(E(ell, m - 1));
            const double a = profile.amplitude(rho);
            return k * k * a * a * std::pow(rho, n - 1);
        };
        const double rho_lo = 1e-3 * std::min(1.0, 1.0 / std::sqrt(1 + t));
        std::vector<double> edges{0.0, rho_lo};
        while (edges.back() < P) edges.push_back(std::min(P, edges.back() * profile.panel_ratio));
        using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
        // a single-rule pass sizes each panel, so the adaptive pass aims at rel_tol of the total
        std::vector<double> rough(edges.size() - 1);
        double rough_total = 0;
        for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
            rough[i] = std::abs(GK::integrate(integrand, edges[i], edges[i + 1], 0, 0.0));
            rough_total += rough[i];
        }
        double total = 0;
        for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
            if (rough[i] == 0 || rough[i] < 1e-3 * profile.rel_tol * rough_total) {
                total += rough[i];
                continue;
            }
            const double tol = std::min(1e-3, profile.rel_tol * rough_total / rough[i]);
            double err = 0;
            const double v = GK::integrate(integrand, edges[i], edges[i + 1], 10, tol, &err);
            if (!std::isfinite(v)) throw NumericalError("non-finite radial integrand at t = " + std::to_string(t));
            total += v;
        }
        const double tail = integrand(P) * P;
        if (total > 0 && tail > 1e-12 * total)
            throw NumericalError("radial quadrature tail exceeds 1e-12 of the total at t = " + std::to_string(t));
        out.emplace_back(t, std::sqrt(cn * total));
    }
    return out;
}

std::vector<Series> torus_decay_curves(const EvolutionOperator& op, const Grid& grid, const DataProfile& profile,
                                       const std::vector<double>& times, const std::vector<double>& q_list,
                                       int ell) {
    if (ell < 0 || ell >= op.m()) throw ValidationError("ell outside 0..m-1");
    for (double q : q_list)
        if (!(q >= 1)) throw ValidationError("Lebesgue index must be >= 1");
    const SimState s0 = init_state(op, grid, profile, 1.0);
    Fft fft(grid.n, grid.N);
    std::vector<Series> out(q_list.size());
    for (double t : times) {
        if (!(t >= 0)) throw ValidationError("times must be non-negative");
        SimState s = t == 0 ? s0 : linear_step(s0, ModePropagator(op, grid, t));
        const auto f = physical_layer(s, ell, fft);
        for (std::size_t i = 0; i < q_list.size(); ++i)
            out[i].emplace_back(t, lq_norm(f, q_list[i], grid.cell_volume()));
    }
    return out;
}

std::vector<double> log_uniform_times(double t0, double t1, int count) {
    if (!(t0 > 0) || !(t1 > t0) || count < 2) throw ValidationError("need 0 < t0 < t1 and count >= 2");
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i) out[i] = t0 * std::pow(t1 / t0, static_cast<double>(i) / (count - 1));
    return out;
}

namespace {

struct LineFit {
    double slope = 0;
    double rms = 0;
    int samples = 0;
};

LineFit least_squares(const Series& series, std::pair<double, double> window, bool log_time) {
    if (!(window.first < window.second)) throw ValidationError("fit window needs t0 < t1");
    std::vector<double> xs, ys;
    for (const auto& [t, v] : series) {
        if (t < window.first || t > window.second) continue;
        if (!(v > 0)) throw ValidationError("series must be positive on the fit window");
        xs.push_back(log_time ? std::log1p(t) : t);
        ys.push_back(std::log(v));
    }
    if (xs.size() < 10) throw ValidationError("fit needs at least 10 samples in the window, got " +
                                              std::to_string(xs.size()));
    const double nx = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= nx;
    my /= nx;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    LineFit fit;
    fit.slope = sxy / sxx;
    double ss = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (my + fit.slope * (xs[i] - mx));
        ss += r * r;
    }
    fit.rms = std::sqrt(ss / nx);
    fit.samples = static_cast<int>(xs.size());
    return fit;
}

}  // namespace

DecayFit fit_decay(const Series& series, double q, std::pair<double, double> window, double target, double tol) {
    const auto lf = least_squares(series, window, true);
    DecayFit f;
    f.q = q;
    f.t0 = window.first;
    f.t1 = window.second;
    f.samples = lf.samples;
    f.beta_hat = lf.slope;
    f.fit_residual = lf.rms;
    f.power_law = lf.rms < 1e-2;
    f.target = target;
    f.tol = tol;
    f.pass = std::abs(lf.slope - target) <= tol;
    return f;
}

ExponentialFit fit_exponential(const Series& series, std::pair<double, double> window, double target_rate,
                               double rel_tol) {
    const auto lf = least_squares(series, window, false);
    ExponentialFit f;
    f.t0 = window.first;
    f.t1 = window.second;
    f.samples = lf.samples;
    f.rate_hat = -lf.slope;
    f.fit_residual = lf.rms;
    f.target_rate = target_rate;
    f.rel_tol = rel_tol;
    f.pass = std::abs(f.rate_hat - target_rate) <= rel_tol * std::abs(target_rate);
    return f;
}

double spectral_gap(const EvolutionOperator& op, double rho_max, int samples) {
    if (!(rho_max > 0) || samples < 3) throw ValidationError("spectral gap needs rho_max > 0 and >= 3 samples");
    auto g = [&](double rho) {
        std::vector<double> xi(op.n(), 0.0);
        xi[0] = rho;
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(companion_matrix(op, xi), false);
        if (es.info() != Eigen::Success) throw NumericalError("eigenvalue solver failed");
        double mx = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < es.eigenvalues().size(); ++i) mx = std::max(mx, es.eigenvalues()(i).real());
        return -mx;
    };
    int best = 0;
    double best_v = g(0.0);
    const double h = rho_max / (samples - 1);
    for (int i = 1; i < samples; ++i) {
        const double v = g(i * h);
        if (v < best_v) {
            best_v = v;
            best = i;
        }
    }
    // golden-section refinement on the bracketing cells
    double a = std::max(0.0, (best - 1) * h), b = std::min(rho_max, (best + 1) * h);
    const double phi = (std::sqrt(5.0) - 1) / 2;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double gc = g(c), gd = g(d);
    for (int it = 0; it < 80; ++it) {
        if (gc < gd) {
            b = d;
            d = c;
            gd = gc;
            c = b - phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + phi * (b - a);
            gd = g(d);
        }
    }
    return std::min({best_v, gc, gd});
}

namespace {

double power_target(const ExtRational& p_c) {
    if (p_c.is_infinite()) return 0.0;
    return -1.0 / p_c.to_double();
}

void apply_hypothesis_verdict(DecayFit& f) { f.pass = f.beta_hat <= f.target + f.tol; }

}  // namespace

std::vector<DecayFit> hypothesis_check(const EvolutionOperator& op, int ell, const ExtRational& p_c,
                                       const std::vector<double>& q_list, const RadialProfile& profile,
                                       std::pair<double, double> window, double tol) {
    for (double q : q_list)
        if (q != 2.0) throw ValidationError("whole-space mode supports q = 2 only");
    const auto times = log_uniform_times(window.first, window.second, 30);
    const auto curve = l2_decay_curve(op, profile, times, ell);
    std::vector<DecayFit> out;
    for (double q : q_list) {
        auto f = fit_decay(curve, q, window, power_target(p_c), tol);
        apply_hypothesis_verdict(f);
        out.push_back(f);
    }
    return out;
}

std::vector<DecayFit> hypothesis_check(const EvolutionOperator& op, int ell, const ExtRational& p_c,
                                       const std::vector<double>& q_list, const Grid& grid,
                                       const DataProfile& profile, std::pair<double, double> window, double tol) {
    const auto times = log_uniform_times(window.first, window.second, 30);
    const auto curves = torus_decay_curves(op, grid, profile, times, q_list, ell);
    std::vector<DecayFit> out;
    for (std::size_t i = 0; i < q_list.size(); ++i) {
        auto f = fit_decay(curves[i], q_list[i], window, power_target(p_c), tol);
        apply_hypothesis_verdict(f);
        f.caveat = "torus fit: valid only below the box resolution horizon";
        out.push_back(f);
    }
    return out;
}

json to_json(const DecayFit& f) {
    json o{{"q", f.q},
           {"window", {f.t0, f.t1}},
           {"samples", f.samples},
           {"beta_hat", f.beta_hat},
           {"fit_residual", f.fit_residual},
           {"power_law", f.power_law},
           {"target", f.target},
           {"tol", f.tol},
           {"verdict", f.pass ? "pass" : "fail"}};
    if (!f.caveat.empty()) o["caveat"] = f.caveat;
    return o;
}

json to_json(const ExponentialFit& f) {
    return json{{"window", {f.t0, f.t1}},       {"samples", f.samples},
                {"rate_hat", f.rate_hat},       {"fit_residual", f.fit_residual},
                {"target_rate", f.target_rate}, {"rel_tol", f.rel_tol},
                {"verdict", f.pass ? "pass" : "fail"}};
}

}  // namespace fujita
