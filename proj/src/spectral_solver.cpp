#include "fujita/spectral_solver.hpp"

#include "fujita/critical_exponent.hpp"
#include "fujita/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace fujita {

using nlohmann::json;

void Grid::validate() const {
    if (n != 1 && n != 2) throw ValidationError("grid dimension must be 1 or 2");
    if (N < 8 || N % 2 != 0) throw ValidationError("grid N must be even and >= 8");
    if (!(L > 0) || !std::isfinite(L)) throw ValidationError("box length must be positive");
}

bool Grid::retained(int flat) const {
    const int cut = N / 3;
    if (n == 1) return std::abs(wavenumber(flat)) <= cut;
    return std::abs(wavenumber(flat / N)) <= cut && std::abs(wavenumber(flat % N)) <= cut;
}

std::vector<double> Grid::frequency(int flat) const {
    const double base = 2 * std::numbers::pi / L;
    if (n == 1) return {base * wavenumber(flat)};
    return {base * wavenumber(flat / N), base * wavenumber(flat % N)};
}

std::vector<double> Grid::position(int flat) const {
    const double h = dx();
    if (n == 1) return {-L / 2 + h * flat};
    return {-L / 2 + h * (flat / N), -L / 2 + h * (flat % N)};
}

DataProfile DataProfile::gaussian(double width) {
    if (!(width > 0)) throw ValidationError("profile width must be positive");
    return DataProfile{Kind::gaussian, width, {}};
}

DataProfile DataProfile::bump(double width) {
    if (!(width > 0)) throw ValidationError("profile width must be positive");
    return DataProfile{Kind::bump, width, {}};
}

DataProfile DataProfile::custom(std::vector<double> table) {
    return DataProfile{Kind::custom, 0.0, std::move(table)};
}

std::vector<double> sample_profile(const DataProfile& profile, const Grid& grid) {
    grid.validate();
    const int total = grid.total();
    std::vector<double> out(total, 0.0);
    if (profile.kind == DataProfile::Kind::custom) {
        if (static_cast<int>(profile.table.size()) != total)
            throw ValidationError("custom profile has " + std::to_string(profile.table.size()) +
                                  " samples, grid needs " + std::to_string(total));
        for (double v : profile.table)
            if (!std::isfinite(v)) throw ValidationError("custom profile contains non-finite samples");
        out = profile.table;
    } else {
        const double w = profile.width;
        auto value = [&](double r2) {
            if (profile.kind == DataProfile::Kind::gaussian)
                return std::pow(2 * std::numbers::pi * w * w, -grid.n / 2.0) * std::exp(-r2 / (2 * w * w));
            const double s = 1.0 - r2 / (w * w);
            return s > 0 ? s * s * s * s : 0.0;
        };
        for (int i = 0; i < total; ++i) {
            const auto x = grid.position(i);
            double r2 = 0;
            for (double c : x) r2 += c * c;
            out[i] = value(r2);
        }
        const double edge = value(grid.L * grid.L / 4);
        if (edge >= 1e-12 * value(0.0))
            throw ValidationError("profile too wide for the box: edge/peak ratio " +
                                  std::to_string(edge / value(0.0)) + " >= 1e-12");
    }
    return out;
}

std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> exp_and_phi(const Eigen::MatrixXcd& A, double dt) {
    const auto m = A.rows();
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(2 * m, 2 * m);
    M.topLeftCorner(m, m) = A * dt;
    M.topRightCorner(m, m) = Eigen::MatrixXcd::Identity(m, m) * dt;
    const Eigen::MatrixXcd X = M.exp();
    return {X.topLeftCorner(m, m), X.topRightCorner(m, m)};
}

ModePropagator::ModePropagator(const EvolutionOperator& op, const Grid& grid, double dt)
    : dt_(dt), m_(op.m()), grid_(grid) {
    grid.validate();
    if (op.n() != grid.n) throw ValidationError("operator dimension does not match the grid");
    if (!(dt > 0) || !std::isfinite(dt)) throw ValidationError("time step must be positive");
    for (int i = 0; i < grid.total(); ++i) {
        if (!grid.retained(i)) continue;
        const auto xi = grid.frequency(i);
        auto [E, Phi] = exp_and_phi(companion_matrix(op, xi), dt);
        if (!E.allFinite() || !Phi.allFinite())
            throw NumericalError("mode propagator overflowed; reduce dt or the grid resolution");
        modes_.push_back(i);
        E_.push_back(std::move(E));
        phi_.push_back(Phi.col(m_ - 1));
    }
}

SimState init_state(const EvolutionOperator& op, const Grid& grid, const DataProfile& profile, double amplitude) {
    if (!std::isfinite(amplitude)) throw ValidationError("amplitude must be finite");
    if (op.n() != grid.n) throw ValidationError("operator dimension does not match the grid");
    const auto f = sample_profile(profile, grid);
    std::vector<Complex> phys(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) phys[i] = amplitude * f[i];
    Fft fft(grid.n, grid.N);
    std::vector<Complex> hat;
    fft.forward(phys, hat);
    for (int i = 0; i < grid.total(); ++i)
        if (!grid.retained(i)) hat[i] = 0.0;
    SimState s;
    s.grid = grid;
    s.layers.assign(op.m(), std::vector<Complex>(grid.total(), Complex(0.0)));
    s.layers[op.m() - 1] = std::move(hat);
    return s;
}

std::vector<double> physical_layer(const SimState& state, int j, Fft& fft, double* imag_ratio) {
    std::vector<Complex> phys;
    fft.inverse(state.layers.at(j), phys);
    std::vector<double> out(phys.size());
    double re = 0, im = 0;
    for (std::size_t i = 0; i < phys.size(); ++i) {
        out[i] = phys[i].real();
        re = std::max(re, std::abs(phys[i].real()));
        im = std::max(im, std::abs(phys[i].imag()));
    }
    if (imag_ratio) *imag_ratio = re > 0 ? im / re : (im > 0 ? std::numeric_limits<double>::infinity() : 0.0);
    return out;
}

namespace {

// out[k] = E v (+ phi * src) for the retained mode with index k.
void apply_mode(const ModePropagator& prop, std::size_t k, const SimState& in, Complex src, Complex* out) {
    const int m = prop.m();
    const int idx = prop.modes()[k];
    const auto& E = prop.E(k);
    const auto& phi = prop.phi(k);
    for (int a = 0; a < m; ++a) {
        Complex acc = phi(a) * src;
        for (int b = 0; b < m; ++b) acc += E(a, b) * in.layers[b][idx];
        out[a] = acc;
    }
}

void check_grid(const SimState& state, const ModePropagator& prop) {
    if (state.grid.n != prop.grid().n || state.grid.N != prop.grid().N || state.grid.L != prop.grid().L ||
        state.m() != prop.m())
        throw ValidationError("propagator was built for a different grid or operator");
}

std::vector<Complex> source_hat(const SimState& s, const SourceTerm& src, double t, Fft& fft) {
    const Grid& g = s.grid;
    const int total = g.total();
    std::vector<Complex> phys(total, Complex(0.0));
    if (src.nonlinearity) {
        const auto w = physical_layer(s, src.ell, fft);
        for (int i = 0; i < total; ++i) phys[i] = eval_F(*src.nonlinearity, w[i]);
    }
    if (src.forcing) {
        for (int i = 0; i < total; ++i) {
            const auto x = g.position(i);
            phys[i] += src.forcing(t, x);
        }
    }
    for (const auto& v : phys)
        if (!std::isfinite(v.real())) throw BlowupDetected(s.t, "non-finite source at t = " + std::to_string(s.t));
    std::vector<Complex> hat;
    fft.forward(phys, hat);
    for (int i = 0; i < total; ++i)
        if (!g.retained(i)) hat[i] = 0.0;
    return hat;
}

}  // namespace

SimState linear_step(const SimState& state, const ModePropagator& prop) {
    check_grid(state, prop);
    SimState next = state;
    next.t = state.t + prop.dt();
    std::vector<Complex> buf(prop.m());
    for (std::size_t k = 0; k < prop.modes().size(); ++k) {
        apply_mode(prop, k, state, 0.0, buf.data());
        for (int a = 0; a < prop.m(); ++a) next.layers[a][prop.modes()[k]] = buf[a];
    }
    return next;
}

SimState nonlinear_step(const SimState& state, const ModePropagator& prop, const SourceTerm& source, Fft& fft) {
    check_grid(state, prop);
    if (source.ell < 0 || source.ell >= state.m()) throw ValidationError("ell outside 0..m-1");
    if (!source.nonlinearity && !source.forcing) return linear_step(state, prop);

    const int m = prop.m();
    const auto& modes = prop.modes();
    const auto n0 = source_hat(state, source, state.t, fft);

    SimState pred = state;
    pred.t = state.t + prop.dt();
    std::vector<Complex> buf(m);
    for (std::size_t k = 0; k < modes.size(); ++k) {
        apply_mode(prop, k, state, n0[modes[k]], buf.data());
        for (int a = 0; a < m; ++a) pred.layers[a][modes[k]] = buf[a];
    }
    const auto n1 = source_hat(pred, source, pred.t, fft);

    SimState next = pred;
    for (std::size_t k = 0; k < modes.size(); ++k) {
        const int idx = modes[k];
        apply_mode(prop, k, state, 0.5 * (n0[idx] + n1[idx]), buf.data());
        for (int a = 0; a < m; ++a) {
            if (!std::isfinite(buf[a].real()) || !std::isfinite(buf[a].imag()))
                throw BlowupDetected(state.t, "non-finite mode at t = " + std::to_string(next.t));
            next.layers[a][idx] = buf[a];
        }
    }
    return next;
}

SimState nonlinear_step(const SimState& state, const ModePropagator& prop, const NonlinearitySpec& nl, Fft& fft) {
    SourceTerm src;
    src.ell = nl.ell;
    src.nonlinearity = nl;
    return nonlinear_step(state, prop, src, fft);
}

void RunConfig::validate() const {
    grid.validate();
    if (!(dt > 0) || !std::isfinite(dt)) throw ValidationError("dt must be positive");
    if (!(T > 0) || !std::isfinite(T)) throw ValidationError("T must be positive");
    const double steps = std::round(T / dt);
    if (steps < 1 || std::abs(steps * dt - T) > 1e-9 * T) throw ValidationError("T must be a multiple of dt");
    if (cadence < 1) throw ValidationError("diagnostic cadence must be >= 1");
    if (!(blowup_factor > 1)) throw ValidationError("blow-up factor must exceed 1");
    if (nonlinearity && !(nonlinearity->p >= 1)) throw ValidationError("nonlinearity exponent p must be >= 1");
    if (weight_exponent && !(*weight_exponent >= 1)) throw ValidationError("weight exponent must be >= 1");
}

std::string outcome_name(RunReport::Outcome o) {
    switch (o) {
        case RunReport::Outcome::completed: return "completed";
        case RunReport::Outcome::blowup_detected: return "blowup_detected";
        case RunReport::Outcome::aborted: return "aborted";
    }
    return "aborted";
}

double lq_norm(std::span<const double> field, double q, double cell_volume) {
    if (std::isinf(q)) {
        double mx = 0;
        for (double v : field) mx = std::max(mx, std::abs(v));
        return mx;
    }
    double acc = 0;
    for (double v : field) acc += std::pow(std::abs(v), q);
    return std::pow(acc * cell_volume, 1.0 / q);
}

double sign_functional(const EvolutionOperator& op, int ell, std::span<const double> data, double cell_volume) {
    double mass = 0;
    for (double v : data) mass += v;
    mass *= cell_volume;
    double total = 0;
    for (int j = std::max(ell, 0); j <= op.m() - 1; ++j) {
        const double c = op.zero_order_coeff(j + 1);
        if (c == 0.0) continue;
        if (j == op.m() - 1) total += c * mass;  // u_j = 0 below the data slot
    }
    return total;
}

RunReport run(const EvolutionOperator& op, const RunConfig& config) {
    config.validate();
    if (op.n() != config.grid.n) throw ValidationError("operator dimension does not match the grid");
    if (config.ell < 0 || config.ell >= op.m()) throw ValidationError("ell outside 0..m-1");
    if (config.nonlinearity && config.nonlinearity->ell != config.ell)
        throw ValidationError("nonlinearity ell disagrees with the run ell");

    const Grid& grid = config.grid;
    const long steps = std::lround(config.T / config.dt);
    const double p = config.weight_exponent.value_or(config.nonlinearity ? config.nonlinearity->p : 2.0);
    const int ell = config.ell;

    RunReport report;
    report.dt = config.dt;
    report.weight_exponent = p;
    report.ell = ell;
    report.grid = grid;

    Fft fft(grid.n, grid.N);
    const ModePropagator prop(op, grid, config.dt);
    report.retained_modes = prop.modes().size();
    report.dealiased_modes = grid.total() - prop.modes().size();

    SimState state = init_state(op, grid, config.profile, config.amplitude);
    report.data = physical_layer(state, op.m() - 1, fft);
    report.sign_functional = sign_functional(op, ell, report.data, grid.cell_volume());

    const auto ce = critical_exponent(op, ell);
    if (ce.eta_bar && ce.eta_bar->is_finite() && ce.eta_bar->value() > 0) {
        report.box_horizon = std::pow(grid.L / (2 * std::numbers::pi), ce.eta_bar->to_double());
        report.box_caveat = "periodic box: whole-space decay laws apply only for t below about " +
                            std::to_string(*report.box_horizon) + " = (L/2pi)^eta_bar";
    } else {
        report.box_caveat = "periodic box: no parabolic scaling horizon; zero-mode dynamics of the torus apply";
    }

    double ref = 0;
    for (double v : report.data) ref = std::max(ref, std::abs(v));
    if (ref == 0) ref = 1.0;
    const double threshold = config.blowup_factor * ref;

    SourceTerm source;
    source.ell = ell;
    source.nonlinearity = config.nonlinearity;
    source.forcing = config.forcing;

    double running = 0;
    auto diagnose = [&](const SimState& s) {
        SeriesRow row;
        row.t = s.t;
        double weighted = 0;
        for (int k = 0; k <= ell; ++k) {
            double ratio = 0;
            const auto f = physical_layer(s, k, fft, &ratio);
            report.max_imag_ratio = std::max(report.max_imag_ratio, ratio);
            const double vol = grid.cell_volume();
            std::array<double, 4> nq{lq_norm(f, 1, vol), lq_norm(f, 2, vol), lq_norm(f, p, vol),
                                     lq_norm(f, std::numeric_limits<double>::infinity(), vol)};
            row.norms.push_back(nq);
            weighted += std::pow(1 + s.t, 1 / p - (ell - k)) * (nq[2] + nq[3]);
        }
        running = std::max(running, weighted);
        row.x_norm = running;
        report.series.push_back(std::move(row));
    };
    auto record = [&](const SimState& s) {
        if (!config.record_fields) return;
        report.frame_times.push_back(s.t);
        report.frames.push_back(physical_layer(s, ell, fft));
    };

    diagnose(state);
    record(state);
    try {
        for (long step = 1; step <= steps; ++step) {
            SimState next = nonlinear_step(state, prop, source, fft);
            next.t = step * config.dt;
            const auto u = physical_layer(next, 0, fft);
            double sup = 0;
            bool finite = true;
            for (double v : u) {
                if (!std::isfinite(v)) finite = false;
                sup = std::max(sup, std::abs(v));
            }
            if (!finite) throw BlowupDetected(state.t, "non-finite field at t = " + std::to_string(next.t));
            if (sup > threshold)
                throw BlowupDetected(next.t, "sup norm " + std::to_string(sup) + " exceeds threshold " +
                                                 std::to_string(threshold));
            state = std::move(next);
            report.steps = step;
            if (step % config.cadence == 0 || step == steps) diagnose(state);
            record(state);
        }
    } catch (const BlowupDetected& b) {
        report.outcome = RunReport::Outcome::blowup_detected;
        report.blowup_time = b.time();
        report.message = b.what();
    } catch (const NumericalError& e) {
        report.outcome = RunReport::Outcome::aborted;
        report.message = e.what();
    }
    return report;
}

json to_json(const RunReport& r) {
    json series = json::array();
    for (const auto& row : r.series) {
        json norms = json::array();
        for (const auto& nq : row.norms) norms.push_back({nq[0], nq[1], nq[2], nq[3]});
        series.push_back({{"t", row.t}, {"norms", norms}, {"x_norm", row.x_norm}});
    }
    return json{{"outcome", outcome_name(r.outcome)},
                {"blowup_time", r.blowup_time ? json(*r.blowup_time) : json(nullptr)},
                {"message", r.message},
                {"steps", r.steps},
                {"dt", r.dt},
                {"ell", r.ell},
                {"weight_exponent", r.weight_exponent},
                {"grid", {{"n", r.grid.n}, {"N", r.grid.N}, {"L", r.grid.L}}},
                {"retained_modes", r.retained_modes},
                {"dealiased_modes", r.dealiased_modes},
                {"max_imag_ratio", r.max_imag_ratio},
                {"sign_functional", r.sign_functional},
                {"box_caveat", r.box_caveat},
                {"box_horizon", r.box_horizon ? json(*r.box_horizon) : json(nullptr)},
                {"x_norm_sup", r.series.empty() ? 0.0 : r.series.back().x_norm},
                {"series", series}};
}

}  // namespace fujita
