#include "fujita/weak_residual.hpp"

#include "fujita/errors.hpp"
#include "fujita/fft.hpp"

#include <algorithm>
#include <cmath>

namespace fujita {

namespace {

using Jet = std::vector<double>;

Jet div(const Jet& a, const Jet& b) {
    Jet c(a.size(), 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
        double acc = a[k];
        for (std::size_t i = 1; i <= k; ++i) acc -= b[i] * c[k - i];
        c[k] = acc / b[0];
    }
    return c;
}

Jet jexp(const Jet& a) {
    Jet b(a.size(), 0.0);
    b[0] = std::exp(a[0]);
    for (std::size_t k = 1; k < b.size(); ++k) {
        double acc = 0;
        for (std::size_t j = 1; j <= k; ++j) acc += static_cast<double>(j) * a[j] * b[k - j];
        b[k] = acc / static_cast<double>(k);
    }
    return b;
}

Jet jpow(const Jet& a, int q) {
    Jet b(a.size(), 0.0);
    b[0] = std::pow(a[0], q);
    for (std::size_t k = 1; k < b.size(); ++k) {
        double acc = 0;
        for (std::size_t j = 1; j <= k; ++j)
            acc += (static_cast<double>(q) * j - static_cast<double>(k - j)) * a[j] * b[k - j];
        b[k] = acc / (static_cast<double>(k) * a[0]);
    }
    return b;
}

// Taylor coefficients in t of chi(s(t)) where s has jet [s0, ds, 0, ...].
Jet chi_jet(double s0, double ds, int order) {
    Jet out(order + 1, 0.0);
    const double r0 = 2 * s0 - 1;
    if (r0 <= 2e-3) {
        out[0] = 1.0;
        return out;
    }
    if (r0 >= 1 - 2e-3) return out;
    Jet r(order + 1, 0.0), one(order + 1, 0.0);
    r[0] = r0;
    if (order >= 1) r[1] = 2 * ds;
    one[0] = 1.0;
    Jet omr = one;
    for (std::size_t k = 0; k < omr.size(); ++k) omr[k] -= r[k];
    Jet ea = div(one, omr), eb = div(one, r);
    for (auto& v : ea) v = -v;
    for (auto& v : eb) v = -v;
    const Jet a = jexp(ea), b = jexp(eb);
    Jet sum = a;
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += b[k];
    return div(a, sum);
}

}  // namespace

void TestFunctionSpec::validate() const {
    if (!(R > 0) || !std::isfinite(R)) throw ValidationError("test function scale R must be positive");
    if (q < 1) throw ValidationError("test function exponent q must be >= 1");
    if (!(eta_bar > 0) || !std::isfinite(eta_bar)) throw ValidationError("test function eta_bar must be positive");
}

int default_test_exponent(const EvolutionOperator& op, int ell, const ExtRational& p_c) {
    Rational worst(0);
    for (int j : order_set_J(op)) {
        Rational v = op.max_order(j);
        if (j > ell) v += j - ell;
        worst = std::max(worst, v);
    }
    Rational conj(1);
    if (p_c.is_finite()) {
        if (p_c.value() <= 1) throw ValidationError("default test exponent needs p_c > 1");
        conj = p_c.value() / (p_c.value() - 1);
    }
    const Rational q = worst * conj;
    mpz_class c;
    mpz_cdiv_q(c.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return std::max(1, static_cast<int>(c.get_si()));
}

std::vector<double> test_function_time_derivatives(const TestFunctionSpec& tf, double t, std::span<const double> x,
                                                   int order) {
    double r2 = 0;
    for (double c : x) r2 += c * c;
    const double s0 = (t + std::pow(std::sqrt(r2), tf.eta_bar)) / tf.R;
    const Jet g = jpow(chi_jet(s0, 1.0 / tf.R, order), tf.q);
    std::vector<double> out(order + 1);
    double fact = 1;
    for (int k = 0; k <= order; ++k) {
        if (k > 0) fact *= k;
        out[k] = g[k] * fact;
    }
    if (g[0] == 0.0) std::fill(out.begin(), out.end(), 0.0);
    return out;
}

ResidualReport weak_residual(const RunReport& rec, const TestFunctionSpec& tf, const EvolutionOperator& op,
                             const SourceTerm& source) {
    tf.validate();
    const int m = op.m();
    const int ell = source.ell;
    if (ell < 0 || ell >= m) throw ValidationError("ell outside 0..m-1");
    if (rec.ell != ell) throw ValidationError("recorded run used a different ell");
    const Grid& grid = rec.grid;
    if (rec.frames.size() < 3 || rec.frames.size() != rec.frame_times.size())
        throw ValidationError("run has no recorded fields; enable field recording");
    const double t_end = rec.frame_times.back();
    if (rec.frame_times.front() != 0.0) throw ValidationError("recorded window must start at t = 0");
    if (tf.R >= t_end) throw ValidationError("test function support [0, R) exceeds the recorded window");
    if (std::pow(tf.R, 1.0 / tf.eta_bar) >= grid.L / 2)
        throw ValidationError("test function spatial support exceeds the box");

    const int total = grid.total();
    const std::size_t nt = rec.frames.size();
    const double vol = grid.cell_volume();
    const int K = m - ell;

    std::vector<std::vector<double>> pos(total);
    for (int i = 0; i < total; ++i) pos[i] = grid.position(i);

    // D[k][frame][x] = d_t^{(k - ell)} psi, k = 0..m; negative orders by backward quadrature.
    std::vector<std::vector<std::vector<double>>> D(m + 1, std::vector<std::vector<double>>(nt));
    for (std::size_t f = 0; f < nt; ++f) {
        for (int k = 0; k <= m; ++k) D[k][f].assign(total, 0.0);
        for (int i = 0; i < total; ++i) {
            const auto d = test_function_time_derivatives(tf, rec.frame_times[f], pos[i], K);
            for (int o = 0; o <= K; ++o) D[ell + o][f][i] = d[o];
        }
    }
    for (int k = ell - 1; k >= 0; --k) {
        D[k][nt - 1].assign(total, 0.0);
        for (std::size_t f = nt - 1; f-- > 0;) {
            const double h = rec.frame_times[f + 1] - rec.frame_times[f];
            for (int i = 0; i < total; ++i)
                D[k][f][i] = D[k][f + 1][i] - 0.5 * h * (D[k + 1][f][i] + D[k + 1][f + 1][i]);
        }
    }

    // trapezoid weights on the full frame set and on every second frame
    std::vector<double> w_full(nt, 0.0), w_half(nt, 0.0);
    for (std::size_t f = 0; f + 1 < nt; ++f) {
        const double h = rec.frame_times[f + 1] - rec.frame_times[f];
        w_full[f] += h / 2;
        w_full[f + 1] += h / 2;
    }
    const bool have_half = (nt - 1) % 2 == 0;
    if (have_half)
        for (std::size_t f = 0; f + 2 < nt; f += 2) {
            const double h = rec.frame_times[f + 2] - rec.frame_times[f];
            w_half[f] += h / 2;
            w_half[f + 2] += h / 2;
        }

    std::vector<std::vector<Complex>> symbols(m + 1, std::vector<Complex>(total, Complex(0.0)));
    for (int i = 0; i < total; ++i) {
        if (!grid.retained(i)) continue;
        const auto xi = grid.frequency(i);
        for (int j = 0; j <= m; ++j) symbols[j][i] = std::conj(op.level_symbol(j, xi));
    }

    Fft fft(grid.n, grid.N);
    ResidualReport out;
    out.level_terms.assign(m + 1, 0.0);
    std::vector<double> half_terms(m + 1, 0.0);
    double lhs_half = 0;
    std::vector<Complex> buf(total), what, ghat;
    for (std::size_t f = 0; f < nt; ++f) {
        const auto& w = rec.frames[f];
        const double t = rec.frame_times[f];
        double lhs_f = 0;
        for (int i = 0; i < total; ++i) {
            double src = 0;
            if (source.nonlinearity) src += eval_F(*source.nonlinearity, w[i]);
            if (source.forcing) src += source.forcing(t, pos[i]);
            lhs_f += src * D[ell][f][i];
        }
        lhs_f *= vol;
        out.lhs += w_full[f] * lhs_f;
        lhs_half += w_half[f] * lhs_f;

        for (int i = 0; i < total; ++i) buf[i] = w[i];
        fft.forward(buf, what);
        for (int j = 0; j <= m; ++j) {
            for (int i = 0; i < total; ++i) buf[i] = D[j][f][i];
            fft.forward(buf, ghat);
            double acc = 0;
            for (int i = 0; i < total; ++i)
                if (grid.retained(i)) acc += (what[i] * std::conj(symbols[j][i] * ghat[i])).real();
            const double sign = (j - ell) % 2 == 0 ? 1.0 : -1.0;
            const double term = sign * acc * vol / total;
            out.level_terms[j] += w_full[f] * term;
            half_terms[j] += w_half[f] * term;
        }
    }

    double bnd = 0;
    for (int i = 0; i < total; ++i) bnd += rec.data[i] * D[ell][0][i];
    out.boundary_term = -bnd * vol;

    out.rhs = out.boundary_term;
    double rhs_half = out.boundary_term;
    double abs_terms = std::abs(out.boundary_term);
    for (int j = 0; j <= m; ++j) {
        out.rhs += out.level_terms[j];
        rhs_half += half_terms[j];
        abs_terms += std::abs(out.level_terms[j]);
    }
    const double floor = 1e-30;
    out.scale = std::abs(out.lhs) + abs_terms + floor;
    out.residual = std::abs(out.lhs - out.rhs) / out.scale;
    if (have_half)
        out.quadrature_error = std::abs((out.lhs - out.rhs) - (lhs_half - rhs_half)) / 3.0 / out.scale;
    return out;
}

nlohmann::json to_json(const ResidualReport& r) {
    return nlohmann::json{{"residual", r.residual},       {"lhs", r.lhs},
                          {"rhs", r.rhs},                 {"level_terms", r.level_terms},
                          {"boundary_term", r.boundary_term}, {"scale", r.scale},
                          {"quadrature_error", r.quadrature_error}};
}

}  // namespace fujita
