#include "fujita/mu_library.hpp"

#include "fujita/errors.hpp"
#include "fujita/random.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace fujita {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// exp^{[k]}(1): the value of -log tau where the k-th inner log reaches 1
double iterated_exp_of_one(int depth) {
    double u = 1.0;
    for (int i = 0; i < depth; ++i) u = std::exp(u);
    return u;
}

double iterated_log_value(int depth, double gamma, double u) {
    if (std::isinf(u)) return 0.0;
    double prod = 1.0;
    double L = u;
    for (int i = 0; i < depth; ++i) {
        prod /= L;
        L = std::log(L);
    }
    return prod * std::pow(L, -gamma);
}

void validate(const MuSpec& mu) {
    switch (mu.family) {
        case MuSpec::Family::constant:
            break;
        case MuSpec::Family::power:
            if (!(mu.epsilon > 0)) throw ValidationError("power family needs epsilon > 0");
            break;
        case MuSpec::Family::iterated_log: {
            if (mu.depth < 0) throw ValidationError("iterated_log depth must be >= 0");
            if (!(mu.extension_point > 0) || !(mu.extension_point < 1))
                throw ValidationError("iterated_log extension point must lie in (0, 1)");
            // every inner log must be positive on (0, tau*]
            double L = -std::log(mu.extension_point);
            for (int i = 0; i < mu.depth; ++i) {
                if (!(L > 0)) break;
                L = std::log(L);
            }
            if (!(L > 0))
                throw ValidationError("iterated_log extension point leaves an inner logarithm undefined");
            break;
        }
        case MuSpec::Family::custom_table:
            if (mu.table.size() < 2) throw ValidationError("custom_table needs at least two samples");
            for (std::size_t i = 1; i < mu.table.size(); ++i)
                if (!(mu.table[i].first > mu.table[i - 1].first))
                    throw ValidationError("custom_table abscissae must be strictly increasing");
            if (mu.table.front().first != 0.0) throw ValidationError("custom_table must start at tau = 0");
            break;
    }
}

}  // namespace

double MuSpec::default_extension(int depth) {
    if (depth < 0) throw ValidationError("iterated_log depth must be >= 0");
    const double u = iterated_exp_of_one(depth);
    const double tau = std::exp(-u);
    if (!(tau > 0)) throw ValidationError("iterated_log depth " + std::to_string(depth) +
                                          " puts the extension point below double range");
    return tau;
}

MuSpec MuSpec::constant() {
    MuSpec m;
    m.family = Family::constant;
    m.extension_point = kInf;
    return m;
}

MuSpec MuSpec::power(double epsilon, std::optional<double> extension) {
    MuSpec m;
    m.family = Family::power;
    m.epsilon = epsilon;
    m.extension_point = extension.value_or(1.0);
    validate(m);
    return m;
}

MuSpec MuSpec::iterated_log(int depth, double gamma, std::optional<double> extension) {
    MuSpec m;
    m.family = Family::iterated_log;
    m.depth = depth;
    m.gamma = gamma;
    m.extension_point = extension ? *extension : default_extension(depth);
    m.cap = std::min(0.1, m.extension_point);
    validate(m);
    return m;
}

MuSpec MuSpec::custom(std::vector<std::pair<double, double>> table) {
    MuSpec m;
    m.family = Family::custom_table;
    m.table = std::move(table);
    validate(m);
    m.extension_point = m.table.back().first;
    return m;
}

std::string family_name(MuSpec::Family f) {
    switch (f) {
        case MuSpec::Family::constant: return "constant";
        case MuSpec::Family::power: return "power";
        case MuSpec::Family::iterated_log: return "iterated_log";
        case MuSpec::Family::custom_table: return "custom_table";
    }
    return "constant";
}

MuSpec::Family parse_family(const std::string& name) {
    if (name == "constant") return MuSpec::Family::constant;
    if (name == "power") return MuSpec::Family::power;
    if (name == "iterated_log") return MuSpec::Family::iterated_log;
    if (name == "custom_table") return MuSpec::Family::custom_table;
    throw ValidationError("unknown mu family '" + name + "'");
}

double eval_mu(const MuSpec& mu, double tau) {
    if (!(tau >= 0)) throw ValidationError("mu is defined for tau >= 0");
    switch (mu.family) {
        case MuSpec::Family::constant:
            return 1.0;
        case MuSpec::Family::power:
            return std::pow(std::min(tau, mu.extension_point), mu.epsilon);
        case MuSpec::Family::iterated_log:
            if (tau == 0.0) return 0.0;
            return eval_mu_log(mu, -std::log(tau));
        case MuSpec::Family::custom_table: {
            const auto& t = mu.table;
            if (tau >= t.back().first) return t.back().second;
            auto it = std::upper_bound(t.begin(), t.end(), tau,
                                       [](double v, const std::pair<double, double>& p) { return v < p.first; });
            const auto& hi = *it;
            const auto& lo = *(it - 1);
            const double w = (tau - lo.first) / (hi.first - lo.first);
            return lo.second + w * (hi.second - lo.second);
        }
    }
    return 1.0;
}

double eval_mu_log(const MuSpec& mu, double u) {
    switch (mu.family) {
        case MuSpec::Family::constant:
            return 1.0;
        case MuSpec::Family::power: {
            const double ustar = -std::log(mu.extension_point);
            return std::exp(-mu.epsilon * std::max(u, ustar));
        }
        case MuSpec::Family::iterated_log: {
            const double ustar = -std::log(mu.extension_point);
            return iterated_log_value(mu.depth, mu.gamma, std::max(u, ustar));
        }
        case MuSpec::Family::custom_table:
            return eval_mu(mu, std::exp(-u));
    }
    return 1.0;
}

double eval_F(const NonlinearitySpec& nl, double s) {
    const double a = std::abs(s);
    if (a == 0.0) return 0.0;
    return std::pow(a, nl.p) * eval_mu(nl.mu, a);
}

LipschitzCertificate lipschitz_certificate(const NonlinearitySpec& nl, int samples, double cap,
                                           std::uint64_t seed) {
    if (samples < 2) throw ValidationError("lipschitz_certificate needs at least 2 samples");
    if (!(cap > 0)) throw ValidationError("cap must be positive");
    LipschitzCertificate cert;
    Rng rng(seed);

    auto draw = [&](int i) {
        if (i % 2 == 0) return rng.uniform(-cap, cap);
        // log-uniform magnitudes probe the behaviour near 0
        const double mag = cap * std::pow(10.0, -8.0 * rng.uniform());
        return rng.uniform() < 0.5 ? -mag : mag;
    };

    for (int i = 0; i < samples; ++i) {
        const double y = draw(i);
        const double z = draw(i + 1);
        const double num = std::abs(eval_F(nl, y) - eval_F(nl, z));
        const double den = std::abs(y - z) *
                           (std::pow(std::abs(y), nl.p - 1.0) + std::pow(std::abs(z), nl.p - 1.0)) *
                           eval_mu(nl.mu, std::abs(y) + std::abs(z));
        ++cert.pairs_checked;
        if (den == 0.0) {
            if (num != 0.0) {
                cert.bounded = false;
                cert.worst_pair = {y, z};
                cert.constant = kInf;
            }
            continue;
        }
        const double r = num / den;
        if (r > cert.constant) {
            cert.constant = r;
            cert.worst_pair = {y, z};
        }
    }
    if (!std::isfinite(cert.constant) || cert.constant > 1e8) cert.bounded = false;

    // monotonicity, the derivative bound and convexity on deterministic grids
    const int grid = std::max(samples, 64);
    std::vector<double> taus;
    for (int i = 0; i <= grid; ++i) taus.push_back(cap * std::pow(10.0, -8.0 * (grid - i) / grid));
    for (int i = 1; i <= grid; ++i) taus.push_back(cap * i / grid);
    std::sort(taus.begin(), taus.end());
    for (std::size_t i = 1; i < taus.size(); ++i) {
        const double a = eval_mu(nl.mu, taus[i - 1]);
        const double b = eval_mu(nl.mu, taus[i]);
        if (b < a - 1e-14 * std::max(1.0, std::abs(a))) {
            cert.monotone = false;
            cert.monotonicity_witness = taus[i - 1];
            break;
        }
    }
    for (double tau : taus) {
        const double h = 1e-6 * tau;
        if (h == 0.0 || tau + h > cap) continue;
        const double mu0 = eval_mu(nl.mu, tau);
        const double d = (eval_mu(nl.mu, tau + h) - eval_mu(nl.mu, tau - h)) / (2 * h);
        const double lhs = tau * d;
        const double slack = 1e-6 * std::max(mu0, 1e-300) + 1e-12;
        if (lhs < -slack || lhs > mu0 + slack) {
            cert.tau_derivative_condition = false;
            cert.tau_derivative_witness = tau;
            break;
        }
    }
    const double h = cap / grid;
    for (int i = -grid + 1; i < grid; ++i) {
        const double s = i * h;
        const double f0 = eval_F(nl, s);
        const double second = eval_F(nl, s - h) - 2 * f0 + eval_F(nl, s + h);
        const double scale = std::abs(eval_F(nl, s - h)) + 2 * std::abs(f0) + std::abs(eval_F(nl, s + h));
        if (second < -1e-12 * std::max(scale, 1e-300)) {
            cert.convex = false;
            cert.convexity_witness = s;
            break;
        }
    }
    return cert;
}

std::string classification_name(IntegralVerdict::Classification c) {
    switch (c) {
        case IntegralVerdict::Classification::convergent: return "convergent";
        case IntegralVerdict::Classification::divergent: return "divergent";
        case IntegralVerdict::Classification::unknown: return "unknown";
    }
    return "unknown";
}

namespace {

double gk_panel(const MuSpec& mu, double a, double b, double tol) {
    double err = 0.0;
    auto f = [&](double u) { return eval_mu_log(mu, u); };
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, 1e-13, &err);
    if (!(err <= tol)) throw NumericalError("quadrature did not converge on panel [" + std::to_string(a) + ", " +
                                            std::to_string(b) + "] (error " + std::to_string(err) + ")");
    return v;
}

// Full improper integral over u in [u0, inf).
double full_integral(const MuSpec& mu, double u0, double tol) {
    if (mu.family == MuSpec::Family::iterated_log && mu.depth > 0) {
        // w = log^{[k]}(u): du = prod_{i=1..k} exp^{[i]}(w) dw; quadrature while u stays
        // representable, analytic tail w^{1-gamma}/(gamma-1) beyond.
        double w0 = u0;
        for (int i = 0; i < mu.depth; ++i) w0 = std::log(w0);
        double wmax = std::log(1e300);
        for (int i = 1; i < mu.depth; ++i) wmax = std::log(wmax);
        auto integrand = [&](double w) {
            double u = w;
            double jac = 1.0;
            for (int i = 0; i < mu.depth; ++i) {
                u = std::exp(u);
                jac *= u;
            }
            return eval_mu_log(mu, u) * jac;
        };
        double err = 0.0;
        double v = 0.0;
        // panels geometric in w keep the 1/w^gamma profile well resolved
        double a = w0;
        while (a < wmax) {
            const double b = std::min(wmax, std::max(a * 2.0, a + 1.0));
            v += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, a, b, 20, 1e-13, &err);
            if (!(err <= tol)) throw NumericalError("quadrature did not converge in iterated variable");
            a = b;
        }
        return v + std::pow(wmax, 1.0 - mu.gamma) / (mu.gamma - 1.0);
    }
    boost::math::quadrature::exp_sinh<double> integrator;
    double err = 0.0;
    auto f = [&](double u) { return eval_mu_log(mu, u); };
    const double v = integrator.integrate(f, u0, kInf, 1e-13, &err);
    if (!(err <= tol)) throw NumericalError("improper quadrature did not converge (error " + std::to_string(err) + ")");
    return v;
}

}  // namespace

IntegralVerdict integral_condition(const MuSpec& mu, double c0, int max_decades) {
    if (!(c0 > 0)) throw ValidationError("c0 must be positive");
    if (max_decades < 2) throw ValidationError("need at least two decades of partial integrals");
    if (mu.family != MuSpec::Family::constant && mu.family != MuSpec::Family::custom_table &&
        c0 > mu.extension_point)
        throw ValidationError("c0 = " + std::to_string(c0) + " exceeds the formula region (extension point " +
                              std::to_string(mu.extension_point) + ")");

    IntegralVerdict v;
    const double tol = v.quadrature_tolerance;
    const double u0 = -std::log(c0);
    const double step = std::log(10.0);

    double acc = 0.0;
    for (int k = 1; k <= max_decades; ++k) {
        acc += gk_panel(mu, u0 + (k - 1) * step, u0 + k * step, tol);
        v.partial_integrals.emplace_back(c0 * std::pow(10.0, -k), acc);
    }

    using C = IntegralVerdict::Classification;
    switch (mu.family) {
        case MuSpec::Family::constant:
            v.classification = C::divergent;
            break;
        case MuSpec::Family::power:
            v.classification = C::convergent;
            v.closed_form_value = std::pow(c0, mu.epsilon) / mu.epsilon;
            break;
        case MuSpec::Family::iterated_log:
            v.classification = mu.gamma > 1.0 ? C::convergent : C::divergent;
            if (mu.gamma > 1.0) {
                double L = u0;
                for (int i = 0; i < mu.depth; ++i) L = std::log(L);
                v.closed_form_value = std::pow(L, 1.0 - mu.gamma) / (mu.gamma - 1.0);
            }
            break;
        case MuSpec::Family::custom_table:
            v.classification = C::unknown;
            break;
    }
    if (v.classification == C::convergent) v.partial_integrals.emplace_back(0.0, full_integral(mu, u0, tol));

    // growth of the decade increments against u = -log eps: increments ~ u^s
    std::vector<double> xs, ys;
    for (int k = max_decades / 2; k < max_decades; ++k) {
        const double inc = v.partial_integrals[k].second - v.partial_integrals[k - 1].second;
        if (inc > 0) {
            xs.push_back(std::log(u0 + (k + 0.5) * step));
            ys.push_back(std::log(inc));
        }
    }
    v.last_increment = v.partial_integrals[max_decades - 1].second - v.partial_integrals[max_decades - 2].second;
    if (xs.size() >= 2) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            mx += xs[i];
            my += ys[i];
        }
        mx /= xs.size();
        my /= ys.size();
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
        }
        v.growth_slope = sxx > 0 ? sxy / sxx : 0.0;
        if (v.growth_slope < -1.05)
            v.growth_model = "saturating";
        else if (v.growth_slope <= -0.95)
            v.growth_model = "logarithmic";
        else
            v.growth_model = "power";
    } else {
        v.growth_model = v.last_increment == 0.0 ? "saturating" : "unresolved";
    }
    return v;
}

json to_json(const MuSpec& mu) {
    json o{{"family", family_name(mu.family)}, {"cap", mu.cap}};
    switch (mu.family) {
        case MuSpec::Family::iterated_log:
            o["depth"] = mu.depth;
            o["gamma"] = mu.gamma;
            o["extension_point"] = mu.extension_point;
            break;
        case MuSpec::Family::power:
            o["epsilon"] = mu.epsilon;
            o["extension_point"] = mu.extension_point;
            break;
        case MuSpec::Family::custom_table: {
            json t = json::array();
            for (const auto& [a, b] : mu.table) t.push_back({a, b});
            o["table"] = t;
            break;
        }
        case MuSpec::Family::constant:
            break;
    }
    return o;
}

MuSpec mu_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("mu block must be an object");
    for (const auto& [k, _] : j.items())
        if (k != "family" && k != "depth" && k != "gamma" && k != "epsilon" && k != "extension_point" &&
            k != "cap" && k != "table")
            throw ValidationError("unknown key '" + k + "' in mu block");
    const auto fam = parse_family(j.value("family", std::string("constant")));
    std::optional<double> ext;
    if (j.contains("extension_point")) ext = j["extension_point"].get<double>();
    MuSpec mu;
    switch (fam) {
        case MuSpec::Family::constant: mu = MuSpec::constant(); break;
        case MuSpec::Family::power: mu = MuSpec::power(j.value("epsilon", 1.0), ext); break;
        case MuSpec::Family::iterated_log:
            mu = MuSpec::iterated_log(j.value("depth", 0), j.value("gamma", 1.0), ext);
            break;
        case MuSpec::Family::custom_table: {
            std::vector<std::pair<double, double>> t;
            for (const auto& row : j.at("table")) t.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
            mu = MuSpec::custom(std::move(t));
            break;
        }
    }
    if (j.contains("cap")) mu.cap = j["cap"].get<double>();
    if (!(mu.cap > 0)) throw ValidationError("mu cap must be positive");
    return mu;
}

json to_json(const IntegralVerdict& v) {
    json partials = json::array();
    for (const auto& [eps, val] : v.partial_integrals) partials.push_back({{"cutoff", eps}, {"value", val}});
    return json{{"classification", classification_name(v.classification)},
                {"closed_form_value", v.closed_form_value ? json(*v.closed_form_value) : json(nullptr)},
                {"partial_integrals", partials},
                {"quadrature_tolerance", v.quadrature_tolerance},
                {"growth_model", v.growth_model},
                {"growth_slope", v.growth_slope},
                {"last_increment", v.last_increment}};
}

json to_json(const LipschitzCertificate& c) {
    json o{{"constant", std::isfinite(c.constant) ? json(c.constant) : json("inf")},
           {"worst_pair", {c.worst_pair.first, c.worst_pair.second}},
           {"pairs_checked", c.pairs_checked},
           {"bounded", c.bounded},
           {"monotone", c.monotone},
           {"tau_derivative_condition", c.tau_derivative_condition},
           {"convex", c.convex}};
    if (c.monotonicity_witness) o["monotonicity_witness"] = *c.monotonicity_witness;
    if (c.tau_derivative_witness) o["tau_derivative_witness"] = *c.tau_derivative_witness;
    if (c.convexity_witness) o["convexity_witness"] = *c.convexity_witness;
    return o;
}

}  // namespace fujita
