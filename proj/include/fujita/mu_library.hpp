#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fujita {

/// Modulus-like factor mu of the critical nonlinearity |s|^p mu(|s|).
///
/// Families:
///  - constant:     mu = 1 (pure power nonlinearity)
///  - power:        mu = tau^epsilon below the extension point
///  - iterated_log: mu = (-log tau)^{-1} (log(-log tau))^{-1} ... (log^[k](-log tau))^{-gamma};
///                  depth 0 reduces to (-log tau)^{-gamma}
///  - custom_table: piecewise-linear interpolation of (tau, mu) samples
///
/// Beyond `extension_point` mu is continued by the constant mu(extension_point).
struct MuSpec {
    enum class Family { constant, power, iterated_log, custom_table };

    Family family = Family::constant;
    int depth = 0;             // iterated_log
    double gamma = 1.0;        // iterated_log
    double epsilon = 1.0;      // power
    double extension_point = 0.0;
    double cap = 0.1;          // radius of the small-amplitude region
    std::vector<std::pair<double, double>> table;  // custom_table, ascending tau

    static MuSpec constant();
    static MuSpec power(double epsilon, std::optional<double> extension = std::nullopt);
    static MuSpec iterated_log(int depth, double gamma, std::optional<double> extension = std::nullopt);
    static MuSpec custom(std::vector<std::pair<double, double>> table);

    /// Default extension point: e^{-1} for depth 0, otherwise the largest tau with every inner log > 1.
    static double default_extension(int depth);
};

std::string family_name(MuSpec::Family f);
MuSpec::Family parse_family(const std::string& name);

double eval_mu(const MuSpec& mu, double tau);
/// mu evaluated at tau = exp(-u), without forming tau (valid for huge u).
double eval_mu_log(const MuSpec& mu, double u);

struct NonlinearitySpec {
    double p = 1.0;
    MuSpec mu;
    int ell = 0;
};

/// F(s) = |s|^p mu(|s|).
double eval_F(const NonlinearitySpec& nl, double s);

struct LipschitzCertificate {
    double constant = 0.0;               // smallest C valid on the sample
    std::pair<double, double> worst_pair{0.0, 0.0};
    std::size_t pairs_checked = 0;
    bool bounded = true;
    bool monotone = true;                // mu nondecreasing on sampled [0, cap]
    std::optional<double> monotonicity_witness;
    bool tau_derivative_condition = true;  // 0 <= tau mu' <= mu, finite differences
    std::optional<double> tau_derivative_witness;
    bool convex = true;                  // F convex, by second differences
    std::optional<double> convexity_witness;
};

/// Empirical constant of |F(y)-F(z)| <= C |y-z| (|y|^{p-1}+|z|^{p-1}) mu(|y|+|z|) over
/// seeded random pairs in [-cap, cap]^2, plus sampled checks of monotonicity, convexity of F
/// and the sufficient condition 0 <= tau mu'(tau) <= mu(tau).
LipschitzCertificate lipschitz_certificate(const NonlinearitySpec& nl, int samples, double cap,
                                           std::uint64_t seed);

struct IntegralVerdict {
    enum class Classification { convergent, divergent, unknown };

    Classification classification = Classification::unknown;
    std::optional<double> closed_form_value;
    /// (lower cutoff, integral over [cutoff, c0]); a cutoff of 0 marks the full improper integral.
    std::vector<std::pair<double, double>> partial_integrals;
    double quadrature_tolerance = 1e-9;
    std::string growth_model;      // "saturating", "logarithmic", "power", "unresolved"
    double growth_slope = 0.0;     // slope of log(decade increment) against log(-log eps) over the tail
    double last_increment = 0.0;
};

std::string classification_name(IntegralVerdict::Classification c);

/// Classification and quadrature of int_0^{c0} mu(tau)/tau dtau via u = -log tau.
/// Partials use cutoffs eps_k = c0 * 10^{-k}, k = 1..max_decades.
IntegralVerdict integral_condition(const MuSpec& mu, double c0, int max_decades = 16);

nlohmann::json to_json(const MuSpec& mu);
MuSpec mu_from_json(const nlohmann::json& j);
nlohmann::json to_json(const IntegralVerdict& v);
nlohmann::json to_json(const LipschitzCertificate& c);

}  // namespace fujita
