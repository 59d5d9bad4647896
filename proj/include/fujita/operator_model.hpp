#pragma once

#include "fujita/rational.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace fujita {

using Complex = std::complex<double>;
using MultiIndex = std::vector<int>;

/// One spatial term of P_j(d_x): either c * d_x^alpha or c * (-Delta)^power.
struct SpatialTerm {
    enum class Kind { monomial, fractional_laplacian };

    Kind kind = Kind::monomial;
    MultiIndex alpha;        // monomial only, length n
    Rational power{0};       // fractional_laplacian only, >= 0
    double coeff = 0.0;

    static SpatialTerm monomial(MultiIndex alpha, double coeff);
    static SpatialTerm fractional(Rational power, double coeff);

    /// |alpha| for monomials, 2*power for fractional terms.
    Rational order() const;

    /// Multiplier of the term at frequency xi: coeff*(i xi)^alpha or coeff*|xi|^{2 power}.
    Complex symbol(std::span<const double> xi) const;

    /// True when (kind, alpha/power) coincide; coefficients are ignored.
    bool same_shape(const SpatialTerm& other) const;
};

bool operator<(const SpatialTerm& a, const SpatialTerm& b);

/// L = d_t^m + sum_{j<m} P_j(d_x) d_t^j with real constant coefficients.
///
/// Levels are normalized at construction: terms with equal shape are merged,
/// zero coefficients dropped, each level sorted. The top level m is implicit
/// and equal to the identity.
class EvolutionOperator {
public:
    EvolutionOperator(int m, int n, std::map<int, std::vector<SpatialTerm>> levels);

    int m() const noexcept { return m_; }
    int n() const noexcept { return n_; }

    /// Terms of P_j; for j == m returns the single identity term.
    const std::vector<SpatialTerm>& level(int j) const;
    const std::map<int, std::vector<SpatialTerm>>& levels() const noexcept { return levels_; }

    /// P_j(i xi) evaluated at a real frequency vector (P_m = 1).
    Complex level_symbol(int j, std::span<const double> xi) const;

    /// Coefficient c_{j,0} of the zero-order term at level j (c_{m,0} = 1).
    double zero_order_coeff(int j) const;

    /// Highest order d_j at level j (|alpha| or 2*power).
    Rational max_order(int j) const;

    /// Same operator posed in another space dimension. Only valid when every
    /// term is a fractional Laplacian (monomials are tied to n).
    EvolutionOperator with_dimension(int n) const;

    friend bool operator==(const EvolutionOperator&, const EvolutionOperator&);

private:
    int m_;
    int n_;
    std::map<int, std::vector<SpatialTerm>> levels_;
    std::vector<SpatialTerm> identity_;
};

/// J = { j : P_j != 0 } united with {m}.
std::set<int> order_set_J(const EvolutionOperator& op);

/// r_j = min order over the terms of level j; r_m = 0.
Rational minimal_order_r(const EvolutionOperator& op, int j);

/// Companion matrix A(xi): superdiagonal ones, last row -[P_0(i xi) ... P_{m-1}(i xi)].
Eigen::MatrixXcd companion_matrix(const EvolutionOperator& op, std::span<const double> xi);

/// True if the spatial symbol depends on xi only through |xi| (sampled check).
bool is_radial(const EvolutionOperator& op, std::uint64_t seed = 7);

EvolutionOperator parse_operator(const nlohmann::json& doc);
EvolutionOperator load_operator(const std::string& path);
nlohmann::json serialize_operator(const EvolutionOperator& op);

// ---------------------------------------------------------------------------
// Homogeneous symbols and hyperbolicity / interlacing validation.

/// c * lambda^lambda_power * xi^alpha (formal symbol, d_x -> xi), or with
/// `radial_power` set, c * lambda^lambda_power * |xi|^{2 radial_power}.
struct SymbolTerm {
    double coeff = 0.0;
    int lambda_power = 0;
    MultiIndex alpha;
    std::optional<int> radial_power;

    int degree() const;
};

struct HomogeneousSymbol {
    std::vector<SymbolTerm> terms;
    int n = 1;

    /// Common total degree; throws ValidationError if the terms disagree.
    int degree() const;
    /// Coefficients of the polynomial in lambda at a fixed direction, index = power.
    std::vector<double> lambda_coefficients(std::span<const double> direction) const;
};

/// Operator d_t^m + ... obtained by reading a sum of homogeneous symbols with
/// lambda -> d_t and xi -> d_x. The lambda^m coefficient must be exactly 1.
EvolutionOperator operator_from_symbols(const std::vector<HomogeneousSymbol>& symbols);

struct DirectionResult {
    std::vector<double> direction;
    std::vector<std::vector<double>> roots;  // per symbol, ascending
    bool strictly_hyperbolic = false;
    bool strictly_interlacing = false;
    bool zero_root_at_expected_level = false;
    std::optional<std::string> failure;
};

struct InterlacingReport {
    std::vector<DirectionResult> directions;
    bool all_strictly_hyperbolic = false;
    bool all_strictly_interlacing = false;
    bool all_zero_root = false;
};

/// Samples unit directions (e_1 first, then seeded random ones) and checks
/// strict hyperbolicity of each symbol, strict interlacing of consecutive
/// degrees, and that the lowest-degree symbol vanishes at lambda = 0.
/// Symbols must have consecutive degrees (any order on input).
InterlacingReport interlacing_check(const std::vector<HomogeneousSymbol>& symbols, int directions,
                                    std::uint64_t seed, double rel_gap_tol = 1e-8);

/// Real roots (ascending) of sum c_k z^k; returns nullopt if any root has a
/// non-negligible imaginary part.
std::optional<std::vector<double>> real_roots(std::span<const double> coeffs, double tol = 1e-9);

nlohmann::json to_json(const InterlacingReport& report);

}  // namespace fujita
