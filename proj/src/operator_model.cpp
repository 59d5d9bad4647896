#include "fujita/operator_model.hpp"

#include "fujita/errors.hpp"
#include "fujita/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace fujita {

using nlohmann::json;

// ---------------------------------------------------------------------------
// SpatialTerm

SpatialTerm SpatialTerm::monomial(MultiIndex alpha, double coeff) {
    SpatialTerm t;
    t.kind = Kind::monomial;
    t.alpha = std::move(alpha);
    t.coeff = coeff;
    return t;
}

SpatialTerm SpatialTerm::fractional(Rational power, double coeff) {
    SpatialTerm t;
    t.kind = Kind::fractional_laplacian;
    t.power = std::move(power);
    t.coeff = coeff;
    return t;
}

Rational SpatialTerm::order() const {
    if (kind == Kind::monomial) return Rational(std::accumulate(alpha.begin(), alpha.end(), 0));
    return Rational(2 * power);
}

Complex SpatialTerm::symbol(std::span<const double> xi) const {
    if (kind == Kind::monomial) {
        Complex v(coeff, 0.0);
        for (std::size_t i = 0; i < alpha.size(); ++i)
            for (int k = 0; k < alpha[i]; ++k) v *= Complex(0.0, xi[i]);
        return v;
    }
    double r2 = 0.0;
    for (double x : xi) r2 += x * x;
    if (power == 0) return {coeff, 0.0};
    if (r2 == 0.0) return {0.0, 0.0};
    // |xi|^{2p} = (r^2)^p; integer powers stay exact in floating point
    if (power.get_den() == 1) {
        double v = 1.0;
        for (long k = 0; k < power.get_num().get_si(); ++k) v *= r2;
        return {coeff * v, 0.0};
    }
    return {coeff * std::pow(r2, power.get_d()), 0.0};
}

bool SpatialTerm::same_shape(const SpatialTerm& other) const {
    if (kind != other.kind) return false;
    return kind == Kind::monomial ? alpha == other.alpha : power == other.power;
}

bool operator<(const SpatialTerm& a, const SpatialTerm& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.kind == SpatialTerm::Kind::monomial) return a.alpha < b.alpha;
    return a.power < b.power;
}

// ---------------------------------------------------------------------------
// EvolutionOperator

EvolutionOperator::EvolutionOperator(int m, int n, std::map<int, std::vector<SpatialTerm>> levels)
    : m_(m), n_(n) {
    if (m < 1) throw ValidationError("time order m must be >= 1 (got " + std::to_string(m) + ")");
    if (n < 1) throw ValidationError("space dimension n must be >= 1 (got " + std::to_string(n) + ")");

    for (auto& [j, terms] : levels) {
        if (j == m)
            throw ValidationError("level j=m=" + std::to_string(m) +
                                  " is implicit (P_m = 1) and may not be declared");
        if (j < 0 || j > m)
            throw ValidationError("level " + std::to_string(j) + " outside 0.." + std::to_string(m - 1));

        std::vector<SpatialTerm> merged;
        for (auto& t : terms) {
            if (t.kind == SpatialTerm::Kind::monomial) {
                if (t.alpha.empty()) t.alpha.assign(static_cast<std::size_t>(n), 0);
                if (static_cast<int>(t.alpha.size()) != n)
                    throw ValidationError("multi-index length " + std::to_string(t.alpha.size()) +
                                          " does not match dimension n=" + std::to_string(n));
                for (int a : t.alpha)
                    if (a < 0) throw ValidationError("negative multi-index entry");
            } else if (t.power < 0) {
                throw ValidationError("fractional power must be >= 0");
            }
            if (!std::isfinite(t.coeff)) throw ValidationError("non-finite coefficient");

            auto it = std::find_if(merged.begin(), merged.end(),
                                   [&](const SpatialTerm& s) { return s.same_shape(t); });
            if (it == merged.end())
                merged.push_back(t);
            else
                it->coeff += t.coeff;
        }
        std::erase_if(merged, [](const SpatialTerm& s) { return s.coeff == 0.0; });
        std::sort(merged.begin(), merged.end());
        if (!merged.empty()) levels_.emplace(j, std::move(merged));
    }
    identity_.push_back(SpatialTerm::monomial(MultiIndex(static_cast<std::size_t>(n), 0), 1.0));
}

const std::vector<SpatialTerm>& EvolutionOperator::level(int j) const {
    static const std::vector<SpatialTerm> empty;
    if (j == m_) return identity_;
    auto it = levels_.find(j);
    return it == levels_.end() ? empty : it->second;
}

Complex EvolutionOperator::level_symbol(int j, std::span<const double> xi) const {
    Complex s{0.0, 0.0};
    for (const auto& t : level(j)) s += t.symbol(xi);
    return s;
}

double EvolutionOperator::zero_order_coeff(int j) const {
    double c = 0.0;
    for (const auto& t : level(j))
        if (t.order() == 0) c += t.coeff;
    return c;
}

Rational EvolutionOperator::max_order(int j) const {
    Rational d(0);
    for (const auto& t : level(j)) d = std::max(d, t.order());
    return d;
}

EvolutionOperator EvolutionOperator::with_dimension(int n) const {
    if (n == n_) return *this;
    for (const auto& [j, terms] : levels_)
        for (const auto& t : terms)
            if (t.kind == SpatialTerm::Kind::monomial && t.order() != 0)
                throw ValidationError("operator with spatial monomials cannot change dimension");
    std::map<int, std::vector<SpatialTerm>> lv;
    for (const auto& [j, terms] : levels_) {
        for (auto t : terms) {
            if (t.kind == SpatialTerm::Kind::monomial) t.alpha.assign(static_cast<std::size_t>(n), 0);
            lv[j].push_back(t);
        }
    }
    return EvolutionOperator(m_, n, std::move(lv));
}

bool operator==(const EvolutionOperator& a, const EvolutionOperator& b) {
    if (a.m_ != b.m_ || a.n_ != b.n_ || a.levels_.size() != b.levels_.size()) return false;
    for (const auto& [j, ta] : a.levels_) {
        auto it = b.levels_.find(j);
        if (it == b.levels_.end() || it->second.size() != ta.size()) return false;
        for (std::size_t k = 0; k < ta.size(); ++k)
            if (!ta[k].same_shape(it->second[k]) || ta[k].coeff != it->second[k].coeff) return false;
    }
    return true;
}

std::set<int> order_set_J(const EvolutionOperator& op) {
    std::set<int> J;
    for (const auto& [j, terms] : op.levels())
        if (!terms.empty()) J.insert(j);
    J.insert(op.m());
    return J;
}

Rational minimal_order_r(const EvolutionOperator& op, int j) {
    if (j == op.m()) return Rational(0);
    const auto& terms = op.level(j);
    if (terms.empty())
        throw ValidationError("level " + std::to_string(j) + " is not in J (P_j = 0)");
    Rational r = terms.front().order();
    for (const auto& t : terms) r = std::min(r, t.order());
    return r;
}

Eigen::MatrixXcd companion_matrix(const EvolutionOperator& op, std::span<const double> xi) {
    const int m = op.m();
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(m, m);
    for (int i = 0; i + 1 < m; ++i) A(i, i + 1) = 1.0;
    for (int j = 0; j < m; ++j) A(m - 1, j) = -op.level_symbol(j, xi);
    return A;
}

bool is_radial(const EvolutionOperator& op, std::uint64_t seed) {
    Rng rng(seed);
    const auto n = static_cast<std::size_t>(op.n());
    for (int trial = 0; trial < 8; ++trial) {
        const double rho = 0.3 + 2.0 * rng.uniform();
        std::vector<double> e1(n, 0.0), dir(n);
        e1[0] = rho;
        double norm = 0.0;
        for (auto& d : dir) {
            d = rng.normal();
            norm += d * d;
        }
        norm = std::sqrt(norm);
        for (auto& d : dir) d *= rho / norm;
        std::vector<double> neg = e1;
        neg[0] = -rho;
        for (int j = 0; j < op.m(); ++j) {
            const Complex a = op.level_symbol(j, e1);
            const double scale = 1.0 + std::abs(a);
            if (std::abs(a - op.level_symbol(j, dir)) > 1e-10 * scale) return false;
            if (std::abs(a - op.level_symbol(j, neg)) > 1e-10 * scale) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            throw ValidationError("unknown key '" + key + "' in " + where);
    }
}

Rational rational_from_json(const json& v, const std::string& what) {
    if (v.is_number_integer()) return Rational(v.get<long>());
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_float()) return parse_rational(json(v.get<double>()).dump());
    throw ValidationError(what + " must be a number or a rational string");
}

json rational_to_json(const Rational& q) {
    if (q.get_den() == 1 && q.get_num().fits_slong_p()) return q.get_num().get_si();
    return to_string(q);
}

}  // namespace

EvolutionOperator parse_operator(const json& doc) {
    if (!doc.is_object()) throw ValidationError("operator document must be a JSON object");
    reject_unknown(doc, {"m", "n", "levels", "name"}, "operator document");
    if (!doc.contains("m") || !doc.contains("n"))
        throw ValidationError("operator document requires 'm' and 'n'");
    if (!doc["m"].is_number_integer() || !doc["n"].is_number_integer())
        throw ValidationError("'m' and 'n' must be integers");
    const int m = doc["m"].get<int>();
    const int n = doc["n"].get<int>();

    std::map<int, std::vector<SpatialTerm>> levels;
    if (doc.contains("levels")) {
        if (!doc["levels"].is_object()) throw ValidationError("'levels' must be an object");
        for (const auto& [key, terms] : doc["levels"].items()) {
            int j = 0;
            try {
                std::size_t pos = 0;
                j = std::stoi(key, &pos);
                if (pos != key.size()) throw std::invalid_argument(key);
            } catch (const std::exception&) {
                throw ValidationError("level key '" + key + "' is not an integer");
            }
            if (!terms.is_array()) throw ValidationError("level " + key + " must be an array of terms");
            for (const auto& t : terms) {
                if (!t.is_object() || !t.contains("kind") || !t.contains("coeff"))
                    throw ValidationError("term at level " + key + " needs 'kind' and 'coeff'");
                const auto kind = t["kind"].get<std::string>();
                if (!t["coeff"].is_number()) throw ValidationError("coeff must be a number");
                const double c = t["coeff"].get<double>();
                if (kind == "monomial") {
                    reject_unknown(t, {"kind", "alpha", "coeff"}, "monomial term");
                    MultiIndex alpha;
                    if (t.contains("alpha")) alpha = t["alpha"].get<MultiIndex>();
                    levels[j].push_back(SpatialTerm::monomial(std::move(alpha), c));
                } else if (kind == "fractional_laplacian") {
                    reject_unknown(t, {"kind", "power", "coeff"}, "fractional_laplacian term");
                    if (!t.contains("power")) throw ValidationError("fractional_laplacian needs 'power'");
                    levels[j].push_back(SpatialTerm::fractional(rational_from_json(t["power"], "power"), c));
                } else {
                    throw ValidationError("unknown term kind '" + kind + "'");
                }
            }
        }
    }
    return EvolutionOperator(m, n, std::move(levels));
}

EvolutionOperator load_operator(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open operator file '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ValidationError("operator file '" + path + "': " + e.what());
    }
    return parse_operator(doc);
}

json serialize_operator(const EvolutionOperator& op) {
    json levels = json::object();
    for (const auto& [j, terms] : op.levels()) {
        json arr = json::array();
        for (const auto& t : terms) {
            json o = json::object();
            if (t.kind == SpatialTerm::Kind::monomial) {
                o["kind"] = "monomial";
                o["alpha"] = t.alpha;
            } else {
                o["kind"] = "fractional_laplacian";
                o["power"] = rational_to_json(t.power);
            }
            o["coeff"] = t.coeff;
            arr.push_back(std::move(o));
        }
        levels[std::to_string(j)] = std::move(arr);
    }
    return json{{"levels", std::move(levels)}, {"m", op.m()}, {"n", op.n()}};
}

// ---------------------------------------------------------------------------
// Homogeneous symbols

int SymbolTerm::degree() const {
    if (radial_power) return lambda_power + 2 * *radial_power;
    return lambda_power + std::accumulate(alpha.begin(), alpha.end(), 0);
}

int HomogeneousSymbol::degree() const {
    if (terms.empty()) throw ValidationError("empty homogeneous symbol");
    const int d = terms.front().degree();
    for (const auto& t : terms)
        if (t.degree() != d) throw ValidationError("symbol is not homogeneous (degrees differ)");
    return d;
}

std::vector<double> HomogeneousSymbol::lambda_coefficients(std::span<const double> direction) const {
    const int d = degree();
    std::vector<double> c(static_cast<std::size_t>(d + 1), 0.0);
    for (const auto& t : terms) {
        double v = t.coeff;
        if (t.radial_power) {
            double r2 = 0.0;
            for (double x : direction) r2 += x * x;
            v *= std::pow(r2, *t.radial_power);
        } else {
            for (std::size_t i = 0; i < t.alpha.size(); ++i) v *= std::pow(direction[i], t.alpha[i]);
        }
        c[static_cast<std::size_t>(t.lambda_power)] += v;
    }
    return c;
}

EvolutionOperator operator_from_symbols(const std::vector<HomogeneousSymbol>& symbols) {
    if (symbols.empty()) throw ValidationError("no symbols given");
    int m = 0;
    int n = symbols.front().n;
    for (const auto& s : symbols) {
        for (const auto& t : s.terms) m = std::max(m, t.lambda_power);
        if (s.n != n) throw ValidationError("symbols disagree on dimension");
    }
    double top = 0.0;
    std::map<int, std::vector<SpatialTerm>> levels;
    for (const auto& s : symbols) {
        for (const auto& t : s.terms) {
            const bool spatial_zero =
                t.radial_power ? *t.radial_power == 0
                               : std::all_of(t.alpha.begin(), t.alpha.end(), [](int a) { return a == 0; });
            if (t.lambda_power == m) {
                if (!spatial_zero) throw ValidationError("lambda^m term carries a spatial factor");
                top += t.coeff;
                continue;
            }
            if (t.radial_power) {
                // xi -> d_x makes |xi|^{2k} the operator Delta^k = (-1)^k (-Delta)^k
                const int k = *t.radial_power;
                const double sign = (k % 2 == 0) ? 1.0 : -1.0;
                levels[t.lambda_power].push_back(SpatialTerm::fractional(Rational(k), sign * t.coeff));
            } else {
                // xi^alpha -> d_x^alpha, whose Fourier multiplier is (i xi)^alpha
                MultiIndex a = t.alpha.empty() ? MultiIndex(static_cast<std::size_t>(n), 0) : t.alpha;
                levels[t.lambda_power].push_back(SpatialTerm::monomial(std::move(a), t.coeff));
            }
        }
    }
    if (top != 1.0)
        throw ValidationError("coefficient of lambda^m must be exactly 1 (normalize before calling)");
    return EvolutionOperator(m, n, std::move(levels));
}

std::optional<std::vector<double>> real_roots(std::span<const double> coeffs, double tol) {
    std::vector<double> c(coeffs.begin(), coeffs.end());
    while (!c.empty() && c.back() == 0.0) c.pop_back();
    if (c.empty()) throw NumericalError("zero polynomial has no well-defined roots");
    const int deg = static_cast<int>(c.size()) - 1;
    if (deg == 0) return std::vector<double>{};

    // Zero roots are split off exactly so that vanishing constant terms give exact 0.
    int zeros = 0;
    while (c[static_cast<std::size_t>(zeros)] == 0.0) ++zeros;
    std::vector<double> red(c.begin() + zeros, c.end());
    const int rdeg = static_cast<int>(red.size()) - 1;

    std::vector<double> roots(static_cast<std::size_t>(zeros), 0.0);
    if (rdeg > 0) {
        Eigen::MatrixXd C = Eigen::MatrixXd::Zero(rdeg, rdeg);
        for (int i = 1; i < rdeg; ++i) C(i, i - 1) = 1.0;
        for (int i = 0; i < rdeg; ++i) C(i, rdeg - 1) = -red[static_cast<std::size_t>(i)] / red.back();
        Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
        if (es.info() != Eigen::Success) throw NumericalError("companion eigenvalue solve failed");
        const auto ev = es.eigenvalues();
        double scale = 1.0;
        for (int i = 0; i < rdeg; ++i) scale = std::max(scale, std::abs(ev(i)));
        for (int i = 0; i < rdeg; ++i) {
            if (std::abs(ev(i).imag()) > tol * scale) return std::nullopt;
            roots.push_back(ev(i).real());
        }
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

namespace {

bool strictly_simple(const std::vector<double>& r, double tol) {
    double scale = 1.0;
    for (double x : r) scale = std::max(scale, std::abs(x));
    for (std::size_t i = 1; i < r.size(); ++i)
        if (r[i] - r[i - 1] <= tol * scale) return false;
    return true;
}

// roots of degree k-1 polynomial strictly between consecutive roots of degree k
bool strictly_interlace(const std::vector<double>& hi, const std::vector<double>& lo, double tol) {
    if (lo.size() + 1 != hi.size()) return false;
    double scale = 1.0;
    for (double x : hi) scale = std::max(scale, std::abs(x));
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (!(lo[i] - hi[i] > tol * scale && hi[i + 1] - lo[i] > tol * scale)) return false;
    }
    return true;
}

}  // namespace

InterlacingReport interlacing_check(const std::vector<HomogeneousSymbol>& symbols, int directions,
                                    std::uint64_t seed, double rel_gap_tol) {
    if (directions < 1) throw ValidationError("direction sample count must be >= 1");
    if (symbols.empty()) throw ValidationError("no symbols given");
    std::vector<HomogeneousSymbol> sorted = symbols;
    std::sort(sorted.begin(), sorted.end(),
              [](const HomogeneousSymbol& a, const HomogeneousSymbol& b) { return a.degree() > b.degree(); });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i - 1].degree() != sorted[i].degree() + 1)
            throw ValidationError("symbols must have consecutive degrees");
    const int n = sorted.front().n;

    Rng rng(seed);
    InterlacingReport report;
    report.all_strictly_hyperbolic = report.all_strictly_interlacing = report.all_zero_root = true;
    for (int d = 0; d < directions; ++d) {
        std::vector<double> dir(static_cast<std::size_t>(n), 0.0);
        if (d == 0) {
            dir[0] = 1.0;
        } else {
            double norm = 0.0;
            for (auto& x : dir) {
                x = rng.normal();
                norm += x * x;
            }
            norm = std::sqrt(norm);
            for (auto& x : dir) x /= norm;
        }
        DirectionResult res;
        res.direction = dir;
        bool hyperbolic = true;
        for (const auto& s : sorted) {
            auto coeffs = s.lambda_coefficients(dir);
            std::optional<std::vector<double>> roots;
            try {
                if (std::abs(coeffs.back()) < 1e-14) throw NumericalError("leading coefficient vanishes");
                roots = real_roots(coeffs);
            } catch (const NumericalError& e) {
                res.failure = e.what();
            }
            if (!roots) {
                hyperbolic = false;
                res.roots.emplace_back();
                continue;
            }
            if (!strictly_simple(*roots, rel_gap_tol)) hyperbolic = false;
            res.roots.push_back(*roots);
        }
        res.strictly_hyperbolic = hyperbolic && !res.failure;
        bool inter = res.strictly_hyperbolic;
        for (std::size_t i = 1; inter && i < sorted.size(); ++i) {
            inter = strictly_interlace(res.roots[i - 1], res.roots[i], rel_gap_tol);
            if (!inter)
                res.failure = "roots of the degree " + std::to_string(sorted[i - 1].degree()) + " and " +
                              std::to_string(sorted[i].degree()) + " symbols do not strictly interlace";
        }
        res.strictly_interlacing = inter && sorted.size() > 1;
        const auto low = sorted.back().lambda_coefficients(dir);
        double lscale = 0.0;
        for (double c : low) lscale = std::max(lscale, std::abs(c));
        res.zero_root_at_expected_level = std::abs(low.front()) <= 1e-12 * std::max(lscale, 1.0);

        report.all_strictly_hyperbolic &= res.strictly_hyperbolic;
        report.all_strictly_interlacing &= res.strictly_interlacing;
        report.all_zero_root &= res.zero_root_at_expected_level;
        report.directions.push_back(std::move(res));
    }
    return report;
}

json to_json(const InterlacingReport& report) {
    json dirs = json::array();
    for (const auto& d : report.directions) {
        json o{{"direction", d.direction},
               {"roots", d.roots},
               {"strictly_hyperbolic", d.strictly_hyperbolic},
               {"strictly_interlacing", d.strictly_interlacing},
               {"zero_root_at_expected_level", d.zero_root_at_expected_level}};
        if (d.failure) o["failure"] = *d.failure;
        dirs.push_back(std::move(o));
    }
    return json{{"all_strictly_hyperbolic", report.all_strictly_hyperbolic},
                {"all_strictly_interlacing", report.all_strictly_interlacing},
                {"all_zero_root", report.all_zero_root},
                {"directions", std::move(dirs)}};
}

}  // namespace fujita
