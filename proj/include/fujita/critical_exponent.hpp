#pragma once

#include "fujita/operator_model.hpp"
#include "fujita/rational.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fujita {

/// eta -> slope * eta + intercept, contributed by level j (slope = j - ell, intercept = r_j).
struct AffinePiece {
    Rational slope;
    Rational intercept;
    int source_level = 0;

    Rational at(const Rational& eta) const { return slope * eta + intercept; }
};

struct EnvelopeSegment {
    Rational begin;
    ExtRational end;  // +inf on the last segment
    AffinePiece piece;
};

/// Concave lower envelope g(eta) = min_j (j - ell) eta + r_j on [0, inf).
class PiecewiseAffine {
public:
    explicit PiecewiseAffine(std::vector<EnvelopeSegment> segments, std::vector<AffinePiece> family = {});

    const std::vector<EnvelopeSegment>& segments() const noexcept { return segments_; }
    /// Every affine function the envelope was built from.
    const std::vector<AffinePiece>& family() const noexcept { return family_; }

    /// Interior breakpoints, ascending.
    std::vector<Rational> breakpoints() const;

    Rational value(const Rational& eta) const;
    /// Segment containing eta; at a breakpoint, the segment starting there.
    const EnvelopeSegment& segment_at(const Rational& eta) const;
    /// Levels whose piece attains g(eta).
    std::set<int> active_levels(const Rational& eta) const;

private:
    std::vector<EnvelopeSegment> segments_;
    std::vector<AffinePiece> family_;
};

PiecewiseAffine build_envelope(const EvolutionOperator& op, int ell);

/// Envelope of an explicit affine family over [0, inf) (exact, sort-by-slope sweep).
PiecewiseAffine lower_envelope(std::vector<AffinePiece> family);

/// h(eta) = 1 + g / (n + eta - g)_+ with 1/0 = inf; eta = inf gives the limit along the last segment.
ExtRational evaluate_h(const PiecewiseAffine& env, const Rational& n, const ExtRational& eta);
ExtRational evaluate_h(const PiecewiseAffine& env, int n, const ExtRational& eta);

struct CriticalExponentReport {
    ExtRational p_c;
    std::optional<ExtRational> eta_bar;
    std::set<int> active_levels_at_max;
    /// When p_c is infinite: the closed eta interval where n + eta - g <= 0 (end may be inf).
    std::optional<std::pair<Rational, ExtRational>> infinite_region;
    std::vector<std::string> n_validity;
    std::optional<std::string> regime_label;
    bool degenerate = false;  // p_c == 1
};

CriticalExponentReport maximize(const PiecewiseAffine& env, int n);
CriticalExponentReport maximize(const PiecewiseAffine& env, const Rational& n);

/// Convenience: build_envelope + maximize + regime label.
CriticalExponentReport critical_exponent(const EvolutionOperator& op, int ell);

/// "classical", "effective", "non-effective" for d_t^2 + a(-Delta)^delta d_t + b(-Delta)^sigma
/// with a, b > 0 and delta < sigma; "unclassified" otherwise.
std::string regime_classify(const EvolutionOperator& op, int ell);

nlohmann::json to_json(const CriticalExponentReport& report);
nlohmann::json to_json(const PiecewiseAffine& env);

}  // namespace fujita
