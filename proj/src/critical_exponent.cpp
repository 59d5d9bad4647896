#include "fujita/critical_exponent.hpp"

#include "fujita/errors.hpp"

#include <algorithm>
#include <map>

namespace fujita {

using nlohmann::json;

PiecewiseAffine::PiecewiseAffine(std::vector<EnvelopeSegment> segments, std::vector<AffinePiece> family)
    : segments_(std::move(segments)), family_(std::move(family)) {
    if (segments_.empty()) throw ValidationError("envelope needs at least one segment");
    if (segments_.front().begin != 0) throw ValidationError("envelope must start at eta = 0");
    if (!segments_.back().end.is_infinite()) throw ValidationError("envelope must extend to infinity");
    for (std::size_t i = 0; i + 1 < segments_.size(); ++i) {
        const auto& a = segments_[i];
        const auto& b = segments_[i + 1];
        if (a.end.is_infinite() || a.end.value() != b.begin)
            throw ValidationError("envelope segments must be contiguous");
        if (!(a.piece.slope > b.piece.slope)) throw ValidationError("envelope slopes must strictly decrease");
        if (a.piece.at(b.begin) != b.piece.at(b.begin)) throw ValidationError("envelope is discontinuous");
    }
}

std::vector<Rational> PiecewiseAffine::breakpoints() const {
    std::vector<Rational> out;
    for (std::size_t i = 1; i < segments_.size(); ++i) out.push_back(segments_[i].begin);
    return out;
}

const EnvelopeSegment& PiecewiseAffine::segment_at(const Rational& eta) const {
    if (eta < 0) throw ValidationError("eta must be >= 0");
    for (std::size_t i = segments_.size(); i-- > 0;)
        if (segments_[i].begin <= eta) return segments_[i];
    return segments_.front();
}

Rational PiecewiseAffine::value(const Rational& eta) const { return segment_at(eta).piece.at(eta); }

std::set<int> PiecewiseAffine::active_levels(const Rational& eta) const {
    const Rational g = value(eta);
    std::set<int> out;
    for (const auto& p : family_)
        if (p.at(eta) == g) out.insert(p.source_level);
    if (out.empty()) out.insert(segment_at(eta).piece.source_level);
    return out;
}

PiecewiseAffine lower_envelope(std::vector<AffinePiece> family) {
    if (family.empty()) throw ValidationError("empty affine family");
    for (auto& p : family) {
        p.slope.canonicalize();
        p.intercept.canonicalize();
    }
    const auto all = family;

    // one candidate per slope: the smallest intercept
    std::map<Rational, AffinePiece> by_slope;
    for (const auto& p : family) {
        auto it = by_slope.find(p.slope);
        if (it == by_slope.end() || p.intercept < it->second.intercept) by_slope[p.slope] = p;
    }
    std::vector<AffinePiece> lines;
    for (auto& [_, p] : by_slope) lines.push_back(p);

    // at eta = 0 the smallest intercept wins; among ties the smallest slope stays lowest afterwards
    auto current = *std::min_element(lines.begin(), lines.end(), [](const AffinePiece& a, const AffinePiece& b) {
        if (a.intercept != b.intercept) return a.intercept < b.intercept;
        return a.slope < b.slope;
    });

    std::vector<EnvelopeSegment> segments;
    Rational start(0);
    for (;;) {
        std::optional<Rational> best_x;
        const AffinePiece* best = nullptr;
        for (const auto& l : lines) {
            if (!(l.slope < current.slope)) continue;
            Rational x = (l.intercept - current.intercept) / (current.slope - l.slope);
            x.canonicalize();
            if (x < start) x = start;  // cannot happen for a true minimum; guards rounding-free logic
            if (!best_x || x < *best_x || (x == *best_x && l.slope < best->slope)) {
                best_x = x;
                best = &l;
            }
        }
        if (!best) {
            segments.push_back({start, ExtRational::infinity(), current});
            break;
        }
        if (*best_x > start) segments.push_back({start, ExtRational(*best_x), current});
        start = *best_x;
        current = *best;
    }
    return PiecewiseAffine(std::move(segments), all);
}

PiecewiseAffine build_envelope(const EvolutionOperator& op, int ell) {
    if (ell < 0 || ell > op.m() - 1)
        throw ValidationError("ell must satisfy 0 <= ell <= m-1 (got " + std::to_string(ell) + ")");
    std::vector<AffinePiece> family;
    for (int j : order_set_J(op))
        family.push_back({Rational(j - ell), minimal_order_r(op, j), j});
    return lower_envelope(std::move(family));
}

ExtRational evaluate_h(const PiecewiseAffine& env, const Rational& n, const ExtRational& eta) {
    if (eta.is_infinite()) {
        const auto& last = env.segments().back().piece;
        if (last.slope >= 1) return ExtRational::infinity();
        Rational lim = 1 + last.slope / (1 - last.slope);
        lim.canonicalize();
        return lim;
    }
    const Rational& e = eta.value();
    if (e < 0) throw ValidationError("eta must be >= 0");
    const Rational g = env.value(e);
    const Rational d = n + e - g;
    if (d <= 0) return ExtRational::infinity();
    Rational h = 1 + g / d;
    h.canonicalize();
    return h;
}

ExtRational evaluate_h(const PiecewiseAffine& env, int n, const ExtRational& eta) {
    return evaluate_h(env, Rational(n), eta);
}

namespace {

// d(eta) = n + eta - g(eta) on one segment: n - intercept + (1 - slope) eta
struct DenominatorLine {
    Rational c0, c1;
    Rational at(const Rational& e) const { return c0 + c1 * e; }
};

DenominatorLine denominator(const EnvelopeSegment& s, const Rational& n) {
    return {n - s.piece.intercept, 1 - s.piece.slope};
}

// First point where d <= 0, and the end of that (convex, hence single) region.
std::optional<std::pair<Rational, ExtRational>> nonpositive_region(const PiecewiseAffine& env, const Rational& n) {
    const auto& segs = env.segments();
    std::optional<Rational> begin;
    std::size_t first = 0;
    for (std::size_t i = 0; i < segs.size() && !begin; ++i) {
        const auto d = denominator(segs[i], n);
        if (d.at(segs[i].begin) <= 0) {
            begin = segs[i].begin;
            first = i;
        } else if (d.c1 < 0) {
            Rational root = -d.c0 / d.c1;
            root.canonicalize();
            if (segs[i].end.is_infinite() || root <= segs[i].end.value()) {
                begin = root;
                first = i;
            }
        }
    }
    if (!begin) return std::nullopt;
    for (std::size_t i = first; i < segs.size(); ++i) {
        const auto d = denominator(segs[i], n);
        if (d.c1 > 0) {
            Rational root = -d.c0 / d.c1;
            root.canonicalize();
            const Rational lo = std::max(segs[i].begin, *begin);
            if (root >= lo && (segs[i].end.is_infinite() || root < segs[i].end.value()))
                return std::make_pair(*begin, ExtRational(root));
        }
    }
    return std::make_pair(*begin, ExtRational::infinity());
}

std::vector<std::string> validity_notes(const PiecewiseAffine& env, const Rational& n) {
    // p_c is finite iff n + eta - g(eta) > 0 on [0, inf) and the last slope is < 1.
    Rational threshold(0);
    bool first = true;
    std::vector<Rational> pts{Rational(0)};
    for (const auto& b : env.breakpoints()) pts.push_back(b);
    for (const auto& p : pts) {
        Rational v = env.value(p) - p;
        if (first || v > threshold) threshold = v;
        first = false;
    }
    threshold.canonicalize();
    std::vector<std::string> notes;
    const auto& last = env.segments().back().piece;
    if (last.slope >= 1) {
        notes.push_back("final envelope slope " + to_string(last.slope) + " >= 1: h is unbounded for every n");
    } else {
        notes.push_back("p_c finite iff n > " + to_string(threshold));
        notes.push_back(n > threshold ? "satisfied for n = " + to_string(n)
                                      : "violated for n = " + to_string(n));
    }
    return notes;
}

}  // namespace

CriticalExponentReport maximize(const PiecewiseAffine& env, const Rational& n) {
    if (n <= 0) throw ValidationError("dimension n must be positive");
    CriticalExponentReport rep;
    rep.n_validity = validity_notes(env, n);

    if (auto region = nonpositive_region(env, n)) {
        rep.p_c = ExtRational::infinity();
        rep.eta_bar = ExtRational(region->first);
        rep.active_levels_at_max = env.active_levels(region->first);
        rep.infinite_region = region;
        return rep;
    }

    std::vector<Rational> candidates{Rational(0)};
    for (const auto& b : env.breakpoints()) candidates.push_back(b);

    ExtRational best = evaluate_h(env, n, ExtRational(candidates.front()));
    Rational best_eta = candidates.front();
    for (const auto& c : candidates) {
        const auto h = evaluate_h(env, n, ExtRational(c));
        if (h > best) {
            best = h;
            best_eta = c;
        }
    }
    const auto limit = evaluate_h(env, n, ExtRational::infinity());
    if (limit > best) {
        rep.p_c = limit;
        rep.eta_bar = ExtRational::infinity();
        rep.active_levels_at_max = {env.segments().back().piece.source_level};
        for (const auto& p : env.family())
            if (p.slope == env.segments().back().piece.slope) rep.active_levels_at_max.insert(p.source_level);
    } else {
        rep.p_c = best;
        rep.eta_bar = ExtRational(best_eta);
        rep.active_levels_at_max = env.active_levels(best_eta);
    }
    rep.degenerate = rep.p_c.is_finite() && rep.p_c.value() <= 1;
    return rep;
}

CriticalExponentReport maximize(const PiecewiseAffine& env, int n) { return maximize(env, Rational(n)); }

CriticalExponentReport critical_exponent(const EvolutionOperator& op, int ell) {
    auto rep = maximize(build_envelope(op, ell), op.n());
    const auto label = regime_classify(op, ell);
    if (label != "unclassified") rep.regime_label = label;
    return rep;
}

namespace {

// c * |xi|^{2p} with c > 0 written as a single term; returns p.
std::optional<Rational> single_radial_power(const std::vector<SpatialTerm>& terms) {
    if (terms.size() != 1) return std::nullopt;
    const auto& t = terms.front();
    if (t.kind == SpatialTerm::Kind::fractional_laplacian) {
        if (t.coeff > 0) return t.power;
        return std::nullopt;
    }
    const int total = static_cast<int>(t.order().get_num().get_si());
    if (total == 0) return t.coeff > 0 ? std::optional<Rational>(Rational(0)) : std::nullopt;
    if (t.alpha.size() != 1 || total % 2 != 0) return std::nullopt;
    // d_x^{2k} has multiplier (-1)^k xi^{2k}, i.e. (-1)^k (-Delta)^k
    const double c = ((total / 2) % 2 == 0) ? t.coeff : -t.coeff;
    if (c > 0) return Rational(total / 2);
    return std::nullopt;
}

}  // namespace

std::string regime_classify(const EvolutionOperator& op, int ell) {
    if (op.m() != 2 || ell < 0 || ell > 1) return "unclassified";
    const auto delta = single_radial_power(op.level(1));
    const auto sigma = single_radial_power(op.level(0));
    if (!delta || !sigma || !(*delta < *sigma)) return "unclassified";
    if (*delta == 0) return "classical";
    if (2 * *delta < *sigma) return "effective";
    return "non-effective";
}

json to_json(const PiecewiseAffine& env) {
    json segs = json::array();
    for (const auto& s : env.segments()) {
        segs.push_back(json{{"begin", to_string(s.begin)},
                            {"end", s.end.to_string()},
                            {"slope", to_string(s.piece.slope)},
                            {"intercept", to_string(s.piece.intercept)},
                            {"level", s.piece.source_level}});
    }
    return segs;
}

json to_json(const CriticalExponentReport& r) {
    json o;
    o["p_c"] = r.p_c.to_string();
    o["p_c_value"] = r.p_c.is_infinite() ? json("inf") : json(r.p_c.to_double());
    o["eta_bar"] = r.eta_bar ? json(r.eta_bar->to_string()) : json(nullptr);
    o["active_levels_at_max"] = r.active_levels_at_max;
    if (r.infinite_region)
        o["infinite_region"] = {to_string(r.infinite_region->first), r.infinite_region->second.to_string()};
    o["n_validity"] = r.n_validity;
    o["regime_label"] = r.regime_label ? json(*r.regime_label) : json(nullptr);
    o["degenerate"] = r.degenerate;
    if (r.degenerate)
        o["note"] = "formula degenerate: p_c <= 1, the test function non-existence argument is inapplicable";
    return o;
}

}  // namespace fujita
