#pragma once

#include <gmpxx.h>

#include <compare>
#include <string>
#include <string_view>

namespace fujita {

using Rational = mpq_class;

/// Parses "7", "-7/3" or an exact decimal such as "0.25" / "1e-3".
/// Throws ValidationError on anything else.
Rational parse_rational(std::string_view text);

std::string to_string(const Rational& q);
double to_double(const Rational& q);

/// A rational extended by +infinity, used for p_c and the maximizer eta_bar.
class ExtRational {
public:
    ExtRational() = default;
    ExtRational(Rational v) : value_(std::move(v)) {}  // NOLINT(implicit)
    ExtRational(long v) : value_(v) {}                 // NOLINT(implicit)

    static ExtRational infinity() {
        ExtRational r;
        r.infinite_ = true;
        return r;
    }

    bool is_infinite() const noexcept { return infinite_; }
    bool is_finite() const noexcept { return !infinite_; }

    /// Finite value; throws std::logic_error when infinite.
    const Rational& value() const;

    double to_double() const;
    std::string to_string() const;  // "inf" or canonical "a/b"

    friend bool operator==(const ExtRational& a, const ExtRational& b);
    friend std::strong_ordering operator<=>(const ExtRational& a, const ExtRational& b);

private:
    bool infinite_ = false;
    Rational value_{0};
};

}  // namespace fujita
