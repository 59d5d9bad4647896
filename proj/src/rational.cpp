#include "fujita/rational.hpp"

#include "fujita/errors.hpp"

#include <cctype>
#include <limits>
#include <stdexcept>

namespace fujita {

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

Rational pow10(long e) {
    mpz_class p;
    mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(e < 0 ? -e : e));
    return e < 0 ? Rational(mpz_class(1), p) : Rational(p);
}

}  // namespace

Rational parse_rational(std::string_view text) {
    std::string s(text);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t b = 0;
    while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    s = s.substr(b);
    if (s.empty()) throw ValidationError("empty rational literal");

    bool negative = false;
    std::string body = s;
    if (body[0] == '+' || body[0] == '-') {
        negative = body[0] == '-';
        body = body.substr(1);
    }

    Rational out;
    if (auto slash = body.find('/'); slash != std::string::npos) {
        const auto num = body.substr(0, slash);
        const auto den = body.substr(slash + 1);
        if (!all_digits(num) || !all_digits(den))
            throw ValidationError("malformed rational literal '" + s + "'");
        mpz_class d(den, 10);
        if (d == 0) throw ValidationError("zero denominator in '" + s + "'");
        out = Rational(mpz_class(num, 10), d);
        out.canonicalize();
    } else {
        std::string mant = body;
        long exponent = 0;
        if (auto e = mant.find_first_of("eE"); e != std::string::npos) {
            const auto ex = mant.substr(e + 1);
            mant = mant.substr(0, e);
            std::string_view digits = ex;
            if (!digits.empty() && (digits[0] == '+' || digits[0] == '-')) digits.remove_prefix(1);
            if (!all_digits(digits) || digits.size() > 6)
                throw ValidationError("malformed exponent in '" + s + "'");
            exponent = std::stol(ex);
        }
        std::string intpart = mant, frac;
        if (auto dot = mant.find('.'); dot != std::string::npos) {
            intpart = mant.substr(0, dot);
            frac = mant.substr(dot + 1);
        }
        if (intpart.empty() && frac.empty()) throw ValidationError("malformed rational literal '" + s + "'");
        if ((!intpart.empty() && !all_digits(intpart)) || (!frac.empty() && !all_digits(frac)))
            throw ValidationError("malformed rational literal '" + s + "'");
        mpz_class digits(intpart + frac == "" ? "0" : intpart + frac, 10);
        out = Rational(digits) * pow10(exponent - static_cast<long>(frac.size()));
        out.canonicalize();
    }
    return negative ? Rational(-out) : out;
}

std::string to_string(const Rational& q) {
    Rational c = q;
    c.canonicalize();
    return c.get_str();
}

double to_double(const Rational& q) { return q.get_d(); }

const Rational& ExtRational::value() const {
    if (infinite_) throw std::logic_error("ExtRational::value() on infinity");
    return value_;
}

double ExtRational::to_double() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_.get_d();
}

std::string ExtRational::to_string() const { return infinite_ ? "inf" : fujita::to_string(value_); }

bool operator==(const ExtRational& a, const ExtRational& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.value_ == b.value_;
}

std::strong_ordering operator<=>(const ExtRational& a, const ExtRational& b) {
    if (a.infinite_ && b.infinite_) return std::strong_ordering::equal;
    if (a.infinite_) return std::strong_ordering::greater;
    if (b.infinite_) return std::strong_ordering::less;
    const int c = cmp(a.value_, b.value_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
}

}  // namespace fujita
