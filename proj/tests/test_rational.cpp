#include "doctest.h"

#include "fujita/errors.hpp"
#include "fujita/rational.hpp"

using namespace fujita;

TEST_CASE("parse_rational accepts integers, fractions and exact decimals") {
    CHECK(parse_rational("7") == Rational(7));
    CHECK(parse_rational("-7/3") == Rational(-7, 3));
    CHECK(parse_rational("6/4") == Rational(3, 2));
    CHECK(parse_rational("0.25") == Rational(1, 4));
    CHECK(parse_rational("1e-3") == Rational(1, 1000));
    CHECK(parse_rational("2.5e1") == Rational(25));
}

TEST_CASE("parse_rational rejects malformed text") {
    CHECK_THROWS_AS(parse_rational(""), ValidationError);
    CHECK_THROWS_AS(parse_rational("1/0"), ValidationError);
    CHECK_THROWS_AS(parse_rational("abc"), ValidationError);
    CHECK_THROWS_AS(parse_rational("1/2/3"), ValidationError);
}

TEST_CASE("ExtRational orders infinity above every finite value") {
    const ExtRational inf = ExtRational::infinity();
    const ExtRational big(Rational(1000000));
    CHECK(big < inf);
    CHECK(inf == ExtRational::infinity());
    CHECK_FALSE(inf == big);
    CHECK(inf.to_string() == "inf");
    CHECK(ExtRational(Rational(7, 3)).to_string() == "7/3");
    CHECK_THROWS(inf.value());
    CHECK(ExtRational(Rational(1, 4)).to_double() == doctest::Approx(0.25));
}
