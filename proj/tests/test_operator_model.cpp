#include "doctest.h"

#include "fujita/errors.hpp"
#include "fujita/operator_model.hpp"

#include <cmath>

using namespace fujita;
using nlohmann::json;

namespace {

EvolutionOperator damped_wave(int n) {
    return EvolutionOperator(2, n,
                             {{0, {SpatialTerm::fractional(1, 1.0)}}, {1, {SpatialTerm::monomial({}, 1.0)}}});
}

// P5 + P4 + P3 of the coupled elastic/electromagnetic example with all constants 1.
std::vector<HomogeneousSymbol> elastic_symbols() {
    HomogeneousSymbol p5{{{1.0, 5, {}, 0}, {-3.0, 3, {}, 1}, {1.0, 1, {}, 2}}, 3};
    HomogeneousSymbol p4{{{2.0, 4, {}, 0}, {-4.0, 2, {}, 1}, {1.0, 0, {}, 2}}, 3};
    HomogeneousSymbol p3{{{1.0, 3, {}, 0}, {-1.0, 1, {}, 1}}, 3};
    return {p5, p4, p3};
}

}  // namespace

TEST_CASE("construction normalizes levels") {
    EvolutionOperator op(2, 1,
                         {{0, {SpatialTerm::fractional(1, 1.0), SpatialTerm::fractional(1, 2.0),
                               SpatialTerm::monomial({0}, 0.0)}}});
    REQUIRE(op.level(0).size() == 1);
    CHECK(op.level(0)[0].coeff == 3.0);
    CHECK(op.level(1).empty());
    CHECK(op.level(2).size() == 1);
    CHECK(op.zero_order_coeff(2) == 1.0);
}

TEST_CASE("construction rejects invalid input") {
    CHECK_THROWS_AS(EvolutionOperator(0, 1, {}), ValidationError);
    CHECK_THROWS_AS(EvolutionOperator(2, 0, {}), ValidationError);
    CHECK_THROWS_AS(EvolutionOperator(2, 1, {{2, {SpatialTerm::monomial({}, 1.0)}}}), ValidationError);
    CHECK_THROWS_AS(EvolutionOperator(2, 1, {{-1, {SpatialTerm::monomial({}, 1.0)}}}), ValidationError);
    CHECK_THROWS_AS(EvolutionOperator(2, 2, {{0, {SpatialTerm::monomial({1}, 1.0)}}}), ValidationError);
    CHECK_THROWS_AS(EvolutionOperator(2, 1, {{0, {SpatialTerm::fractional(-1, 1.0)}}}), ValidationError);
}

TEST_CASE("order set and minimal orders") {
    const auto op = damped_wave(1);
    CHECK(order_set_J(op) == std::set<int>{0, 1, 2});
    CHECK(minimal_order_r(op, 0) == Rational(2));
    CHECK(minimal_order_r(op, 1) == Rational(0));
    CHECK(minimal_order_r(op, 2) == Rational(0));

    EvolutionOperator free_wave(2, 1, {{0, {SpatialTerm::fractional(1, 1.0)}}});
    CHECK(order_set_J(free_wave) == std::set<int>{0, 2});
    CHECK_THROWS_AS(minimal_order_r(free_wave, 1), ValidationError);
}

TEST_CASE("symbols of monomial and fractional terms") {
    const std::vector<double> xi{2.0};
    CHECK(SpatialTerm::fractional(1, 1.0).symbol(xi) == Complex(4.0, 0.0));
    CHECK(SpatialTerm::fractional(Rational(1, 2), 3.0).symbol(xi).real() == doctest::Approx(6.0));
    // d_x -> i xi
    const auto d1 = SpatialTerm::monomial({1}, 1.0).symbol(xi);
    CHECK(d1.real() == doctest::Approx(0.0));
    CHECK(d1.imag() == doctest::Approx(2.0));
    CHECK(SpatialTerm::monomial({2}, 1.0).symbol(xi).real() == doctest::Approx(-4.0));
}

TEST_CASE("companion matrix layout") {
    const auto op = damped_wave(1);
    const std::vector<double> xi{3.0};
    const auto A = companion_matrix(op, xi);
    REQUIRE(A.rows() == 2);
    CHECK(A(0, 1) == Complex(1.0, 0.0));
    CHECK(A(0, 0) == Complex(0.0, 0.0));
    CHECK(A(1, 0).real() == doctest::Approx(-9.0));
    CHECK(A(1, 1).real() == doctest::Approx(-1.0));
}

TEST_CASE("JSON round trip is canonical and fail-closed") {
    const json doc = json::parse(R"({"m": 2, "n": 1, "name": "x",
        "levels": {"0": [{"kind": "fractional_laplacian", "power": "1/2", "coeff": 2.0}],
                   "1": [{"kind": "monomial", "alpha": [0], "coeff": 1.0}]}})");
    const auto op = parse_operator(doc);
    const auto again = parse_operator(serialize_operator(op));
    CHECK(op == again);
    CHECK(serialize_operator(op).dump() == serialize_operator(again).dump());

    json bad = doc;
    bad["extra"] = 1;
    CHECK_THROWS_AS(parse_operator(bad), ValidationError);
    json bad_term = doc;
    bad_term["levels"]["0"][0]["typo"] = 1;
    CHECK_THROWS_AS(parse_operator(bad_term), ValidationError);
    json bad_level = doc;
    bad_level["levels"]["two"] = json::array();
    CHECK_THROWS_AS(parse_operator(bad_level), ValidationError);
}

TEST_CASE("radiality detection") {
    CHECK(is_radial(damped_wave(2)));
    EvolutionOperator transport(1, 2, {{0, {SpatialTerm::monomial({1, 0}, 1.0)}}});
    CHECK_FALSE(is_radial(transport));
    EvolutionOperator laplacian_by_monomials(
        2, 2, {{0, {SpatialTerm::monomial({2, 0}, -1.0), SpatialTerm::monomial({0, 2}, -1.0)}}});
    CHECK(is_radial(laplacian_by_monomials));
}

TEST_CASE("with_dimension applies only to fractional operators") {
    const auto op3 = damped_wave(1).with_dimension(3);
    CHECK(op3.n() == 3);
    EvolutionOperator mono(1, 1, {{0, {SpatialTerm::monomial({2}, -1.0)}}});
    CHECK_THROWS_AS(mono.with_dimension(2), ValidationError);
}

TEST_CASE("operator_from_symbols reproduces the elastic example levels") {
    const auto op = operator_from_symbols(elastic_symbols());
    CHECK(op.m() == 5);
    CHECK(op.n() == 3);
    CHECK(op.zero_order_coeff(4) == doctest::Approx(2.0));
    CHECK(op.zero_order_coeff(3) == doctest::Approx(1.0));
    CHECK(minimal_order_r(op, 4) == 0);
    CHECK(minimal_order_r(op, 3) == 0);
    CHECK(minimal_order_r(op, 2) == 2);
    CHECK(minimal_order_r(op, 1) == 2);
    CHECK(minimal_order_r(op, 0) == 4);
    // |xi|^2 lambda^3 with coefficient -3 becomes 3 (-Delta) d_t^3
    const std::vector<double> xi{1.0, 0.0, 0.0};
    CHECK(op.level_symbol(3, xi).real() == doctest::Approx(3.0 + 1.0));
    CHECK(op.level_symbol(0, xi).real() == doctest::Approx(1.0));
}

TEST_CASE("operator_from_symbols requires a monic leading term") {
    auto symbols = elastic_symbols();
    symbols[0].terms[0].coeff = 2.0;
    CHECK_THROWS_AS(operator_from_symbols(symbols), ValidationError);
}

TEST_CASE("real_roots of simple polynomials") {
    const std::vector<double> c{-1.0, 0.0, 1.0};  // z^2 - 1
    const auto r = real_roots(c);
    REQUIRE(r);
    REQUIRE(r->size() == 2);
    CHECK((*r)[0] == doctest::Approx(-1.0));
    CHECK((*r)[1] == doctest::Approx(1.0));
    const std::vector<double> complex_pair{1.0, 0.0, 1.0};  // z^2 + 1
    CHECK_FALSE(real_roots(complex_pair));
    const std::vector<double> with_zero{0.0, -1.0, 0.0, 1.0};  // z^3 - z
    const auto z = real_roots(with_zero);
    REQUIRE(z);
    CHECK(z->size() == 3);
    CHECK((*z)[1] == 0.0);
}

TEST_CASE("interlacing check accepts the elastic example") {
    const auto rep = interlacing_check(elastic_symbols(), 16, 11);
    CHECK(rep.directions.size() == 16);
    CHECK(rep.all_strictly_hyperbolic);
    CHECK(rep.all_strictly_interlacing);
    CHECK(rep.all_zero_root);
    // e_1 first: P5 roots are 0, +-0.618.., +-1.618..
    const auto& roots5 = rep.directions[0].roots[0];
    REQUIRE(roots5.size() == 5);
    CHECK(roots5[3] == doctest::Approx((std::sqrt(5.0) - 1) / 2));
    CHECK(roots5[4] == doctest::Approx((std::sqrt(5.0) + 1) / 2));
}

TEST_CASE("interlacing check reports a witness for a non-interlacing pair") {
    // roots +-1 of lambda^2 - |xi|^2 against the root -2 xi_1 of lambda + 2 xi_1
    HomogeneousSymbol p2{{{1.0, 2, {}, 0}, {-1.0, 0, {}, 1}}, 1};
    HomogeneousSymbol p1{{{1.0, 1, {}, 0}, {2.0, 0, {1}, std::nullopt}}, 1};
    const auto rep = interlacing_check({p2, p1}, 4, 3);
    CHECK_FALSE(rep.all_strictly_interlacing);
    bool has_failure = false;
    for (const auto& d : rep.directions) has_failure |= d.failure.has_value();
    CHECK(has_failure);
}

TEST_CASE("interlacing check rejects non-consecutive degrees") {
    HomogeneousSymbol p3{{{1.0, 3, {}, 0}}, 1};
    HomogeneousSymbol p1{{{1.0, 1, {}, 0}}, 1};
    CHECK_THROWS_AS(interlacing_check({p3, p1}, 2, 1), ValidationError);
}
