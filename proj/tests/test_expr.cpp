#include <doctest.h>

#include <map>
#include <string>
#include <vector>

#include "ctfid/expr.hpp"
#include "helpers.hpp"

using namespace ctfid;
using testutil::cst;
using testutil::sym;

namespace {

Estimand atom(std::map<std::string, ValueRef> event, std::map<std::string, ValueRef> given = {},
              std::map<std::string, ValueRef> intervened = {}) {
    DistributionAtom a;
    a.intervened = std::move(intervened);
    a.event = std::move(event);
    a.given = std::move(given);
    return make_atom(std::move(a));
}

TableCollection xy_tables() {
    TableCollection tc;
    tc.add({}, {}, {{{"X", {"0", "1"}}, {"Y", {"0", "1"}}}, {0.1, 0.2, 0.3, 0.4}});
    tc.add({"X"}, {"0"}, {{{"Y", {"0", "1"}}}, {0.6, 0.4}});
    tc.add({"X"}, {"1"}, {{{"Y", {"0", "1"}}}, {0.25, 0.75}});
    return tc;
}

}  // namespace

TEST_CASE("constructors normalize trivial shapes") {
    Estimand a = atom({{"X", cst("0")}});
    CHECK(expr_equal(make_prod({a}), a));
    CHECK(expr_equal(make_sum({}, a), a));

    Estimand nested = make_prod({a, make_prod({a, a})});
    CHECK(std::get<Expr::Prod>(nested->node).factors.size() == 3);

    Estimand merged = make_sum({{"u", "X"}}, make_sum({{"v", "Y"}}, a));
    CHECK(std::get<Expr::Sum>(merged->node).binders.size() == 2);
}

TEST_CASE("simplify folds constants") {
    Estimand a = atom({{"X", cst("0")}});
    CHECK(expr_equal(simplify(make_prod({make_const(1.0), a})), a));
    CHECK(expr_equal(simplify(make_prod({make_const(0.0), a})), make_const(0.0)));
    CHECK(expr_equal(simplify(make_frac(a, make_const(1.0))), a));
    CHECK(expr_equal(simplify(make_frac(a, a)), make_const(1.0)));
}

TEST_CASE("simplify cancels shared factors across a fraction") {
    Estimand a = atom({{"X", cst("0")}});
    Estimand b = atom({{"Y", cst("1")}});
    Estimand e = simplify(make_frac(make_prod({a, b}), a));
    CHECK(expr_equal(e, b));

    Estimand two_over_one = simplify(make_frac(make_prod({a, a, b}), a));
    CHECK(expr_equal(two_over_one, make_prod({a, b})));
}

TEST_CASE("simplify absorbs bound event entries") {
    Estimand joint = atom({{"X", cst("0")}, {"Y", sym("s")}});
    Estimand e = simplify(make_sum({{"s", "Y"}}, joint));
    CHECK(expr_equal(e, atom({{"X", cst("0")}})));
}

TEST_CASE("simplify pulls symbol-free factors out of sums") {
    Estimand px = atom({{"X", cst("0")}});
    Estimand cond = make_frac(atom({{"X", cst("0")}, {"Y", sym("s")}}), atom({{"X", cst("0")}}));
    Estimand e = simplify(make_sum({{"s", "Y"}}, make_prod({px, cond})));
    CHECK(expr_equal(e, px));
}

TEST_CASE("simplify leaves conditioning entries alone") {
    Estimand cond = atom({{"X", cst("0")}}, {{"Y", sym("s")}});
    Estimand e = simplify(make_sum({{"s", "Y"}}, cond));
    REQUIRE(std::holds_alternative<Expr::Sum>(e->node));
    CHECK(std::get<Expr::Sum>(e->node).binders.size() == 1);
}

TEST_CASE("free symbols and substitution") {
    Estimand body = atom({{"Y", sym("s")}, {"Z", sym("z")}}, {}, {{"X", sym("x")}});
    Estimand e = make_sum({{"s", "Y"}}, body);
    CHECK(free_symbols(e) == std::set<std::string>{"x", "z"});
    CHECK(mentions_symbol(body, "s"));
    CHECK_FALSE(mentions_symbol(e, "s"));
    CHECK_FALSE(mentions_symbol(e, "q"));

    Estimand sub = substitute(e, {{"z", cst("1")}, {"s", cst("0")}});
    CHECK(free_symbols(sub) == std::set<std::string>{"x"});
    CHECK(render(sub, RenderFormat::Text) == "Σ_{s} P_{X=x}(Y=s,Z=1)");
}

TEST_CASE("bound symbol placeholders get fresh readable names") {
    SymbolPool pool;
    Estimand e = make_sum({{"#Z", "Z"}}, atom({{"Z", sym("#Z")}}));
    Estimand named = rename_bound(e, pool);
    CHECK(render(named, RenderFormat::Text) == "Σ_{z} P(Z=z)");
    pool.reserve("w");
    Estimand clash = rename_bound(make_sum({{"#W", "W"}}, atom({{"W", sym("#W")}})), pool);
    CHECK(render(clash, RenderFormat::Text) == "Σ_{w'} P(W=w')");
}

TEST_CASE("text and latex rendering") {
    Estimand cond = make_frac(atom({{"X", cst("0")}, {"Y", cst("1")}, {"Z", sym("z")}}),
                              atom({{"X", cst("0")}, {"Z", sym("z")}}));
    Estimand e = make_sum({{"z", "Z"}}, make_prod({cond, atom({{"Z", sym("z")}})}));
    CHECK(render(e, RenderFormat::Text) == "Σ_{z} P(Y=1 | X=0,Z=z) P(Z=z)");
    CHECK(render(e, RenderFormat::Latex) ==
          "\\sum_{z} P\\left(Y=1 \\mid X=0,Z=z\\right) P\\left(Z=z\\right)");

    Estimand experimental = atom({{"Z", sym("z")}}, {}, {{"X", cst("0")}});
    CHECK(render(experimental, RenderFormat::Text) == "P_{X=0}(Z=z)");
    CHECK(render(experimental, RenderFormat::Latex) == "P_{X=0}\\left(Z=z\\right)");
}

TEST_CASE("fraction display only collapses genuine conditionals") {
    Estimand honest = make_frac(atom({{"X", cst("0")}}), atom({{"Y", cst("1")}}));
    CHECK(render(honest, RenderFormat::Text) == "P(X=0) / P(Y=1)");

    Estimand mixed = make_frac(atom({{"X", cst("0")}}, {}, {{"Z", cst("1")}}),
                               atom({{"X", cst("0")}}));
    CHECK(render(mixed, RenderFormat::Text) == "P_{Z=1}(X=0) / P(X=0)");
}

TEST_CASE("estimand json round trip") {
    Estimand e = make_sum(
        {{"z", "Z"}},
        make_prod({make_frac(atom({{"X", cst("0")}, {"Y", cst("1")}}), atom({{"X", cst("0")}})),
                   atom({{"Z", sym("z")}}, {}, {{"X", cst("1")}}), make_const(0.5)}));
    Estimand back = estimand_from_json(estimand_to_json(e));
    CHECK(expr_equal(back, e));
    CHECK_THROWS_AS(estimand_from_json("{\"kind\": \"mystery\"}"), input_error);
    CHECK_THROWS_AS(estimand_from_json("nope"), input_error);
}

TEST_CASE("evaluation against tables") {
    TableCollection tc = xy_tables();
    Estimand joint = atom({{"X", cst("0")}, {"Y", cst("1")}});
    CHECK(evaluate(joint, tc) == doctest::Approx(0.2));

    Estimand cond = make_frac(joint, atom({{"X", cst("0")}}));
    CHECK(evaluate(cond, tc) == doctest::Approx(0.2 / 0.3));

    Estimand experimental = atom({{"Y", cst("1")}}, {}, {{"X", cst("0")}});
    CHECK(evaluate(experimental, tc) == doctest::Approx(0.4));

    Estimand summed = make_sum({{"s", "Y"}}, atom({{"X", cst("1")}, {"Y", sym("s")}}));
    CHECK(evaluate(summed, tc) == doctest::Approx(0.7));

    Estimand bound = atom({{"Y", sym("s")}});
    CHECK(evaluate(bound, tc, {{"s", "0"}}) == doctest::Approx(0.4));
    CHECK_THROWS_AS(evaluate(bound, tc), evaluation_error);
}

TEST_CASE("evaluation flags zero conditioning mass") {
    TableCollection tc;
    tc.add({}, {}, {{{"X", {"0", "1"}}, {"Y", {"0", "1"}}}, {0.5, 0.5, 0.0, 0.0}});
    Estimand given = atom({{"Y", cst("1")}}, {{"X", cst("1")}});
    CHECK_THROWS_AS(evaluate(given, tc), zero_conditioning_error);
    Estimand ratio = make_frac(atom({{"X", cst("1")}, {"Y", cst("1")}}), atom({{"X", cst("1")}}));
    CHECK_THROWS_AS(evaluate(ratio, tc), zero_conditioning_error);
}

TEST_CASE("simplification preserves evaluation") {
    TableCollection tc = xy_tables();
    Estimand cond = make_frac(atom({{"X", cst("0")}, {"Y", sym("s")}}), atom({{"X", cst("0")}}));
    Estimand e = make_sum({{"s", "Y"}},
                          make_prod({atom({{"X", cst("0")}}), cond, make_const(1.0)}));
    CHECK(evaluate(simplify(e), tc) == doctest::Approx(evaluate(e, tc)));
}
