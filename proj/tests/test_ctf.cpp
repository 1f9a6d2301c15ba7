#include <doctest.h>

#include <cmath>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "ctfid/ctf.hpp"
#include "ctfid/graph.hpp"
#include "ctfid/oracle.hpp"
#include "helpers.hpp"

using namespace ctfid;
using testutil::cst;
using testutil::ct;
using testutil::cv;
using testutil::fixture;
using testutil::sym;

namespace {

NameSet block_bases(const CtfFactor& f) {
    NameSet out;
    for (const auto& t : f.events) out.insert(t.var.base);
    return out;
}

CtfEvent mediation_events() {
    return {ct(cv("Y", {{"W", cst("0")}, {"X", cst("1")}, {"Z", cst("0")}}), cst("1")),
            ct(cv("W", {{"X", cst("0")}}), cst("0")),
            ct(cv("X", {{"Z", cst("0")}}), cst("0")),
            ct(cv("Z"), cst("0"))};
}

}  // namespace

TEST_CASE("interventions on non-ancestors are dropped") {
    CausalDiagram g1b = load_diagram(fixture("fig1b.json"));
    CausalDiagram bd = load_diagram(fixture("fig3a.json"));

    CHECK(minimize(cv("Z", {{"X", cst("0")}, {"Y", cst("1")}}), g1b) ==
          cv("Z", {{"X", cst("0")}}));
    CHECK(minimize(cv("X", {{"Y", cst("1")}, {"Z", cst("0")}}), bd) ==
          cv("X", {{"Z", cst("0")}}));
    CHECK(minimize(cv("Y", {{"X", cst("0")}, {"Z", cst("1")}}), g1b) ==
          cv("Y", {{"X", cst("0")}, {"Z", cst("1")}}));
    CHECK(minimize(cv("Y"), g1b) == cv("Y"));
}

TEST_CASE("counterfactual ancestors of classic queries") {
    CausalDiagram bd = load_diagram(fixture("fig3a.json"));
    CausalDiagram nap = load_diagram(fixture("fig3c.json"));

    CHECK(ctf_ancestors({cv("Y", {{"X", cst("0")}})}, bd) ==
          std::set<CtfVariable>{cv("Y", {{"X", cst("0")}}), cv("Z")});
    CHECK(ctf_ancestors({cv("X", {{"Y", cst("1")}, {"Z", cst("0")}})}, bd) ==
          std::set<CtfVariable>{cv("X", {{"Z", cst("0")}})});
    CHECK(ctf_ancestors({cv("Y", {{"Z", cst("0")}})}, bd) ==
          std::set<CtfVariable>{cv("Y", {{"Z", cst("0")}}), cv("X", {{"Z", cst("0")}})});

    CHECK(ctf_ancestors({cv("Z"), cv("Y", {{"Z", cst("0")}})}, nap) ==
          std::set<CtfVariable>{cv("W"), cv("X", {{"Z", cst("0")}}),
                                cv("Y", {{"Z", cst("0")}}), cv("Z")});
    CHECK(ctf_ancestors({cv("Y", {{"X", cst("0")}})}, nap) ==
          std::set<CtfVariable>{cv("Y", {{"X", cst("0")}})});
}

TEST_CASE("unnesting introduces one symbol per distinct inner term") {
    CausalDiagram g = load_diagram(fixture("fig1b.json"));
    SymbolPool pool;
    NestedTerm inner{"Z", {{"X", NestedValue{cst("0")}}}};
    NestedTerm outer{"Y", {{"X", NestedValue{cst("1")}},
                           {"Z", NestedValue{std::make_shared<NestedTerm>(inner)}}}};
    UnnestResult un = unnest({{outer, cst("1")}}, g, pool);

    CHECK(render_event(un.event) == "Y[X=1,Z=z]=1, Z[X=0]=z");
    REQUIRE(un.binders.size() == 1);
    CHECK(un.binders[0].variable == "Z");
    CHECK(un.binders[0].symbol == "z");
}

TEST_CASE("a shared inner term is extracted once") {
    CausalDiagram g({{"R", {"0", "1"}}, {"A", {"0", "1"}}, {"B", {"0", "1"}}, {"C", {"0", "1"}}},
                    {{"R", "A"}, {"A", "B"}, {"A", "C"}}, {});
    SymbolPool pool;
    auto shared = std::make_shared<NestedTerm>(NestedTerm{"A", {{"R", NestedValue{cst("0")}}}});
    NestedEvent e{{NestedTerm{"B", {{"A", NestedValue{shared}}}}, cst("1")},
                  {NestedTerm{"C", {{"A", NestedValue{shared}}}}, cst("1")}};
    UnnestResult un = unnest(e, g, pool);
    CHECK(un.binders.size() == 1);
    CHECK(un.event.size() == 3);
    CHECK(render_event(un.event) == "B[A=a]=1, C[A=a]=1, A[R=0]=a");
}

TEST_CASE("an inner term must be a counterfactual of the intervened variable") {
    CausalDiagram g = load_diagram(fixture("fig1b.json"));
    SymbolPool pool;
    NestedTerm wrong{"Y", {{"Z", NestedValue{std::make_shared<NestedTerm>(
                               NestedTerm{"X", {{"Z", NestedValue{cst("0")}}}})}}}};
    CHECK_THROWS_AS(unnest({{wrong, cst("1")}}, g, pool), input_error);
}

TEST_CASE("event simplification") {
    CausalDiagram g = load_diagram(fixture("fig1b.json"));

    SUBCASE("self-interventions are tautological or impossible") {
        auto taut = simplify_events({ct(cv("X", {{"X", cst("0")}}), cst("0"))}, g);
        CHECK_FALSE(taut.zero);
        CHECK(taut.events.empty());
        auto impossible = simplify_events({ct(cv("X", {{"X", cst("0")}}), cst("1"))}, g);
        CHECK(impossible.zero);
    }

    SUBCASE("repeated variables merge or contradict") {
        auto merged = simplify_events({ct(cv("Y", {{"X", cst("0")}}), sym("s")),
                                       ct(cv("Y", {{"X", cst("0")}}), cst("1"))}, g);
        CHECK_FALSE(merged.zero);
        REQUIRE(merged.events.size() == 1);
        CHECK(merged.events[0].value == cst("1"));
        REQUIRE(merged.unified.count("s") == 1);
        CHECK(merged.unified.at("s") == cst("1"));

        auto clash = simplify_events({ct(cv("Y", {{"X", cst("0")}}), cst("1")),
                                      ct(cv("Y", {{"X", cst("0")}}), cst("0"))}, g);
        CHECK(clash.zero);

        auto twins = simplify_events({ct(cv("Y", {{"X", cst("0")}}), sym("s")),
                                      ct(cv("Y", {{"X", cst("0")}}), sym("t"))}, g);
        CHECK(twins.events.size() == 1);
        CHECK(twins.unified.size() == 1);
    }

    SUBCASE("subscripts are minimized before comparison") {
        auto out = simplify_events({ct(cv("Z", {{"X", cst("0")}, {"Y", cst("1")}}), cst("1")),
                                    ct(cv("Z", {{"X", cst("0")}}), cst("1"))}, g);
        CHECK(out.events.size() == 1);
        CHECK(out.events[0].var == cv("Z", {{"X", cst("0")}}));
    }
}

TEST_CASE("ancestral factorization of the treated-and-outcome conjunction") {
    CausalDiagram nap = load_diagram(fixture("fig3c.json"));
    CtfEvent closed{ct(cv("Y", {{"X", cst("0")}}), cst("1")), ct(cv("X"), cst("1")),
                    ct(cv("Z"), sym("z")), ct(cv("W"), sym("w"))};

    CtfFactor f = ancestral_factorize(closed, nap);
    CHECK(render_factor(f) == "P(Y[X=0]=1, X[Z=z]=1, Z[W=w]=z, W=w)");
    CHECK(ancestral_factorize(f.events, nap).events == f.events);
}

TEST_CASE("ancestral factorization requires a closed input") {
    CausalDiagram bd = load_diagram(fixture("fig3a.json"));
    CHECK_THROWS_AS(ancestral_factorize({ct(cv("Y", {{"X", cst("0")}}), cst("1"))}, bd),
                    input_error);
}

TEST_CASE("component blocks follow the confounding pattern") {
    CtfFactor f{mediation_events()};

    auto markovian = factor_decompose(f, load_diagram(fixture("fig4a.json")));
    REQUIRE(markovian.size() == 4);
    CHECK(block_bases(markovian[0]) == NameSet{"Y"});
    CHECK(block_bases(markovian[1]) == NameSet{"W"});
    CHECK(block_bases(markovian[2]) == NameSet{"X"});
    CHECK(block_bases(markovian[3]) == NameSet{"Z"});

    auto zy = factor_decompose(f, load_diagram(fixture("fig4b.json")));
    REQUIRE(zy.size() == 3);
    CHECK(block_bases(zy[0]) == NameSet{"Y", "Z"});
    CHECK(block_bases(zy[1]) == NameSet{"W"});
    CHECK(block_bases(zy[2]) == NameSet{"X"});
    CHECK(zy[0].events[0].var.base == "Y");
    CHECK(zy[0].events[1].var.base == "Z");

    auto xw = factor_decompose(f, load_diagram(fixture("fig4c.json")));
    REQUIRE(xw.size() == 3);
    CHECK(block_bases(xw[0]) == NameSet{"Y"});
    CHECK(block_bases(xw[1]) == NameSet{"W", "X"});
    CHECK(block_bases(xw[2]) == NameSet{"Z"});
}

TEST_CASE("block factors recover from the counterfactual joint") {
    CausalDiagram g = load_diagram(fixture("fig4b.json"));
    CtfFactor f{mediation_events()};
    std::vector<std::string> order = topological_order(g);

    std::vector<CtfVariable> vars;
    for (const auto& t : f.events) vars.push_back(t.var);

    for (std::uint64_t seed : {2, 9}) {
        DiscreteSCM m = random_scm(g, seed);
        TableCollection tc;
        tc.add({}, {}, ctf_joint_table(m, vars));

        double whole = 1.0;
        for (const auto& block : factor_decompose(f, g)) {
            Estimand part = factor_from_joint(f, block_bases(block), order);
            double got = evaluate(part, tc);
            CHECK(std::abs(got - ctf_probability(m, block.events)) < 1e-9);
            whole *= got;
        }
        CHECK(std::abs(whole - ctf_probability(m, f.events)) < 1e-9);
    }
}

TEST_CASE("repeated bases contribute one ratio per occurrence") {
    CausalDiagram g = load_diagram(fixture("fig5c.json"));
    CtfFactor f{{ct(cv("Y", {{"W", cst("1")}, {"Z", cst("0")}}), cst("1")),
                 ct(cv("Z", {{"W", cst("0")}}), cst("0")),
                 ct(cv("W", {{"X", cst("0")}}), cst("1")),
                 ct(cv("W", {{"X", cst("1")}}), cst("0")),
                 ct(cv("X"), cst("1"))}};
    std::vector<std::string> order = topological_order(g);
    std::vector<CtfVariable> vars;
    for (const auto& t : f.events) vars.push_back(t.var);

    DiscreteSCM m = random_scm(g, 4);
    TableCollection tc;
    tc.add({}, {}, ctf_joint_table(m, vars));

    Estimand part = factor_from_joint(f, {"W"}, order);
    double expected = ctf_probability(m, {ct(cv("W", {{"X", cst("0")}}), cst("1")),
                                          ct(cv("W", {{"X", cst("1")}}), cst("0"))});
    CHECK(std::abs(evaluate(part, tc) - expected) < 1e-9);
}

TEST_CASE("consistency rejects clashing assignments") {
    CausalDiagram bow = load_diagram(fixture("fig5b.json"));
    CausalDiagram g4c = load_diagram(fixture("fig4c.json"));
    CausalDiagram g1b = load_diagram(fixture("fig1b.json"));

    SUBCASE("event value against subscript value") {
        auto r = check_consistency(
            CtfFactor{{ct(cv("Y", {{"X", cst("0")}}), cst("1")), ct(cv("X"), cst("1"))}}, bow);
        CHECK_FALSE(r.consistent);
        CHECK(r.witness == "P(Y[X=0]=1, X=1)");
    }

    SUBCASE("two subscripts of the same variable") {
        auto r = check_consistency(CtfFactor{{ct(cv("W", {{"X", cst("1")}}), sym("w")),
                                              ct(cv("W", {{"X", cst("0")}}), sym("w'"))}},
                                   mutilate(g4c, {}, {"W"}));
        CHECK_FALSE(r.consistent);
        CHECK(r.witness == "P(W[X=1]=w, W[X=0]=w')");
    }

    SUBCASE("matching values are consistent") {
        auto r = check_consistency(CtfFactor{{ct(cv("W", {{"X", cst("0")}}), sym("w")),
                                              ct(cv("X", {{"Z", sym("z")}}), cst("0"))}},
                                   g4c);
        CHECK(r.consistent);
    }

    SUBCASE("distinct symbols may differ") {
        auto r = check_consistency(
            CtfFactor{{ct(cv("Y", {{"X", sym("s")}}), cst("1")), ct(cv("X"), sym("t"))}}, bow);
        CHECK_FALSE(r.consistent);
    }

    SUBCASE("a shared symbol is one value") {
        auto r = check_consistency(
            CtfFactor{{ct(cv("Y", {{"X", sym("s")}}), cst("1")), ct(cv("X"), sym("s"))}}, bow);
        CHECK(r.consistent);
    }

    SUBCASE("the factor must span one component") {
        CHECK_THROWS_AS(check_consistency(CtfFactor{{ct(cv("Y", {{"X", cst("0")}}), cst("1")),
                                                     ct(cv("X"), cst("1"))}},
                                          g1b),
                        input_error);
    }
}
