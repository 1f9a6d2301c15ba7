#include <doctest.h>

#include <cmath>
#include <memory>
#include <set>
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

TEST_CASE("hand-built confounded pair") {
    DiscreteSCM m = load_scm(fixture("scm_bow.json"));

    auto obs = interventional_table(m, {});
    CHECK(obs.marginal({{"X", "1"}}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(interventional_table(m, {{"X", "1"}}).marginal({{"Y", "1"}}) ==
          doctest::Approx(0.7).epsilon(1e-12));

    CHECK(ctf_probability(m, CtfEvent{ct(cv("Y", {{"X", cst("0")}}), cst("1"))}) ==
          doctest::Approx(0.3).epsilon(1e-12));
    CHECK(ctf_probability(m, CtfEvent{ct(cv("Y", {{"X", cst("0")}}), cst("1")),
                                      ct(cv("X"), cst("1"))}) ==
          doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("potential responses solve mechanisms unit by unit") {
    DiscreteSCM m = load_scm(fixture("scm_bow.json"));
    auto natural = potential_response(m, {}, {1, 0});
    CHECK(natural.at("X") == "1");
    CHECK(natural.at("Y") == "0");
    auto forced = potential_response(m, {{"X", "0"}}, {1, 0});
    CHECK(forced.at("X") == "0");
    CHECK(forced.at("Y") == "1");
    CHECK_THROWS_AS(potential_response(m, {}, {1}), input_error);
    CHECK_THROWS_AS(potential_response(m, {{"Q", "0"}}, {0, 0}), input_error);
}

TEST_CASE("counterfactual joint tables") {
    DiscreteSCM m = load_scm(fixture("scm_bow.json"));
    auto joint = ctf_joint_table(m, {cv("Y", {{"X", cst("0")}}), cv("Y", {{"X", cst("1")}})});
    REQUIRE(joint.variables.size() == 2);
    CHECK(joint.variables[0].name == "Y[X=0]");
    CHECK(joint.variables[1].name == "Y[X=1]");
    CHECK(joint.marginal({{"Y[X=0]", "0"}, {"Y[X=1]", "1"}}) ==
          doctest::Approx(0.7).epsilon(1e-12));
    CHECK(joint.marginal({{"Y[X=0]", "1"}, {"Y[X=1]", "0"}}) ==
          doctest::Approx(0.3).epsilon(1e-12));
    CHECK(joint.marginal({{"Y[X=0]", "1"}, {"Y[X=1]", "1"}}) ==
          doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("scm json round trip") {
    DiscreteSCM m = load_scm(fixture("scm_bow.json"));
    DiscreteSCM back = scm_from_json(scm_to_json(m));
    CHECK(ctf_probability(back, CtfEvent{ct(cv("Y", {{"X", cst("0")}}), cst("1")),
                                         ct(cv("X"), cst("1"))}) ==
          doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("construction validates shape and confounding") {
    DiscreteSCM m = load_scm(fixture("scm_bow.json"));
    auto exo = m.exogenous();
    auto mech = m.mechanisms();

    std::vector<double> short_pu{1.0};
    CHECK_THROWS_AS(DiscreteSCM(m.diagram(), exo, short_pu, mech), input_error);

    std::vector<double> lopsided{0.9, 0.9, 0.1, 0.1};
    CHECK_THROWS_AS(DiscreteSCM(m.diagram(), exo, lopsided, mech), input_error);

    CausalDiagram plain({{"X", {"0", "1"}}, {"Y", {"0", "1"}}}, {{"X", "Y"}}, {});
    CHECK_THROWS_AS(DiscreteSCM(plain, exo, m.p_u(), mech), input_error);

    auto missing = mech;
    missing.erase("Y");
    CHECK_THROWS_AS(DiscreteSCM(m.diagram(), exo, m.p_u(), missing), input_error);
}

TEST_CASE("nested events agree with their unnested expansion") {
    CausalDiagram g = load_diagram(fixture("fig1b.json"));
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        DiscreteSCM m = random_scm(g, seed);

        NestedTerm inner{"Z", {{"X", NestedValue{cst("0")}}}};
        NestedTerm outer{"Y", {{"X", NestedValue{cst("1")}},
                               {"Z", NestedValue{std::make_shared<NestedTerm>(inner)}}}};
        double nested = ctf_probability(m, NestedEvent{{outer, cst("1")}});

        double flat = 0.0;
        for (const auto& z : g.domain("Z"))
            flat += ctf_probability(
                m, CtfEvent{ct(cv("Y", {{"X", cst("1")}, {"Z", cst(z)}}), cst("1")),
                            ct(cv("Z", {{"X", cst("0")}}), cst(z))});
        CHECK(std::abs(nested - flat) < 1e-12);
    }
}

TEST_CASE("random models are reproducible and strictly positive") {
    CausalDiagram g = load_diagram(fixture("fig1b.json"));
    CHECK(scm_to_json(random_scm(g, 7)) == scm_to_json(random_scm(g, 7)));
    CHECK(scm_to_json(random_scm(g, 7)) != scm_to_json(random_scm(g, 8)));

    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        DiscreteSCM m = random_scm(g, seed);
        auto joint = interventional_table(m, {});
        joint.validate();
        double least = 1.0;
        for (double p : joint.probs) least = std::min(least, p);
        CHECK(least > 0.0);
    }
}

TEST_CASE("exogenous state space is capped") {
    std::vector<Variable> vars;
    for (int i = 0; i < 25; ++i) vars.push_back({"V" + std::to_string(i), {"0", "1"}});
    CausalDiagram wide(vars, {}, {});
    CHECK_THROWS_AS(random_scm(wide, 1), input_error);
}

TEST_CASE("interventional families carry every requested regime") {
    DiscreteSCM m = load_scm(fixture("scm_bow.json"));
    TableCollection tc = interventional_family(m, {{}, {"X"}});
    CHECK(tc.lookup({}, {}).marginal({{"Y", "1"}}) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(tc.lookup({{"X", "1"}}).marginal({{"Y", "1"}}) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(tc.lookup({{"X", "0"}}).marginal({{"Y", "1"}}) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK_THROWS_AS(tc.lookup({{"Y", "0"}}), evaluation_error);
}
