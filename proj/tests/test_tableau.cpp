#include "fixtures.hpp"
#include "sample_space.hpp"
#include "support.hpp"

#include "srkweak/tableau.hpp"

#include <doctest.h>

#include <json.hpp>

using namespace srkw;

namespace {

std::vector<Tableau> shipped() { return {ri1wm(), rs1wm(), euler_maruyama(false), euler_maruyama(true)}; }

std::string expect_scheme_error(const std::string& text) {
    try {
        (void)tableau_from_json(text);
    } catch (const SchemeError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("JSON round trip of the built-in schemes") {
    for (const auto& t : shipped()) {
        CAPTURE(t.name);
        const auto text = tableau_to_json(t);
        CHECK(tableau_from_json(text) == t);
        CHECK(tableau_to_json(tableau_from_json(text)) == text);
    }
}

TEST_CASE("shipped scheme files equal the built-ins") {
    const std::map<std::string, Tableau> files{{"ri1wm.json", ri1wm()},
                                               {"rs1wm.json", rs1wm()},
                                               {"euler.json", euler_maruyama(false)},
                                               {"euler3.json", euler_maruyama(true)}};
    for (const auto& [file, tab] : files) {
        CAPTURE(file);
        CHECK(load_tableau_file(testsupport::scheme_file(file)) == tab);
    }
    for (const auto& name : builtin_scheme_names()) CHECK_NOTHROW(load_scheme(name));
}

TEST_CASE("scheme file errors name the field") {
    auto j = nlohmann::ordered_json::parse(tableau_to_json(ri1wm()));
    auto without = [&](const char* key) {
        auto c = j;
        c.erase(key);
        return c.dump();
    };
    CHECK(expect_scheme_error(without("stages")).find("stages") != std::string::npos);
    CHECK(expect_scheme_error(without("rv_model")).find("rv_model") != std::string::npos);
    auto bad = j;
    bad["B"][0]["matrix"][1][0] = "one";
    CHECK(expect_scheme_error(bad.dump()).find("B") != std::string::npos);
    bad = j;
    bad["calculus"] = "levy";
    CHECK(expect_scheme_error(bad.dump()).find("calculus") != std::string::npos);
    CHECK_FALSE(expect_scheme_error("{not json").empty());
    try {
        (void)load_tableau_file("/nonexistent/scheme.json");
        FAIL("expected an error");
    } catch (const SchemeError& e) {
        CHECK(std::string(e.what()).find("/nonexistent/scheme.json") != std::string::npos);
    }
}

TEST_CASE("two rules claiming the same slot conflict") {
    auto tab = ri1wm();
    tab.B.push_back(tab.B.front());
    tab.B.back().matrix[1][0] = 5;
    CHECK_THROWS_WITH_AS(ConcreteScheme(tab, 1), doctest::Contains("conflicting"), SchemeError);

    auto g = rs1wm();
    g.gamma.push_back(g.gamma.front());
    g.gamma.back().values[0] = 7;
    CHECK_THROWS_WITH_AS(ConcreteScheme(g, 1), doctest::Contains("conflicting"), SchemeError);
}

TEST_CASE("rules outside the declared families are rejected") {
    auto tab = rs1wm();
    tab.families = {FamilyPattern::parse("(k)")};
    CHECK_THROWS_AS(ConcreteScheme(tab, 2), SchemeError);
}

TEST_CASE("family and theta reference parsing") {
    CHECK(FamilyPattern::parse("(0,0)").deterministic());
    CHECK(FamilyPattern::parse("(k,l)").syms == std::vector<std::string>{"k", "l"});
    CHECK(FamilyPattern::parse("(k,l)").to_string() == "(k,l)");
    CHECK_THROWS_AS(FamilyPattern::parse("k,l"), SchemeError);
    CHECK(ThetaRef::parse("J(k,l)").to_string() == "J(k,l)");
    CHECK_THROWS_AS(ThetaRef::parse("J(k,"), SchemeError);
}

TEST_CASE("instantiated families") {
    const ConcreteScheme ri(ri1wm(), 2);
    // (0,0) plus (k,l) for k,l in {1,2}.
    CHECK(ri.families().size() == 5);
    CHECK(ri.families_of(1).size() == 2);
    const ConcreteScheme rs(rs1wm(), 3);
    CHECK(rs.families().size() == 4);
    CHECK(rs.families_of(2).size() == 1);
    CHECK(ri1wm().is_explicit());
    CHECK_FALSE(tableau_from_json(testsupport::deterministic_scheme_json("1", "1/2", "1/2", true)).is_explicit());
}

TEST_CASE("elementary weights of small trees") {
    const ConcreteScheme sc(euler_maruyama(), 1);
    const auto& model = sc.model();
    // Euler: Phi_S((t)) = h, Phi_S((s_1,s_1)) = I(1)^2.
    CHECK(phi_s(canonicalize_concrete(parse_node("(t)")), sc) == HalfPowerPoly::h_power(2));
    const auto I = model.thetas()[model.theta_id("I", {1})].expr;
    CHECK(phi_s(canonicalize_concrete(parse_node("(s_1,s_1)")), sc) == I * I);
    CHECK(model.expect(phi_s(canonicalize_concrete(parse_node("([t])")), sc)).is_zero());
    CHECK_THROWS_AS(phi_s(parse_node("(s_2)"), sc), TreeError);
}

TEST_CASE("symbolic expectation equals sample-space enumeration") {
    for (const auto& tab : shipped()) {
        for (int m : {1, 2}) {
            CAPTURE(tab.name);
            CAPTURE(m);
            const ConcreteScheme sc(tab, m);
            const auto trees = testsupport::concrete_trees(5, m);
            const auto brute = testsupport::brute_force_expectations(sc, trees);
            const auto nonzero = std::count_if(brute.begin(), brute.end(), [](const auto& e) { return !e.terms.empty(); });
            CHECK(nonzero > 5);
            for (std::size_t i = 0; i < trees.size(); ++i) {
                CAPTURE(trees[i].to_string());
                CHECK(testsupport::from_deterministic(sc.model().expect(phi_s(trees[i], sc))) == brute[i]);
            }
        }
    }
}

TEST_CASE("describe lists every rule") {
    const auto text = describe(ri1wm());
    CHECK(text.find("RI1WM") != std::string::npos);
    CHECK(text.find("J(k,l)") != std::string::npos);
    CHECK(text.find("when k!=l") != std::string::npos);
}
