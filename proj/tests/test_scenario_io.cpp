#include <doctest.h>

#include <cstdlib>

#include "clarklab/scenario_io.hpp"
#include "clarklab/suites.hpp"

using namespace clarklab;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error raised");
    return ErrorKind::ParseError;
}

}  // namespace

TEST_SUITE("scenario_io") {
    TEST_CASE("complex literals") {
        CHECK(parse_complex("1") == cplx(1, 0));
        CHECK(parse_complex("-0.5+2i") == cplx(-0.5, 2));
        CHECK(parse_complex("3i") == cplx(0, 3));
        CHECK(parse_complex("-i") == cplx(0, -1));
        CHECK(std::abs(parse_complex("1.5-1e-3i") - cplx(1.5, -1e-3)) < 1e-15);
        CHECK(std::abs(parse_complex("2e-1+1e+1i") - cplx(0.2, 10)) < 1e-15);
        CHECK(parse_complex(nlohmann::json::array({0.25, -1}), "x") == cplx(0.25, -1));
        CHECK(parse_complex(nlohmann::json(0.75), "x") == cplx(0.75, 0));
        CHECK(kind_of([] { parse_complex("1+"); }) == ErrorKind::ParseError);
        CHECK(kind_of([] { parse_complex("abc"); }) == ErrorKind::ParseError);
    }

    TEST_CASE("rationals and quarter turns") {
        CHECK(parse_real(nlohmann::json("1/4"), "w") == 0.25);
        CHECK(parse_real(nlohmann::json(0.5), "w") == 0.5);
        CHECK(kind_of([] { parse_real(nlohmann::json("1/0"), "w"); }) == ErrorKind::ParseError);
        CHECK(turn_point(0.25) == cplx(0, 1));
        CHECK(turn_point(0.5) == cplx(-1, 0));
        CHECK(turn_point(0.75) == cplx(0, -1));
        CHECK(turn_point(0.0) == cplx(1, 0));
    }

    TEST_CASE("S3 from JSON matches the built-in scenario") {
        const auto s = parse_scenario_string(R"({
            "name": "s3", "d": 2,
            "atoms": [
              {"angle_over_2pi": 0, "weight": "1/2", "b_block": [1.4142135623730951, 0]},
              {"angle_over_2pi": "1/4", "weight": 0.25, "b_block": [0, 1.4142135623730951]},
              {"angle_over_2pi": "1/2", "weight": 0.25, "b_block": [0, 1.4142135623730951]}
            ],
            "gamma": ["0.2+0.1i", "-0.3i", 0.1, "-0.15+0.05i"],
            "seed": 9
        })");
        const auto ref = scenario_s3();
        REQUIRE(s.measure.atoms.size() == 3);
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(s.measure.atoms[j].point == ref.atoms[j].point);
            CHECK(s.measure.atoms[j].weight == ref.atoms[j].weight);
            CHECK((s.measure.atoms[j].b_block - ref.atoms[j].b_block).norm() < 1e-15);
        }
        CHECK(s.gamma(0, 1) == cplx(0, -0.3));
        CHECK(s.seed == 9);
        const auto back = scenario_from_json(scenario_to_json(s));
        CHECK((back.gamma - s.gamma).norm() < 1e-15);
        CHECK(back.measure.atoms.size() == 3);
    }

    TEST_CASE("input errors") {
        CHECK(kind_of([] { parse_scenario_string("{\"d\": 1,"); }) == ErrorKind::ParseError);
        CHECK(kind_of([] { parse_scenario_string(R"({"atoms": []})"); }) == ErrorKind::ParseError);
        CHECK(kind_of([] {
                  parse_scenario_string(R"({"d": 2, "atoms": [{"angle_over_2pi": 0, "weight": 1, "b_block": [1]}]})");
              }) == ErrorKind::ParseError);
        CHECK(kind_of([] { load_scenario("/nonexistent/x.json"); }) == ErrorKind::ParseError);
        try {
            parse_scenario_string("{\n  \"d\": 1\n  \"atoms\": []\n}");
            FAIL("expected a syntax error");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
    }

    TEST_CASE("random scenarios by seed") {
        const auto a = parse_scenario_string(R"({"random_seed": 3})");
        const auto b = parse_scenario_string(R"({"random_seed": 3})");
        CHECK(a.name == "random-3");
        CHECK((a.gamma - b.gamma).norm() == 0.0);
        CHECK(a.measure.atoms.size() == b.measure.atoms.size());
    }
}

TEST_SUITE("suites") {
    TEST_CASE("validate flags a non-isometric measure") {
        auto s = parse_scenario_string(R"({"d": 1, "atoms": [
            {"angle_over_2pi": 0, "weight": 0.6, "b_block": [1]},
            {"angle_over_2pi": "1/2", "weight": 0.6, "b_block": [1]}]})");
        const auto r = run_validate(s);
        CHECK_FALSE(r.pass());
        bool found = false;
        for (const auto& c : r.checks)
            if (c.check_id == "measure.isometry") {
                found = true;
                CHECK(std::abs(c.residual - 0.2) < 1e-12);
            }
        CHECK(found);
    }

    TEST_CASE("verify is deterministic apart from the timestamp") {
        Scenario s;
        s.name = "s2";
        s.measure = scenario_s2();
        s.gamma = CMatrix::Zero(1, 1);
        const auto a = run_verify(s, "dilation", 1).to_json(false);
        const auto b = run_verify(s, "dilation", 1).to_json(false);
        CHECK(a.dump() == b.dump());
        CHECK(a["pass"].get<bool>());
        CHECK_FALSE(a.contains("timestamp"));
        CHECK(run_verify(s, "dilation", 1).to_json(true).contains("timestamp"));
        CHECK(kind_of([&] { run_verify(s, "nope", 1); }) == ErrorKind::ParseError);
    }

    TEST_CASE("all suites pass on S1") {
        Scenario s;
        s.name = "s1";
        s.measure = scenario_s1();
        s.gamma = CMatrix::Constant(1, 1, 0.3);
        const auto r = run_verify(s, "all", 1);
        CHECK(r.failures() == 0);
        CHECK(r.checks.size() > 40);
    }

    TEST_CASE("tolerance overrides and scaling") {
        Scenario s;
        s.name = "s2";
        s.measure = scenario_s2();
        s.gamma = CMatrix::Constant(1, 1, 0.2);
        s.tolerance_overrides["dilation.isometry"] = 0.0;
        s.tolerance_overrides["dilation.forward"] = -1.0;
        const auto r = run_verify(s, "dilation", 1);
        for (const auto& c : r.checks)
            if (c.check_id == "dilation.forward") CHECK_FALSE(c.pass);
        CHECK(r.failures() >= 1);
    }

    TEST_CASE("CLARKLAB_TOL parsing") {
        ::setenv("CLARKLAB_TOL", "10", 1);
        CHECK(env_tolerance_scale() == 10.0);
        ::setenv("CLARKLAB_TOL", "abc", 1);
        CHECK(kind_of([] { env_tolerance_scale(); }) == ErrorKind::ParseError);
        ::setenv("CLARKLAB_TOL", "-1", 1);
        CHECK(kind_of([] { env_tolerance_scale(); }) == ErrorKind::ParseError);
        ::unsetenv("CLARKLAB_TOL");
        CHECK(env_tolerance_scale() == 1.0);
    }
}
