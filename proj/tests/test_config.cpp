#include <doctest.h>

#include <string>

#include "fsp/config.hpp"

using namespace fsp;

TEST_CASE("minimal geodesic config parses with defaults applied") {
    const std::string text =
        "[scenario]\n"
        "name = geodesic\n"
        "[metric]\n"
        "name = minkowski\n"
        "[initial]\n"
        "U = 1 0 0 0\n"
        "[integrator]\n"
        "s_end = 2.0\n";
    const ParseResult r = parse_config(text);
    for (const auto& e : r.errors) MESSAGE(e.str());
    REQUIRE(r.ok());
    CHECK(r.config->scenario == "geodesic");
    CHECK(r.config->seed == 0);
    CHECK(r.config->step == 0.01);
    CHECK(r.config->x0[1] == 0.0);
    CHECK(r.config->u0[0] == 1.0);
    CHECK(r.config->out_dir == "out");
}

TEST_CASE("papapetrou without a mass fails validation naming the field") {
    const std::string text =
        "[scenario]\n"
        "name = papapetrou\n"
        "[metric]\n"
        "name = schwarzschild\n"
        "M = 1\n"
        "[initial]\n"
        "x = 0 6 1.5707963267948966 0\n"
        "U = circular\n"
        "[integrator]\n"
        "s_end = 10\n"
        "[particle]\n"
        "spin = 0 0 0 0.01 0 0\n";
    const ParseResult r = parse_config(text);
    REQUIRE(!r.ok());
    bool found = false;
    for (const auto& e : r.errors)
        if (e.field == "particle.m" && e.message == "m required") found = true;
    CHECK(found);
}

TEST_CASE("duplicate keys are parse errors carrying both line numbers") {
    const std::string text =
        "[scenario]\n"        // line 1
        "name = geodesic\n"   // line 2
        "seed = 1\n"          // line 3
        "seed = 2\n";         // line 4
    const ParseResult r = parse_config(text);
    REQUIRE(!r.ok());
    bool found = false;
    for (const auto& e : r.errors)
        if (e.kind == ConfigError::Kind::parse && e.message == "duplicate key" && e.line == 3 &&
            e.other_line == 4)
            found = true;
    CHECK(found);
}

TEST_CASE("all errors are collected, not just the first") {
    const std::string text =
        "[scenario]\n"
        "name = lorentz\n"
        "typo_key = 1\n"
        "[integrator]\n"
        "step = -0.5\n"
        "no equals sign here\n";
    const ParseResult r = parse_config(text);
    REQUIRE(!r.ok());
    CHECK(r.errors.size() >= 4);  // typo, bad step, parse error, missing m/e/U/s_end...
}

TEST_CASE("unknown scenario and metric names are rejected") {
    const std::string text =
        "[scenario]\n"
        "name = warp\n"
        "[metric]\n"
        "name = godel\n";
    const ParseResult r = parse_config(text);
    REQUIRE(!r.ok());
    int named = 0;
    for (const auto& e : r.errors) {
        if (e.field == "scenario.name") ++named;
        if (e.field == "metric.name") ++named;
    }
    CHECK(named == 2);
}

TEST_CASE("circular velocity keyword requires schwarzschild") {
    const std::string text =
        "[scenario]\n"
        "name = geodesic\n"
        "[metric]\n"
        "name = minkowski\n"
        "[initial]\n"
        "U = circular\n"
        "[integrator]\n"
        "s_end = 1\n";
    const ParseResult r = parse_config(text);
    CHECK(!r.ok());
}
