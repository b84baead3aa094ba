#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hyopf/case_io.hpp"
#include "hyopf/errors.hpp"
#include "hyopf/network.hpp"

using namespace hyopf;

namespace {

NetworkCase two_bus_ac() {
    NetworkCase cs;
    cs.ac_buses = {{1, 0.9, 1.1, 0.0, 0.0, true}, {2, 0.9, 1.1, 0.5, 0.2, false}};
    cs.generators = {{1, 0.0, 2.0, -1.0, 1.0, 10.0, 100.0, 5.0}};
    AcLine l;
    l.from = 1;
    l.to = 2;
    l.series_admittance = {4.0, -10.0};
    l.s_max = 3.0;
    cs.ac_lines = {l};
    return cs;
}

NetworkCase three_bus_dc() {
    NetworkCase cs;
    cs.dc_buses = {{1, 0.9, 1.1, -3.0, 3.0, true, 1.0},
                   {2, 0.9, 1.1, -3.0, 3.0, false, 1.0},
                   {3, 0.9, 1.1, -3.0, 3.0, false, 1.0}};
    cs.dc_lines = {{1, 2, 5.0, 2.0}, {2, 3, 5.0, 2.0}};
    cs.acdc_converters = {{std::nullopt, 1, 1.0, 4.0}};
    return cs;
}

}  // namespace

TEST_CASE("validate accepts well-formed cases") {
    CHECK_NOTHROW(validate(two_bus_ac()));
    CHECK_NOTHROW(validate(three_bus_dc()));
}

TEST_CASE("validate rejects structural defects") {
    {
        NetworkCase cs = two_bus_ac();
        cs.ac_buses[1].id = 1;
        CHECK_THROWS_AS(validate(cs), ValidationError);
    }
    {
        NetworkCase cs = two_bus_ac();
        cs.ac_buses[0].is_slack = false;
        CHECK_THROWS_AS(validate(cs), ValidationError);
    }
    {
        NetworkCase cs = two_bus_ac();
        cs.ac_buses[1].is_slack = true;
        CHECK_THROWS_AS(validate(cs), ValidationError);
    }
    {
        NetworkCase cs = two_bus_ac();
        cs.ac_buses[1].v_min = 1.2;  // above v_max
        CHECK_THROWS_AS(validate(cs), ValidationError);
    }
    {
        NetworkCase cs = two_bus_ac();
        cs.ac_lines[0].to = 7;  // dangling endpoint
        CHECK_THROWS_AS(validate(cs), ValidationError);
    }
    {
        NetworkCase cs = two_bus_ac();
        cs.ac_buses.push_back({3, 0.9, 1.1, 0.0, 0.0, false});  // isolated bus
        CHECK_THROWS_AS(validate(cs), ValidationError);
    }
    {
        NetworkCase cs = two_bus_ac();
        cs.generators[0].p_min = 3.0;  // inverted bounds
        CHECK_THROWS_AS(validate(cs), ValidationError);
    }
    {
        NetworkCase cs = three_bus_dc();
        cs.dc_buses[0].is_master = false;
        CHECK_THROWS_AS(validate(cs), ValidationError);
    }
    {
        NetworkCase cs = three_bus_dc();
        cs.dc_buses[0].v_master = 1.5;  // outside band
        CHECK_THROWS_AS(validate(cs), ValidationError);
    }
    {
        NetworkCase cs = three_bus_dc();
        cs.acdc_converters[0].efficiency = 1.2;
        CHECK_THROWS_AS(validate(cs), ValidationError);
    }
    {
        NetworkCase cs = three_bus_dc();
        cs.acdc_converters.push_back({std::nullopt, 1, 1.0, 4.0});  // duplicate terminal
        CHECK_THROWS_AS(validate(cs), ValidationError);
    }
    {
        NetworkCase cs = three_bus_dc();
        cs.dc_lines[0].conductance = -1.0;
        CHECK_THROWS_AS(validate(cs), ValidationError);
    }
    {
        NetworkCase cs = three_bus_dc();
        cs.dcdc_converters = {{1, 2, -0.1, 0.0, 0.0, 1.0}};  // negative loss factor
        CHECK_THROWS_AS(validate(cs), ValidationError);
    }
    {
        NetworkCase cs = three_bus_dc();
        cs.dc_lines.pop_back();  // bus 3 unreachable
        CHECK_THROWS_AS(validate(cs), ValidationError);
    }
}

TEST_CASE("a DC/DC converter counts as a connecting branch") {
    NetworkCase cs = three_bus_dc();
    cs.dc_lines.pop_back();
    cs.dcdc_converters = {{2, 3, 0.0, 0.01, 0.0, 1.0}};
    CHECK_NOTHROW(validate(cs));
}

TEST_CASE("index lookups") {
    NetworkCase cs = two_bus_ac();
    CHECK(cs.ac_index(2) == 1);
    CHECK_THROWS_AS(cs.ac_index(99), ValidationError);
    CHECK(cs.ac_slack_index() == 0);
    CHECK(cs.generators_at(1) == std::vector<int>{0});
    CHECK(cs.generators_at(2).empty());

    NetworkCase dc = three_bus_dc();
    CHECK(dc.dc_master_index() == 0);
    CHECK(dc.converter_at_dc(1) == 0);
    CHECK(dc.converter_at_dc(2) == -1);
}

TEST_CASE("normalize_wind pins wind and pass-through buses") {
    NetworkCase cs = three_bus_dc();
    cs.acdc_converters.push_back({std::nullopt, 3, 0.97, 4.0});
    cs.wind = {{3, 0.5}};
    NetworkCase out = normalize_wind(cs);

    // wind bus fixed to eta * p_wind
    CHECK(out.dc_buses[2].p_min == doctest::Approx(0.485).epsilon(1e-12));
    CHECK(out.dc_buses[2].p_max == doctest::Approx(0.485).epsilon(1e-12));
    // bus 2 has no device: pinned to zero
    CHECK(out.dc_buses[1].p_min == 0.0);
    CHECK(out.dc_buses[1].p_max == 0.0);
    // converter bus keeps its band
    CHECK(out.dc_buses[0].p_min == -3.0);

    // a pass-through bus with strictly positive demand band cannot work
    NetworkCase bad = three_bus_dc();
    bad.dc_buses[1].p_min = 0.5;
    bad.dc_buses[1].p_max = 0.5;
    CHECK_NOTHROW(normalize_wind(bad));  // explicit fixed injection is kept
    CHECK(normalize_wind(bad).dc_buses[1].p_min == 0.5);
    bad.dc_buses[1].p_min = 0.5;
    bad.dc_buses[1].p_max = 1.0;
    CHECK_THROWS_AS(normalize_wind(bad), ValidationError);
}

TEST_CASE("rebase round-trips and keeps physical quantities") {
    NetworkCase cs = two_bus_ac();
    cs.base_mva = 100.0;
    NetworkCase rb = rebase(cs, 37.5);
    NetworkCase back = rebase(rb, 100.0);

    CHECK(back.generators[0].p_max == doctest::Approx(cs.generators[0].p_max).epsilon(1e-14));
    CHECK(back.ac_lines[0].series_admittance.real() ==
          doctest::Approx(cs.ac_lines[0].series_admittance.real()).epsilon(1e-14));
    CHECK(back.generators[0].c2 == doctest::Approx(cs.generators[0].c2).epsilon(1e-14));

    // cost of the same physical dispatch is base-invariant
    const double p_mw = 80.0;
    auto cost = [](const Generator& g, double p_pu) {
        return g.c2 * p_pu * p_pu + g.c1 * p_pu + g.c0;
    };
    double c_orig = cost(cs.generators[0], p_mw / cs.base_mva);
    double c_new = cost(rb.generators[0], p_mw / rb.base_mva);
    CHECK(c_new == doctest::Approx(c_orig).epsilon(1e-12));
}

TEST_CASE("parser converts MW input to per-unit") {
    const char* text = R"({
      "base_mva": 100,
      "ac_buses": [
        {"id": 1, "is_slack": true},
        {"id": 2, "p_load": 10, "q_load": 5}
      ],
      "generators": [
        {"bus": 1, "p_min": 0, "p_max": 200, "q_min": -100, "q_max": 100,
         "c2": 0.02, "c1": 25, "c0": 0}
      ],
      "ac_lines": [
        {"from": 1, "to": 2, "r": 0.02, "x": 0.06, "b": 0.05, "s_max": 250}
      ]
    })";
    NetworkCase cs = parse_case(text);
    CHECK(cs.ac_buses[1].p_load == doctest::Approx(0.10).epsilon(1e-12));
    CHECK(cs.generators[0].p_max == doctest::Approx(2.0).epsilon(1e-12));
    // cost coefficients converted so cost(P_pu * base) is unchanged
    CHECK(cs.generators[0].c2 == doctest::Approx(0.02 * 100 * 100).epsilon(1e-12));
    CHECK(cs.generators[0].c1 == doctest::Approx(25 * 100).epsilon(1e-12));
    // r/x convenience form
    Complex z{0.02, 0.06};
    CHECK(std::abs(cs.ac_lines[0].series_admittance - 1.0 / z) < 1e-12);
    CHECK(cs.ac_lines[0].shunt_admittance.imag() == doctest::Approx(0.025).epsilon(1e-12));
    CHECK(cs.ac_lines[0].s_max == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("parser rejects malformed input") {
    CHECK_THROWS_AS(parse_case("{not json"), ParseError);
    CHECK_THROWS_AS(parse_case("[]"), ParseError);
    CHECK_THROWS_AS(parse_case("{}"), ParseError);  // missing base_mva
    CHECK_THROWS_AS(parse_case(R"({"base_mva": -5})"), ParseError);
    CHECK_THROWS_AS(parse_case(R"({"base_mva": 100, "ac_buses": [{"id": 1.5}]})"), ParseError);
}

TEST_CASE("serialize / parse round trip") {
    NetworkCase cs = three_bus_dc();
    cs.base_mva = 100.0;
    cs.dcdc_converters = {{2, 3, 0.001, 0.05, 0.03, 2.0}};
    // parse_case applies normalize_wind, so compare against the normalized form
    NetworkCase expect = normalize_wind(cs);
    NetworkCase back = parse_case(serialize_case(cs));
    REQUIRE(back.dc_buses.size() == expect.dc_buses.size());
    for (size_t i = 0; i < expect.dc_buses.size(); ++i) {
        CHECK(back.dc_buses[i].id == expect.dc_buses[i].id);
        CHECK(back.dc_buses[i].p_max == doctest::Approx(expect.dc_buses[i].p_max).epsilon(1e-12));
    }
    CHECK(back.dc_lines[1].conductance == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(back.dcdc_converters[0].gamma == doctest::Approx(0.03).epsilon(1e-12));
}

TEST_CASE("matpower import maps rows and cost coefficients") {
    const char* text = R"({
      "baseMVA": 100,
      "bus": [
        [1, 3, 0,  0, 0, 0, 1, 1.0, 0, 345, 1, 1.1, 0.9],
        [2, 1, 90, 30, 0, 0, 1, 1.0, 0, 345, 1, 1.1, 0.9]
      ],
      "gen": [
        [1, 0, 0, 300, -300, 1.0, 100, 1, 250, 10]
      ],
      "branch": [
        [1, 2, 0.01, 0.05, 0.02, 150, 0, 0, 0, 0, 1]
      ],
      "gencost": [
        [2, 0, 0, 3, 0.11, 5.0, 150]
      ]
    })";
    NetworkCase cs = import_matpower(text);
    REQUIRE(cs.ac_buses.size() == 2);
    CHECK(cs.ac_buses[0].is_slack);
    CHECK(cs.ac_buses[1].p_load == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(cs.generators[0].p_max == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(cs.generators[0].p_min == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(cs.generators[0].c2 == doctest::Approx(0.11 * 1e4).epsilon(1e-12));
    CHECK(cs.ac_lines[0].s_max == doctest::Approx(1.5).epsilon(1e-12));

    // off-nominal tap is rejected
    std::string tapped = text;
    tapped.replace(tapped.find("0, 0, 1]"), 8, "1.05, 0, 1]");
    CHECK_THROWS_AS(import_matpower(tapped), ParseError);
}
