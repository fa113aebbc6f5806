#include <doctest.h>

#include <string>

#include "uc/error.hpp"
#include "uc/verify.hpp"

using namespace uc;

namespace {

DegradationNet default_net() { return load_net(std::string(UC_TEST_DATA) + "/net_default.json"); }

GridCase single_bus(double load) {
    GridCase g;
    g.horizon = {1, 1.0};
    g.buses = {1};
    g.reference_bus = 1;
    Generator gen;
    gen.id = "G";
    gen.bus = 1;
    gen.p_max_mw = 100.0;
    gen.cost_mwh = 20.0;
    gen.cost_noload = 100.0;
    gen.cost_startup = 50.0;
    gen.ramp_mw_per_h = 100.0;
    g.generators = {gen};
    g.loads = {{1, {load}}};
    return g;
}

Schedule solved_toy() {
    const GridCase g = toy_case();
    const ScucModel sm = build_tscuc(g);
    return extract_schedule(solve(sm.model, {0.0, 120, 0}), sm.index, g);
}

}  // namespace

TEST_CASE("parity") {
    const auto a = verify_parity(14289.49, 14289.50);
    CHECK(a.relative_difference == doctest::Approx(7.0e-7).epsilon(0.01));
    CHECK(a.passed());
    CHECK(verify_parity(100.0, 100.0).relative_difference == 0.0);
    CHECK(verify_parity(100.0, 100.0).passed());
    const auto c = verify_parity(90.0, 100.0);
    CHECK(c.relative_difference == doctest::Approx(0.1));
    CHECK_FALSE(c.passed());
    CHECK(verify_parity(0.0, 0.0).passed());
    CHECK_THROWS_AS(verify_parity(-1.0, 1.0), Error);
}

TEST_CASE("brute force on a single generator") {
    const auto r = brute_force_reference(single_bus(50.0));
    CHECK(r.feasible);
    CHECK(r.objective == doctest::Approx(1150.0));
    CHECK_FALSE(brute_force_reference(single_bus(150.0)).feasible);
}

TEST_CASE("brute force budget") {
    GridCase g = toy_case();
    g.horizon.periods = 8;
    for (auto& l : g.loads) l.demand_mw.resize(8, 60.0);
    for (auto& r : g.renewables) r.available_mw.resize(8, 0.0);
    try {
        brute_force_reference(g);
        FAIL("expected a budget error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::budget_exceeded);
    }
}

TEST_CASE("audit of the toy optimum") {
    const GridCase g = toy_case();
    const Schedule s = solved_toy();
    const auto report = audit_feasibility(s, g);
    CHECK(report.passed());
    CHECK(report.violations.empty());
    CHECK(report.max_residual <= 1e-6);
}

TEST_CASE("constructed violations") {
    const GridCase g = toy_case();
    const Schedule base = solved_toy();

    SUBCASE("terminal energy off by one") {
        Schedule s = base;
        s.energy[0][3] = g.storage[0].e_initial_mwh + 1.0;
        s.soc[0][3] = s.energy[0][3] / g.storage[0].e_max_mwh;
        const auto report = audit_feasibility(s, g);
        CHECK_FALSE(report.passed());
        REQUIRE(report.has("terminal"));
        for (const auto& v : report.violations)
            if (v.family == "terminal") CHECK(v.residual == doctest::Approx(1.0));
    }
    SUBCASE("both storage modes at once") {
        Schedule s = base;
        s.u_disc[0][1] = 1.0;
        s.u_char[0][1] = 1.0;
        CHECK(audit_feasibility(s, g).has("mode_exclusivity"));
    }
    SUBCASE("reference angle") {
        Schedule s = base;
        for (auto& th : s.theta) th[2] += 0.05;
        const auto report = audit_feasibility(s, g);
        CHECK(report.has("reference_angle"));
        CHECK_FALSE(report.has("flow_physics"));
    }
    SUBCASE("storage power without its mode") {
        Schedule s = base;
        s.u_disc[0][0] = 0.0;
        s.u_char[0][0] = 0.0;
        s.p_disc[0][0] = 3.0;
        CHECK(audit_feasibility(s, g).has("storage_power"));
    }
}

TEST_CASE("audit shape checks") {
    Schedule s = solved_toy();
    s.p.pop_back();
    try {
        audit_feasibility(s, toy_case());
        FAIL("expected a dimension error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::dimension_mismatch);
    }
}

TEST_CASE("recomputed degradation of an idle schedule") {
    const GridCase g = toy_case();
    const DegradationNet net = default_net();
    Schedule s = empty_schedule(g);
    for (int t = 0; t < 4; ++t) {
        s.energy[0][t] = 10.0;
        s.soc[0][t] = 0.5;
    }
    const FeatureVector f = schedule_features(s, g, 0, 2);
    CHECK(f.temp_c == 25.0);
    CHECK(f.c_rate == 0.0);
    CHECK(f.soc == doctest::Approx(0.5));
    CHECK(f.dod == 0.0);
    CHECK(f.soh == 1.0);
    const double expected = 4.0 * 4e6 * net.forward({25.0, 0.0, 0.5, 0.0, 1.0});
    CHECK(recompute_degradation_cost(s, g, net) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("features of a discharging interval") {
    const GridCase g = toy_case();
    Schedule s = empty_schedule(g);
    s.p_disc[0][0] = 9.5;
    s.u_disc[0][0] = 1.0;
    s.energy[0][0] = 0.0;
    const FeatureVector f = schedule_features(s, g, 0, 0);
    CHECK(f.c_rate == doctest::Approx(9.5 / 20.0));
    CHECK(f.soc == doctest::Approx(0.25));
    CHECK(f.dod == doctest::Approx(0.5));
}

TEST_CASE("out-of-range inputs are flagged, not rejected") {
    const GridCase g = toy_case();
    Schedule s = empty_schedule(g);
    for (int t = 0; t < 4; ++t) s.energy[0][t] = 10.0;
    s.p_char[0][1] = 60.0;  // c-rate 3 per hour, beyond the training range
    s.u_char[0][1] = 1.0;
    const auto r = recompute_degradation(s, g, default_net());
    CHECK(r.out_of_box);
    CHECK_FALSE(r.warnings.empty());
    CHECK(r.cost >= 0.0);
}
