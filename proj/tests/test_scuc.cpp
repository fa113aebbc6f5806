#include <doctest.h>

#include <map>
#include <string>

#include "uc/error.hpp"
#include "uc/scuc.hpp"

using namespace uc;

namespace {

// One bus, one generator that must start to serve 50 MW for one hour.
GridCase single_bus() {
    GridCase g;
    g.horizon = {1, 1.0};
    g.buses = {1};
    g.reference_bus = 1;
    Generator gen;
    gen.id = "G";
    gen.bus = 1;
    gen.p_min_mw = 0.0;
    gen.p_max_mw = 100.0;
    gen.cost_mwh = 20.0;
    gen.cost_noload = 100.0;
    gen.cost_startup = 50.0;
    gen.ramp_mw_per_h = 100.0;
    g.generators = {gen};
    g.loads = {{1, {50.0}}};
    return g;
}

const Constraint* find(const Model& m, const std::string& name) {
    for (const auto& c : m.constraints())
        if (c.name == name) return &c;
    return nullptr;
}

std::map<std::uint32_t, double> coefs(const Constraint& c) {
    std::map<std::uint32_t, double> out;
    for (const auto& t : c.terms) out[t.var.index] = t.coef;
    return out;
}

}  // namespace

TEST_CASE("binary census of the toy case") {
    const GridCase g = toy_case();
    const ScucModel sm = build_tscuc(g);
    CHECK(sm.model.num_binaries() == 24);
    const std::size_t T = 4, G = 2, K = 3, N = 3, R = 1, S = 1;
    CHECK(sm.model.num_variables() == T * (3 * G + K + N + R + 6 * S));
    for (const char* prefix : {"balance_", "gen_min_", "gen_max_", "ramp_up_", "ramp_down_", "startup_", "flow_def_",
                               "soc_def_", "disc_max_", "char_max_", "mode_excl_", "energy_", "terminal_"}) {
        bool found = false;
        for (const auto& c : sm.model.constraints()) found = found || c.name.rfind(prefix, 0) == 0;
        CHECK_MESSAGE(found, prefix);
    }
}

TEST_CASE("single-bus balance row") {
    const GridCase g = single_bus();
    const ScucModel sm = build_tscuc(g);
    const Constraint* c = find(sm.model, "balance_b1_1");
    REQUIRE(c != nullptr);
    CHECK(c->sense == Sense::eq);
    CHECK(c->rhs == 50.0);
    REQUIRE(c->terms.size() == 1);
    CHECK(c->terms[0].var == sm.index.p[0][0]);
    CHECK(c->terms[0].coef == 1.0);
}

TEST_CASE("energy update row of the toy case") {
    const GridCase g = toy_case();
    const ScucModel sm = build_tscuc(g);
    const Constraint* c = find(sm.model, "energy_S1_1");
    REQUIRE(c != nullptr);
    CHECK(c->sense == Sense::eq);
    CHECK(c->rhs == doctest::Approx(10.0));
    auto k = coefs(*c);
    CHECK(k[sm.index.energy[0][0].index] == 1.0);
    CHECK(k[sm.index.p_disc[0][0].index] == doctest::Approx(1.0 / 0.95));
    CHECK(k[sm.index.p_char[0][0].index] == doctest::Approx(-0.95));
    const Constraint* term = find(sm.model, "terminal_S1");
    REQUIRE(term != nullptr);
    CHECK(term->rhs == 10.0);
}

TEST_CASE("fuel cost") {
    const GridCase g = single_bus();
    Schedule s = empty_schedule(g);
    CHECK(evaluate_fuel_cost(s, g) == 0.0);
    s.p[0][0] = 50.0;
    s.u[0][0] = 1.0;
    s.v[0][0] = 1.0;
    CHECK(evaluate_fuel_cost(s, g) == doctest::Approx(1150.0));
}

TEST_CASE("single-bus solve") {
    const GridCase g = single_bus();
    const ScucModel sm = build_tscuc(g);
    const auto r = solve(sm.model, {0.0, 60, 0});
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(r.objective == doctest::Approx(1150.0));
}

TEST_CASE("toy case optimum and extraction") {
    const GridCase g = toy_case();
    const ScucModel sm = build_tscuc(g);
    const auto r = solve(sm.model, {0.0, 120, 0});
    REQUIRE(r.status == SolveStatus::optimal);
    const Schedule s = extract_schedule(r, sm.index, g);
    CHECK(evaluate_fuel_cost(s, g) == doctest::Approx(r.objective).epsilon(1e-9));
    CHECK(s.cost.total == doctest::Approx(r.objective).epsilon(1e-9));
    CHECK(s.cost.degradation == 0.0);

    const auto relax = solve_lp_relaxation(sm.model);
    REQUIRE(relax.status == SolveStatus::optimal);
    CHECK(relax.objective <= r.objective + 1e-9);

    SolveResult bad = r;
    bad.values[sm.index.u[0][0].index] = 0.4;
    try {
        extract_schedule(bad, sm.index, g);
        FAIL("expected an extraction error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::extraction);
    }
}

TEST_CASE("shedding slack keeps an overloaded case feasible") {
    GridCase g = single_bus();
    g.loads[0].demand_mw[0] = 150.0;
    CHECK(solve(build_tscuc(g).model).status == SolveStatus::infeasible);
    ScucOptions o;
    o.allow_shedding = true;
    const ScucModel sm = build_tscuc(g, o);
    const auto r = solve(sm.model, {0.0, 60, 0});
    REQUIRE(r.status == SolveStatus::optimal);
    const Schedule s = extract_schedule(r, sm.index, g, o);
    CHECK(s.shed[0][0] == doctest::Approx(50.0));
    CHECK(evaluate_fuel_cost(s, g, o) == doctest::Approx(2150.0 + 50.0 * 1e6));
}

TEST_CASE("invalid case is rejected") {
    GridCase g = toy_case();
    g.storage[0].eff_charge = 1.2;
    CHECK_THROWS_AS(build_tscuc(g), Error);
}
