#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "uc/error.hpp"
#include "uc/experiments.hpp"

using namespace uc;

namespace {

DegradationNet default_net() { return load_net(std::string(UC_TEST_DATA) + "/net_default.json"); }

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunOptions tscuc_options() {
    RunOptions o;
    o.mode = Mode::tscuc;
    o.solve.rel_mipgap = 0.0;
    o.record_timing = false;
    return o;
}

}  // namespace

TEST_CASE("mode names") {
    CHECK(parse_mode("tscuc") == Mode::tscuc);
    CHECK(parse_mode("lbd") == Mode::lbd);
    CHECK(std::string(to_string(Mode::lbd)) == "lbd");
    CHECK_THROWS_AS(parse_mode("fast"), Error);
}

TEST_CASE("traditional run reports degradation ex post") {
    const GridCase g = toy_case();
    const DegradationNet net = default_net();
    const RunOutcome out = run_solve(g, &net, tscuc_options());
    REQUIRE(out.has_schedule);
    CHECK(out.status == SolveStatus::optimal);
    CHECK(out.exit_code() == 0);
    CHECK(out.audit.passed());
    CHECK(out.binaries == 24);
    CHECK(out.schedule.cost.degradation > 0.0);
    CHECK(out.schedule.cost.degradation == doctest::Approx(recompute_degradation_cost(out.schedule, g, net)));
    CHECK(out.schedule.cost.total == doctest::Approx(out.schedule.cost.fuel + out.schedule.cost.degradation));

    const auto j = costs_json(out, false);
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"mode", "fuel_cost", "degradation_cost", "total_cost", "mipgap_achieved",
                                           "solve_seconds", "status"});
    CHECK(j["solve_seconds"] == 0.0);
    CHECK(j["status"] == "optimal");
}

TEST_CASE("traditional run without a net") {
    const RunOutcome out = run_solve(toy_case(), nullptr, tscuc_options());
    REQUIRE(out.has_schedule);
    CHECK(out.schedule.cost.degradation == 0.0);
    CHECK_FALSE(out.warnings.empty());
}

TEST_CASE("lbd needs a net") {
    RunOptions o;
    o.mode = Mode::lbd;
    try {
        run_solve(toy_case(), nullptr, o);
        FAIL("expected invalid argument");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::invalid_argument);
    }
}

TEST_CASE("infeasible case maps to exit 1") {
    GridCase g = toy_case();
    g.loads[0].demand_mw[2] = 500.0;
    const RunOutcome out = run_solve(g, nullptr, tscuc_options());
    CHECK_FALSE(out.has_schedule);
    CHECK(out.exit_code() == 1);
}

TEST_CASE("artifacts are reproducible") {
    const GridCase g = toy_case();
    const DegradationNet net = default_net();
    const auto dir = std::filesystem::temp_directory_path() / "uc_artifacts";
    std::filesystem::remove_all(dir);
    write_artifacts(run_solve(g, &net, tscuc_options()), g, dir / "a", false);
    write_artifacts(run_solve(g, &net, tscuc_options()), g, dir / "b", false);
    for (const char* f : {"schedule.csv", "costs.json", "audit.json"}) {
        REQUIRE(std::filesystem::exists(dir / "a" / f));
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("schedule csv round trip") {
    const GridCase g = toy_case();
    const RunOutcome out = run_solve(g, nullptr, tscuc_options());
    REQUIRE(out.has_schedule);
    const std::string csv = schedule_to_csv(out.schedule, g);
    CHECK(csv.rfind("period,entity_kind,entity_id,field,value\n", 0) == 0);
    const Schedule back = schedule_from_csv(csv, g);
    CHECK(back.p == out.schedule.p);
    CHECK(back.energy == out.schedule.energy);
    CHECK(back.theta == out.schedule.theta);
    CHECK(back.u_char == out.schedule.u_char);
    CHECK(schedule_to_csv(back, g) == csv);
    CHECK_THROWS_AS(schedule_from_csv("period,entity_kind,entity_id,field,value\n1,generator,G9,p,1\n", g), Error);
}

TEST_CASE("sweep argument checks") {
    const GridCase g = toy_case();
    const DegradationNet net = default_net();
    RunOptions o;
    CHECK_THROWS_AS(sweep_mipgap(g, net, {-0.1}, o), Error);
    CHECK_THROWS_AS(sweep_mipgap(g, net, {}, o), Error);
    CHECK_THROWS_AS(sweep_storage_count(g, net, {2}, o), Error);
    CHECK_THROWS_AS(sweep_storage_count(g, net, {-1}, o), Error);
}

TEST_CASE("storage count zero has no degradation") {
    const GridCase g = toy_case();
    CHECK(with_storage_count(g, 0).storage.empty());
    CHECK(with_storage_count(g, 1).storage.size() == 1);
    RunOptions o;
    o.record_timing = false;
    const auto rows = sweep_storage_count(g, default_net(), {0}, o);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].count == 0);
    CHECK(rows[0].degradation_cost == 0.0);
    CHECK(rows[0].binaries == 16);
    CHECK(count_rows_to_csv(rows, false).find("count") != std::string::npos);
}

TEST_CASE("lifetime and benefit") {
    CHECK(expected_lifetime_years(1.0, 0.5, 1.1806e-4) == doctest::Approx(11.6).epsilon(0.1 / 11.6));
    CHECK(std::isinf(expected_lifetime_years(1.0, 0.5, 0.0)));

    const GridCase g = toy_case();
    const double daily = 0.5 / (10.0 * 365.0);
    const EconomicReport r = economic_report(g, {daily}, 12000.0, 10000.0);
    CHECK(r.daily_saving == doctest::Approx(2000.0));
    CHECK(r.units[0].lifetime_years == doctest::Approx(10.0));
    CHECK(r.benefit == doctest::Approx(7'300'000.0));
    CHECK_FALSE(r.capped);

    const EconomicReport idle = economic_report(g, {0.0}, 12000.0, 10000.0, 25.0);
    CHECK(idle.capped);
    CHECK(idle.units[0].lifetime_capped);
    CHECK(idle.benefit_years == 25.0);
    CHECK(idle.benefit == doctest::Approx(2000.0 * 365.0 * 25.0));
    CHECK(economics_json(idle)["storage"][0]["expected_lifetime_years"] == "unbounded");

    const EconomicReport slow = economic_report(g, {1e-20}, 12000.0, 10000.0, 25.0);
    CHECK(slow.capped);
    CHECK(slow.benefit_years == 25.0);
}
