#include <doctest.h>

#include <filesystem>
#include <string>

#include "uc/error.hpp"
#include "uc/grid.hpp"

using namespace uc;

namespace {
std::string data(const char* name) { return std::string(UC_TEST_DATA) + "/" + name; }
}  // namespace

TEST_CASE("toy fixture") {
    const GridCase g = toy_case();
    CHECK(g.buses.size() == 3);
    CHECK(g.generators.size() == 2);
    CHECK(g.storage.size() == 1);
    CHECK(g.horizon.periods == 4);
    CHECK(g.storage[0].capital_cost == doctest::Approx(2'000'000.0));
    CHECK(validate_case(g).ok());
}

TEST_CASE("case file round trip") {
    const auto path = std::filesystem::temp_directory_path() / "uc_toy3_roundtrip.json";
    save_case(toy_case(), path);
    CHECK(load_case(path) == toy_case());
    std::filesystem::remove(path);
}

TEST_CASE("storage unit transcribed at bus 14") {
    const GridCase g = load_case(data("bess_bus14.json"));
    REQUIRE(g.storage.size() == 2);
    const StorageUnit& s = g.storage[1];
    CHECK(s.bus == 14);
    CHECK(s.e_max_mwh == 200.0);
    CHECK(s.p_max_mw == 100.0);
}

TEST_CASE("charge efficiency above one is rejected") {
    try {
        load_case(data("bad_eff_charge.json"));
        FAIL("expected a validation error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::validation);
        CHECK(std::string(e.what()).find("StorageUnit.eff_charge") != std::string::npos);
    }
}

TEST_CASE("missing file is an io error") {
    try {
        load_case(data("does_not_exist.json"));
        FAIL("expected an io error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::io);
    }
}

TEST_CASE("validation codes") {
    SUBCASE("unknown bus") {
        GridCase g = toy_case();
        g.lines[0].to_bus = 99;
        const auto report = validate_case(g);
        REQUIRE(report.issues.size() == 1);
        CHECK(report.issues[0].code == "UNKNOWN_BUS");
    }
    SUBCASE("initial energy above capacity") {
        GridCase g = toy_case();
        g.storage[0].e_max_mwh = 20.0;
        g.storage[0].e_initial_mwh = 25.0;
        const auto report = validate_case(g);
        REQUIRE(report.issues.size() == 1);
        CHECK(report.issues[0].code == "SOC_RANGE");
    }
    SUBCASE("profile length") {
        GridCase g = toy_case();
        g.loads[0].demand_mw.pop_back();
        CHECK(validate_case(g).has("PROFILE_LENGTH"));
    }
}

TEST_CASE("malformed json is a parse error") {
    nlohmann::json doc = case_to_json(toy_case());
    doc.erase("horizon");
    CHECK_THROWS_AS(case_from_json(doc), Error);
}
