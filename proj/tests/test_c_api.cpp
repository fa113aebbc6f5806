#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "uc/uc.h"

namespace {

std::string data(const char* name) { return std::string(UC_TEST_DATA) + "/" + name; }

struct Owned {
    uc_case* c = nullptr;
    uc_net* n = nullptr;
    ~Owned() {
        uc_case_free(c);
        uc_net_free(n);
    }
};

}  // namespace

TEST_CASE("version string") { CHECK(std::string(uc_version()).size() > 0); }

TEST_CASE("case handles") {
    Owned h;
    REQUIRE(uc_case_toy(&h.c) == UC_OK);
    CHECK(uc_case_periods(h.c) == 4);
    CHECK(uc_case_storage_count(h.c) == 1);

    uc_case* bad = nullptr;
    CHECK(uc_case_load(data("bad_eff_charge.json").c_str(), &bad) == UC_INVALID_INPUT);
    CHECK(bad == nullptr);
    CHECK(std::string(uc_last_error()).find("StorageUnit.eff_charge") != std::string::npos);
    CHECK(uc_case_load(data("missing.json").c_str(), &bad) == UC_IO_ERROR);
    CHECK(uc_case_load(nullptr, &bad) == UC_INVALID_INPUT);

    uc_case* other = nullptr;
    REQUIRE(uc_case_load(data("bess_bus14.json").c_str(), &other) == UC_OK);
    CHECK(uc_case_storage_count(other) == 2);
    uc_case_free(other);
}

TEST_CASE("net forward") {
    Owned h;
    REQUIRE(uc_net_load(data("net_default.json").c_str(), &h.n) == UC_OK);
    const double f[5] = {25.0, 0.5, 0.5, 1.0, 1.0};
    double y = 0.0;
    REQUIRE(uc_net_forward(h.n, f, &y) == UC_OK);
    CHECK(y == doctest::Approx(1.25e-4).epsilon(0.05));
}

TEST_CASE("solve, verify and export") {
    Owned h;
    REQUIRE(uc_case_toy(&h.c) == UC_OK);
    REQUIRE(uc_net_load(data("net_default.json").c_str(), &h.n) == UC_OK);
    uc_solve_options o;
    uc_solve_options_default(&o);
    o.rel_mipgap = 0.0;
    o.record_timing = 0;
    const auto dir = std::filesystem::temp_directory_path() / "uc_c_api_solve";
    std::filesystem::remove_all(dir);
    uc_solve_summary s;
    REQUIRE(uc_run_solve(h.c, h.n, &o, dir.string().c_str(), &s) == UC_OK);
    CHECK(std::string(s.status) == "optimal");
    CHECK(s.binaries == 24);
    CHECK(s.audit_passed == 1);
    CHECK(s.solve_seconds == 0.0);
    CHECK(s.total_cost == doctest::Approx(s.fuel_cost + s.degradation_cost));
    CHECK(std::filesystem::exists(dir / "costs.json"));

    char* report = nullptr;
    CHECK(uc_verify_schedule(h.c, h.n, (dir / "schedule.csv").string().c_str(), &report) == UC_OK);
    REQUIRE(report != nullptr);
    CHECK(std::string(report).find("\"passed\"") != std::string::npos);
    uc_string_free(report);

    const auto lp = dir / "lbd.lp";
    CHECK(uc_export_lp(h.c, h.n, lp.string().c_str()) == UC_OK);
    CHECK(std::filesystem::file_size(lp) > 0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("argument errors") {
    Owned h;
    REQUIRE(uc_case_toy(&h.c) == UC_OK);
    REQUIRE(uc_net_load(data("net_default.json").c_str(), &h.n) == UC_OK);
    uc_solve_options o;
    uc_solve_options_default(&o);
    o.mode = UC_MODE_LBD;
    uc_solve_summary s;
    CHECK(uc_run_solve(h.c, nullptr, &o, nullptr, &s) == UC_INVALID_INPUT);
    const double gaps[] = {-0.1};
    char* csv = nullptr;
    CHECK(uc_sweep_gap(h.c, h.n, gaps, 1, &o, nullptr, &csv) == UC_INVALID_INPUT);
    CHECK(csv == nullptr);
    CHECK(std::string(uc_last_error()).size() > 0);
}

TEST_CASE("lifetime") {
    double years = 0.0;
    REQUIRE(uc_lifetime_years(1.0, 0.5, 1.1806e-4, &years) == UC_OK);
    CHECK(years == doctest::Approx(11.6).epsilon(0.1 / 11.6));
    CHECK(uc_lifetime_years(0.5, 0.5, 1e-4, &years) == UC_INVALID_INPUT);
}
