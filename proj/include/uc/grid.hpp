#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace uc {

struct Horizon {
    int periods = 0;
    double dt_hours = 1.0;
};

struct Generator {
    std::string id;
    int bus = 0;
    double p_min_mw = 0.0;
    double p_max_mw = 0.0;
    double cost_mwh = 0.0;      // linear energy cost, $/MWh
    double cost_noload = 0.0;   // $ per committed period
    double cost_startup = 0.0;  // $ per start
    double ramp_mw_per_h = 0.0;
    bool initial_on = false;
    double initial_output_mw = 0.0;

    bool operator==(const Generator&) const = default;
};

// Power flows from `from_bus` to `to_bus` when positive.
struct Line {
    std::string id;
    int from_bus = 0;
    int to_bus = 0;
    double susceptance_mw_per_rad = 0.0;
    double limit_mw = 0.0;

    bool operator==(const Line&) const = default;
};

struct StorageUnit {
    std::string id;
    int bus = 0;
    double e_max_mwh = 0.0;
    double e_min_mwh = 0.0;
    double e_initial_mwh = 0.0;
    double p_max_mw = 0.0;
    double p_min_mw = 0.0;
    double eff_charge = 1.0;
    double eff_discharge = 1.0;
    double capital_cost = 0.0;
    double salvage_value = 0.0;
    double soh_eol = 0.5;
    double soh_initial = 1.0;
    double ambient_temp_c = 25.0;

    bool operator==(const StorageUnit&) const = default;
};

struct LoadProfile {
    int bus = 0;
    std::vector<double> demand_mw;

    bool operator==(const LoadProfile&) const = default;
};

struct RenewableProfile {
    int bus = 0;
    std::vector<double> available_mw;

    bool operator==(const RenewableProfile&) const = default;
};

/// One day-ahead instance: network, fleet and per-period profiles.
///
/// Treated as immutable once loaded; every solver entry point takes it by
/// const reference, so a single case may back concurrent builds.
struct GridCase {
    Horizon horizon;
    std::vector<int> buses;
    int reference_bus = 0;
    std::vector<Line> lines;
    std::vector<Generator> generators;
    std::vector<StorageUnit> storage;
    std::vector<LoadProfile> loads;
    std::vector<RenewableProfile> renewables;

    int periods() const { return horizon.periods; }
    int bus_position(int bus) const;  // -1 when absent
    double total_load(int t) const;

    bool operator==(const GridCase& o) const {
        return horizon.periods == o.horizon.periods && horizon.dt_hours == o.horizon.dt_hours &&
               buses == o.buses && reference_bus == o.reference_bus && lines == o.lines &&
               generators == o.generators && storage == o.storage && loads == o.loads &&
               renewables == o.renewables;
    }
};

struct ValidationIssue {
    std::string code;   // machine-readable, e.g. "UNKNOWN_BUS"
    std::string field;  // e.g. "StorageUnit.eff_charge"
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool ok() const { return issues.empty(); }
    bool has(const std::string& code) const;
};

ValidationReport validate_case(const GridCase& grid);

GridCase case_from_json(const nlohmann::json& doc);
nlohmann::json case_to_json(const GridCase& grid);

/// Parses and validates. Throws uc::Error (parse or validation).
GridCase load_case(const std::filesystem::path& path);
void save_case(const GridCase& grid, const std::filesystem::path& path);

/// Three-bus, four-period desk fixture used throughout the tests.
GridCase toy_case();

}  // namespace uc
