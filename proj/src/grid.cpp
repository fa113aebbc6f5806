#include "uc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "uc/error.hpp"

namespace uc {

using nlohmann::json;

const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::parse: return "parse";
    case ErrorCode::validation: return "validation";
    case ErrorCode::shape_mismatch: return "shape_mismatch";
    case ErrorCode::domain: return "domain";
    case ErrorCode::bound: return "bound";
    case ErrorCode::foreign_variable: return "foreign_variable";
    case ErrorCode::unsound_bounds: return "unsound_bounds";
    case ErrorCode::box_containment: return "box_containment";
    case ErrorCode::extraction: return "extraction";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::budget_exceeded: return "budget_exceeded";
    case ErrorCode::convergence: return "convergence";
    case ErrorCode::io: return "io";
    case ErrorCode::invalid_argument: return "invalid_argument";
    }
    return "unknown";
}

int GridCase::bus_position(int bus) const {
    auto it = std::find(buses.begin(), buses.end(), bus);
    return it == buses.end() ? -1 : static_cast<int>(it - buses.begin());
}

double GridCase::total_load(int t) const {
    double sum = 0.0;
    for (const auto& load : loads) sum += load.demand_mw.at(t);
    return sum;
}

bool ValidationReport::has(const std::string& code) const {
    return std::any_of(issues.begin(), issues.end(),
                       [&](const ValidationIssue& i) { return i.code == code; });
}

namespace {

class Checker {
public:
    explicit Checker(ValidationReport& report) : report_(report) {}

    void require(bool ok, const char* code, const std::string& field, const std::string& message) {
        if (!ok) report_.issues.push_back({code, field, message});
    }

private:
    ValidationReport& report_;
};

bool finite_all(std::initializer_list<double> values) {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

std::string tag(const std::string& kind, const std::string& id) { return kind + " '" + id + "'"; }

}  // namespace

ValidationReport validate_case(const GridCase& grid) {
    ValidationReport report;
    Checker check(report);
    const int periods = grid.horizon.periods;

    check.require(periods >= 1, "HORIZON", "Horizon.periods", "periods must be at least 1");
    check.require(std::isfinite(grid.horizon.dt_hours) && grid.horizon.dt_hours > 0, "HORIZON",
                  "Horizon.dt_hours", "dt_hours must be positive");

    std::set<int> bus_set(grid.buses.begin(), grid.buses.end());
    check.require(bus_set.size() == grid.buses.size(), "DUPLICATE_ID", "GridCase.buses",
                  "bus ids must be unique");
    check.require(bus_set.count(grid.reference_bus) == 1, "UNKNOWN_BUS", "GridCase.reference_bus",
                  "reference bus " + std::to_string(grid.reference_bus) + " is not a bus");

    auto bus_known = [&](int bus, const std::string& field, const std::string& owner) {
        check.require(bus_set.count(bus) == 1, "UNKNOWN_BUS", field,
                      owner + " references unknown bus " + std::to_string(bus));
    };

    std::set<std::string> line_ids;
    for (const auto& line : grid.lines) {
        const auto who = tag("line", line.id);
        check.require(line_ids.insert(line.id).second, "DUPLICATE_ID", "Line.id", who + " is duplicated");
        bus_known(line.from_bus, "Line.from", who);
        bus_known(line.to_bus, "Line.to", who);
        check.require(line.from_bus != line.to_bus, "LINE_SELF_LOOP", "Line.to",
                      who + " connects a bus to itself");
        check.require(std::isfinite(line.susceptance_mw_per_rad) && line.susceptance_mw_per_rad > 0,
                      "LINE_PARAMS", "Line.susceptance_mw_per_rad", who + " susceptance must be positive");
        check.require(std::isfinite(line.limit_mw) && line.limit_mw > 0, "LINE_PARAMS", "Line.limit_mw",
                      who + " limit must be positive");
    }

    std::set<std::string> gen_ids;
    for (const auto& g : grid.generators) {
        const auto who = tag("generator", g.id);
        check.require(gen_ids.insert(g.id).second, "DUPLICATE_ID", "Generator.id", who + " is duplicated");
        bus_known(g.bus, "Generator.bus", who);
        check.require(finite_all({g.p_min_mw, g.p_max_mw, g.cost_mwh, g.cost_noload, g.cost_startup,
                                  g.ramp_mw_per_h, g.initial_output_mw}),
                      "NON_FINITE", "Generator", who + " has a non-finite field");
        check.require(0 <= g.p_min_mw && g.p_min_mw <= g.p_max_mw, "GEN_LIMITS", "Generator.p_min_mw",
                      who + " requires 0 <= p_min <= p_max");
        check.require(g.ramp_mw_per_h > 0, "GEN_RAMP", "Generator.ramp_mw_per_h", who + " ramp must be positive");
        check.require(g.cost_mwh >= 0 && g.cost_noload >= 0 && g.cost_startup >= 0, "GEN_COST", "Generator.cost",
                      who + " costs must be nonnegative");
        if (g.initial_on) {
            check.require(g.p_min_mw <= g.initial_output_mw && g.initial_output_mw <= g.p_max_mw, "GEN_INITIAL",
                          "Generator.initial_output_mw", who + " initial output must lie in [p_min, p_max]");
        } else {
            check.require(g.initial_output_mw == 0.0, "GEN_INITIAL", "Generator.initial_output_mw",
                          who + " is initially off but has nonzero initial output");
        }
    }

    std::set<std::string> storage_ids;
    for (const auto& s : grid.storage) {
        const auto who = tag("storage", s.id);
        check.require(storage_ids.insert(s.id).second, "DUPLICATE_ID", "StorageUnit.id", who + " is duplicated");
        bus_known(s.bus, "StorageUnit.bus", who);
        check.require(finite_all({s.e_max_mwh, s.e_min_mwh, s.e_initial_mwh, s.p_max_mw, s.p_min_mw,
                                  s.eff_charge, s.eff_discharge, s.capital_cost, s.salvage_value, s.soh_eol,
                                  s.soh_initial, s.ambient_temp_c}),
                      "NON_FINITE", "StorageUnit", who + " has a non-finite field");
        check.require(0 <= s.e_min_mwh && s.e_min_mwh <= s.e_initial_mwh && s.e_initial_mwh <= s.e_max_mwh &&
                          s.e_max_mwh > 0,
                      "SOC_RANGE", "StorageUnit.e_initial_mwh", who + " requires 0 <= e_min <= e_initial <= e_max");
        check.require(0 <= s.p_min_mw && s.p_min_mw <= s.p_max_mw, "STORAGE_POWER", "StorageUnit.p_min_mw",
                      who + " requires 0 <= p_min <= p_max");
        check.require(s.eff_charge > 0 && s.eff_charge <= 1, "EFFICIENCY_RANGE", "StorageUnit.eff_charge",
                      who + " eff_charge must lie in (0, 1]");
        check.require(s.eff_discharge > 0 && s.eff_discharge <= 1, "EFFICIENCY_RANGE", "StorageUnit.eff_discharge",
                      who + " eff_discharge must lie in (0, 1]");
        check.require(0 <= s.salvage_value && s.salvage_value <= s.capital_cost, "SALVAGE_RANGE",
                      "StorageUnit.salvage_value", who + " requires 0 <= salvage_value <= capital_cost");
        check.require(0 < s.soh_eol && s.soh_eol < s.soh_initial && s.soh_initial <= 1, "SOH_RANGE",
                      "StorageUnit.soh_eol", who + " requires 0 < soh_eol < soh_initial <= 1");
    }

    auto check_profile = [&](const std::vector<double>& values, int bus, const char* field, const std::string& who) {
        bus_known(bus, std::string(field).substr(0, std::string(field).find('.')) + ".bus", who);
        check.require(static_cast<int>(values.size()) == periods, "PROFILE_LENGTH", field,
                      who + " must have one entry per period");
        check.require(std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v) && v >= 0; }),
                      "NEGATIVE_PROFILE", field, who + " entries must be finite and nonnegative");
    };
    for (std::size_t i = 0; i < grid.loads.size(); ++i) {
        check_profile(grid.loads[i].demand_mw, grid.loads[i].bus, "LoadProfile.demand_mw",
                      "load #" + std::to_string(i));
    }
    for (std::size_t i = 0; i < grid.renewables.size(); ++i) {
        check_profile(grid.renewables[i].available_mw, grid.renewables[i].bus, "RenewableProfile.available_mw",
                      "renewable #" + std::to_string(i));
    }
    return report;
}

namespace {

// Field access that turns nlohmann's exceptions into parse errors naming the key.
template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw Error(ErrorCode::parse, where + ": missing key '" + key + "'");
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorCode::parse, where + ": key '" + key + "' has the wrong type");
    }
}

template <typename T>
T field_or(const json& obj, const char* key, const std::string& where, T fallback) {
    if (!obj.contains(key)) return fallback;
    return field<T>(obj, key, where);
}

std::string id_field(const json& obj, const std::string& where) {
    if (!obj.is_object() || !obj.contains("id")) throw Error(ErrorCode::parse, where + ": missing key 'id'");
    const auto& v = obj.at("id");
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw Error(ErrorCode::parse, where + ": key 'id' must be a string or integer");
}

const json& array_field(const json& doc, const char* key) {
    const auto& v = doc.at(key);
    if (!v.is_array()) throw Error(ErrorCode::parse, std::string("key '") + key + "' must be an array");
    return v;
}

json empty_array() { return json::array(); }

}  // namespace

GridCase case_from_json(const json& doc) {
    if (!doc.is_object()) throw Error(ErrorCode::parse, "case document must be a JSON object");
    GridCase grid;
    if (!doc.contains("horizon")) throw Error(ErrorCode::parse, "missing key 'horizon'");
    const auto& horizon = doc.at("horizon");
    grid.horizon.periods = field<int>(horizon, "periods", "horizon");
    grid.horizon.dt_hours = field<double>(horizon, "dt_hours", "horizon");
    grid.buses = field<std::vector<int>>(doc, "buses", "case");
    grid.reference_bus = field<int>(doc, "reference_bus", "case");

    const json none = empty_array();
    auto list = [&](const char* key) -> const json& { return doc.contains(key) ? array_field(doc, key) : none; };

    for (const auto& item : list("lines")) {
        Line line;
        line.id = id_field(item, "line");
        const auto where = "line '" + line.id + "'";
        line.from_bus = field<int>(item, "from", where);
        line.to_bus = field<int>(item, "to", where);
        line.susceptance_mw_per_rad = field<double>(item, "susceptance_mw_per_rad", where);
        line.limit_mw = field<double>(item, "limit_mw", where);
        grid.lines.push_back(std::move(line));
    }
    for (const auto& item : list("generators")) {
        Generator g;
        g.id = id_field(item, "generator");
        const auto where = "generator '" + g.id + "'";
        g.bus = field<int>(item, "bus", where);
        g.p_min_mw = field<double>(item, "p_min_mw", where);
        g.p_max_mw = field<double>(item, "p_max_mw", where);
        g.cost_mwh = field<double>(item, "cost_mwh", where);
        g.cost_noload = field<double>(item, "cost_noload", where);
        g.cost_startup = field<double>(item, "cost_startup", where);
        g.ramp_mw_per_h = field<double>(item, "ramp_mw_per_h", where);
        g.initial_on = field<bool>(item, "initial_on", where);
        g.initial_output_mw = field<double>(item, "initial_output_mw", where);
        grid.generators.push_back(std::move(g));
    }
    for (const auto& item : list("storage")) {
        StorageUnit s;
        s.id = id_field(item, "storage");
        const auto where = "storage '" + s.id + "'";
        s.bus = field<int>(item, "bus", where);
        s.e_max_mwh = field<double>(item, "e_max_mwh", where);
        s.e_min_mwh = field<double>(item, "e_min_mwh", where);
        s.e_initial_mwh = field<double>(item, "e_initial_mwh", where);
        s.p_max_mw = field<double>(item, "p_max_mw", where);
        s.p_min_mw = field<double>(item, "p_min_mw", where);
        s.eff_charge = field<double>(item, "eff_charge", where);
        s.eff_discharge = field<double>(item, "eff_discharge", where);
        s.capital_cost = field<double>(item, "capital_cost", where);
        s.salvage_value = field_or<double>(item, "salvage_value", where, 0.0);
        s.soh_eol = field<double>(item, "soh_eol", where);
        s.soh_initial = field<double>(item, "soh_initial", where);
        s.ambient_temp_c = field<double>(item, "ambient_temp_c", where);
        grid.storage.push_back(std::move(s));
    }
    for (const auto& item : list("loads")) {
        grid.loads.push_back({field<int>(item, "bus", "load"), field<std::vector<double>>(item, "demand_mw", "load")});
    }
    for (const auto& item : list("renewables")) {
        grid.renewables.push_back(
            {field<int>(item, "bus", "renewable"), field<std::vector<double>>(item, "available_mw", "renewable")});
    }
    return grid;
}

json case_to_json(const GridCase& grid) {
    json doc;
    doc["horizon"] = {{"periods", grid.horizon.periods}, {"dt_hours", grid.horizon.dt_hours}};
    doc["buses"] = grid.buses;
    doc["reference_bus"] = grid.reference_bus;
    doc["lines"] = json::array();
    for (const auto& l : grid.lines) {
        doc["lines"].push_back({{"id", l.id},
                                {"from", l.from_bus},
                                {"to", l.to_bus},
                                {"susceptance_mw_per_rad", l.susceptance_mw_per_rad},
                                {"limit_mw", l.limit_mw}});
    }
    doc["generators"] = json::array();
    for (const auto& g : grid.generators) {
        doc["generators"].push_back({{"id", g.id},
                                     {"bus", g.bus},
                                     {"p_min_mw", g.p_min_mw},
                                     {"p_max_mw", g.p_max_mw},
                                     {"cost_mwh", g.cost_mwh},
                                     {"cost_noload", g.cost_noload},
                                     {"cost_startup", g.cost_startup},
                                     {"ramp_mw_per_h", g.ramp_mw_per_h},
                                     {"initial_on", g.initial_on},
                                     {"initial_output_mw", g.initial_output_mw}});
    }
    doc["storage"] = json::array();
    for (const auto& s : grid.storage) {
        doc["storage"].push_back({{"id", s.id},
                                  {"bus", s.bus},
                                  {"e_max_mwh", s.e_max_mwh},
                                  {"e_min_mwh", s.e_min_mwh},
                                  {"e_initial_mwh", s.e_initial_mwh},
                                  {"p_max_mw", s.p_max_mw},
                                  {"p_min_mw", s.p_min_mw},
                                  {"eff_charge", s.eff_charge},
                                  {"eff_discharge", s.eff_discharge},
                                  {"capital_cost", s.capital_cost},
                                  {"salvage_value", s.salvage_value},
                                  {"soh_eol", s.soh_eol},
                                  {"soh_initial", s.soh_initial},
                                  {"ambient_temp_c", s.ambient_temp_c}});
    }
    doc["loads"] = json::array();
    for (const auto& l : grid.loads) doc["loads"].push_back({{"bus", l.bus}, {"demand_mw", l.demand_mw}});
    doc["renewables"] = json::array();
    for (const auto& r : grid.renewables) {
        doc["renewables"].push_back({{"bus", r.bus}, {"available_mw", r.available_mw}});
    }
    return doc;
}

GridCase load_case(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open case file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::parse, path.string() + ": " + e.what());
    }
    GridCase grid = case_from_json(doc);
    const auto report = validate_case(grid);
    if (!report.ok()) {
        std::ostringstream msg;
        msg << path.string() << ": invalid case";
        for (const auto& issue : report.issues) msg << "\n  [" << issue.code << "] " << issue.field << ": " << issue.message;
        throw Error(ErrorCode::validation, msg.str());
    }
    return grid;
}

void save_case(const GridCase& grid, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io, "cannot write case file " + path.string());
    out << case_to_json(grid).dump(2) << '\n';
}

GridCase toy_case() {
    GridCase grid;
    grid.horizon = {4, 1.0};
    grid.buses = {1, 2, 3};
    grid.reference_bus = 1;
    grid.lines = {
        {"L12", 1, 2, 1000.0, 80.0},
        {"L23", 2, 3, 1000.0, 100.0},
        {"L13", 1, 3, 1000.0, 100.0},
    };
    grid.generators = {
        {"G1", 1, 10.0, 100.0, 20.0, 100.0, 50.0, 60.0, true, 60.0},
        {"G2", 2, 5.0, 80.0, 45.0, 50.0, 30.0, 80.0, false, 0.0},
    };
    StorageUnit bess;
    bess.id = "S1";
    bess.bus = 3;
    bess.e_max_mwh = 20.0;
    bess.e_min_mwh = 2.0;
    bess.e_initial_mwh = 10.0;
    bess.p_max_mw = 10.0;
    bess.p_min_mw = 0.0;
    bess.eff_charge = 0.95;
    bess.eff_discharge = 0.95;
    bess.capital_cost = 20.0 * 100000.0;
    bess.salvage_value = 0.0;
    bess.soh_eol = 0.5;
    bess.soh_initial = 1.0;
    bess.ambient_temp_c = 25.0;
    grid.storage = {bess};
    grid.loads = {{3, {60.0, 80.0, 120.0, 70.0}}};
    grid.renewables = {{2, {10.0, 5.0, 0.0, 20.0}}};
    return grid;
}

}  // namespace uc
