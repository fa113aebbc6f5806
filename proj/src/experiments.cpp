#include "uc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "uc/error.hpp"
#include "uc/relu.hpp"

namespace uc {

const char* to_string(Mode mode) { return mode == Mode::lbd ? "lbd" : "tscuc"; }

Mode parse_mode(const std::string& text) {
    if (text == "tscuc") return Mode::tscuc;
    if (text == "lbd") return Mode::lbd;
    throw Error(ErrorCode::invalid_argument, "unknown mode '" + text + "' (expected tscuc or lbd)");
}

int RunOutcome::exit_code() const {
    switch (status) {
    case SolveStatus::optimal:
    case SolveStatus::feasible_gap_unmet: return 0;
    case SolveStatus::no_incumbent: return 3;
    default: return 1;
    }
}

RunOutcome run_solve(const GridCase& grid, const DegradationNet* net, const RunOptions& options) {
    if (options.mode == Mode::lbd && net == nullptr) {
        throw Error(ErrorCode::invalid_argument, "mode lbd needs a degradation net");
    }
    if (!(options.solve.rel_mipgap >= 0.0)) throw Error(ErrorCode::invalid_argument, "rel_mipgap must be >= 0");
    if (!(options.solve.time_limit_seconds > 0.0)) throw Error(ErrorCode::invalid_argument, "time limit must be > 0");

    RunOutcome out;
    out.mode = options.mode;
    std::optional<LbdModel> lbd;
    std::optional<ScucModel> base;
    const Model* model = nullptr;
    if (options.mode == Mode::lbd) {
        lbd = build_lbdscuc(grid, *net, options.scuc);
        model = &lbd->model;
    } else {
        base = build_tscuc(grid, options.scuc);
        model = &base->model;
    }
    out.binaries = model->num_binaries();
    out.variables = model->num_variables();
    out.constraints = model->num_constraints();

    const SolveResult result = solve(*model, options.solve);
    out.status = result.status;
    out.gap_achieved = result.gap_achieved;
    out.solve_seconds = result.solve_seconds;
    out.nodes = result.nodes;
    if (!result.has_solution()) return out;

    out.schedule = lbd ? extract_lbd_schedule(result, *lbd, grid, options.scuc)
                       : extract_schedule(result, base->index, grid, options.scuc);
    out.has_schedule = true;
    out.milp_degradation = out.schedule.cost.degradation;
    out.audit = audit_feasibility(out.schedule, grid);

    if (net != nullptr) {
        out.degradation = recompute_degradation(out.schedule, grid, *net);
        for (const auto& w : out.degradation->warnings) out.warnings.push_back(w);
        out.schedule.cost.degradation = out.degradation->cost;
        if (options.mode == Mode::lbd) out.parity = verify_parity(out.milp_degradation, out.degradation->cost);
    } else if (!grid.storage.empty()) {
        out.warnings.emplace_back("no degradation net supplied; degradation cost reported as 0");
        out.schedule.cost.degradation = 0.0;
    }
    out.schedule.cost.total = out.schedule.cost.fuel + out.schedule.cost.degradation;
    return out;
}

nlohmann::ordered_json costs_json(const RunOutcome& o, bool record_timing) {
    nlohmann::ordered_json j;
    j["mode"] = to_string(o.mode);
    if (o.has_schedule) {
        j["fuel_cost"] = o.schedule.cost.fuel;
        j["degradation_cost"] = o.schedule.cost.degradation;
        j["total_cost"] = o.schedule.cost.total;
        j["mipgap_achieved"] = o.gap_achieved;
    } else {
        j["fuel_cost"] = nullptr;
        j["degradation_cost"] = nullptr;
        j["total_cost"] = nullptr;
        j["mipgap_achieved"] = nullptr;
    }
    j["solve_seconds"] = record_timing ? o.solve_seconds : 0.0;
    j["status"] = to_string(o.status);
    return j;
}

nlohmann::ordered_json audit_json(const RunOutcome& o) {
    nlohmann::ordered_json j;
    j["status"] = to_string(o.status);
    j["passed"] = o.has_schedule && o.audit.passed();
    j["tolerance"] = o.audit.tolerance;
    j["max_residual"] = o.audit.max_residual;
    auto violations = nlohmann::ordered_json::array();
    for (const auto& v : o.audit.violations) {
        violations.push_back({{"family", v.family}, {"entity", v.entity}, {"period", v.period + 1}, {"residual", v.residual}});
    }
    j["violations"] = violations;
    if (o.parity) {
        j["parity"] = {{"milp_degradation_cost", o.parity->milp_cost},
                       {"recomputed_degradation_cost", o.parity->recomputed_cost},
                       {"relative_difference", o.parity->relative_difference},
                       {"passed", o.parity->passed()}};
    }
    if (o.degradation) j["features_out_of_training_range"] = o.degradation->out_of_box;
    j["warnings"] = o.warnings;
    j["model"] = {{"variables", o.variables}, {"constraints", o.constraints}, {"binaries", o.binaries}};
    return j;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::io, "cannot write " + path.string());
    f << text;
    if (!f) throw Error(ErrorCode::io, "failed writing " + path.string());
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_artifacts(const RunOutcome& o, const GridCase& grid, const std::filesystem::path& dir, bool record_timing) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
    if (o.has_schedule) write_schedule_csv(o.schedule, grid, dir / "schedule.csv");
    write_text(dir / "costs.json", costs_json(o, record_timing).dump(2) + "\n");
    write_text(dir / "audit.json", audit_json(o).dump(2) + "\n");
}

std::string schedule_to_csv(const Schedule& s, const GridCase& grid) {
    check_dimensions(s, grid);
    std::string out = "period,entity_kind,entity_id,field,value\n";
    auto row = [&](int t, const char* kind, const std::string& id, const char* field, double v) {
        out += std::to_string(t + 1) + "," + kind + "," + id + "," + field + "," + num(v) + "\n";
    };
    for (int t = 0; t < s.periods; ++t) {
        const auto ti = static_cast<std::size_t>(t);
        for (std::size_t g = 0; g < grid.generators.size(); ++g) {
            const auto& id = grid.generators[g].id;
            row(t, "generator", id, "p", s.p[g][ti]);
            row(t, "generator", id, "U", s.u[g][ti]);
            row(t, "generator", id, "V", s.v[g][ti]);
        }
        for (std::size_t k = 0; k < grid.lines.size(); ++k) row(t, "line", grid.lines[k].id, "flow", s.flow[k][ti]);
        for (std::size_t n = 0; n < grid.buses.size(); ++n) {
            const auto id = std::to_string(grid.buses[n]);
            row(t, "bus", id, "theta", s.theta[n][ti]);
            if (!s.shed.empty()) row(t, "bus", id, "shed", s.shed[n][ti]);
        }
        for (std::size_t r = 0; r < grid.renewables.size(); ++r) row(t, "renewable", std::to_string(r), "renewable", s.renewable[r][ti]);
        for (std::size_t k = 0; k < grid.storage.size(); ++k) {
            const auto& id = grid.storage[k].id;
            row(t, "storage", id, "p_disc", s.p_disc[k][ti]);
            row(t, "storage", id, "p_char", s.p_char[k][ti]);
            row(t, "storage", id, "u_disc", s.u_disc[k][ti]);
            row(t, "storage", id, "u_char", s.u_char[k][ti]);
            row(t, "storage", id, "energy", s.energy[k][ti]);
            row(t, "storage", id, "soc", s.soc[k][ti]);
        }
    }
    return out;
}

void write_schedule_csv(const Schedule& s, const GridCase& grid, const std::filesystem::path& path) {
    write_text(path, schedule_to_csv(s, grid));
}

Schedule schedule_from_csv(const std::string& text, const GridCase& grid) {
    Schedule s = empty_schedule(grid);
    using Table = std::vector<std::vector<double>>;
    std::map<std::pair<std::string, std::string>, std::pair<Table*, std::size_t>> slots;
    for (std::size_t g = 0; g < grid.generators.size(); ++g) {
        const auto& id = grid.generators[g].id;
        slots[{"generator/" + id, "p"}] = {&s.p, g};
        slots[{"generator/" + id, "U"}] = {&s.u, g};
        slots[{"generator/" + id, "V"}] = {&s.v, g};
    }
    for (std::size_t k = 0; k < grid.lines.size(); ++k) slots[{"line/" + grid.lines[k].id, "flow"}] = {&s.flow, k};
    bool has_shed = false;
    for (std::size_t n = 0; n < grid.buses.size(); ++n) {
        slots[{"bus/" + std::to_string(grid.buses[n]), "theta"}] = {&s.theta, n};
        slots[{"bus/" + std::to_string(grid.buses[n]), "shed"}] = {&s.shed, n};
    }
    for (std::size_t r = 0; r < grid.renewables.size(); ++r) slots[{"renewable/" + std::to_string(r), "renewable"}] = {&s.renewable, r};
    for (std::size_t k = 0; k < grid.storage.size(); ++k) {
        const auto& id = grid.storage[k].id;
        slots[{"storage/" + id, "p_disc"}] = {&s.p_disc, k};
        slots[{"storage/" + id, "p_char"}] = {&s.p_char, k};
        slots[{"storage/" + id, "u_disc"}] = {&s.u_disc, k};
        slots[{"storage/" + id, "u_char"}] = {&s.u_char, k};
        slots[{"storage/" + id, "energy"}] = {&s.energy, k};
        slots[{"storage/" + id, "soc"}] = {&s.soc, k};
    }

    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0, cells = 0, shed_cells = 0;
    auto fail = [&](const std::string& why) {
        throw Error(ErrorCode::parse, "schedule csv line " + std::to_string(lineno) + ": " + why);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (lineno == 1 && line.rfind("period,", 0) == 0) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() != 5) fail("expected 5 columns");
        int period = 0;
        double value = 0.0;
        try {
            std::size_t used = 0;
            period = std::stoi(f[0], &used);
            if (used != f[0].size()) fail("bad period");
            value = std::stod(f[4], &used);
            if (used != f[4].size()) fail("bad value");
        } catch (const std::logic_error&) {
            fail("bad number");
        }
        if (period < 1 || period > grid.periods()) fail("period out of range");
        const auto it = slots.find({f[1] + "/" + f[2], f[3]});
        if (it == slots.end()) fail("unknown entity or field '" + f[1] + "," + f[2] + "," + f[3] + "'");
        if (f[3] == "shed") {
            if (!has_shed) s.shed.assign(grid.buses.size(), std::vector<double>(static_cast<std::size_t>(grid.periods()), 0.0));
            has_shed = true;
            ++shed_cells;
        } else {
            ++cells;
        }
        (*it->second.first)[it->second.second][static_cast<std::size_t>(period - 1)] = value;
    }
    const auto T = static_cast<std::size_t>(grid.periods());
    const std::size_t expected =
        T * (3 * grid.generators.size() + grid.lines.size() + grid.buses.size() + grid.renewables.size() + 6 * grid.storage.size());
    if (cells != expected) {
        throw Error(ErrorCode::parse, "schedule csv has " + std::to_string(cells) + " cells, expected " + std::to_string(expected));
    }
    if (has_shed && shed_cells != T * grid.buses.size()) throw Error(ErrorCode::parse, "schedule csv has partial shed rows");
    return s;
}

Schedule read_schedule_csv(const std::filesystem::path& path, const GridCase& grid) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::io, "cannot read " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return schedule_from_csv(ss.str(), grid);
}

std::vector<GapRow> sweep_mipgap(const GridCase& grid, const DegradationNet& net, const std::vector<double>& gaps,
                                 const RunOptions& options) {
    if (gaps.empty()) throw Error(ErrorCode::invalid_argument, "sweep_mipgap: no gaps given");
    for (double g : gaps)
        if (!(g >= 0.0)) throw Error(ErrorCode::invalid_argument, "sweep_mipgap: gaps must be >= 0");
    std::vector<GapRow> rows;
    for (double g : gaps) {
        RunOptions o = options;
        o.mode = Mode::lbd;
        o.solve.rel_mipgap = g;
        const RunOutcome r = run_solve(grid, &net, o);
        GapRow row;
        row.gap = g;
        row.status = to_string(r.status);
        row.solve_seconds = r.solve_seconds;
        if (r.has_schedule) {
            row.total_cost = r.schedule.cost.total;
            row.degradation_cost = r.schedule.cost.degradation;
            row.fuel_cost = r.schedule.cost.fuel;
        } else {
            row.total_cost = row.degradation_cost = row.fuel_cost = std::nan("");
        }
        rows.push_back(row);
    }
    return rows;
}

GridCase with_storage_count(const GridCase& grid, int m) {
    if (m < 0 || static_cast<std::size_t>(m) > grid.storage.size()) {
        throw Error(ErrorCode::invalid_argument, "storage count " + std::to_string(m) + " outside [0, " +
                                                     std::to_string(grid.storage.size()) + "]");
    }
    GridCase out = grid;
    out.storage.resize(static_cast<std::size_t>(m));
    return out;
}

std::vector<StorageCountRow> sweep_storage_count(const GridCase& grid, const DegradationNet& net,
                                                 const std::vector<int>& counts, const RunOptions& options) {
    if (counts.empty()) throw Error(ErrorCode::invalid_argument, "sweep_storage_count: no counts given");
    std::vector<GridCase> cases;
    for (int m : counts) cases.push_back(with_storage_count(grid, m));
    std::vector<StorageCountRow> rows;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        RunOptions o = options;
        o.mode = Mode::lbd;
        const RunOutcome r = run_solve(cases[i], &net, o);
        StorageCountRow row;
        row.count = counts[i];
        row.status = to_string(r.status);
        row.solve_seconds = r.solve_seconds;
        row.binaries = r.binaries;
        row.total_cost = r.has_schedule ? r.schedule.cost.total : std::nan("");
        row.degradation_cost = r.has_schedule ? r.schedule.cost.degradation : std::nan("");
        rows.push_back(row);
    }
    return rows;
}

std::string gap_rows_to_csv(const std::vector<GapRow>& rows, bool record_timing) {
    std::string out = "gap,total_cost,degradation_cost,fuel_cost,solve_seconds,status\n";
    for (const auto& r : rows) {
        out += num(r.gap) + "," + num(r.total_cost) + "," + num(r.degradation_cost) + "," + num(r.fuel_cost) + "," +
               num(record_timing ? r.solve_seconds : 0.0) + "," + r.status + "\n";
    }
    return out;
}

std::string count_rows_to_csv(const std::vector<StorageCountRow>& rows, bool record_timing) {
    std::string out = "count,solve_seconds,total_cost,degradation_cost,binaries,status\n";
    for (const auto& r : rows) {
        out += std::to_string(r.count) + "," + num(record_timing ? r.solve_seconds : 0.0) + "," + num(r.total_cost) + "," +
               num(r.degradation_cost) + "," + std::to_string(r.binaries) + "," + r.status + "\n";
    }
    return out;
}

double expected_lifetime_years(double soh_initial, double soh_eol, double daily) {
    if (!(daily > 0.0)) return kInf;
    return (soh_initial - soh_eol) / (daily * 365.0);
}

EconomicReport economic_report(const GridCase& grid, const std::vector<double>& daily, double baseline_total,
                               double with_storage_total, double cap_years) {
    if (daily.size() != grid.storage.size()) {
        throw Error(ErrorCode::dimension_mismatch, "economic_report: one daily degradation per storage unit expected");
    }
    EconomicReport r;
    r.lifetime_cap_years = cap_years;
    r.daily_saving = baseline_total - with_storage_total;
    double years = kInf;
    for (std::size_t s = 0; s < grid.storage.size(); ++s) {
        const auto& st = grid.storage[s];
        StorageEconomics u;
        u.id = st.id;
        u.daily_degradation = daily[s];
        u.capital_cost = st.capital_cost;
        u.lifetime_years = expected_lifetime_years(st.soh_initial, st.soh_eol, daily[s]);
        double used = u.lifetime_years;
        // A unit that barely degrades would otherwise outlive any sensible horizon.
        if (!std::isfinite(used) || used > cap_years) {
            u.lifetime_capped = true;
            r.capped = true;
            used = cap_years;
        }
        years = std::min(years, used);
        r.units.push_back(u);
    }
    r.benefit_years = std::isfinite(years) ? years : 0.0;
    r.benefit = r.daily_saving * 365.0 * r.benefit_years;
    return r;
}

EconomicReport economic_report(const GridCase& grid, const DegradationNet& net, const RunOptions& options,
                               double cap_years) {
    RunOptions o = options;
    o.mode = Mode::lbd;
    const RunOutcome baseline = run_solve(with_storage_count(grid, 0), &net, o);
    const RunOutcome with = run_solve(grid, &net, o);
    if (!baseline.has_schedule || !with.has_schedule) {
        throw Error(ErrorCode::invalid_argument, "economic_report: both solves must produce a schedule");
    }
    std::vector<double> daily;
    for (std::size_t s = 0; s < grid.storage.size(); ++s) daily.push_back(with.degradation->daily_loss(s));
    return economic_report(grid, daily, baseline.schedule.cost.total, with.schedule.cost.total, cap_years);
}

nlohmann::ordered_json economics_json(const EconomicReport& r) {
    nlohmann::ordered_json j;
    auto units = nlohmann::ordered_json::array();
    for (const auto& u : r.units) {
        nlohmann::ordered_json ju;
        ju["id"] = u.id;
        ju["daily_degradation"] = u.daily_degradation;
        ju["expected_lifetime_years"] = std::isfinite(u.lifetime_years) ? nlohmann::ordered_json(u.lifetime_years)
                                                                         : nlohmann::ordered_json("unbounded");
        ju["lifetime_capped"] = u.lifetime_capped;
        ju["capital_cost"] = u.capital_cost;
        units.push_back(ju);
    }
    j["storage"] = units;
    j["daily_saving"] = r.daily_saving;
    j["benefit_years"] = r.benefit_years;
    j["economic_benefit"] = r.benefit;
    j["lifetime_cap_years"] = r.lifetime_cap_years;
    j["capped"] = r.capped;
    return j;
}

}  // namespace uc
