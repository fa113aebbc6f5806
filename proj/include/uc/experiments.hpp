#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uc/degradation.hpp"
#include "uc/grid.hpp"
#include "uc/milp.hpp"
#include "uc/scuc.hpp"
#include "uc/verify.hpp"

namespace uc {

enum class Mode { tscuc, lbd };

const char* to_string(Mode mode);
Mode parse_mode(const std::string& text);  // throws ErrorCode::invalid_argument

struct RunOptions {
    Mode mode = Mode::tscuc;
    SolveOptions solve;
    ScucOptions scuc;
    bool record_timing = true;  // false writes solve_seconds as 0 for reproducible artifacts
};

struct RunOutcome {
    Mode mode = Mode::tscuc;
    SolveStatus status = SolveStatus::infeasible;
    bool has_schedule = false;
    Schedule schedule;                 // cost.degradation is the ex-post value
    double milp_degradation = 0.0;     // degradation term of the solver objective (lbd only)
    std::optional<DegradationRecompute> degradation;
    std::optional<ParityReport> parity;  // lbd only
    AuditReport audit;
    double gap_achieved = kInf;
    double solve_seconds = 0.0;
    std::size_t binaries = 0;
    std::size_t variables = 0;
    std::size_t constraints = 0;
    std::size_t nodes = 0;
    std::vector<std::string> warnings;

    /// 0 success, 1 infeasible, 3 time limit without incumbent.
    int exit_code() const;
};

/// Builds the requested model, solves, extracts, audits and recomputes the
/// degradation cost from the network for both modes. `net` may be null for
/// tscuc (degradation is then reported as 0 with a warning). Throws
/// ErrorCode::invalid_argument when lbd is requested without a net.
RunOutcome run_solve(const GridCase& grid, const DegradationNet* net, const RunOptions& options);

nlohmann::ordered_json costs_json(const RunOutcome& outcome, bool record_timing = true);
nlohmann::ordered_json audit_json(const RunOutcome& outcome);

/// Writes schedule.csv (when a schedule exists), costs.json and audit.json.
void write_artifacts(const RunOutcome& outcome, const GridCase& grid, const std::filesystem::path& dir,
                     bool record_timing = true);

/// Long format: period,entity_kind,entity_id,field,value.
std::string schedule_to_csv(const Schedule& schedule, const GridCase& grid);
void write_schedule_csv(const Schedule& schedule, const GridCase& grid, const std::filesystem::path& path);
/// Throws ErrorCode::parse for malformed rows or unknown entities.
Schedule read_schedule_csv(const std::filesystem::path& path, const GridCase& grid);
Schedule schedule_from_csv(const std::string& text, const GridCase& grid);

struct GapRow {
    double gap = 0.0;
    double total_cost = 0.0;
    double degradation_cost = 0.0;
    double fuel_cost = 0.0;
    double solve_seconds = 0.0;
    std::string status;
};

/// One lbd solve per gap, rows in input order. Throws
/// ErrorCode::invalid_argument for an empty list or a negative gap.
std::vector<GapRow> sweep_mipgap(const GridCase& grid, const DegradationNet& net, const std::vector<double>& gaps,
                                 const RunOptions& options);

struct StorageCountRow {
    int count = 0;
    double total_cost = 0.0;
    double degradation_cost = 0.0;
    double solve_seconds = 0.0;
    std::size_t binaries = 0;
    std::string status;
};

/// Keeps the first m storage units of the case.
GridCase with_storage_count(const GridCase& grid, int m);

/// One lbd solve per count. Throws ErrorCode::invalid_argument for counts
/// outside [0, |S|].
std::vector<StorageCountRow> sweep_storage_count(const GridCase& grid, const DegradationNet& net,
                                                 const std::vector<int>& counts, const RunOptions& options);

std::string gap_rows_to_csv(const std::vector<GapRow>& rows, bool record_timing = true);
std::string count_rows_to_csv(const std::vector<StorageCountRow>& rows, bool record_timing = true);

struct StorageEconomics {
    std::string id;
    double daily_degradation = 0.0;  // SOH fraction per day
    double lifetime_years = kInf;
    bool lifetime_capped = false;
    double capital_cost = 0.0;
};

struct EconomicReport {
    std::vector<StorageEconomics> units;
    double daily_saving = 0.0;
    double benefit_years = 0.0;
    double benefit = 0.0;
    double lifetime_cap_years = 25.0;
    bool capped = false;
};

/// (soh_initial - soh_eol) / (daily * 365); infinity when daily <= 0.
double expected_lifetime_years(double soh_initial, double soh_eol, double daily_degradation);

/// Benefit = daily saving * 365 * shortest lifetime. Lifetimes that are
/// unbounded or longer than `cap_years` count as `cap_years` and are flagged.
EconomicReport economic_report(const GridCase& grid, const std::vector<double>& daily_degradation,
                               double baseline_total, double with_storage_total, double cap_years = 25.0);

/// Solves the case without storage and with storage (lbd) and reports.
EconomicReport economic_report(const GridCase& grid, const DegradationNet& net, const RunOptions& options,
                               double cap_years = 25.0);

nlohmann::ordered_json economics_json(const EconomicReport& report);

}  // namespace uc
