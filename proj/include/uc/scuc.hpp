#pragma once

#include <vector>

#include "uc/grid.hpp"
#include "uc/milp.hpp"

namespace uc {

/// Decision variables of the commitment model, addressed [entity][period].
/// Entity order follows the case lists; theta is indexed by bus position.
struct VariableIndex {
    int periods = 0;
    std::vector<std::vector<VarId>> p, u, v;  // generators
    std::vector<std::vector<VarId>> flow;     // lines
    std::vector<std::vector<VarId>> theta;    // buses
    std::vector<std::vector<VarId>> renewable;
    std::vector<std::vector<VarId>> p_disc, p_char, u_disc, u_char, energy, soc;  // storage
    std::vector<std::vector<VarId>> shed;     // buses; empty unless shedding is enabled
};

struct ScucOptions {
    bool allow_shedding = false;
    double shed_penalty = 1e6;  // $/MWh
};

struct ScucModel {
    Model model;
    VariableIndex index;
};

/// Traditional commitment model: DC network, ramping, start-up logic and
/// storage with mode exclusivity and a terminal energy condition. Throws
/// ErrorCode::validation for an invalid case.
ScucModel build_tscuc(const GridCase& grid, const ScucOptions& options = {});

struct CostBreakdown {
    double fuel = 0.0;
    double degradation = 0.0;
    double total = 0.0;
};

/// Solved values in the same [entity][period] layout as VariableIndex.
struct Schedule {
    int periods = 0;
    std::vector<std::vector<double>> p, u, v;
    std::vector<std::vector<double>> flow;
    std::vector<std::vector<double>> theta;
    std::vector<std::vector<double>> renewable;
    std::vector<std::vector<double>> p_disc, p_char, u_disc, u_char, energy, soc;
    std::vector<std::vector<double>> shed;
    CostBreakdown cost;
};

/// Throws ErrorCode::dimension_mismatch when the schedule and case disagree.
void check_dimensions(const Schedule& schedule, const GridCase& grid);

/// Generator energy, no-load and start-up cost (plus shed penalty, if any).
double evaluate_fuel_cost(const Schedule& schedule, const GridCase& grid, const ScucOptions& options = {});

/// Copies the solution out, rounding binaries. Degradation is left at zero.
/// Throws ErrorCode::extraction for a missing solution or a binary further
/// than 1e-6 from integral.
Schedule extract_schedule(const SolveResult& result, const VariableIndex& index, const GridCase& grid,
                          const ScucOptions& options = {});

/// An all-zero schedule shaped for the case.
Schedule empty_schedule(const GridCase& grid);

}  // namespace uc
