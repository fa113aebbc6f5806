#pragma once

#include <string>
#include <vector>

#include "uc/degradation.hpp"
#include "uc/grid.hpp"
#include "uc/scuc.hpp"

namespace uc {

struct Violation {
    std::string family;  // e.g. "balance", "terminal"
    int entity = -1;     // position in the case list, -1 when not applicable
    int period = -1;     // 0-based, -1 when not applicable
    double residual = 0.0;
};

struct AuditReport {
    std::vector<Violation> violations;
    double max_residual = 0.0;
    double tolerance = 1e-6;

    bool passed() const { return max_residual <= tolerance; }
    bool has(const std::string& family) const;
};

/// Re-evaluates every constraint family of the commitment model straight
/// from schedule values. Throws ErrorCode::dimension_mismatch.
AuditReport audit_feasibility(const Schedule& schedule, const GridCase& grid, double tolerance = 1e-6);

/// Network inputs of unit s over period t, computed from schedule values.
FeatureVector schedule_features(const Schedule& schedule, const GridCase& grid, int s, int t);

struct DegradationRecompute {
    double cost = 0.0;                              // $
    std::vector<std::vector<double>> soh_loss;      // [storage][period], SOH fraction
    bool out_of_box = false;                        // some input left the training range
    std::vector<std::string> warnings;

    double daily_loss(std::size_t s) const;
};

/// Forward pass per storage unit and period, weighted by the unit's cost
/// coefficient. Inputs outside the training range are flagged, not rejected.
DegradationRecompute recompute_degradation(const Schedule& schedule, const GridCase& grid, const DegradationNet& net);
double recompute_degradation_cost(const Schedule& schedule, const GridCase& grid, const DegradationNet& net);

struct ParityReport {
    double milp_cost = 0.0;
    double recomputed_cost = 0.0;
    double relative_difference = 0.0;  // |a - b| / max(1, |b|)
    double tolerance = 1e-5;

    bool passed() const { return relative_difference <= tolerance; }
};

/// Throws ErrorCode::invalid_argument for a negative cost.
ParityReport verify_parity(double milp_cost, double recomputed_cost, double tolerance = 1e-5);

struct BruteForceResult {
    bool feasible = false;
    double objective = kInf;
    std::size_t assignments = 0;  // commitment/mode combinations covered
    std::size_t lp_solves = 0;
};

/// Exhaustive optimum of the traditional model for tiny cases: enumerates
/// generator commitments and storage modes, derives start-ups from the
/// commitment transitions and solves the dispatch LP of each assignment.
/// Throws ErrorCode::budget_exceeded above `max_binaries` binaries.
BruteForceResult brute_force_reference(const GridCase& grid, std::size_t max_binaries = 24);

}  // namespace uc
