#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace uc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { continuous, binary };

/// Handle to a variable of one particular Model.
struct VarId {
    std::uint32_t model = 0;
    std::uint32_t index = 0;

    bool operator==(const VarId&) const = default;
};

struct Term {
    VarId var;
    double coef = 0.0;
};

class LinExpr {
public:
    LinExpr() = default;
    LinExpr(double constant) : constant_(constant) {}  // NOLINT(google-explicit-constructor)
    LinExpr(VarId v, double coef = 1.0) { terms_.push_back({v, coef}); }  // NOLINT(google-explicit-constructor)

    LinExpr& add(VarId v, double coef) {
        terms_.push_back({v, coef});
        return *this;
    }
    LinExpr& add_constant(double c) {
        constant_ += c;
        return *this;
    }

    LinExpr& operator+=(const LinExpr& o);
    LinExpr& operator-=(const LinExpr& o);
    LinExpr& operator*=(double k);

    /// Merges duplicate variables (summing coefficients), drops exact zeros
    /// and orders terms by variable index.
    LinExpr& normalize();

    const std::vector<Term>& terms() const { return terms_; }
    double constant() const { return constant_; }

    /// Value under an assignment indexed by VarId::index.
    double evaluate(const std::vector<double>& values) const;

private:
    std::vector<Term> terms_;
    double constant_ = 0.0;
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator*(double k, LinExpr a);
LinExpr operator*(LinExpr a, double k);

enum class Sense { le, ge, eq };

struct Variable {
    VarKind kind = VarKind::continuous;
    double lb = 0.0;
    double ub = kInf;
    std::string name;
};

// Stored form: sum(terms) <sense> rhs, constant already moved to the rhs.
struct Constraint {
    std::vector<Term> terms;
    Sense sense = Sense::le;
    double rhs = 0.0;
    std::string name;
};

struct ConstrId {
    std::uint32_t index = 0;
};

/// Minimization MILP under construction. Variables and constraints keep
/// insertion order, which fixes the LP export and the solver's pivoting
/// order.
class Model {
public:
    Model();

    VarId add_variable(VarKind kind, double lb, double ub, std::string name);
    ConstrId add_constraint(LinExpr expr, Sense sense, double rhs, std::string name);
    void set_objective(LinExpr expr);
    void set_bounds(VarId v, double lb, double ub);

    std::size_t num_variables() const { return vars_.size(); }
    std::size_t num_constraints() const { return cons_.size(); }
    std::size_t num_binaries() const;

    const Variable& variable(VarId v) const;
    const Variable& variable(std::size_t index) const { return vars_.at(index); }
    const std::vector<Variable>& variables() const { return vars_; }
    const std::vector<Constraint>& constraints() const { return cons_; }
    const Constraint& constraint(ConstrId c) const { return cons_.at(c.index); }
    const LinExpr& objective() const { return objective_; }
    bool has_objective() const { return has_objective_; }

    VarId handle(std::size_t index) const { return {id_, static_cast<std::uint32_t>(index)}; }
    bool owns(VarId v) const { return v.model == id_ && v.index < vars_.size(); }

private:
    void check_owned(const LinExpr& expr) const;

    std::uint32_t id_;
    std::vector<Variable> vars_;
    std::vector<Constraint> cons_;
    LinExpr objective_;
    bool has_objective_ = false;
};

/// CPLEX LP text (Minimize / Subject To / Bounds / Binaries / End).
std::string export_lp(const Model& model);
/// Reads the subset of the LP format that export_lp writes.
Model read_lp(std::string_view text);

struct SolveOptions {
    double rel_mipgap = 1e-4;
    double time_limit_seconds = 600.0;
    std::uint64_t seed = 0;  // the reference backend is deterministic and ignores it
};

enum class SolveStatus {
    optimal,
    feasible_gap_unmet,  // time limit hit with an incumbent
    infeasible,
    unbounded,
    no_incumbent,  // time limit hit before any feasible point was found
};

const char* to_string(SolveStatus status);

struct SolveResult {
    SolveStatus status = SolveStatus::infeasible;
    double objective = kInf;
    double best_bound = -kInf;
    double gap_achieved = kInf;
    double solve_seconds = 0.0;
    std::vector<double> values;  // indexed by VarId::index
    std::size_t nodes = 0;
    std::size_t lp_iterations = 0;
    double max_dual_infeasibility = 0.0;

    bool has_solution() const {
        return status == SolveStatus::optimal || status == SolveStatus::feasible_gap_unmet;
    }
    double value(VarId v) const { return values.at(v.index); }
};

inline constexpr double kFeasibilityTol = 1e-6;
inline constexpr double kIntegralityTol = 1e-6;
inline constexpr double kDualTol = 1e-8;

/// Largest constraint or bound violation of an assignment, each row's
/// residual divided by max(1, row infinity-norm).
double max_violation(const Model& model, const std::vector<double>& values);

/// Exact LP optimum with integrality dropped (bounded dual simplex).
SolveResult solve_lp_relaxation(const Model& model);

/// Reference backend: LP-based branch and bound. Best-bound node selection
/// (deeper node wins ties), most-fractional branching with lowest index
/// breaking ties, plus a rounding dive for early incumbents. Intended for
/// desk-scale models of a few hundred binaries.
SolveResult solve(const Model& model, const SolveOptions& options = {});

}  // namespace uc
