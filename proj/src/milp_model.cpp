#include <algorithm>
#include <atomic>
#include <cmath>

#include "uc/error.hpp"
#include "uc/milp.hpp"

namespace uc {

LinExpr& LinExpr::operator+=(const LinExpr& o) {
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    constant_ += o.constant_;
    return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) {
    for (const auto& t : o.terms_) terms_.push_back({t.var, -t.coef});
    constant_ -= o.constant_;
    return *this;
}

LinExpr& LinExpr::operator*=(double k) {
    for (auto& t : terms_) t.coef *= k;
    constant_ *= k;
    return *this;
}

LinExpr& LinExpr::normalize() {
    std::stable_sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) {
        return a.var.model != b.var.model ? a.var.model < b.var.model : a.var.index < b.var.index;
    });
    std::vector<Term> merged;
    merged.reserve(terms_.size());
    for (const auto& t : terms_) {
        if (!merged.empty() && merged.back().var == t.var) {
            merged.back().coef += t.coef;
        } else {
            merged.push_back(t);
        }
    }
    std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
    terms_ = std::move(merged);
    return *this;
}

double LinExpr::evaluate(const std::vector<double>& values) const {
    double sum = constant_;
    for (const auto& t : terms_) sum += t.coef * values.at(t.var.index);
    return sum;
}

LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
LinExpr operator*(double k, LinExpr a) { return a *= k; }
LinExpr operator*(LinExpr a, double k) { return a *= k; }

namespace {
std::atomic<std::uint32_t> next_model_id{1};
}

Model::Model() : id_(next_model_id.fetch_add(1)) {}

VarId Model::add_variable(VarKind kind, double lb, double ub, std::string name) {
    if (std::isnan(lb) || std::isnan(ub) || lb > ub || lb == kInf || ub == -kInf) {
        throw Error(ErrorCode::bound, "variable '" + name + "': invalid bounds [" + std::to_string(lb) + ", " +
                                          std::to_string(ub) + "]");
    }
    if (kind == VarKind::binary && (lb < 0.0 || ub > 1.0)) {
        throw Error(ErrorCode::bound, "binary variable '" + name + "' must have bounds within [0, 1]");
    }
    if (name.empty()) name = "x" + std::to_string(vars_.size());
    vars_.push_back({kind, lb, ub, std::move(name)});
    return handle(vars_.size() - 1);
}

void Model::check_owned(const LinExpr& expr) const {
    for (const auto& t : expr.terms()) {
        if (!owns(t.var)) {
            throw Error(ErrorCode::foreign_variable, "expression references a variable that does not belong to this model");
        }
        if (!std::isfinite(t.coef)) throw Error(ErrorCode::invalid_argument, "non-finite coefficient");
    }
    if (!std::isfinite(expr.constant())) throw Error(ErrorCode::invalid_argument, "non-finite constant");
}

ConstrId Model::add_constraint(LinExpr expr, Sense sense, double rhs, std::string name) {
    check_owned(expr);
    if (!std::isfinite(rhs)) throw Error(ErrorCode::invalid_argument, "constraint '" + name + "': rhs must be finite");
    expr.normalize();
    if (name.empty()) name = "c" + std::to_string(cons_.size());
    cons_.push_back({expr.terms(), sense, rhs - expr.constant(), std::move(name)});
    return {static_cast<std::uint32_t>(cons_.size() - 1)};
}

void Model::set_objective(LinExpr expr) {
    check_owned(expr);
    objective_ = std::move(expr.normalize());
    has_objective_ = true;
}

void Model::set_bounds(VarId v, double lb, double ub) {
    if (!owns(v)) throw Error(ErrorCode::foreign_variable, "set_bounds: variable does not belong to this model");
    auto& var = vars_[v.index];
    if (std::isnan(lb) || std::isnan(ub) || lb > ub || (var.kind == VarKind::binary && (lb < 0 || ub > 1))) {
        throw Error(ErrorCode::bound, "variable '" + var.name + "': invalid bounds");
    }
    var.lb = lb;
    var.ub = ub;
}

std::size_t Model::num_binaries() const {
    return static_cast<std::size_t>(
        std::count_if(vars_.begin(), vars_.end(), [](const Variable& v) { return v.kind == VarKind::binary; }));
}

const Variable& Model::variable(VarId v) const {
    if (!owns(v)) throw Error(ErrorCode::foreign_variable, "variable does not belong to this model");
    return vars_[v.index];
}

const char* to_string(SolveStatus status) {
    switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::feasible_gap_unmet: return "feasible_gap_unmet";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::no_incumbent: return "no_incumbent";
    }
    return "unknown";
}

double max_violation(const Model& model, const std::vector<double>& values) {
    if (values.size() != model.num_variables()) {
        throw Error(ErrorCode::dimension_mismatch, "assignment size does not match the model");
    }
    double worst = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
        const auto& v = model.variable(j);
        worst = std::max({worst, v.lb - values[j], values[j] - v.ub});
    }
    for (const auto& c : model.constraints()) {
        double activity = 0.0, norm = 1.0;
        for (const auto& t : c.terms) {
            activity += t.coef * values[t.var.index];
            norm = std::max(norm, std::abs(t.coef));
        }
        double residual = 0.0;
        switch (c.sense) {
        case Sense::le: residual = activity - c.rhs; break;
        case Sense::ge: residual = c.rhs - activity; break;
        case Sense::eq: residual = std::abs(activity - c.rhs); break;
        }
        worst = std::max(worst, residual / norm);
    }
    return worst;
}

}  // namespace uc
