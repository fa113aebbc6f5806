#include "uc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "simplex.hpp"
#include "uc/error.hpp"
#include "uc/relu.hpp"

namespace uc {

bool AuditReport::has(const std::string& family) const {
    return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.family == family; });
}

namespace {

class Auditor {
public:
    explicit Auditor(AuditReport& r) : r_(r) {}

    // Records the amount by which a quantity exceeds zero.
    void excess(const char* family, int entity, int period, double amount) {
        if (!(amount <= r_.max_residual)) r_.max_residual = std::isnan(amount) ? kInf : amount;
        if (!(amount <= r_.tolerance)) r_.violations.push_back({family, entity, period, amount});
    }
    void equal(const char* family, int entity, int period, double lhs, double rhs) {
        excess(family, entity, period, std::abs(lhs - rhs));
    }
    void within(const char* family, int entity, int period, double v, double lo, double hi) {
        excess(family, entity, period, std::max(lo - v, v - hi));
    }

private:
    AuditReport& r_;
};

}  // namespace

AuditReport audit_feasibility(const Schedule& s, const GridCase& grid, double tolerance) {
    check_dimensions(s, grid);
    AuditReport report;
    report.tolerance = tolerance;
    Auditor a(report);
    const int T = grid.periods();
    const double dt = grid.horizon.dt_hours;
    const bool shed = !s.shed.empty();

    for (int t = 0; t < T; ++t) {
        const auto ti = static_cast<std::size_t>(t);

        for (std::size_t n = 0; n < grid.buses.size(); ++n) {
            const int bus = grid.buses[n];
            double net = shed ? s.shed[n][ti] : 0.0;
            for (std::size_t g = 0; g < grid.generators.size(); ++g)
                if (grid.generators[g].bus == bus) net += s.p[g][ti];
            for (std::size_t r = 0; r < grid.renewables.size(); ++r)
                if (grid.renewables[r].bus == bus) net += s.renewable[r][ti];
            for (std::size_t k = 0; k < grid.storage.size(); ++k)
                if (grid.storage[k].bus == bus) net += s.p_disc[k][ti] - s.p_char[k][ti];
            for (std::size_t k = 0; k < grid.lines.size(); ++k) {
                if (grid.lines[k].to_bus == bus) net += s.flow[k][ti];
                if (grid.lines[k].from_bus == bus) net -= s.flow[k][ti];
            }
            for (const auto& l : grid.loads)
                if (l.bus == bus) net -= l.demand_mw[ti];
            a.equal("balance", static_cast<int>(n), t, net, 0.0);
            if (bus == grid.reference_bus) a.equal("reference_angle", static_cast<int>(n), t, s.theta[n][ti], 0.0);
        }

        for (std::size_t g = 0; g < grid.generators.size(); ++g) {
            const auto& gen = grid.generators[g];
            const int e = static_cast<int>(g);
            const double u = s.u[g][ti], v = s.v[g][ti], p = s.p[g][ti];
            a.excess("integrality", e, t, std::abs(u - std::round(u)));
            a.within("integrality", e, t, u, 0.0, 1.0);
            a.excess("integrality", e, t, std::abs(v - std::round(v)));
            a.within("generator_limits", e, t, p, gen.p_min_mw * u, gen.p_max_mw * u);
            const double prev_p = t == 0 ? gen.initial_output_mw : s.p[g][ti - 1];
            const double prev_u = t == 0 ? (gen.initial_on ? 1.0 : 0.0) : s.u[g][ti - 1];
            const double ramp = dt * gen.ramp_mw_per_h;
            a.within("ramp", e, t, p - prev_p, -ramp, ramp);
            a.excess("startup", e, t, (u - prev_u) - v);
            a.excess("startup", e, t, v - (1.0 - prev_u));
            a.excess("startup", e, t, v - u);
            a.within("startup", e, t, v, 0.0, 1.0);
        }

        for (std::size_t k = 0; k < grid.lines.size(); ++k) {
            const auto& line = grid.lines[k];
            const int e = static_cast<int>(k);
            const double f = s.flow[k][ti];
            a.within("line_limit", e, t, f, -line.limit_mw, line.limit_mw);
            const double angle = s.theta[static_cast<std::size_t>(grid.bus_position(line.from_bus))][ti] -
                                 s.theta[static_cast<std::size_t>(grid.bus_position(line.to_bus))][ti];
            a.equal("flow_physics", e, t, f, line.susceptance_mw_per_rad * angle);
        }

        for (std::size_t r = 0; r < grid.renewables.size(); ++r) {
            a.within("renewable_limit", static_cast<int>(r), t, s.renewable[r][ti], 0.0,
                     grid.renewables[r].available_mw[ti]);
        }

        for (std::size_t k = 0; k < grid.storage.size(); ++k) {
            const auto& st = grid.storage[k];
            const int e = static_cast<int>(k);
            const double ud = s.u_disc[k][ti], uc = s.u_char[k][ti];
            a.excess("integrality", e, t, std::abs(ud - std::round(ud)));
            a.excess("integrality", e, t, std::abs(uc - std::round(uc)));
            a.excess("mode_exclusivity", e, t, ud + uc - 1.0);
            a.within("storage_power", e, t, s.p_disc[k][ti], st.p_min_mw * ud, st.p_max_mw * ud);
            a.within("storage_power", e, t, s.p_char[k][ti], st.p_min_mw * uc, st.p_max_mw * uc);
            const double energy = s.energy[k][ti];
            a.within("energy_limit", e, t, energy, st.e_min_mwh, st.e_max_mwh);
            a.equal("soc_definition", e, t, s.soc[k][ti] * st.e_max_mwh, energy);
            const double before = t == 0 ? st.e_initial_mwh : s.energy[k][ti - 1];
            const double drawn = dt * (s.p_disc[k][ti] / st.eff_discharge - s.p_char[k][ti] * st.eff_charge);
            a.equal("energy_update", e, t, energy, before - drawn);
            if (t == T - 1) a.equal("terminal", e, t, energy, st.e_initial_mwh);
        }
    }
    if (shed) {
        for (std::size_t n = 0; n < s.shed.size(); ++n)
            for (int t = 0; t < T; ++t) a.excess("shed", static_cast<int>(n), t, -s.shed[n][static_cast<std::size_t>(t)]);
    }
    return report;
}

FeatureVector schedule_features(const Schedule& s, const GridCase& grid, int si, int t) {
    const auto k = static_cast<std::size_t>(si), ti = static_cast<std::size_t>(t);
    const auto& st = grid.storage.at(k);
    const double dt = grid.horizon.dt_hours;
    const double pd = s.p_disc.at(k).at(ti), pc = s.p_char.at(k).at(ti);
    const double before = t == 0 ? st.e_initial_mwh : s.energy[k][ti - 1];
    FeatureVector f;
    f.temp_c = st.ambient_temp_c;
    f.soh = st.soh_initial;
    f.c_rate = (pd + pc) / st.e_max_mwh;
    f.soc = (before + s.energy[k][ti]) / (2.0 * st.e_max_mwh);
    f.dod = dt * (pd / st.eff_discharge + pc * st.eff_charge) / st.e_max_mwh;
    return f;
}

double DegradationRecompute::daily_loss(std::size_t s) const {
    double sum = 0.0;
    for (double d : soh_loss.at(s)) sum += d;
    return sum;
}

DegradationRecompute recompute_degradation(const Schedule& s, const GridCase& grid, const DegradationNet& net) {
    check_dimensions(s, grid);
    DegradationRecompute out;
    const auto box = net.training_box();
    for (std::size_t k = 0; k < grid.storage.size(); ++k) {
        const double coeff = degradation_coefficient(grid.storage[k]);
        out.soh_loss.emplace_back();
        double sum = 0.0;
        for (int t = 0; t < grid.periods(); ++t) {
            const FeatureVector f = schedule_features(s, grid, static_cast<int>(k), t);
            const auto arr = f.as_array();
            for (int j = 0; j < kFeatureCount; ++j) {
                if (!box[j].contains(arr[j], 1e-3 * box[j].width())) {
                    out.out_of_box = true;
                    out.warnings.push_back("storage '" + grid.storage[k].id + "' period " + std::to_string(t + 1) +
                                           ": " + feature_name(j) + " = " + std::to_string(arr[j]) +
                                           " is outside the training range");
                }
            }
            const double d = net.forward(f);
            out.soh_loss.back().push_back(d);
            sum += d;
        }
        out.cost += coeff * sum;
    }
    return out;
}

double recompute_degradation_cost(const Schedule& s, const GridCase& grid, const DegradationNet& net) {
    return recompute_degradation(s, grid, net).cost;
}

ParityReport verify_parity(double milp_cost, double recomputed_cost, double tolerance) {
    if (!(milp_cost >= 0.0) || !(recomputed_cost >= 0.0)) {
        throw Error(ErrorCode::invalid_argument, "verify_parity: costs must be nonnegative");
    }
    ParityReport r;
    r.milp_cost = milp_cost;
    r.recomputed_cost = recomputed_cost;
    r.tolerance = tolerance;
    r.relative_difference = std::abs(milp_cost - recomputed_cost) / std::max(1.0, std::abs(recomputed_cost));
    return r;
}

namespace {

// Dispatch LP for fixed commitments: commitments only enter through bounds,
// so one warm-started simplex serves every assignment.
struct DispatchLp {
    Model model;
    std::vector<std::vector<VarId>> p, pd, pc;
};

DispatchLp build_dispatch(const GridCase& grid) {
    DispatchLp d;
    Model& m = d.model;
    const int T = grid.periods();
    const double dt = grid.horizon.dt_hours;
    const auto G = grid.generators.size(), S = grid.storage.size(), K = grid.lines.size();
    std::vector<std::vector<VarId>> flow(K), theta(grid.buses.size()), ren(grid.renewables.size()), e(S);
    d.p.resize(G);
    d.pd.resize(S);
    d.pc.resize(S);
    for (int t = 0; t < T; ++t) {
        const auto ti = static_cast<std::size_t>(t);
        for (std::size_t g = 0; g < G; ++g) d.p[g].push_back(m.add_variable(VarKind::continuous, 0, grid.generators[g].p_max_mw, ""));
        for (std::size_t k = 0; k < K; ++k)
            flow[k].push_back(m.add_variable(VarKind::continuous, -grid.lines[k].limit_mw, grid.lines[k].limit_mw, ""));
        for (std::size_t n = 0; n < grid.buses.size(); ++n) {
            const bool ref = grid.buses[n] == grid.reference_bus;
            theta[n].push_back(m.add_variable(VarKind::continuous, ref ? 0.0 : -kInf, ref ? 0.0 : kInf, ""));
        }
        for (std::size_t r = 0; r < grid.renewables.size(); ++r)
            ren[r].push_back(m.add_variable(VarKind::continuous, 0, grid.renewables[r].available_mw[ti], ""));
        for (std::size_t s = 0; s < S; ++s) {
            const auto& st = grid.storage[s];
            d.pd[s].push_back(m.add_variable(VarKind::continuous, 0, st.p_max_mw, ""));
            d.pc[s].push_back(m.add_variable(VarKind::continuous, 0, st.p_max_mw, ""));
            e[s].push_back(m.add_variable(VarKind::continuous, st.e_min_mwh, st.e_max_mwh, ""));
        }
    }
    for (int t = 0; t < T; ++t) {
        const auto ti = static_cast<std::size_t>(t);
        for (std::size_t n = 0; n < grid.buses.size(); ++n) {
            const int bus = grid.buses[n];
            LinExpr bal;
            double load = 0.0;
            for (std::size_t g = 0; g < G; ++g)
                if (grid.generators[g].bus == bus) bal += LinExpr(d.p[g][ti]);
            for (std::size_t r = 0; r < grid.renewables.size(); ++r)
                if (grid.renewables[r].bus == bus) bal += LinExpr(ren[r][ti]);
            for (std::size_t s = 0; s < S; ++s)
                if (grid.storage[s].bus == bus) bal += LinExpr(d.pd[s][ti]) - LinExpr(d.pc[s][ti]);
            for (std::size_t k = 0; k < K; ++k) {
                if (grid.lines[k].to_bus == bus) bal += LinExpr(flow[k][ti]);
                if (grid.lines[k].from_bus == bus) bal -= LinExpr(flow[k][ti]);
            }
            for (const auto& l : grid.loads)
                if (l.bus == bus) load += l.demand_mw[ti];
            m.add_constraint(bal, Sense::eq, load, "");
        }
        for (std::size_t k = 0; k < K; ++k) {
            const auto& line = grid.lines[k];
            const auto from = static_cast<std::size_t>(grid.bus_position(line.from_bus));
            const auto to = static_cast<std::size_t>(grid.bus_position(line.to_bus));
            m.add_constraint(LinExpr(flow[k][ti]) - line.susceptance_mw_per_rad * (LinExpr(theta[from][ti]) - LinExpr(theta[to][ti])),
                             Sense::eq, 0.0, "");
        }
        for (std::size_t g = 0; g < G; ++g) {
            const auto& gen = grid.generators[g];
            LinExpr step = t == 0 ? LinExpr(d.p[g][ti]) - gen.initial_output_mw : LinExpr(d.p[g][ti]) - LinExpr(d.p[g][ti - 1]);
            m.add_constraint(step, Sense::le, dt * gen.ramp_mw_per_h, "");
            m.add_constraint(step, Sense::ge, -dt * gen.ramp_mw_per_h, "");
        }
        for (std::size_t s = 0; s < S; ++s) {
            const auto& st = grid.storage[s];
            LinExpr update = LinExpr(e[s][ti]) + (dt / st.eff_discharge) * LinExpr(d.pd[s][ti]) -
                             (dt * st.eff_charge) * LinExpr(d.pc[s][ti]);
            if (t == 0) {
                update -= st.e_initial_mwh;
            } else {
                update -= LinExpr(e[s][ti - 1]);
            }
            m.add_constraint(update, Sense::eq, 0.0, "");
            if (t == T - 1) m.add_constraint(LinExpr(e[s][ti]), Sense::eq, st.e_initial_mwh, "");
        }
    }
    LinExpr obj;
    for (std::size_t g = 0; g < G; ++g)
        for (VarId x : d.p[g]) obj += grid.generators[g].cost_mwh * LinExpr(x);
    m.set_objective(obj);
    return d;
}

}  // namespace

BruteForceResult brute_force_reference(const GridCase& grid, std::size_t max_binaries) {
    const auto report = validate_case(grid);
    if (!report.ok()) throw Error(ErrorCode::validation, "brute_force_reference: invalid case");
    const auto T = static_cast<std::size_t>(grid.periods());
    const std::size_t G = grid.generators.size(), S = grid.storage.size();
    const std::size_t binaries = T * (2 * G + 2 * S);
    if (binaries > max_binaries) {
        throw Error(ErrorCode::budget_exceeded, "brute_force_reference: " + std::to_string(binaries) +
                                                    " binaries exceed the enumeration budget of " +
                                                    std::to_string(max_binaries));
    }

    DispatchLp d = build_dispatch(grid);
    detail::DualSimplex lp(d.model);
    BruteForceResult result;
    result.assignments = std::size_t{1} << binaries;

    bool prunable = true;
    for (const auto& g : grid.generators)
        prunable = prunable && g.cost_mwh >= 0 && g.cost_noload >= 0 && g.cost_startup >= 0;

    const std::size_t commit_bits = G * T;
    std::size_t mode_count = 1;  // three usable modes per storage interval: idle, discharge, charge
    for (std::size_t i = 0; i < S * T; ++i) mode_count *= 3;

    for (std::uint64_t cmask = 0; cmask < (std::uint64_t{1} << commit_bits); ++cmask) {
        double fixed = 0.0;
        for (std::size_t g = 0; g < G; ++g) {
            const auto& gen = grid.generators[g];
            bool prev = gen.initial_on;
            for (std::size_t t = 0; t < T; ++t) {
                const bool on = (cmask >> (g * T + t)) & 1U;
                if (on) fixed += gen.cost_noload;
                if (on && !prev) fixed += gen.cost_startup;
                prev = on;
                const VarId p = d.p[g][t];
                lp.set_bounds(p.index, on ? gen.p_min_mw : 0.0, on ? gen.p_max_mw : 0.0);
            }
        }
        if (prunable && result.feasible && fixed >= result.objective) continue;

        for (std::size_t mode = 0; mode < mode_count; ++mode) {
            std::size_t code = mode;
            for (std::size_t s = 0; s < S; ++s) {
                const auto& st = grid.storage[s];
                for (std::size_t t = 0; t < T; ++t) {
                    const std::size_t m = code % 3;
                    code /= 3;
                    lp.set_bounds(d.pd[s][t].index, m == 1 ? st.p_min_mw : 0.0, m == 1 ? st.p_max_mw : 0.0);
                    lp.set_bounds(d.pc[s][t].index, m == 2 ? st.p_min_mw : 0.0, m == 2 ? st.p_max_mw : 0.0);
                }
            }
            ++result.lp_solves;
            if (lp.solve() != detail::LpStatus::optimal) continue;
            const double total = fixed + lp.objective();
            if (!result.feasible || total < result.objective) {
                result.feasible = true;
                result.objective = total;
            }
        }
    }
    return result;
}

}  // namespace uc
