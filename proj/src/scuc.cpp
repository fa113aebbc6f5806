#include "uc/scuc.hpp"

#include <cmath>
#include <string>

#include "uc/error.hpp"

namespace uc {

namespace {

std::string at(const std::string& id, int t) { return id + "_" + std::to_string(t + 1); }

using Grid2 = std::vector<std::vector<VarId>>;

Grid2 add_family(Model& m, std::size_t count, int periods, VarKind kind, const std::string& prefix,
                 const std::vector<std::string>& ids, auto&& bounds) {
    Grid2 out(count, std::vector<VarId>(static_cast<std::size_t>(periods)));
    for (std::size_t e = 0; e < count; ++e) {
        for (int t = 0; t < periods; ++t) {
            const auto [lb, ub] = bounds(e, t);
            out[e][static_cast<std::size_t>(t)] = m.add_variable(kind, lb, ub, prefix + at(ids[e], t));
        }
    }
    return out;
}

template <class T>
std::vector<std::string> ids_of(const std::vector<T>& items) {
    std::vector<std::string> ids;
    for (const auto& x : items) ids.push_back(x.id);
    return ids;
}

}  // namespace

ScucModel build_tscuc(const GridCase& grid, const ScucOptions& options) {
    const auto report = validate_case(grid);
    if (!report.ok()) {
        std::string msg = "invalid case:";
        for (const auto& issue : report.issues) msg += "\n  " + issue.code + " (" + issue.field + "): " + issue.message;
        throw Error(ErrorCode::validation, msg);
    }

    ScucModel out;
    Model& m = out.model;
    VariableIndex& ix = out.index;
    const int T = grid.periods();
    const double dt = grid.horizon.dt_hours;
    ix.periods = T;
    const auto& G = grid.generators;
    const auto& S = grid.storage;

    std::vector<std::string> bus_ids, ren_ids;
    for (int b : grid.buses) bus_ids.push_back("b" + std::to_string(b));
    for (std::size_t r = 0; r < grid.renewables.size(); ++r) ren_ids.push_back("r" + std::to_string(r));
    const auto gen_ids = ids_of(G), line_ids = ids_of(grid.lines), st_ids = ids_of(S);

    auto unit = [](std::size_t, int) { return std::pair{0.0, 1.0}; };
    ix.p = add_family(m, G.size(), T, VarKind::continuous, "p_", gen_ids,
                      [&](std::size_t g, int) { return std::pair{0.0, G[g].p_max_mw}; });
    ix.u = add_family(m, G.size(), T, VarKind::binary, "u_", gen_ids, unit);
    ix.v = add_family(m, G.size(), T, VarKind::binary, "v_", gen_ids, unit);
    ix.flow = add_family(m, grid.lines.size(), T, VarKind::continuous, "flow_", line_ids, [&](std::size_t k, int) {
        return std::pair{-grid.lines[k].limit_mw, grid.lines[k].limit_mw};
    });
    ix.theta = add_family(m, grid.buses.size(), T, VarKind::continuous, "theta_", bus_ids, [&](std::size_t n, int) {
        return grid.buses[n] == grid.reference_bus ? std::pair{0.0, 0.0} : std::pair{-kInf, kInf};
    });
    ix.renewable = add_family(m, grid.renewables.size(), T, VarKind::continuous, "ren_", ren_ids,
                              [&](std::size_t r, int t) {
                                  return std::pair{0.0, grid.renewables[r].available_mw[static_cast<std::size_t>(t)]};
                              });
    auto power = [&](std::size_t s, int) { return std::pair{0.0, S[s].p_max_mw}; };
    ix.p_disc = add_family(m, S.size(), T, VarKind::continuous, "pdis_", st_ids, power);
    ix.p_char = add_family(m, S.size(), T, VarKind::continuous, "pch_", st_ids, power);
    ix.u_disc = add_family(m, S.size(), T, VarKind::binary, "udis_", st_ids, unit);
    ix.u_char = add_family(m, S.size(), T, VarKind::binary, "uch_", st_ids, unit);
    ix.energy = add_family(m, S.size(), T, VarKind::continuous, "e_", st_ids,
                           [&](std::size_t s, int) { return std::pair{S[s].e_min_mwh, S[s].e_max_mwh}; });
    ix.soc = add_family(m, S.size(), T, VarKind::continuous, "soc_", st_ids,
                        [&](std::size_t s, int) { return std::pair{S[s].e_min_mwh / S[s].e_max_mwh, 1.0}; });
    if (options.allow_shedding) {
        ix.shed = add_family(m, grid.buses.size(), T, VarKind::continuous, "shed_", bus_ids,
                             [](std::size_t, int) { return std::pair{0.0, kInf}; });
    }

    for (int t = 0; t < T; ++t) {
        const auto ti = static_cast<std::size_t>(t);
        const std::string sfx = "_" + std::to_string(t + 1);

        for (std::size_t n = 0; n < grid.buses.size(); ++n) {
            const int bus = grid.buses[n];
            LinExpr e;
            double load = 0.0;
            for (std::size_t g = 0; g < G.size(); ++g)
                if (G[g].bus == bus) e.add(ix.p[g][ti], 1.0);
            for (std::size_t r = 0; r < grid.renewables.size(); ++r)
                if (grid.renewables[r].bus == bus) e.add(ix.renewable[r][ti], 1.0);
            for (std::size_t s = 0; s < S.size(); ++s) {
                if (S[s].bus != bus) continue;
                e.add(ix.p_disc[s][ti], 1.0);
                e.add(ix.p_char[s][ti], -1.0);
            }
            for (std::size_t k = 0; k < grid.lines.size(); ++k) {
                if (grid.lines[k].to_bus == bus) e.add(ix.flow[k][ti], 1.0);
                if (grid.lines[k].from_bus == bus) e.add(ix.flow[k][ti], -1.0);
            }
            for (const auto& l : grid.loads)
                if (l.bus == bus) load += l.demand_mw[ti];
            if (options.allow_shedding) e.add(ix.shed[n][ti], 1.0);
            m.add_constraint(e, Sense::eq, load, "balance_" + bus_ids[n] + sfx);
        }

        for (std::size_t g = 0; g < G.size(); ++g) {
            const auto& gen = G[g];
            const std::string name = gen.id + sfx;
            const VarId p = ix.p[g][ti], u = ix.u[g][ti], v = ix.v[g][ti];
            m.add_constraint(LinExpr(p) - gen.p_min_mw * LinExpr(u), Sense::ge, 0.0, "gen_min_" + name);
            m.add_constraint(LinExpr(p) - gen.p_max_mw * LinExpr(u), Sense::le, 0.0, "gen_max_" + name);

            const double ramp = dt * gen.ramp_mw_per_h;
            LinExpr delta(p);
            LinExpr on_change(v);
            on_change -= LinExpr(u);
            if (t == 0) {
                delta.add_constant(-gen.initial_output_mw);
                on_change.add_constant(gen.initial_on ? 1.0 : 0.0);
            } else {
                delta.add(ix.p[g][ti - 1], -1.0);
                on_change.add(ix.u[g][ti - 1], 1.0);
            }
            m.add_constraint(delta, Sense::le, ramp, "ramp_up_" + name);
            m.add_constraint(delta, Sense::ge, -ramp, "ramp_down_" + name);
            m.add_constraint(on_change, Sense::ge, 0.0, "startup_" + name);
            // V_t <= 1 - U_{t-1}: a unit already on cannot start.
            LinExpr next(v);
            if (t == 0) {
                next.add_constant(gen.initial_on ? 1.0 : 0.0);
            } else {
                next.add(ix.u[g][ti - 1], 1.0);
            }
            m.add_constraint(next, Sense::le, 1.0, "startup_next_" + name);
            m.add_constraint(LinExpr(v) - LinExpr(u), Sense::le, 0.0, "startup_le_u_" + name);
        }

        for (std::size_t k = 0; k < grid.lines.size(); ++k) {
            const auto& line = grid.lines[k];
            const auto from = static_cast<std::size_t>(grid.bus_position(line.from_bus));
            const auto to = static_cast<std::size_t>(grid.bus_position(line.to_bus));
            LinExpr e(ix.flow[k][ti]);
            e.add(ix.theta[from][ti], -line.susceptance_mw_per_rad);
            e.add(ix.theta[to][ti], line.susceptance_mw_per_rad);
            m.add_constraint(e, Sense::eq, 0.0, "flow_def_" + line.id + sfx);
        }

        for (std::size_t s = 0; s < S.size(); ++s) {
            const auto& st = S[s];
            const std::string name = st.id + sfx;
            const VarId pd = ix.p_disc[s][ti], pc = ix.p_char[s][ti];
            const VarId ud = ix.u_disc[s][ti], uc = ix.u_char[s][ti];
            const VarId e = ix.energy[s][ti];
            m.add_constraint(LinExpr(ix.soc[s][ti]) - (1.0 / st.e_max_mwh) * LinExpr(e), Sense::eq, 0.0,
                             "soc_def_" + name);
            m.add_constraint(LinExpr(pd) - st.p_min_mw * LinExpr(ud), Sense::ge, 0.0, "disc_min_" + name);
            m.add_constraint(LinExpr(pd) - st.p_max_mw * LinExpr(ud), Sense::le, 0.0, "disc_max_" + name);
            m.add_constraint(LinExpr(pc) - st.p_min_mw * LinExpr(uc), Sense::ge, 0.0, "char_min_" + name);
            m.add_constraint(LinExpr(pc) - st.p_max_mw * LinExpr(uc), Sense::le, 0.0, "char_max_" + name);
            m.add_constraint(LinExpr(ud) + LinExpr(uc), Sense::le, 1.0, "mode_excl_" + name);
            LinExpr update(e);
            if (t == 0) {
                update.add_constant(-st.e_initial_mwh);
            } else {
                update.add(ix.energy[s][ti - 1], -1.0);
            }
            update.add(pd, dt / st.eff_discharge);
            update.add(pc, -dt * st.eff_charge);
            m.add_constraint(update, Sense::eq, 0.0, "energy_" + name);
            if (t == T - 1) m.add_constraint(LinExpr(e), Sense::eq, st.e_initial_mwh, "terminal_" + st.id);
        }
    }

    LinExpr obj;
    for (std::size_t g = 0; g < G.size(); ++g) {
        for (int t = 0; t < T; ++t) {
            const auto ti = static_cast<std::size_t>(t);
            obj.add(ix.p[g][ti], G[g].cost_mwh);
            obj.add(ix.u[g][ti], G[g].cost_noload);
            obj.add(ix.v[g][ti], G[g].cost_startup);
        }
    }
    for (const auto& row : ix.shed)
        for (VarId x : row) obj.add(x, options.shed_penalty * dt);
    m.set_objective(obj);
    return out;
}

Schedule empty_schedule(const GridCase& grid) {
    const auto T = static_cast<std::size_t>(grid.periods());
    auto rows = [T](std::size_t n) { return std::vector<std::vector<double>>(n, std::vector<double>(T, 0.0)); };
    Schedule s;
    s.periods = grid.periods();
    const auto G = grid.generators.size(), S = grid.storage.size();
    s.p = rows(G);
    s.u = rows(G);
    s.v = rows(G);
    s.flow = rows(grid.lines.size());
    s.theta = rows(grid.buses.size());
    s.renewable = rows(grid.renewables.size());
    s.p_disc = rows(S);
    s.p_char = rows(S);
    s.u_disc = rows(S);
    s.u_char = rows(S);
    s.energy = rows(S);
    s.soc = rows(S);
    return s;
}

void check_dimensions(const Schedule& s, const GridCase& grid) {
    const auto T = static_cast<std::size_t>(grid.periods());
    auto ok = [T](const std::vector<std::vector<double>>& rows, std::size_t n) {
        if (rows.size() != n) return false;
        for (const auto& r : rows)
            if (r.size() != T) return false;
        return true;
    };
    const auto G = grid.generators.size(), S = grid.storage.size();
    const bool shed_ok = s.shed.empty() || ok(s.shed, grid.buses.size());
    if (s.periods != grid.periods() || !ok(s.p, G) || !ok(s.u, G) || !ok(s.v, G) || !ok(s.flow, grid.lines.size()) ||
        !ok(s.theta, grid.buses.size()) || !ok(s.renewable, grid.renewables.size()) || !ok(s.p_disc, S) ||
        !ok(s.p_char, S) || !ok(s.u_disc, S) || !ok(s.u_char, S) || !ok(s.energy, S) || !ok(s.soc, S) || !shed_ok) {
        throw Error(ErrorCode::dimension_mismatch, "schedule dimensions do not match the case");
    }
}

double evaluate_fuel_cost(const Schedule& s, const GridCase& grid, const ScucOptions& options) {
    check_dimensions(s, grid);
    double cost = 0.0;
    for (std::size_t g = 0; g < grid.generators.size(); ++g) {
        const auto& gen = grid.generators[g];
        for (std::size_t t = 0; t < static_cast<std::size_t>(s.periods); ++t) {
            cost += s.p[g][t] * gen.cost_mwh + s.u[g][t] * gen.cost_noload + s.v[g][t] * gen.cost_startup;
        }
    }
    for (const auto& row : s.shed)
        for (double x : row) cost += x * options.shed_penalty * grid.horizon.dt_hours;
    return cost;
}

Schedule extract_schedule(const SolveResult& result, const VariableIndex& ix, const GridCase& grid,
                          const ScucOptions& options) {
    if (!result.has_solution() || result.values.empty()) {
        throw Error(ErrorCode::extraction, std::string("no solution to extract (status ") + to_string(result.status) + ")");
    }
    auto copy = [&](const std::vector<std::vector<VarId>>& vars, bool binary) {
        std::vector<std::vector<double>> out(vars.size());
        for (std::size_t e = 0; e < vars.size(); ++e) {
            for (VarId x : vars[e]) {
                double v = result.values.at(x.index);
                if (binary) {
                    const double r = std::round(v);
                    if (std::abs(v - r) > kIntegralityTol) {
                        throw Error(ErrorCode::extraction,
                                    "binary variable " + std::to_string(x.index) + " is not integral: " + std::to_string(v));
                    }
                    v = r;
                }
                out[e].push_back(v);
            }
        }
        return out;
    };
    Schedule s;
    s.periods = ix.periods;
    s.p = copy(ix.p, false);
    s.u = copy(ix.u, true);
    s.v = copy(ix.v, false);
    s.flow = copy(ix.flow, false);
    s.theta = copy(ix.theta, false);
    s.renewable = copy(ix.renewable, false);
    s.p_disc = copy(ix.p_disc, false);
    s.p_char = copy(ix.p_char, false);
    s.u_disc = copy(ix.u_disc, true);
    s.u_char = copy(ix.u_char, true);
    s.energy = copy(ix.energy, false);
    s.soc = copy(ix.soc, false);
    s.shed = copy(ix.shed, false);
    s.cost.fuel = evaluate_fuel_cost(s, grid, options);
    s.cost.degradation = 0.0;
    s.cost.total = s.cost.fuel;
    return s;
}

}  // namespace uc
