// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "uc/error.hpp"
#include "uc/experiments.hpp"
#include "uc/relu.hpp"

using namespace uc;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Objective the solver minimized (fuel plus the network's degradation term).
double milp_objective(const RunOutcome& r) { return r.schedule.cost.fuel + r.milp_degradation; }

RunOptions options(Mode mode, double gap) {
    RunOptions o;
    o.mode = mode;
    o.solve.rel_mipgap = gap;
    o.solve.time_limit_seconds = 600;
    o.record_timing = false;
    return o;
}

DegradationNet placeholder_net() {
    std::vector<DenseLayer> layers(3);
    layers[0] = {Eigen::MatrixXd::Zero(kFeatureCount, 1), Eigen::VectorXd::Zero(1)};
    layers[1] = {Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1)};
    layers[2] = {Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1)};
    return DegradationNet(InputScaler{}, layers);
}

struct Shared {
    GridCase toy = toy_case();
    TrainedNet trained{placeholder_net(), {}};
    RunOutcome tscuc;                  // gap 0
    std::vector<double> gaps{0.1, 0.01, 0.0};
    std::vector<RunOutcome> lbd;       // one per gap
    double train_seconds = 0.0;
};

Verdict encoding_exactness(const Shared& sh) {
    const DegradationNet& net = sh.trained.net;
    const FeatureBox box = net.training_box();
    const NeuronBounds nb = propagate_bounds(net, box);
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    int failures = 0;
    const auto t0 = std::chrono::steady_clock::now();
    for (int k = 0; k < 200; ++k) {
        std::array<double, kFeatureCount> a{};
        for (int j = 0; j < kFeatureCount; ++j) a[j] = std::uniform_real_distribution<double>(box[j].lo, box[j].hi)(rng);
        Model m;
        FeatureExpr fe;
        fe.box = box;
        for (int j = 0; j < kFeatureCount; ++j) {
            fe.expr[static_cast<std::size_t>(j)] = LinExpr(m.add_variable(VarKind::continuous, a[j], a[j], "f"));
        }
        const auto enc = encode_network(m, net, fe, nb, "n");
        m.set_objective(LinExpr(enc.output));
        const auto r = solve(m, {0.0, 60, 0});
        if (r.status != SolveStatus::optimal) {
            ++failures;
            continue;
        }
        worst = std::max(worst, std::abs(r.value(enc.output) - net.forward(FeatureVector::from_array(a))));
    }
    return {failures == 0 && worst <= 1e-6,
            fmt("200 pinned inputs, %zu unstable neurons, max |milp - forward| = %.3g, %d solve failures, %.1f s",
                nb.unstable_count(), worst, failures, seconds_since(t0))};
}

Verdict parity(const Shared& sh) {
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < sh.gaps.size(); ++i) {
        if (sh.gaps[i] != 0.01 && sh.gaps[i] != 0.0) continue;
        const RunOutcome& r = sh.lbd[i];
        if (!r.has_schedule || !r.parity) {
            ok = false;
            detail += fmt("gap %g: no schedule; ", sh.gaps[i]);
            continue;
        }
        ok = ok && r.parity->passed();
        detail += fmt("gap %g: milp %.6f vs recomputed %.6f (rel %.2g); ", sh.gaps[i], r.parity->milp_cost,
                      r.parity->recomputed_cost, r.parity->relative_difference);
    }
    return {ok, detail + "tolerance 1e-5"};
}

Verdict oracle_optimality(const Shared& sh) {
    const auto t0 = std::chrono::steady_clock::now();
    const BruteForceResult bf = brute_force_reference(sh.toy);
    const double secs = seconds_since(t0);
    if (!bf.feasible || !sh.tscuc.has_schedule) return {false, "oracle or solver found no schedule"};
    const double milp = sh.tscuc.schedule.cost.fuel;
    const double rel = std::abs(milp - bf.objective) / std::max(1.0, std::abs(bf.objective));
    return {rel <= 1e-6, fmt("branch and bound %.9f vs enumeration %.9f (rel %.2g), %zu assignments, %zu LPs, %.2f s",
                             milp, bf.objective, rel, bf.assignments, bf.lp_solves, secs)};
}

// Ten corrupted copies of a feasible schedule, one per constraint family.
Verdict audit(const Shared& sh) {
    const GridCase& g = sh.toy;
    bool ok = true;
    std::string detail;
    int solved = 0;
    auto check_solved = [&](const RunOutcome& r) {
        if (!r.has_schedule) return;
        ++solved;
        const auto rep = audit_feasibility(r.schedule, g, 1e-6);
        if (!rep.passed()) {
            ok = false;
            detail += fmt("solved schedule failed audit (max residual %.3g); ", rep.max_residual);
        }
    };
    check_solved(sh.tscuc);
    for (const auto& r : sh.lbd) check_solved(r);
    if (solved != 1 + static_cast<int>(sh.lbd.size())) ok = false;

    const Schedule base = sh.tscuc.schedule;
    const int T = g.periods();
    struct Probe {
        const char* family;
        std::function<void(Schedule&)> corrupt;
    };
    const std::vector<Probe> probes = {
        {"balance", [](Schedule& s) { s.p[0][1] += 5.0; }},
        {"integrality", [](Schedule& s) { s.u[1][2] = 0.5; }},
        {"generator_limits", [&](Schedule& s) { s.p[0][0] = g.generators[0].p_max_mw + 10.0; }},
        {"ramp",
         [&](Schedule& s) { s.p[0][0] = g.generators[0].initial_output_mw + g.generators[0].ramp_mw_per_h + 1.0; }},
        {"startup", [](Schedule& s) { s.v[0][0] = 1.0; }},  // the unit is already on before period 1
        {"line_limit", [&](Schedule& s) { s.flow[0][0] = g.lines[0].limit_mw + 10.0; }},
        {"flow_physics", [](Schedule& s) { s.theta[1][0] += 0.01; }},
        {"renewable_limit", [&](Schedule& s) { s.renewable[0][0] = g.renewables[0].available_mw[0] + 5.0; }},
        {"mode_exclusivity",
         [](Schedule& s) {
             s.u_disc[0][1] = 1.0;
             s.u_char[0][1] = 1.0;
         }},
        {"terminal",
         [&](Schedule& s) {
             s.energy[0][T - 1] = g.storage[0].e_initial_mwh + 1.0;
             s.soc[0][T - 1] = s.energy[0][T - 1] / g.storage[0].e_max_mwh;
         }},
    };
    int caught = 0;
    for (const auto& p : probes) {
        Schedule s = base;
        p.corrupt(s);
        const auto rep = audit_feasibility(s, g, 1e-6);
        if (!rep.passed() && rep.has(p.family)) {
            ++caught;
        } else {
            detail += std::string("missed probe ") + p.family + "; ";
        }
    }
    ok = ok && caught == static_cast<int>(probes.size());
    return {ok, fmt("%d solved schedules audited, %d/%zu corrupted probes caught", solved, caught, probes.size()) +
                    (detail.empty() ? "" : "; " + detail)};
}

Verdict cost_ordering(const Shared& sh) {
    const double gap = 0.01;
    const RunOutcome& lbd = sh.lbd[1];
    RunOutcome tr = run_solve(sh.toy, &sh.trained.net, options(Mode::tscuc, gap));
    if (!lbd.has_schedule || !tr.has_schedule) return {false, "missing schedule"};
    const double lt = lbd.schedule.cost.total, tt = tr.schedule.cost.total;
    const double ld = lbd.schedule.cost.degradation, td = tr.schedule.cost.degradation;
    const bool ok = lt <= tt + gap * tt && ld <= td + gap * tt;
    return {ok, fmt("gap 0.01: total %.4f vs %.4f (%.2f%% reduction), degradation %.4f vs %.4f (%.2f%% reduction)", lt,
                    tt, 100.0 * (tt - lt) / tt, ld, td, td > 0 ? 100.0 * (td - ld) / td : 0.0)};
}

Verdict gap_monotonicity(const Shared& sh) {
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < sh.lbd.size(); ++i) {
        const RunOutcome& r = sh.lbd[i];
        if (!r.has_schedule) return {false, fmt("gap %g produced no schedule", sh.gaps[i])};
        detail += fmt("gap %g: %.6f (%zu nodes, %.1f s); ", sh.gaps[i], milp_objective(r), r.nodes, r.solve_seconds);
        if (i > 0 && milp_objective(r) > milp_objective(sh.lbd[i - 1]) + 1e-6) ok = false;
    }
    return {ok, detail + "non-increasing within 1e-6"};
}

Verdict census(const Shared& sh) {
    const DegradationNet& net = sh.trained.net;
    bool ok = true;
    std::string detail;

    // Solved sweep on the toy case, with timings reported.
    RunOptions o = options(Mode::lbd, 0.01);
    o.record_timing = true;
    const auto rows = sweep_storage_count(sh.toy, net, {0, 1}, o);
    const LbdModel one = build_lbdscuc(sh.toy, net);
    const std::size_t T = static_cast<std::size_t>(sh.toy.periods());
    const std::size_t expect_toy = T * (2 + one.unstable_neurons[0]);
    ok = ok && rows[1].binaries - rows[0].binaries == expect_toy;
    detail += fmt("toy3 counts 0,1: binaries %zu -> %zu (expected +%zu), solve %.2f s / %.2f s; ", rows[0].binaries,
                  rows[1].binaries, expect_toy, rows[0].solve_seconds, rows[1].solve_seconds);

    // Two-unit case, census only.
    const GridCase two = load_case(std::string(UC_TEST_DATA) + "/bess_bus14.json");
    std::size_t prev = build_lbdscuc(with_storage_count(two, 0), net).model.num_binaries();
    detail += fmt("bess14 binaries %zu", prev);
    for (int m = 1; m <= static_cast<int>(two.storage.size()); ++m) {
        const LbdModel lm = build_lbdscuc(with_storage_count(two, m), net);
        const std::size_t unstable = lm.unstable_neurons.back();
        const std::size_t bins = lm.model.num_binaries();
        const std::size_t tt = static_cast<std::size_t>(two.periods());
        ok = ok && bins - prev == tt * (2 + unstable);
        detail += fmt(" -> %zu (+%zu expected)", bins, tt * (2 + unstable));
        prev = bins;
    }
    return {ok, detail};
}

Verdict training(const Shared& sh) {
    const auto& rep = sh.trained.report;
    return {rep.relative_rmse() <= 0.05,
            fmt("hidden (%d,%d), held-out RMSE %.3g / mean label %.3g = %.2f%% (target 5%%), %.1f s",
                sh.trained.net.layer_sizes()[1], sh.trained.net.layer_sizes()[2], rep.heldout_rmse,
                rep.heldout_mean_label, 100.0 * rep.relative_rmse(), sh.train_seconds)};
}

Verdict lifetime(const Shared&) {
    const double years = expected_lifetime_years(1.0, 0.5, 1.1806e-4);
    return {std::abs(years - 11.6) <= 0.1, fmt("1.1806e-4 SOH/day -> %.3f years", years)};
}

Verdict determinism(const Shared& sh) {
    const auto dir = std::filesystem::temp_directory_path() / "uc_acceptance_determinism";
    std::filesystem::remove_all(dir);
    bool ok = true;
    std::string detail;
    int compared = 0;
    for (const Mode mode : {Mode::tscuc, Mode::lbd}) {
        for (int rep = 0; rep < 2; ++rep) {
            const RunOutcome r = run_solve(sh.toy, &sh.trained.net, options(mode, 0.01));
            write_artifacts(r, sh.toy, dir / (std::string(to_string(mode)) + std::to_string(rep)), false);
        }
        for (const char* f : {"costs.json", "schedule.csv", "audit.json"}) {
            const std::string a = slurp(dir / (std::string(to_string(mode)) + "0") / f);
            const std::string b = slurp(dir / (std::string(to_string(mode)) + "1") / f);
            ++compared;
            if (a.empty() || a != b) {
                ok = false;
                detail += fmt("%s %s differs; ", to_string(mode), f);
            }
        }
    }
    // Training is seeded too.
    const TrainedNet again = fit(generate_dataset(10000, 0), TrainParams{});
    const bool same_net = net_to_json(again.net).dump() == net_to_json(sh.trained.net).dump();
    ok = ok && same_net;
    std::filesystem::remove_all(dir);
    return {ok, fmt("%d artifact pairs byte-identical with timing off, retrained weights %s", compared,
                    same_net ? "identical" : "differ") +
                    (detail.empty() ? "" : "; " + detail)};
}

}  // namespace

int main() {
    std::setvbuf(stdout, nullptr, _IOLBF, 0);
    Shared sh;
    bool setup_ok = true;
    try {
        auto t0 = std::chrono::steady_clock::now();
        sh.trained = fit(generate_dataset(10000, 0), TrainParams{});
        sh.train_seconds = seconds_since(t0);
        sh.tscuc = run_solve(sh.toy, &sh.trained.net, options(Mode::tscuc, 0.0));
        for (double gap : sh.gaps) {
            RunOptions o = options(Mode::lbd, gap);
            o.record_timing = true;
            sh.lbd.push_back(run_solve(sh.toy, &sh.trained.net, o));
        }
    } catch (const std::exception& e) {
        std::printf("setup failed: %s\n", e.what());
        setup_ok = false;
    }

    const std::vector<std::pair<const char*, Verdict (*)(const Shared&)>> criteria = {
        {"encoding exactness", encoding_exactness},
        {"degradation parity", parity},
        {"oracle optimality", oracle_optimality},
        {"feasibility audit", audit},
        {"cost ordering", cost_ordering},
        {"gap monotonicity", gap_monotonicity},
        {"instance-growth census", census},
        {"training contract", training},
        {"lifetime inverse check", lifetime},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        if (!setup_ok) {
            v = {false, "setup failed"};
        } else {
            try {
                v = criteria[i].second(sh);
            } catch (const std::exception& e) {
                v = {false, std::string("exception: ") + e.what()};
            }
        }
        if (!v.pass) ++failed;
        std::printf("criterion %zu %s: %s  %s\n", i + 1, criteria[i].first, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
