// uc: command-line front end over the C API.
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uc/uc.h"

namespace {

int report(uc_status s) {
    if (s != UC_OK && uc_last_error()[0] != '\0') std::fprintf(stderr, "uc: %s\n", uc_last_error());
    // Exit codes beyond 3 are not part of the solve contract; keep them distinct anyway.
    return static_cast<int>(s);
}

struct Handles {
    uc_case* grid = nullptr;
    uc_net* net = nullptr;
    ~Handles() {
        uc_case_free(grid);
        uc_net_free(net);
    }
};

uc_status open(Handles& h, const std::string& case_path, const std::string& net_path) {
    uc_status s = case_path == "toy3" ? uc_case_toy(&h.grid) : uc_case_load(case_path.c_str(), &h.grid);
    if (s != UC_OK) return s;
    if (!net_path.empty()) s = uc_net_load(net_path.c_str(), &h.net);
    return s;
}

void print_and_free(char* text) {
    if (text == nullptr) return;
    std::fputs(text, stdout);
    std::fputc('\n', stdout);
    uc_string_free(text);
}

struct Common {
    std::string case_path;
    std::string net_path;
    std::string mode = "tscuc";
    double mipgap = 0.01;
    double time_limit = 600.0;
    std::uint64_t seed = 0;
    bool shedding = false;
    bool no_timing = false;

    void add(CLI::App* cmd, bool with_mode) {
        cmd->add_option("--case", case_path, "Case JSON file (or 'toy3' for the built-in fixture)")->required();
        cmd->add_option("--net", net_path, "Degradation net JSON");
        if (with_mode) cmd->add_option("--mode", mode, "tscuc or lbd")->check(CLI::IsMember({"tscuc", "lbd"}));
        cmd->add_option("--mipgap", mipgap, "Relative MIP gap");
        cmd->add_option("--time-limit", time_limit, "Solver time limit in seconds");
        cmd->add_option("--seed", seed, "Solver seed (the reference backend is deterministic)");
        cmd->add_flag("--allow-shedding", shedding, "Add a 1e6 $/MWh load-shedding slack");
        cmd->add_flag("--no-timing", no_timing, "Write solve_seconds as 0 so artifacts are byte-reproducible");
    }

    uc_solve_options options() const {
        uc_solve_options o;
        uc_solve_options_default(&o);
        o.mode = mode == "lbd" ? UC_MODE_LBD : UC_MODE_TSCUC;
        o.rel_mipgap = mipgap;
        o.time_limit_seconds = time_limit;
        o.seed = seed;
        o.allow_shedding = shedding ? 1 : 0;
        o.record_timing = no_timing ? 0 : 1;
        return o;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Day-ahead unit commitment with an embedded battery degradation network"};
    app.require_subcommand(1);
    app.set_version_flag("--version", uc_version());

    Common solve_args;
    std::string out_dir;
    auto* solve = app.add_subcommand("solve", "Solve one case and write schedule.csv, costs.json, audit.json");
    solve_args.add(solve, true);
    solve->add_option("--out", out_dir, "Output directory")->required();

    Common gap_args;
    std::vector<double> gaps{0.1, 0.01, 0.0};
    std::string gap_out;
    auto* sweep_gap = app.add_subcommand("sweep-gap", "Degradation-aware solves over a list of MIP gaps");
    gap_args.add(sweep_gap, false);
    sweep_gap->add_option("--gaps", gaps, "Comma-separated gaps")->delimiter(',');
    sweep_gap->add_option("--out", gap_out, "CSV output path");

    Common bess_args;
    std::vector<int> counts{0, 1};
    std::string bess_out;
    auto* sweep_bess = app.add_subcommand("sweep-bess", "Degradation-aware solves keeping the first m storage units");
    bess_args.add(sweep_bess, false);
    sweep_bess->add_option("--counts", counts, "Comma-separated storage counts")->delimiter(',');
    sweep_bess->add_option("--out", bess_out, "CSV output path");

    uc_train_options topts;
    uc_train_options_default(&topts);
    std::vector<int> hidden{topts.hidden1, topts.hidden2};
    std::string net_out;
    auto* train = app.add_subcommand("train", "Fit the degradation net on synthetic data");
    train->add_option("--samples", topts.samples, "Dataset size");
    train->add_option("--hidden", hidden, "Hidden layer widths, e.g. 16,16")->delimiter(',')->expected(2);
    train->add_option("--epochs", topts.epochs, "Training epochs");
    train->add_option("--seed", topts.seed, "Data and initialisation seed");
    train->add_option("--rmse-target", topts.rmse_target, "Held-out RMSE target relative to the mean label");
    train->add_option("--out", net_out, "Output net JSON")->required();

    std::string v_case, v_net, v_schedule;
    auto* verify = app.add_subcommand("verify", "Audit a schedule CSV and recompute its degradation cost");
    verify->add_option("--case", v_case, "Case JSON file (or 'toy3')")->required();
    verify->add_option("--net", v_net, "Degradation net JSON");
    verify->add_option("--schedule", v_schedule, "schedule.csv")->required();

    std::string e_case, e_net, e_out;
    auto* export_lp = app.add_subcommand("export-lp", "Write the model in LP format (lbd when --net is given)");
    export_lp->add_option("--case", e_case, "Case JSON file (or 'toy3')")->required();
    export_lp->add_option("--net", e_net, "Degradation net JSON");
    export_lp->add_option("--out", e_out, "Output .lp path")->required();

    Common econ_args;
    double cap_years = 25.0;
    auto* econ = app.add_subcommand("economics", "Lifetime and benefit report: solve without and with storage");
    econ_args.add(econ, false);
    econ->add_option("--cap-years", cap_years, "Lifetime used when a unit does not degrade");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(UC_INVALID_INPUT);
    }

    if (*solve) {
        Handles h;
        if (solve_args.mode == "lbd" && solve_args.net_path.empty()) {
            std::fprintf(stderr, "uc: --mode lbd needs --net\n");
            return UC_INVALID_INPUT;
        }
        if (uc_status s = open(h, solve_args.case_path, solve_args.net_path); s != UC_OK) return report(s);
        if (h.net == nullptr && uc_case_storage_count(h.grid) > 0) {
            std::fprintf(stderr, "uc: warning: no --net given, degradation cost is reported as 0\n");
        }
        const uc_solve_options o = solve_args.options();
        uc_solve_summary sum;
        const uc_status s = uc_run_solve(h.grid, h.net, &o, out_dir.c_str(), &sum);
        if (s == UC_OK || s == UC_INFEASIBLE || s == UC_TIME_LIMIT) {
            std::printf("status %s  fuel %.6f  degradation %.6f  total %.6f  gap %.3g  binaries %zu\n", sum.status,
                        sum.fuel_cost, sum.degradation_cost, sum.total_cost, sum.mipgap_achieved, sum.binaries);
        }
        return report(s);
    }
    if (*sweep_gap || *sweep_bess) {
        Common& a = *sweep_gap ? gap_args : bess_args;
        if (a.net_path.empty()) {
            std::fprintf(stderr, "uc: sweeps solve the degradation-aware model and need --net\n");
            return UC_INVALID_INPUT;
        }
        Handles h;
        if (uc_status s = open(h, a.case_path, a.net_path); s != UC_OK) return report(s);
        uc_solve_options o = a.options();
        o.mode = UC_MODE_LBD;
        char* csv = nullptr;
        uc_status s;
        if (*sweep_gap) {
            s = uc_sweep_gap(h.grid, h.net, gaps.data(), gaps.size(), &o, gap_out.empty() ? nullptr : gap_out.c_str(), &csv);
        } else {
            s = uc_sweep_bess(h.grid, h.net, counts.data(), counts.size(), &o, bess_out.empty() ? nullptr : bess_out.c_str(),
                              &csv);
        }
        if (csv != nullptr) {
            std::fputs(csv, stdout);
            uc_string_free(csv);
        }
        return report(s);
    }
    if (*train) {
        topts.hidden1 = hidden.at(0);
        topts.hidden2 = hidden.at(1);
        uc_net* net = nullptr;
        double rel = 0.0;
        const uc_status s = uc_net_train(&topts, &net, &rel);
        if (net != nullptr) {
            std::printf("held-out relative RMSE %.4f (target %.4f)\n", rel, topts.rmse_target);
            const uc_status w = uc_net_save(net, net_out.c_str());
            uc_net_free(net);
            if (w != UC_OK) return report(w);
        }
        return report(s);
    }
    if (*verify) {
        Handles h;
        if (uc_status s = open(h, v_case, v_net); s != UC_OK) return report(s);
        char* json = nullptr;
        const uc_status s = uc_verify_schedule(h.grid, h.net, v_schedule.c_str(), &json);
        print_and_free(json);
        return report(s);
    }
    if (*export_lp) {
        Handles h;
        if (uc_status s = open(h, e_case, e_net); s != UC_OK) return report(s);
        return report(uc_export_lp(h.grid, h.net, e_out.c_str()));
    }
    if (*econ) {
        if (econ_args.net_path.empty()) {
            std::fprintf(stderr, "uc: economics needs --net\n");
            return UC_INVALID_INPUT;
        }
        Handles h;
        if (uc_status s = open(h, econ_args.case_path, econ_args.net_path); s != UC_OK) return report(s);
        const uc_solve_options o = econ_args.options();
        char* json = nullptr;
        const uc_status s = uc_economic_report(h.grid, h.net, &o, cap_years, &json);
        print_and_free(json);
        return report(s);
    }
    return 0;
}
