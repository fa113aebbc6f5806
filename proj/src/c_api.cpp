#include "uc/uc.h"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "uc/degradation.hpp"
#include "uc/error.hpp"
#include "uc/experiments.hpp"
#include "uc/grid.hpp"
#include "uc/relu.hpp"
#include "uc/verify.hpp"

struct uc_case {
    uc::GridCase grid;
};

struct uc_net {
    uc::DegradationNet net;
};

namespace {

thread_local std::string last_error;

uc_status status_of(uc::ErrorCode code) {
    switch (code) {
    case uc::ErrorCode::io: return UC_IO_ERROR;
    case uc::ErrorCode::convergence: return UC_CONVERGENCE;
    case uc::ErrorCode::extraction: return UC_INTERNAL;
    default: return UC_INVALID_INPUT;
    }
}

template <class F>
uc_status guarded(F&& f) {
    last_error.clear();
    try {
        return f();
    } catch (const uc::Error& e) {
        last_error = std::string(uc::to_string(e.code())) + ": " + e.what();
        return status_of(e.code());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return UC_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return UC_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return UC_INTERNAL;
    }
}

uc_status fail(uc_status s, const std::string& msg) {
    last_error = msg;
    return s;
}

char* dup(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

uc::RunOptions run_options(const uc_solve_options* o) {
    uc_solve_options d;
    uc_solve_options_default(&d);
    if (o == nullptr) o = &d;
    uc::RunOptions r;
    r.mode = o->mode == UC_MODE_LBD ? uc::Mode::lbd : uc::Mode::tscuc;
    r.solve.rel_mipgap = o->rel_mipgap;
    r.solve.time_limit_seconds = o->time_limit_seconds;
    r.solve.seed = o->seed;
    r.scuc.allow_shedding = o->allow_shedding != 0;
    r.record_timing = o->record_timing != 0;
    return r;
}

uc_status run_status(const uc::RunOutcome& r) {
    switch (r.exit_code()) {
    case 0: return UC_OK;
    case 3: return fail(UC_TIME_LIMIT, "time limit reached before a feasible schedule was found");
    default: return fail(UC_INFEASIBLE, std::string("solve finished with status ") + uc::to_string(r.status));
    }
}

}  // namespace

extern "C" {

const char* uc_last_error(void) { return last_error.c_str(); }
const char* uc_version(void) { return "0.1.0"; }
void uc_string_free(char* s) { std::free(s); }

uc_status uc_case_load(const char* path, uc_case** out) {
    return guarded([&] {
        if (path == nullptr || out == nullptr) return fail(UC_INVALID_INPUT, "null argument");
        *out = new uc_case{uc::load_case(path)};
        return UC_OK;
    });
}

uc_status uc_case_toy(uc_case** out) {
    return guarded([&] {
        if (out == nullptr) return fail(UC_INVALID_INPUT, "null argument");
        *out = new uc_case{uc::toy_case()};
        return UC_OK;
    });
}

uc_status uc_case_save(const uc_case* c, const char* path) {
    return guarded([&] {
        if (c == nullptr || path == nullptr) return fail(UC_INVALID_INPUT, "null argument");
        uc::save_case(c->grid, path);
        return UC_OK;
    });
}

int uc_case_periods(const uc_case* c) { return c ? c->grid.periods() : -1; }
int uc_case_storage_count(const uc_case* c) { return c ? static_cast<int>(c->grid.storage.size()) : -1; }
void uc_case_free(uc_case* c) { delete c; }

void uc_train_options_default(uc_train_options* o) {
    if (o == nullptr) return;
    const uc::TrainParams p;
    o->samples = 10000;
    o->hidden1 = p.hidden1;
    o->hidden2 = p.hidden2;
    o->epochs = p.epochs;
    o->seed = p.seed;
    o->rmse_target = p.rmse_target;
}

uc_status uc_net_train(const uc_train_options* o, uc_net** out, double* relative_rmse) {
    return guarded([&] {
        if (out == nullptr) return fail(UC_INVALID_INPUT, "null argument");
        *out = nullptr;
        uc_train_options d;
        uc_train_options_default(&d);
        if (o == nullptr) o = &d;
        if (o->hidden1 < 1 || o->hidden2 < 1 || o->epochs < 1 || o->samples < 10) {
            return fail(UC_INVALID_INPUT, "training needs positive layer widths and epochs and at least 10 samples");
        }
        uc::TrainParams p;
        p.hidden1 = o->hidden1;
        p.hidden2 = o->hidden2;
        p.epochs = o->epochs;
        p.seed = o->seed;
        p.rmse_target = o->rmse_target;
        auto trained = uc::fit(uc::generate_dataset(o->samples, o->seed), p);
        const double rel = trained.report.relative_rmse();
        if (relative_rmse != nullptr) *relative_rmse = rel;
        *out = new uc_net{std::move(trained.net)};
        if (rel > p.rmse_target) {
            return fail(UC_CONVERGENCE, "held-out relative RMSE " + std::to_string(rel) + " exceeds the target " +
                                            std::to_string(p.rmse_target));
        }
        return UC_OK;
    });
}

uc_status uc_net_load(const char* path, uc_net** out) {
    return guarded([&] {
        if (path == nullptr || out == nullptr) return fail(UC_INVALID_INPUT, "null argument");
        *out = new uc_net{uc::load_net(path)};
        return UC_OK;
    });
}

uc_status uc_net_save(const uc_net* n, const char* path) {
    return guarded([&] {
        if (n == nullptr || path == nullptr) return fail(UC_INVALID_INPUT, "null argument");
        uc::save_net(n->net, path);
        return UC_OK;
    });
}

uc_status uc_net_forward(const uc_net* n, const double features[5], double* out) {
    return guarded([&] {
        if (n == nullptr || features == nullptr || out == nullptr) return fail(UC_INVALID_INPUT, "null argument");
        std::array<double, uc::kFeatureCount> a{};
        for (int j = 0; j < uc::kFeatureCount; ++j) a[static_cast<std::size_t>(j)] = features[j];
        *out = n->net.forward(uc::FeatureVector::from_array(a));
        return UC_OK;
    });
}

void uc_net_free(uc_net* n) { delete n; }

void uc_solve_options_default(uc_solve_options* o) {
    if (o == nullptr) return;
    const uc::SolveOptions s;
    o->mode = UC_MODE_TSCUC;
    o->rel_mipgap = s.rel_mipgap;
    o->time_limit_seconds = s.time_limit_seconds;
    o->seed = s.seed;
    o->allow_shedding = 0;
    o->record_timing = 1;
}

uc_status uc_run_solve(const uc_case* c, const uc_net* net, const uc_solve_options* o, const char* out_dir,
                       uc_solve_summary* summary) {
    return guarded([&] {
        if (c == nullptr) return fail(UC_INVALID_INPUT, "null case");
        const auto opts = run_options(o);
        const auto r = uc::run_solve(c->grid, net ? &net->net : nullptr, opts);
        if (out_dir != nullptr) uc::write_artifacts(r, c->grid, out_dir, opts.record_timing);
        if (summary != nullptr) {
            *summary = uc_solve_summary{};
            std::snprintf(summary->status, sizeof summary->status, "%s", uc::to_string(r.status));
            const double nan = std::nan("");
            summary->fuel_cost = r.has_schedule ? r.schedule.cost.fuel : nan;
            summary->degradation_cost = r.has_schedule ? r.schedule.cost.degradation : nan;
            summary->total_cost = r.has_schedule ? r.schedule.cost.total : nan;
            summary->milp_degradation_cost = r.has_schedule ? r.milp_degradation : nan;
            summary->mipgap_achieved = r.gap_achieved;
            summary->solve_seconds = opts.record_timing ? r.solve_seconds : 0.0;
            summary->binaries = r.binaries;
            summary->nodes = r.nodes;
            summary->audit_passed = r.has_schedule && r.audit.passed();
            summary->audit_max_residual = r.audit.max_residual;
            summary->parity_relative_difference = r.parity ? r.parity->relative_difference : 0.0;
        }
        return run_status(r);
    });
}

uc_status uc_sweep_gap(const uc_case* c, const uc_net* net, const double* gaps, size_t n, const uc_solve_options* o,
                       const char* out_csv, char** csv) {
    return guarded([&] {
        if (c == nullptr || net == nullptr || (gaps == nullptr && n > 0)) return fail(UC_INVALID_INPUT, "null argument");
        const auto opts = run_options(o);
        const auto rows = uc::sweep_mipgap(c->grid, net->net, std::vector<double>(gaps, gaps + n), opts);
        const std::string text = uc::gap_rows_to_csv(rows, opts.record_timing);
        if (out_csv != nullptr) {
            std::FILE* f = std::fopen(out_csv, "wb");
            if (f == nullptr) return fail(UC_IO_ERROR, std::string("cannot write ") + out_csv);
            std::fwrite(text.data(), 1, text.size(), f);
            std::fclose(f);
        }
        if (csv != nullptr) *csv = dup(text);
        return UC_OK;
    });
}

uc_status uc_sweep_bess(const uc_case* c, const uc_net* net, const int* counts, size_t n, const uc_solve_options* o,
                        const char* out_csv, char** csv) {
    return guarded([&] {
        if (c == nullptr || net == nullptr || (counts == nullptr && n > 0)) return fail(UC_INVALID_INPUT, "null argument");
        const auto opts = run_options(o);
        const auto rows = uc::sweep_storage_count(c->grid, net->net, std::vector<int>(counts, counts + n), opts);
        const std::string text = uc::count_rows_to_csv(rows, opts.record_timing);
        if (out_csv != nullptr) {
            std::FILE* f = std::fopen(out_csv, "wb");
            if (f == nullptr) return fail(UC_IO_ERROR, std::string("cannot write ") + out_csv);
            std::fwrite(text.data(), 1, text.size(), f);
            std::fclose(f);
        }
        if (csv != nullptr) *csv = dup(text);
        return UC_OK;
    });
}

uc_status uc_verify_schedule(const uc_case* c, const uc_net* net, const char* schedule_csv, char** report_json) {
    return guarded([&] {
        if (c == nullptr || schedule_csv == nullptr) return fail(UC_INVALID_INPUT, "null argument");
        const uc::Schedule s = uc::read_schedule_csv(schedule_csv, c->grid);
        const auto audit = uc::audit_feasibility(s, c->grid);
        nlohmann::ordered_json j;
        j["passed"] = audit.passed();
        j["max_residual"] = audit.max_residual;
        auto violations = nlohmann::ordered_json::array();
        for (const auto& v : audit.violations) {
            violations.push_back({{"family", v.family}, {"entity", v.entity}, {"period", v.period + 1}, {"residual", v.residual}});
        }
        j["violations"] = violations;
        j["fuel_cost"] = uc::evaluate_fuel_cost(s, c->grid);
        if (net != nullptr) {
            const auto d = uc::recompute_degradation(s, c->grid, net->net);
            j["degradation_cost"] = d.cost;
            j["features_out_of_training_range"] = d.out_of_box;
            j["warnings"] = d.warnings;
        }
        if (report_json != nullptr) *report_json = dup(j.dump(2));
        if (!audit.passed()) return fail(UC_INFEASIBLE, "schedule violates " + std::to_string(audit.violations.size()) + " constraints");
        return UC_OK;
    });
}

uc_status uc_export_lp(const uc_case* c, const uc_net* net, const char* path) {
    return guarded([&] {
        if (c == nullptr || path == nullptr) return fail(UC_INVALID_INPUT, "null argument");
        const std::string text = net ? uc::export_lp(uc::build_lbdscuc(c->grid, net->net).model)
                                     : uc::export_lp(uc::build_tscuc(c->grid).model);
        std::FILE* f = std::fopen(path, "wb");
        if (f == nullptr) return fail(UC_IO_ERROR, std::string("cannot write ") + path);
        std::fwrite(text.data(), 1, text.size(), f);
        std::fclose(f);
        return UC_OK;
    });
}

uc_status uc_economic_report(const uc_case* c, const uc_net* net, const uc_solve_options* o, double cap_years,
                             char** report_json) {
    return guarded([&] {
        if (c == nullptr || net == nullptr) return fail(UC_INVALID_INPUT, "null argument");
        if (!(cap_years > 0.0)) return fail(UC_INVALID_INPUT, "lifetime cap must be positive");
        const auto report = uc::economic_report(c->grid, net->net, run_options(o), cap_years);
        if (report_json != nullptr) *report_json = dup(uc::economics_json(report).dump(2));
        return UC_OK;
    });
}

uc_status uc_lifetime_years(double soh_initial, double soh_eol, double daily, double* years) {
    return guarded([&] {
        if (years == nullptr) return fail(UC_INVALID_INPUT, "null argument");
        if (!(soh_initial > soh_eol)) return fail(UC_INVALID_INPUT, "soh_initial must exceed soh_eol");
        *years = uc::expected_lifetime_years(soh_initial, soh_eol, daily);
        return UC_OK;
    });
}

}  // extern "C"
