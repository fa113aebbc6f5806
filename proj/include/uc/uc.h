/* C interface of the unit-commitment toolkit.
 *
 * Objects are opaque handles released with the matching *_free call.
 * Every function returning uc_status leaves a message for uc_last_error()
 * when it fails; the message is per thread and valid until the next call.
 * Strings handed out through char** are owned by the caller and released
 * with uc_string_free.
 */
#ifndef UC_UC_H
#define UC_UC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define UC_API __declspec(dllexport)
#else
#define UC_API __attribute__((visibility("default")))
#endif

/* The first four values double as the CLI exit codes. */
typedef enum uc_status {
    UC_OK = 0,
    UC_INFEASIBLE = 1,
    UC_INVALID_INPUT = 2,
    UC_TIME_LIMIT = 3,
    UC_CONVERGENCE = 4,
    UC_IO_ERROR = 5,
    UC_INTERNAL = 6
} uc_status;

typedef enum uc_mode { UC_MODE_TSCUC = 0, UC_MODE_LBD = 1 } uc_mode;

typedef struct uc_case uc_case;
typedef struct uc_net uc_net;

UC_API const char* uc_last_error(void);
UC_API const char* uc_version(void);
UC_API void uc_string_free(char* s);

/* Cases */
UC_API uc_status uc_case_load(const char* path, uc_case** out);
UC_API uc_status uc_case_toy(uc_case** out);
UC_API uc_status uc_case_save(const uc_case* c, const char* path);
UC_API int uc_case_periods(const uc_case* c);
UC_API int uc_case_storage_count(const uc_case* c);
UC_API void uc_case_free(uc_case* c);

/* Degradation networks */
typedef struct uc_train_options {
    size_t samples;
    int hidden1;
    int hidden2;
    int epochs;
    uint64_t seed;
    double rmse_target; /* held-out RMSE relative to the mean label */
} uc_train_options;

UC_API void uc_train_options_default(uc_train_options* o);
/* On UC_CONVERGENCE *out still receives the trained net. */
UC_API uc_status uc_net_train(const uc_train_options* o, uc_net** out, double* relative_rmse);
UC_API uc_status uc_net_load(const char* path, uc_net** out);
UC_API uc_status uc_net_save(const uc_net* n, const char* path);
/* features: temp_c, c_rate, soc, dod, soh */
UC_API uc_status uc_net_forward(const uc_net* n, const double features[5], double* out);
UC_API void uc_net_free(uc_net* n);

/* Solves */
typedef struct uc_solve_options {
    uc_mode mode;
    double rel_mipgap;
    double time_limit_seconds;
    uint64_t seed;
    int allow_shedding;
    int record_timing; /* 0 writes solve_seconds as 0 */
} uc_solve_options;

typedef struct uc_solve_summary {
    char status[32];
    double fuel_cost;
    double degradation_cost; /* recomputed from the net after the solve */
    double total_cost;
    double milp_degradation_cost;
    double mipgap_achieved;
    double solve_seconds;
    size_t binaries;
    size_t nodes;
    int audit_passed;
    double audit_max_residual;
    double parity_relative_difference; /* lbd only, else 0 */
} uc_solve_summary;

UC_API void uc_solve_options_default(uc_solve_options* o);

/* net may be NULL in tscuc mode. When out_dir is non-NULL, schedule.csv,
 * costs.json and audit.json are written there. Returns UC_OK,
 * UC_INFEASIBLE or UC_TIME_LIMIT (no incumbent) after a completed solve. */
UC_API uc_status uc_run_solve(const uc_case* c, const uc_net* net, const uc_solve_options* o, const char* out_dir,
                              uc_solve_summary* summary);

/* Sweeps write CSV to out_csv when non-NULL and hand back the same table. */
UC_API uc_status uc_sweep_gap(const uc_case* c, const uc_net* net, const double* gaps, size_t n,
                              const uc_solve_options* o, const char* out_csv, char** csv);
UC_API uc_status uc_sweep_bess(const uc_case* c, const uc_net* net, const int* counts, size_t n,
                               const uc_solve_options* o, const char* out_csv, char** csv);

/* Audits a schedule CSV and recomputes its degradation cost (net may be
 * NULL). Returns UC_INFEASIBLE when the audit finds violations. */
UC_API uc_status uc_verify_schedule(const uc_case* c, const uc_net* net, const char* schedule_csv, char** report_json);

UC_API uc_status uc_export_lp(const uc_case* c, const uc_net* net, const char* path);

/* Solves without and with storage and reports lifetimes and benefit. */
UC_API uc_status uc_economic_report(const uc_case* c, const uc_net* net, const uc_solve_options* o, double cap_years,
                                    char** report_json);

UC_API uc_status uc_lifetime_years(double soh_initial, double soh_eol, double daily_degradation, double* years);

#ifdef __cplusplus
}
#endif

#endif
