#include "dynkin.h"

#include <cstring>
#include <stdexcept>
#include <string>

#include "dynkin/analysis.hpp"
#include "dynkin/problem.hpp"
#include "dynkin/solver_nn.hpp"
#include "dynkin/solver_sl.hpp"

using namespace dynkin;

struct dk_problem {
    ProblemSpec spec;
};

struct dk_field {
    SolutionField field;
};

namespace {

thread_local std::string g_last_error;

dk_status fail(dk_status code, const char* what) {
    g_last_error = what ? what : "unknown error";
    return code;
}

template <typename F>
dk_status guarded(F&& f) {
    try {
        f();
        g_last_error.clear();
        return DK_OK;
    } catch (const std::invalid_argument& e) {
        return fail(DK_ERR_INVALID, e.what());
    } catch (const std::exception& e) {
        return fail(DK_ERR_RUNTIME, e.what());
    }
}

SolverConfig build_config(const ProblemSpec& spec, const dk_solve_options& o) {
    SolverConfig cfg = make_config(spec, o.time_steps, o.space_cells,
                                   spec.scenario_count >= 2 ? o.simplex_cells : 0);
    if (o.convexify >= 0) cfg.convexify = o.convexify != 0;
    if (o.clamp >= 0) cfg.clamp_obstacles = o.clamp != 0;
    cfg.store_stride_t = o.store_stride_t;
    cfg.store_stride_x = o.store_stride_x;
    cfg.store_stride_p = o.store_stride_p;
    return cfg;
}

}  // namespace

extern "C" {

const char* dk_last_error(void) { return g_last_error.c_str(); }

dk_status dk_problem_preset(const char* name, dk_problem** out) {
    if (!name || !out) return fail(DK_ERR_INVALID, "null argument");
    return guarded([&] { *out = new dk_problem{preset_by_name(name)}; });
}

void dk_problem_free(dk_problem* problem) { delete problem; }

int dk_problem_scenario_count(const dk_problem* problem) {
    return problem ? problem->spec.scenario_count : 0;
}

int dk_problem_has_exact(const dk_problem* problem) {
    return problem && problem->spec.has_exact() ? 1 : 0;
}

double dk_problem_compatibility(const dk_problem* problem) {
    if (!problem) return 0.0;
    return compatibility_violation(problem->spec);
}

void dk_solve_options_init(dk_solve_options* options) {
    if (!options) return;
    std::memset(options, 0, sizeof(*options));
    options->time_steps = 32;
    options->space_cells = 32;
    options->simplex_cells = 32;
    options->scheme = DK_SCHEME_SL;
    options->optimizer = DK_OPT_LM;
    options->hidden_units = 10;
    options->seed = 1;
    options->convexify = -1;
    options->clamp = -1;
    options->store_stride_t = 1;
    options->store_stride_x = 1;
    options->store_stride_p = 1;
}

dk_status dk_solve(const dk_problem* problem, const dk_solve_options* options,
                   dk_field** out) {
    if (!problem || !options || !out) return fail(DK_ERR_INVALID, "null argument");
    return guarded([&] {
        SolverConfig cfg = build_config(problem->spec, *options);
        if (options->scheme == DK_SCHEME_SL) {
            *out = new dk_field{solve(problem->spec, cfg)};
        } else if (options->scheme == DK_SCHEME_NN) {
            NNSolverConfig nn;
            nn.base = cfg;
            nn.hidden = options->hidden_units;
            nn.seed = options->seed;
            switch (options->optimizer) {
                case DK_OPT_LM: nn.train.optimizer = Optimizer::LM; break;
                case DK_OPT_LBFGS: nn.train.optimizer = Optimizer::LBFGS; break;
                case DK_OPT_BR: nn.train.optimizer = Optimizer::BR; break;
                default: throw std::invalid_argument("unknown optimizer");
            }
            NNSolveResult res = solve_nn(problem->spec, nn);
            *out = new dk_field{std::move(res.field)};
        } else {
            throw std::invalid_argument("unknown scheme");
        }
    });
}

void dk_field_free(dk_field* field) { delete field; }

void dk_field_dims(const dk_field* field, int* nt, int* nx, int* np) {
    if (!field) return;
    if (nt) *nt = field->field.nt();
    if (nx) *nx = field->field.nx();
    if (np) *np = field->field.np();
}

double dk_field_node(const dk_field* field, int n, int l, int m) {
    return field->field.at(n, l, m);
}

dk_status dk_field_value_at(const dk_field* field, double t, double x, double p,
                            double* out) {
    if (!field || !out) return fail(DK_ERR_INVALID, "null argument");
    return guarded([&] { *out = field->field.value_at(t, x, p); });
}

void dk_field_minmax(const dk_field* field, double* lo, double* hi) {
    if (!field) return;
    if (lo) *lo = field->field.min_value();
    if (hi) *hi = field->field.max_value();
}

dk_status dk_field_write_csv(const dk_field* field, const char* path) {
    if (!field || !path) return fail(DK_ERR_INVALID, "null argument");
    return guarded([&] { field->field.write_csv(path); });
}

double dk_field_residual_sum(const dk_field* field) {
    if (!field) return 0.0;
    double s = 0.0;
    for (double e : field->field.residual_trace()) s += e;
    return s;
}

dk_status dk_field_residual_csv(const dk_field* field, const char* path) {
    if (!field || !path) return fail(DK_ERR_INVALID, "null argument");
    return guarded([&] { write_residual_csv(path, field->field.residual_trace()); });
}

dk_status dk_field_lipschitz(const dk_field* field, double* lip_x, double* lip_p,
                             double* hol_t) {
    if (!field) return fail(DK_ERR_INVALID, "null argument");
    return guarded([&] {
        LipschitzReport rep = regularity_constants(field->field);
        if (lip_x) *lip_x = rep.lip_x;
        if (lip_p) *lip_p = rep.lip_p;
        if (hol_t) *hol_t = rep.hol_t;
    });
}

dk_status dk_errors_vs_exact(const dk_field* field, const dk_problem* problem,
                             double* max_err, double* rms_err) {
    if (!field || !problem) return fail(DK_ERR_INVALID, "null argument");
    return guarded([&] {
        ErrorPair e = errors_vs_exact(field->field, problem->spec.exact);
        if (max_err) *max_err = e.max_err;
        if (rms_err) *rms_err = e.rms_err;
    });
}

dk_status dk_errors_vs_field(const dk_field* field, const dk_field* reference,
                             double* max_err, double* rms_err) {
    if (!field || !reference) return fail(DK_ERR_INVALID, "null argument");
    return guarded([&] {
        ErrorPair e = errors_vs_field(field->field, reference->field);
        if (max_err) *max_err = e.max_err;
        if (rms_err) *rms_err = e.rms_err;
    });
}

dk_status dk_active_set_csv(const dk_field* field, const dk_problem* problem,
                            int m_index, double tol, const char* path) {
    if (!field || !problem || !path) return fail(DK_ERR_INVALID, "null argument");
    return guarded([&] {
        ActiveSetMask mask = active_sets(field->field, problem->spec, m_index, tol);
        write_active_csv(path, mask, field->field);
    });
}

}  // extern "C"
