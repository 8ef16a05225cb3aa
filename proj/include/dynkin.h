/* C interface to the Dynkin-game obstacle solver.
 *
 * All entry points return dk_status (or a plain value for infallible
 * queries); on failure dk_last_error() describes the most recent error of
 * the calling thread. Handles are opaque and freed with the matching
 * *_free call; freeing NULL is a no-op.
 */
#ifndef DYNKIN_H
#define DYNKIN_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dk_status {
    DK_OK = 0,
    DK_ERR_INVALID = 1, /* bad argument / unknown name / grid mismatch */
    DK_ERR_RUNTIME = 2  /* solver failure (divergence, non-finite values, io) */
} dk_status;

typedef struct dk_problem dk_problem;
typedef struct dk_field dk_field;

/* Message of the last failing call on this thread; empty string if none. */
const char* dk_last_error(void);

/* --- problems ---------------------------------------------------------- */

/* name: "exp1" | "exp2" | "exp3" */
dk_status dk_problem_preset(const char* name, dk_problem** out);
void dk_problem_free(dk_problem* problem);
int dk_problem_scenario_count(const dk_problem* problem);
int dk_problem_has_exact(const dk_problem* problem);
/* Worst terminal sandwich violation (<= 0 means the data are compatible). */
double dk_problem_compatibility(const dk_problem* problem);

/* --- solving ----------------------------------------------------------- */

enum { DK_SCHEME_SL = 0, DK_SCHEME_NN = 1 };
enum { DK_OPT_LM = 0, DK_OPT_LBFGS = 1, DK_OPT_BR = 2 };

typedef struct dk_solve_options {
    int time_steps;
    int space_cells;
    int simplex_cells;     /* ignored for single-scenario problems */
    int scheme;            /* DK_SCHEME_* */
    int optimizer;         /* DK_OPT_*, neural scheme only */
    int hidden_units;      /* neural scheme only */
    unsigned long long seed;
    int convexify;         /* 1 / 0 / -1 = decide from the problem */
    int clamp;             /* 1 / 0 / -1 = decide from the problem */
    int store_stride_t;    /* keep every k-th level (grid still computed fully) */
    int store_stride_x;
    int store_stride_p;
} dk_solve_options;

/* Fill with defaults: scheme SL, LM, 10 hidden units, strides 1, auto flags. */
void dk_solve_options_init(dk_solve_options* options);

dk_status dk_solve(const dk_problem* problem, const dk_solve_options* options,
                   dk_field** out);

/* --- fields ------------------------------------------------------------ */

void dk_field_free(dk_field* field);
void dk_field_dims(const dk_field* field, int* nt, int* nx, int* np);
double dk_field_node(const dk_field* field, int n, int l, int m);
/* Interpolated value; scalar p parametrizes (p, 1-p) for two scenarios. */
dk_status dk_field_value_at(const dk_field* field, double t, double x, double p,
                            double* out);
void dk_field_minmax(const dk_field* field, double* lo, double* hi);
dk_status dk_field_write_csv(const dk_field* field, const char* path);

/* Per-level regression residuals (neural scheme); 0 / empty otherwise. */
double dk_field_residual_sum(const dk_field* field);
dk_status dk_field_residual_csv(const dk_field* field, const char* path);

/* Empirical difference-quotient constants of the stored values. */
dk_status dk_field_lipschitz(const dk_field* field, double* lip_x, double* lip_p,
                             double* hol_t);

/* --- analysis ---------------------------------------------------------- */

dk_status dk_errors_vs_exact(const dk_field* field, const dk_problem* problem,
                             double* max_err, double* rms_err);
dk_status dk_errors_vs_field(const dk_field* field, const dk_field* reference,
                             double* max_err, double* rms_err);
/* Rows t,x,state with state in {lower, upper, waiting} at simplex node m. */
dk_status dk_active_set_csv(const dk_field* field, const dk_problem* problem,
                            int m_index, double tol, const char* path);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* DYNKIN_H */
