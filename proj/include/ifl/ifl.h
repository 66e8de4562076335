#ifndef IFL_IFL_H
#define IFL_IFL_H

#include <stddef.h>
#include <stdint.h>

#if defined(IFL_BUILDING)
#define IFL_API __attribute__((visibility("default")))
#else
#define IFL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Every function returns one; details of the last failure on the
 * calling thread are available from ifl_last_error(). */
typedef enum ifl_status {
    IFL_OK = 0,
    IFL_INVALID_ARGUMENT = 1,
    IFL_DIMENSION_MISMATCH = 2,
    IFL_ASYMMETRIC_KERNEL = 3,
    IFL_NOT_NORMALIZED = 4,
    IFL_SELF_JUMP_PRESENT = 5,
    IFL_REDUCIBLE = 6,
    IFL_SITE_OUTSIDE_INTERIOR = 7,
    IFL_NO_CONVERGENCE = 8,
    IFL_NONPOSITIVE_CURVATURE = 9,
    IFL_LATTICE_TOO_LARGE = 10,
    IFL_CUTOFF_INSUFFICIENT = 11,
    IFL_EMPTY_SERIES = 12,
    IFL_SERIES_TOO_SHORT = 13,
    IFL_CONFIG_ERROR = 14,
    IFL_IO_ERROR = 15,
    IFL_INTERNAL = 99
} ifl_status;

typedef struct ifl_kernel ifl_kernel;
typedef struct ifl_potential ifl_potential;
typedef struct ifl_model ifl_model;
typedef struct ifl_oracle ifl_oracle;
typedef struct ifl_chain ifl_chain;

typedef struct ifl_offset {
    int dx;
    int dy;
    double weight;
} ifl_offset;

typedef struct ifl_budget {
    double interior;
    double boundary;
    double bound;
    double tail_floor;
    double curvature;
    double amplitude;
} ifl_budget;

typedef struct ifl_tail {
    double p_hat;
    double ci_low;
    double ci_high;
    double n_effective;
    double tau_int;
    size_t n_samples;
    int tau_flagged;
} ifl_tail;

typedef struct ifl_chain_config {
    uint64_t sweeps;
    uint64_t burn_in;
    double proposal_width;
    uint64_t seed;
    uint64_t thinning;
    int tune_width;
    double target_acceptance;
} ifl_chain_config;

IFL_API const char* ifl_version(void);
IFL_API const char* ifl_status_string(ifl_status status);
/* Message of the last failure on this thread; empty after a success. */
IFL_API const char* ifl_last_error(void);

/* Kernels. */
IFL_API ifl_status ifl_kernel_nearest_neighbor(ifl_kernel** out);
IFL_API ifl_status ifl_kernel_create(const ifl_offset* offsets, size_t count, ifl_kernel** out);
IFL_API ifl_status ifl_kernel_range(const ifl_kernel* kernel, int* out);
IFL_API void ifl_kernel_free(ifl_kernel* kernel);

/* Potentials. */
IFL_API ifl_status ifl_potential_quadratic(ifl_potential** out);
IFL_API ifl_status ifl_potential_anharmonic(double beta, ifl_potential** out);
IFL_API ifl_status ifl_potential_value(const ifl_potential* v, double t, double* out);
IFL_API ifl_status ifl_potential_curvature(const ifl_potential* v, double* out);
IFL_API void ifl_potential_free(ifl_potential* v);

/*
 * A quenched model on the box [-half_side, half_side]^2 with a collar as wide
 * as the kernel range. Fields are padded arrays of ifl_model_padded_size()
 * values in row-major order (x fastest); eta is read on interior sites only
 * and bc on collar sites only. Either may be NULL for zero.
 */
IFL_API ifl_status ifl_model_create(int half_side, const ifl_kernel* kernel, const ifl_potential* v,
                                    const double* eta, const double* bc, ifl_model** out);
IFL_API void ifl_model_free(ifl_model* model);
IFL_API size_t ifl_model_padded_size(const ifl_model* model);
IFL_API size_t ifl_model_padded_side(const ifl_model* model);
IFL_API ifl_status ifl_model_index(const ifl_model* model, int x, int y, size_t* out);

IFL_API ifl_status ifl_total_energy(const ifl_model* model, const double* phi, double* out);
IFL_API ifl_status ifl_local_energy_delta(const ifl_model* model, const double* phi, size_t site,
                                          double new_value, double* out);

/* Quadratic potential, Dirichlet boundary. */
IFL_API ifl_status ifl_green_column(const ifl_model* model, size_t site, double* out_field);
IFL_API ifl_status ifl_quenched_mean(const ifl_model* model, double* out_field);
IFL_API ifl_status ifl_groundstate_variance(const ifl_model* model, double* out);
IFL_API ifl_status ifl_exact_tail(const ifl_model* model, double radius, double* out);

/* Test functions. */
IFL_API ifl_status ifl_hitting_probability(const ifl_model* model, double* out_field);
IFL_API ifl_status ifl_entropy_bound(const ifl_model* model, const double* phibar, ifl_budget* out);
IFL_API ifl_status ifl_theorem_floor(const ifl_model* model, double level, ifl_budget* out);

/* Quadrature oracle, at most nine interior sites. */
IFL_API ifl_status ifl_oracle_create(const ifl_model* model, double cutoff, int points_per_axis,
                                     int validate, ifl_oracle** out);
IFL_API void ifl_oracle_free(ifl_oracle* oracle);
IFL_API ifl_status ifl_oracle_log_partition(const ifl_oracle* oracle, double* out);
IFL_API ifl_status ifl_oracle_tail(const ifl_oracle* oracle, double radius, double* out);
IFL_API ifl_status ifl_oracle_marginal(const ifl_oracle* oracle, const double* edges, size_t n_edges,
                                       double* out_masses);
IFL_API ifl_status ifl_oracle_relative_entropy(const ifl_oracle* oracle, const double* phibar, double* out);

/* Metropolis chains. */
IFL_API void ifl_chain_config_default(ifl_chain_config* config);
IFL_API ifl_status ifl_chain_run(const ifl_model* model, const ifl_chain_config* config, ifl_chain** out);
IFL_API void ifl_chain_free(ifl_chain* chain);
IFL_API size_t ifl_chain_length(const ifl_chain* chain);
IFL_API const double* ifl_chain_phi0(const ifl_chain* chain);
IFL_API double ifl_chain_acceptance(const ifl_chain* chain);
IFL_API double ifl_chain_proposal_width(const ifl_chain* chain);

IFL_API ifl_status ifl_tail_estimate(const double* series, size_t n, double radius, ifl_tail* out);
IFL_API ifl_status ifl_autocorrelation_time(const double* series, size_t n, double* tau, int* flagged);

/*
 * Runs an experiment ("gaussian-scaling", "testfn-scaling", "tail-check",
 * "oracle-validate") from an INI config. out_dir may be NULL to use the
 * config's output directory. On IFL_OK, *exit_code is 0 when every check
 * passed or was inconclusive and 2 when any check failed. When summary is
 * non-NULL it receives one "status name: detail" line per check, to be
 * released with ifl_string_free().
 */
IFL_API ifl_status ifl_run_experiment(const char* kind, const char* config_path, const char* out_dir,
                                      unsigned threads, int has_seed, uint64_t seed, int* exit_code,
                                      char** summary);
IFL_API void ifl_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
