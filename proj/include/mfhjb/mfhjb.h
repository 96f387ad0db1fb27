// Copyright 2026 The mfhjb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MFHJB_MFHJB_H_
#define MFHJB_MFHJB_H_

#include <stddef.h>
#include <stdint.h>

#if defined(MFHJB_BUILDING_LIBRARY)
#define MFHJB_API __attribute__((visibility("default")))
#else
#define MFHJB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a status; on failure the message is available
   from mfhjb_last_error() on the calling thread until the next failing call. */
typedef enum mfhjb_status {
  MFHJB_OK = 0,
  MFHJB_INVALID_ARGUMENT = 1,
  MFHJB_DIMENSION_MISMATCH = 2,
  MFHJB_NON_FINITE = 3,
  MFHJB_UNKNOWN_NAME = 4,
  MFHJB_CONFIG = 5,
  MFHJB_NUMERICAL = 6,
  MFHJB_HYPOTHESIS = 7,
  MFHJB_TOLERANCE = 8,
  MFHJB_INTERNAL = 9
} mfhjb_status;

typedef struct mfhjb_ensemble mfhjb_ensemble;
typedef struct mfhjb_scenario mfhjb_scenario;

MFHJB_API const char* mfhjb_version(void);
MFHJB_API const char* mfhjb_last_error(void);
MFHJB_API const char* mfhjb_status_name(mfhjb_status status);

/* Worker threads for parallel loops; k <= 0 restores the hardware default. */
MFHJB_API void mfhjb_set_threads(int k);
MFHJB_API int mfhjb_threads(void);

/* Ensembles. Points are passed row-major, one particle per row (n x d). */
MFHJB_API mfhjb_status mfhjb_ensemble_create(const double* points, int n, int d,
                                             mfhjb_ensemble** out);
/* dist_json: {"name": "gaussian", "mean": [...], "std": [...]}, "uniform_box",
   "point_mass" or "mixture"; scalars broadcast to d. */
MFHJB_API mfhjb_status mfhjb_ensemble_sample(const char* dist_json, int n, int d, uint64_t seed,
                                             mfhjb_ensemble** out);
MFHJB_API void mfhjb_ensemble_destroy(mfhjb_ensemble* e);
MFHJB_API int mfhjb_ensemble_size(const mfhjb_ensemble* e);
MFHJB_API int mfhjb_ensemble_dim(const mfhjb_ensemble* e);
MFHJB_API mfhjb_status mfhjb_ensemble_points(const mfhjb_ensemble* e, double* out);

/* Smoothed sliced metric. directions <= 0 selects the default count for d. */
MFHJB_API mfhjb_status mfhjb_sw2(const mfhjb_ensemble* mu, const mfhjb_ensemble* nu, double sigma,
                                 int directions, double* out);
MFHJB_API mfhjb_status mfhjb_gauge(const mfhjb_ensemble* mu, const mfhjb_ensemble* nu,
                                   double sigma, int directions, double* out);
/* L-derivative of the gauge in mu at x; out has d entries. */
MFHJB_API mfhjb_status mfhjb_dmu_gauge(const mfhjb_ensemble* mu, const mfhjb_ensemble* nu,
                                       double sigma, int directions, const double* x,
                                       double* out);
/* Its x-derivative, row-major d x d. */
MFHJB_API mfhjb_status mfhjb_dxdmu_gauge(const mfhjb_ensemble* mu, const mfhjb_ensemble* nu,
                                         double sigma, int directions, const double* x,
                                         double* out);
MFHJB_API mfhjb_status mfhjb_h_gauge(int d, int directions, double* out);

/* Unsmoothed one-dimensional W2 between equal-size samples. */
MFHJB_API mfhjb_status mfhjb_w2_discrete(const double* a, const double* b, size_t n, double* out);
/* Exact W1 between the empirical measure of the values and N(0, 1). */
MFHJB_API mfhjb_status mfhjb_w1_standard_normal(const double* values, size_t n, double* out);

/* Scenarios: lq_drift, zero, mean_reversion_mf, bounded_trig. params_json may be NULL. */
MFHJB_API mfhjb_status mfhjb_scenario_create(const char* name, const char* params_json,
                                             mfhjb_scenario** out);
MFHJB_API void mfhjb_scenario_destroy(mfhjb_scenario* s);
MFHJB_API int mfhjb_scenario_dim(const mfhjb_scenario* s);

/* Monte Carlo cost of the constant control `action` over [0, T]. */
MFHJB_API mfhjb_status mfhjb_cost_constant(const mfhjb_scenario* s, const mfhjb_ensemble* init,
                                           const double* action, int steps, int paths,
                                           uint64_t seed, double* mean, double* stderr_out);
/* Best constant control over the action vertices (box corners or the list). */
MFHJB_API mfhjb_status mfhjb_value_estimate(const mfhjb_scenario* s, const mfhjb_ensemble* init,
                                            int steps, int paths, uint64_t seed, double* value,
                                            double* stderr_out, double* best_action);
/* HJB residual of the closed-form lq_drift value at (t, mu). */
MFHJB_API mfhjb_status mfhjb_lq_hjb_residual(const char* params_json, double t,
                                             const mfhjb_ensemble* mu, double* out);

/* Experiment suites. */
MFHJB_API int mfhjb_experiment_count(void);
MFHJB_API const char* mfhjb_experiment_name(int i);
/* Runs a suite and writes results.json plus any CSV series into out_dir
   (created if missing). *pass receives 1 iff every asserted tolerance held.
   The config seed is used unless seed_given is nonzero. */
MFHJB_API mfhjb_status mfhjb_experiment_run(const char* subcommand, const char* config_json,
                                            uint64_t seed, int seed_given, const char* out_dir,
                                            int* pass);

#ifdef __cplusplus
}
#endif

#endif  // MFHJB_MFHJB_H_
