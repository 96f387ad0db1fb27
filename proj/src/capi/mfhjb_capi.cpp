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

#include "mfhjb/mfhjb.h"

#include <filesystem>
#include <fstream>
#include <string>
#include <thread>

#include "core/control_value.hpp"
#include "core/error.hpp"
#include "core/experiments.hpp"
#include "core/scenarios.hpp"
#include "core/sliced_gauge.hpp"
#include "core/transport1d.hpp"

struct mfhjb_ensemble {
  mfhjb::ParticleEnsemble ens;
};

struct mfhjb_scenario {
  std::shared_ptr<const mfhjb::CoefficientSet> coeffs;
  mfhjb::ScenarioParams params;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
mfhjb_status guarded(F&& body) {
  try {
    body();
    return MFHJB_OK;
  } catch (const mfhjb::Error& e) {
    g_last_error = e.what();
    return static_cast<mfhjb_status>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown failure";
  }
  return MFHJB_INTERNAL;
}

void need(const void* p, const char* what) {
  mfhjb::require(p != nullptr, mfhjb::ErrorCode::kInvalidArgument,
                 std::string("null argument: ") + what);
}

mfhjb::SphereQuadrature quad_for(int d, int directions) {
  return mfhjb::SphereQuadrature::make(d, directions > 0 ? directions : 0);
}

void same_dim(const mfhjb_ensemble* mu, const mfhjb_ensemble* nu) {
  need(mu, "mu");
  need(nu, "nu");
  mfhjb::require(mu->ens.d() == nu->ens.d(), mfhjb::ErrorCode::kDimensionMismatch,
                 "ensembles differ in dimension");
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  os << text;
  mfhjb::require(static_cast<bool>(os), mfhjb::ErrorCode::kInternal,
                 "cannot write " + p.string());
}

}  // namespace

extern "C" {

const char* mfhjb_version(void) { return "0.1.0"; }

const char* mfhjb_last_error(void) { return g_last_error.c_str(); }

const char* mfhjb_status_name(mfhjb_status status) {
  switch (status) {
    case MFHJB_OK: return "ok";
    case MFHJB_INVALID_ARGUMENT: return "invalid argument";
    case MFHJB_DIMENSION_MISMATCH: return "dimension mismatch";
    case MFHJB_NON_FINITE: return "non-finite value";
    case MFHJB_UNKNOWN_NAME: return "unknown name";
    case MFHJB_CONFIG: return "configuration error";
    case MFHJB_NUMERICAL: return "numerical failure";
    case MFHJB_HYPOTHESIS: return "hypothesis violated";
    case MFHJB_TOLERANCE: return "tolerance not met";
    case MFHJB_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void mfhjb_set_threads(int k) {
  if (k <= 0) k = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  mfhjb::set_thread_count(std::min(k, 256));
}

int mfhjb_threads(void) { return mfhjb::thread_count(); }

mfhjb_status mfhjb_ensemble_create(const double* points, int n, int d, mfhjb_ensemble** out) {
  return guarded([&] {
    need(points, "points");
    need(out, "out");
    mfhjb::require(n >= 1 && d >= 1, mfhjb::ErrorCode::kInvalidArgument, "need n, d >= 1");
    mfhjb::Mat m(d, n);
    for (int i = 0; i < n; ++i) {
      for (int l = 0; l < d; ++l) m(l, i) = points[static_cast<std::size_t>(i) * d + l];
    }
    *out = new mfhjb_ensemble{mfhjb::ParticleEnsemble(m)};
  });
}

mfhjb_status mfhjb_ensemble_sample(const char* dist_json, int n, int d, uint64_t seed,
                                   mfhjb_ensemble** out) {
  return guarded([&] {
    need(dist_json, "dist_json");
    need(out, "out");
    const auto spec = mfhjb::DistributionSpec::from_json(dist_json, d);
    *out = new mfhjb_ensemble{mfhjb::sample_iid(spec, n, d, seed)};
  });
}

void mfhjb_ensemble_destroy(mfhjb_ensemble* e) { delete e; }

int mfhjb_ensemble_size(const mfhjb_ensemble* e) { return e ? e->ens.n() : 0; }

int mfhjb_ensemble_dim(const mfhjb_ensemble* e) { return e ? e->ens.d() : 0; }

mfhjb_status mfhjb_ensemble_points(const mfhjb_ensemble* e, double* out) {
  return guarded([&] {
    need(e, "ensemble");
    need(out, "out");
    const auto& p = e->ens.points();
    for (int i = 0; i < e->ens.n(); ++i) {
      for (int l = 0; l < e->ens.d(); ++l) out[static_cast<std::size_t>(i) * e->ens.d() + l] = p(l, i);
    }
  });
}

mfhjb_status mfhjb_sw2(const mfhjb_ensemble* mu, const mfhjb_ensemble* nu, double sigma,
                       int directions, double* out) {
  return guarded([&] {
    same_dim(mu, nu);
    need(out, "out");
    *out = mfhjb::sw2(mu->ens, nu->ens, sigma, quad_for(mu->ens.d(), directions));
  });
}

mfhjb_status mfhjb_gauge(const mfhjb_ensemble* mu, const mfhjb_ensemble* nu, double sigma,
                         int directions, double* out) {
  return guarded([&] {
    same_dim(mu, nu);
    need(out, "out");
    *out = mfhjb::gauge_g(mu->ens, nu->ens, sigma, quad_for(mu->ens.d(), directions));
  });
}

mfhjb_status mfhjb_dmu_gauge(const mfhjb_ensemble* mu, const mfhjb_ensemble* nu, double sigma,
                             int directions, const double* x, double* out) {
  return guarded([&] {
    same_dim(mu, nu);
    need(x, "x");
    need(out, "out");
    const int d = mu->ens.d();
    const mfhjb::Vec xv = Eigen::Map<const mfhjb::Vec>(x, d);
    const mfhjb::Vec g = mfhjb::dmu_gauge(mu->ens, nu->ens, sigma, quad_for(d, directions), xv);
    for (int l = 0; l < d; ++l) out[l] = g[l];
  });
}

mfhjb_status mfhjb_dxdmu_gauge(const mfhjb_ensemble* mu, const mfhjb_ensemble* nu, double sigma,
                               int directions, const double* x, double* out) {
  return guarded([&] {
    same_dim(mu, nu);
    need(x, "x");
    need(out, "out");
    const int d = mu->ens.d();
    const mfhjb::Vec xv = Eigen::Map<const mfhjb::Vec>(x, d);
    const mfhjb::Mat m = mfhjb::dxdmu_gauge(mu->ens, nu->ens, sigma, quad_for(d, directions), xv);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) out[r * d + c] = m(r, c);
    }
  });
}

mfhjb_status mfhjb_h_gauge(int d, int directions, double* out) {
  return guarded([&] {
    need(out, "out");
    const mfhjb::Mat m = mfhjb::h_gauge(quad_for(d, directions));
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) out[r * d + c] = m(r, c);
    }
  });
}

mfhjb_status mfhjb_w2_discrete(const double* a, const double* b, size_t n, double* out) {
  return guarded([&] {
    need(a, "a");
    need(b, "b");
    need(out, "out");
    *out = mfhjb::w2_discrete_oracle({a, n}, {b, n});
  });
}

mfhjb_status mfhjb_w1_standard_normal(const double* values, size_t n, double* out) {
  return guarded([&] {
    need(values, "values");
    need(out, "out");
    *out = mfhjb::w1_to_standard_normal({values, n});
  });
}

mfhjb_status mfhjb_scenario_create(const char* name, const char* params_json,
                                   mfhjb_scenario** out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    auto params = mfhjb::ScenarioParams::from_json(params_json ? params_json : "{}");
    auto coeffs = mfhjb::scenario(name, params);
    *out = new mfhjb_scenario{std::move(coeffs), std::move(params)};
  });
}

void mfhjb_scenario_destroy(mfhjb_scenario* s) { delete s; }

int mfhjb_scenario_dim(const mfhjb_scenario* s) { return s ? s->coeffs->d : 0; }

mfhjb_status mfhjb_cost_constant(const mfhjb_scenario* s, const mfhjb_ensemble* init,
                                 const double* action, int steps, int paths, uint64_t seed,
                                 double* mean, double* stderr_out) {
  return guarded([&] {
    need(s, "scenario");
    need(init, "init");
    need(action, "action");
    need(mean, "mean");
    mfhjb::SimConfig cfg;
    cfg.steps = steps;
    cfg.t1 = s->coeffs->horizon;
    cfg.seed = seed;
    cfg.validate();
    const int da = s->coeffs->actions.dim();
    const mfhjb::Vec a = Eigen::Map<const mfhjb::Vec>(action, da);
    const auto policy = mfhjb::StepControl::constant(cfg.t0, cfg.t1, a);
    const auto c = mfhjb::cost_j(*s->coeffs, init->ens, policy, cfg, paths);
    *mean = c.mean;
    if (stderr_out) *stderr_out = c.stderr_;
  });
}

mfhjb_status mfhjb_value_estimate(const mfhjb_scenario* s, const mfhjb_ensemble* init, int steps,
                                  int paths, uint64_t seed, double* value, double* stderr_out,
                                  double* best_action) {
  return guarded([&] {
    need(s, "scenario");
    need(init, "init");
    need(value, "value");
    mfhjb::SimConfig cfg;
    cfg.steps = steps;
    cfg.t1 = s->coeffs->horizon;
    cfg.seed = seed;
    cfg.validate();
    const auto v = mfhjb::value_estimate(*s->coeffs, init->ens, cfg, paths, {});
    *value = v.value;
    if (stderr_out) *stderr_out = v.stderr_;
    if (best_action) {
      const mfhjb::Vec a = v.best_policy.action(cfg.t0, init->ens.mean());
      for (int l = 0; l < a.size(); ++l) best_action[l] = a[l];
    }
  });
}

mfhjb_status mfhjb_lq_hjb_residual(const char* params_json, double t, const mfhjb_ensemble* mu,
                                   double* out) {
  return guarded([&] {
    need(mu, "mu");
    need(out, "out");
    const auto params = mfhjb::ScenarioParams::from_json(params_json ? params_json : "{}");
    mfhjb::require(params.d == mu->ens.d(), mfhjb::ErrorCode::kDimensionMismatch,
                   "ensemble dimension differs from params.d");
    const auto coeffs = mfhjb::scenario("lq_drift", params);
    const auto u = mfhjb::lq_closed_form(params, params.horizon);
    *out = mfhjb::hjb_residual(*coeffs, u, t, mu->ens, coeffs->actions.grid(5));
  });
}

int mfhjb_experiment_count(void) { return static_cast<int>(mfhjb::subcommands().size()); }

const char* mfhjb_experiment_name(int i) {
  const auto& names = mfhjb::subcommands();
  if (i < 0 || i >= static_cast<int>(names.size())) return nullptr;
  return names[static_cast<std::size_t>(i)].c_str();
}

mfhjb_status mfhjb_experiment_run(const char* subcommand, const char* config_json, uint64_t seed,
                                  int seed_given, const char* out_dir, int* pass) {
  return guarded([&] {
    need(subcommand, "subcommand");
    need(out_dir, "out_dir");
    std::optional<std::uint64_t> s;
    if (seed_given) s = seed;
    const auto r = mfhjb::run_experiment(subcommand, config_json ? config_json : "", s);
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / "results.json", r.results_json);
    for (const auto& [name, text] : r.csv) write_file(dir / name, text);
    if (pass) *pass = r.pass ? 1 : 0;
  });
}

}  // extern "C"
