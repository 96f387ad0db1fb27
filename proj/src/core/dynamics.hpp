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

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "core/coefficients.hpp"

namespace mfhjb {

/// How idiosyncratic noise streams are assigned to particles. kParticleIndex
/// keys by column index; kSortedRank keys by the rank of the initial point in
/// lexicographic order, so permuting the initial ensemble permutes the
/// output and leaves every aggregate bit-identical.
enum class NoiseKeying { kParticleIndex, kSortedRank };

struct SimConfig {
  int steps = 50;
  double t0 = 0.0;
  double t1 = 1.0;
  double epsilon = 0.0;
  std::uint64_t seed = 1;
  /// Seed of the idiosyncratic and perturbation streams; defaults to `seed`.
  std::optional<std::uint64_t> idio_seed;
  /// Index of the common-noise realization.
  std::uint32_t path = 0;
  NoiseKeying keying = NoiseKeying::kParticleIndex;
  bool record_trajectories = false;
  bool record_controls = false;

  void validate() const;
  double dt() const { return (t1 - t0) / steps; }
  double time(int k) const { return k == steps ? t1 : t0 + k * dt(); }
};

struct PathBundle {
  std::vector<double> times;       // M + 1 grid times
  Mat common_path;                 // d x (M + 1), W0 relative to t0
  std::vector<Mat> trajectories;   // M + 1 matrices d x n, if recorded
  std::vector<Mat> controls_used;  // M matrices d_A x n, if recorded
  Mat final_state;                 // d x n
  double running_cost = 0.0;       // (1/n) sum_i sum_k f dt
  double terminal_cost = 0.0;      // (1/n) sum_i g(X_M^i, mu_M)

  double cost() const { return running_cost + terminal_cost; }
};

/// Called at every grid step k = 0..M before the update (k = M after the
/// last one) with the empirical measure and the actions in force. `actions`
/// is empty at k = M.
using StepObserver =
    std::function<void(int k, double t, const ParticleEnsemble& mu, const Mat& actions)>;

/// Euler-Maruyama for the n-particle system with common noise.
PathBundle simulate(const CoefficientSet& coeffs, const ParticleEnsemble& init,
                    const StepControl& policy, const SimConfig& cfg,
                    const StepObserver& observer = nullptr);

/// Empirical measure of a recorded bundle at step k.
ParticleEnsemble conditional_law(const PathBundle& bundle, int k);

/// CSV rows "step,particle,x1,...,xd" of the recorded trajectories.
void write_trajectory_csv(const PathBundle& bundle, std::ostream& os);

struct MomentReport {
  double growth_lhs = 0.0;         // E sup_k |X_k|^p
  double growth_base = 0.0;        // 1 + E |xi|^p
  double growth_constant = 0.0;
  double lipschitz_lhs = 0.0;      // E sup_k |X_k - X'_k|^p
  double lipschitz_base = 0.0;     // E |xi - xi'|^p
  double lipschitz_constant = 0.0;
  double increment_lhs = 0.0;      // E sup_{t_k <= t0 + h} |X_k - xi|^2
  double increment_h = 0.0;
  double increment_constant = 0.0;
  bool finite = false;
};

/// Empirical constants of the three moment estimates from paired bundles
/// (same noise, initial ensembles xi and xi'). Bundles need trajectories.
MomentReport moment_checks(const std::vector<PathBundle>& base,
                           const std::vector<PathBundle>& shifted, double p, double h);

/// Runs `paths` paired simulations (init and init + shift) and reports the
/// moment constants for the window h.
MomentReport moment_sweep(const CoefficientSet& coeffs, const ParticleEnsemble& init,
                          const Vec& shift, const StepControl& policy, const SimConfig& cfg,
                          int paths, double p, double h);

struct ItoReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
  double stderr_ = 0.0;
  int paths = 0;
};

/// Compares E0[u(t1, mu_t1)] - u(t0, mu_0) with the time integral of the
/// expected generator along simulated paths (left-point rule).
ItoReport ito_expectation_check(const CoefficientSet& coeffs, const ParticleEnsemble& init,
                                const TestFunction& u, const StepControl& policy,
                                const SimConfig& cfg, int paths);

}  // namespace mfhjb
