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

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "core/dynamics.hpp"
#include "core/mollify.hpp"
#include "core/sliced_gauge.hpp"

namespace mfhjb {

struct CostEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::vector<double> per_path;
};

/// Monte Carlo J over common-noise paths cfg.path, ..., cfg.path + paths - 1.
CostEstimate cost_j(const CoefficientSet& coeffs, const ParticleEnsemble& init,
                    const StepControl& policy, const SimConfig& cfg, int paths);

/// Policy class searched by value_estimate. Exhaustive: every assignment of
/// `actions` (default: vertices of A) to `pieces` equal time intervals.
/// Coordinate ascent: per-interval feedback tables on the given grid,
/// improved one cell at a time for `sweeps` passes.
struct PolicySearch {
  enum class Kind { kExhaustive, kCoordinateAscent };
  Kind kind = Kind::kExhaustive;
  std::vector<Vec> actions;
  int pieces = 1;
  Vec grid_origin;
  double grid_cell = 1.0;
  std::vector<int> grid_cells;
  int sweeps = 1;
  std::size_t max_policies = 4096;

  std::vector<Vec> resolved_actions(const ActionSet& set) const;
};

struct PolicyTrace {
  std::string policy;
  double mean = 0.0;
  double stderr_ = 0.0;
};

struct ValueEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  StepControl best_policy;
  std::vector<PolicyTrace> trace;
};

/// Largest cost_j over the search class, all candidates sharing the same
/// noise (common random numbers).
ValueEstimate value_estimate(const CoefficientSet& coeffs, const ParticleEnsemble& init,
                             const SimConfig& cfg, int paths, const PolicySearch& search);

struct FdApproxConfig {
  double t = 0.0;
  double epsilon = 0.0;
  int n = 64;
  MollifierSpec mollifier;
  int resamples = 1;
  /// Seed of the initial draws; defaults to the simulation seed.
  std::optional<std::uint64_t> sample_seed;
};

/// v_{eps,n,m}(t, mu): value_estimate with mollified coefficients and the
/// eps-perturbation, initial points drawn i.i.d. from mu, averaged over
/// resamples.
MeanStderr value_fd_approx(std::shared_ptr<const CoefficientSet> coeffs,
                           const DistributionSpec& mu, const FdApproxConfig& fd,
                           const SimConfig& cfg, int paths, const PolicySearch& search);

struct DppReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
  double stderr_ = 0.0;
  Vec first_leg;
};

/// Value on [cfg.t0, cfg.t1] against the best first leg on [cfg.t0, s_mid]
/// followed by a value estimate restarted from each realized ensemble.
DppReport dpp_residual(const CoefficientSet& coeffs, const ParticleEnsemble& init, double s_mid,
                       const SimConfig& cfg, int paths, int inner_paths,
                       const PolicySearch& search);

/// HJB residual from derivative values: dmu is d x n, dxdmu one matrix per
/// particle.
double hjb_residual_values(const CoefficientSet& coeffs, double t, const ParticleEnsemble& mu,
                           double dt, const Mat& dmu, const std::vector<Mat>& dxdmu,
                           const Mat& h, const std::vector<Vec>& action_grid);

double hjb_residual(const CoefficientSet& coeffs, const TestFunction& u, double t,
                    const ParticleEnsemble& mu, const std::vector<Vec>& action_grid);

struct ViscosityProbe {
  double t = 0.0;
  ParticleEnsemble mu;
};

struct ViscosityConfig {
  double delta = 0.1;
  double tolerance = 1e-10;
  bool check_super = true;
  SliceSettings slice;
  int directions = 0;  // 0 picks the default for d
};

struct ViscosityReport {
  std::vector<double> residual;        // of the candidate itself
  std::vector<double> sub_residual;    // candidate + delta^2 phi, touching from above
  std::vector<double> super_residual;  // candidate - delta^2 phi, touching from below
  int sub_pass = 0;
  int super_pass = 0;
  bool all_sub() const { return sub_pass == static_cast<int>(sub_residual.size()); }
  bool all_super() const { return super_pass == static_cast<int>(super_residual.size()); }
};

/// At each probe, perturbs the candidate by the gauge series anchored at the
/// probe and evaluates the HJB residual of the touching test functions:
/// sub needs residual >= -tol, super needs residual <= tol.
ViscosityReport viscosity_check(const CoefficientSet& coeffs, const TestFunction& candidate,
                                const std::vector<ViscosityProbe>& probes,
                                const std::vector<Vec>& action_grid,
                                const ViscosityConfig& vc);

/// The candidate plus kappa (1 + cos(pi t / T)) / 2, positive and decreasing
/// in t.
TestFunction add_time_bump(const TestFunction& u, double kappa, double horizon);

}  // namespace mfhjb
