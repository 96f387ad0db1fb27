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
#include <string>

#include "core/coefficients.hpp"

namespace mfhjb {

/// Knobs shared by the built-in scenarios. Scalars broadcast where a vector
/// is expected.
struct ScenarioParams {
  int d = 2;
  double horizon = 1.0;
  double action_lo = -1.0;
  double action_hi = 1.0;
  /// Optional finite action list; overrides the box when non-empty.
  std::vector<Vec> action_list;
  double sigma = 0.2;
  double sigma0 = 0.2;
  Vec p;                 // lq_drift payoff direction, default (0.5, ..., 0.5)
  double radius = 20.0;  // lq_drift clipping radius R
  double penalty = 0.5;  // action penalty scale
  double clamp_level = 1.0;

  static ScenarioParams from_json(const std::string& json_text);
  Vec payoff() const;
  ActionSet action_set() const;
};

/// Builds a named coefficient set ("lq_drift", "zero", "mean_reversion_mf",
/// "bounded_trig") and probes its advertised bounds before returning it.
std::shared_ptr<const CoefficientSet> scenario(const std::string& name,
                                               const ScenarioParams& params);

/// Componentwise clamp(x, -level, level) drift, nothing else. Lipschitz with a
/// kink at +-level; used for the space-rate sweep of the mollifier.
std::shared_ptr<const CoefficientSet> clamp_coefficients(const ScenarioParams& params);

/// Smooth radial clip used by lq_drift: identity on [0, R/2], saturating at R.
double smooth_clip_radius(double r, double radius);

/// Value of lq_drift while the mass stays inside radius R/2:
/// u(t, mu) = <p, mean(mu)> + (t1 - t) max_{a in A} <p, a>.
TestFunction lq_closed_form(const ScenarioParams& params, double t1);

/// max_{a in A} <p, a> over the scenario's action set.
double lq_hamiltonian_max(const ScenarioParams& params);

}  // namespace mfhjb
