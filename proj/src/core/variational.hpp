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

#include <vector>

#include "core/sliced_gauge.hpp"

namespace mfhjb {

struct Candidate {
  double t = 0.0;
  ParticleEnsemble mu;
  double g = 0.0;
};

struct CandidateSet {
  std::vector<Candidate> items;
  double lambda = 0.1;
  double delta = 1.0;
  double horizon = 1.0;
  int start = 0;
};

struct Certificate {
  bool item1 = false;  // rho(x~, x_k) <= lambda / (2^k delta^2) for every k
  bool item2 = false;  // G(x_0) <= G(x~) - delta^2 phi(x~)
  bool item3 = false;  // x~ is the strict maximizer of G - delta^2 phi
  bool monotone = false;
  double item1_worst_ratio = 0.0;  // max_k rho(x~, x_k) 2^k delta^2 / lambda
  double item2_margin = 0.0;
  double item3_margin = 0.0;  // smallest gap to the runner-up
  bool all() const { return item1 && item2 && item3 && monotone; }
};

struct VariationalResult {
  int tilde = 0;
  std::vector<int> selected;  // x_0, x_1, ... as candidate indices
  GaugeAnchors anchors;
  Certificate certificate;
  bool terminated = false;
  int iterations = 0;
  std::vector<double> s_at_next;   // S_k(x_{k+1}), non-decreasing
  std::vector<double> sup_over_a;  // max of S_k over the admissible set, non-increasing
};

/// Borwein-Preiss selection on a finite candidate set with sigma = 1/delta:
///   S_k(x) = G(x) - delta^2 sum_{j<=k} 2^{-j} rho(x, x_j),
///   A_k = {x : S_k(x) >= S_k(x_k)},
/// x_{k+1} is the lowest-index point of A_k within lambda/4^{k+1} of max_{A_k} S_k.
/// Stops once A_k is a singleton; the survivor is x~ and repeats forever.
VariationalResult borwein_preiss(const CandidateSet& cands, const SphereQuadrature& quad,
                                 int max_iter = 64, const SliceSettings& s = {});

/// Pairwise rho matrix at sigma = 1/delta.
Mat candidate_rho(const CandidateSet& cands, const SphereQuadrature& quad,
                  const SliceSettings& s = {});

}  // namespace mfhjb
