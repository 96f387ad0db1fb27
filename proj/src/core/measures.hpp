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
#include <string>
#include <vector>

#include "core/numeric.hpp"

namespace mfhjb {

/// Uniform empirical measure (1/n) sum_i delta_{x_i} on R^d. Points are the
/// columns of a d x n matrix, in insertion order.
class ParticleEnsemble {
 public:
  explicit ParticleEnsemble(Mat points);
  static ParticleEnsemble from_rows(const std::vector<std::vector<double>>& rows);

  int n() const { return static_cast<int>(points_.cols()); }
  int d() const { return static_cast<int>(points_.rows()); }
  const Mat& points() const { return points_; }
  auto point(int i) const { return points_.col(i); }
  const Vec& mean() const { return mean_; }

  std::vector<std::vector<double>> to_rows() const;

 private:
  Mat points_;
  Vec mean_;
};

class Direction {
 public:
  /// Normalizes `v`; rejects the zero vector.
  static Direction normalized(const Vec& v);
  /// Accepts `theta` only if it already has unit length within 1e-12.
  explicit Direction(Vec theta);

  const Vec& theta() const { return theta_; }
  int d() const { return static_cast<int>(theta_.size()); }

 private:
  Vec theta_;
};

std::vector<double> project(const ParticleEnsemble& ens, const Direction& dir);
double second_moment(const ParticleEnsemble& ens);
ParticleEnsemble translate(const ParticleEnsemble& ens, const Vec& w);
/// Same multiset of points in the order given by perm (perm[i] is the source index).
ParticleEnsemble permute(const ParticleEnsemble& ens, const std::vector<int>& perm);

/// Named sampling law: "point_mass" {center}, "uniform_box" {lo, hi},
/// "gaussian" {mean, std}, "mixture" {components, weights}. Vector fields
/// accept a scalar, broadcast to every coordinate.
struct DistributionSpec {
  std::string name = "gaussian";
  Vec center;
  Vec lo;
  Vec hi;
  Vec mean;
  Vec std;
  std::vector<DistributionSpec> components;
  std::vector<double> weights;

  static DistributionSpec point_mass(Vec c);
  static DistributionSpec uniform_box(Vec lo, Vec hi);
  static DistributionSpec gaussian(Vec mean, Vec std);
  static DistributionSpec mixture(std::vector<DistributionSpec> comps, std::vector<double> w);

  /// Parses the JSON form; `d` resolves scalar broadcasts.
  static DistributionSpec from_json(const std::string& json_text, int d);
};

ParticleEnsemble sample_iid(const DistributionSpec& dist, int n, int d, std::uint64_t seed);

/// JSON array of arrays of finite doubles.
std::string ensemble_to_json(const ParticleEnsemble& ens);
ParticleEnsemble ensemble_from_json(const std::string& json_text);

}  // namespace mfhjb
