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

#include <span>
#include <utility>
#include <vector>

namespace mfhjb {

inline constexpr double kProbFloor = 1e-14;
inline constexpr double kTailFloor = 1e-300;

/// Probability levels with quadrature weights. Levels are kept as both lower
/// tails p_k and upper tails 1 - p_k so that each is exact where it is small.
struct ProbabilityGrid {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> weight;
  int size() const { return static_cast<int>(lower.size()); }
};

/// p_j = (j - 1/2)/m with weights 1/m.
const ProbabilityGrid& midpoint_grid(int m);
/// Midpoint rule with each end cell (0, 1/m] refined into geometric halves,
/// which removes the O(1/m) error the unbounded tail quantiles cause.
const ProbabilityGrid& graded_midpoint_grid(int m);
/// p_k = Phi(u_k) for the m-node Gauss-Hermite rule in u; the integral over
/// (0, 1) in p becomes a Gaussian expectation in u with a smooth integrand,
/// which the midpoint rule's tail cells lack.
const ProbabilityGrid& normal_score_grid(int m);

/// The law of v_I + sigma * Z with I uniform on the projected values and Z
/// standard normal, i.e. a uniform Gaussian mixture on the line.
class SmoothedProjection {
 public:
  SmoothedProjection(std::vector<double> values, double sigma);

  double sigma() const { return sigma_; }
  int n() const { return static_cast<int>(sorted_.size()); }
  const std::vector<double>& sorted_values() const { return sorted_; }

  /// Mixture CDF, clamped to [kProbFloor, 1 - kProbFloor].
  double cdf(double z) const;
  /// 1 - cdf(z), computed from the upper tails and clamped the same way.
  double sf(double z) const;
  /// Unclamped tail masses, floored at kTailFloor; the transport map needs
  /// them beyond the clamp to stay exact far from the data.
  double lower_tail(double z) const;
  double upper_tail(double z) const;
  double pdf(double z) const;

  /// Inverse CDF for p in (0, 1).
  double quantile(double p) const;
  /// Solves sf(z) = q; the accurate route for upper-tail probabilities.
  double upper_quantile(double q) const;

  /// Precomputes quantiles at the grid levels. Later quantile calls use the
  /// table for brackets and starting points.
  void build_table(const ProbabilityGrid& grid);
  /// Quantiles at the grid levels; builds the table on demand.
  const std::vector<double>& grid_quantiles(const ProbabilityGrid& grid);

 private:
  struct TailEval {
    double tail;
    double density;
  };
  TailEval eval(double z, bool upper) const;
  double raw_lower(double z) const;
  double raw_upper(double z) const;
  std::pair<double, double> global_bracket(double target, bool upper) const;
  double solve(double target, bool upper) const;
  double solve_bracketed(double target, bool upper, double lo, double hi, double x) const;

  std::vector<double> sorted_;
  double sigma_;
  double scale_;
  const ProbabilityGrid* grid_ = nullptr;
  std::vector<double> table_;
};

/// z -> F_target^{-1}(F_source(z)).
class TransportMap1D {
 public:
  TransportMap1D(const SmoothedProjection& source, const SmoothedProjection& target)
      : source_(source), target_(target) {}

  double operator()(double z) const;

 private:
  const SmoothedProjection& source_;
  const SmoothedProjection& target_;
};

inline constexpr int kDefaultW2Points = 512;

/// Squared W2 between two smoothed projections with the same sigma, as
/// sum_k w_k (Q_src(p_k) - Q_tgt(p_k))^2 over the grid. At z_k = Q_src(p_k)
/// the optimal map gives T(z_k) = Q_tgt(p_k).
double w2_smoothed_sq(SmoothedProjection& src, SmoothedProjection& tgt,
                      const ProbabilityGrid& grid);
double w2_smoothed(SmoothedProjection& src, SmoothedProjection& tgt,
                   const ProbabilityGrid& grid);
/// Default rule: graded_midpoint_grid(m).
double w2_smoothed(SmoothedProjection& src, SmoothedProjection& tgt, int m = kDefaultW2Points);

/// W2 between two equal-size empirical measures by the sorted coupling.
double w2_discrete_oracle(std::span<const double> a, std::span<const double> b);

/// Exact W1 between the empirical measure of `values` and N(0, 1).
double w1_to_standard_normal(std::span<const double> values);

}  // namespace mfhjb
