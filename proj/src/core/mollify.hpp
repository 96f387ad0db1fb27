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
#include <limits>
#include <memory>
#include <vector>

#include "core/coefficients.hpp"

namespace mfhjb {

/// The C-infinity bump exp(-1/(1 - u^2)) on (-1, 1), normalized to unit mass
/// under a trapezoid rule with `nodes` intervals.
class BumpKernel {
 public:
  explicit BumpKernel(int nodes = 4096);

  double density(double u) const;
  /// Inverse distribution function by interpolation in a cumulative table.
  double inverse_cdf(double p) const;
  /// Trapezoid nodes and weights; weights sum to one.
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  /// Mass of the unnormalized bump under this rule.
  double raw_mass() const { return raw_mass_; }
  /// int h(u) k(u) du under this rule.
  template <typename F>
  double integrate(F&& h) const {
    KahanSum s;
    for (std::size_t j = 0; j < nodes_.size(); ++j) s.add(weights_[j] * h(nodes_[j]));
    return s.value();
  }

 private:
  std::vector<double> nodes_, weights_, cdf_;
  double raw_mass_ = 0.0;
};

struct MollifierSpec {
  int m = 8;
  int samples = 4096;          // joint offset samples Q, antithetic pairs
  int phi_nodes = 2048;        // time-kernel quadrature intervals
  int Phi_nodes = 64;          // per-axis space-kernel quadrature intervals
  std::uint64_t seed = 1;
  double stderr_cap = std::numeric_limits<double>::infinity();

  void validate() const;
};

struct MollifiedVector {
  Vec value;
  double stderr_ = 0.0;  // largest componentwise standard error
  bool flagged = false;  // stderr above the configured cap
};

struct MollifiedScalar {
  double value = 0.0;
  double stderr_ = 0.0;
  bool flagged = false;
};

/// b^i_{n,m}(t, xbar, a): b averaged over a joint time offset and independent
/// space offsets of every particle, each drawn from the scaled kernel.
/// Arguments the coefficient does not read are not integrated.
MollifiedVector mollified_b(const CoefficientSet& c, const MollifierSpec& spec, int i, double t,
                            const Mat& xbar, const Vec& a);
MollifiedScalar mollified_f(const CoefficientSet& c, const MollifierSpec& spec, int i, double t,
                            const Mat& xbar, const Vec& a);
MollifiedScalar mollified_g(const CoefficientSet& c, const MollifierSpec& spec, int i,
                            const Mat& xbar);

/// Kernel moments at scale m: int |t - ((t - s)^+ ^ T)|^beta m phi(ms) ds and
/// E|y| for y drawn from the d-dimensional space kernel.
double time_term(const MollifierSpec& spec, double t, double horizon, double beta);
double space_first_moment(const MollifierSpec& spec, int d);

/// K (time term + space term) for the coefficient's dependence flags.
double mollifier_error_bound(const CoefficientSet& c, const Dependence& dep,
                             const MollifierSpec& spec, double t);

struct MollifyProbe {
  double t = 0.0;
  Mat xbar;
  Vec a;
  int i = 0;
};

struct RateRow {
  int m = 0;
  double sup_error = 0.0;
  double bound = 0.0;
  double stderr_ = 0.0;
};

struct RateTable {
  std::vector<RateRow> rows;
  double slope = 0.0;  // of log sup_error against log m
  double r_squared = 0.0;
  bool bounded = false;  // sup_error <= bound + 4 stderr on every row
};

/// Sup over probes of |b^i_{n,m} - b(t, x^i, mu_xbar, a)| for each m.
RateTable mollify_rate_sweep(const CoefficientSet& c, const MollifierSpec& base,
                             const std::vector<int>& ms, const std::vector<MollifyProbe>& probes);

/// The coefficient set with b, f, g replaced by their mollified versions;
/// sigma and sigma0 pass through. Pointwise evaluators locate x among the
/// columns of mu; the batch evaluators use the column index directly.
std::shared_ptr<const CoefficientSet> mollified_coefficients(
    std::shared_ptr<const CoefficientSet> base, const MollifierSpec& spec);

}  // namespace mfhjb
