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

#include <functional>
#include <string>
#include <vector>

#include "core/measures.hpp"

namespace mfhjb {

/// Admissible actions: a box [lo, hi] in R^{dim}, or a finite list.
class ActionSet {
 public:
  static ActionSet box(Vec lo, Vec hi);
  static ActionSet finite(std::vector<Vec> actions);

  int dim() const { return dim_; }
  bool is_box() const { return is_box_; }
  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }
  const std::vector<Vec>& list() const { return list_; }
  bool contains(const Vec& a, double tol = 1e-12) const;
  /// Box corners, or the finite list itself.
  std::vector<Vec> vertices() const;
  /// Tensor grid with `per_axis` points per coordinate (box), or the list.
  std::vector<Vec> grid(int per_axis) const;
  /// Largest Euclidean norm of an action.
  double max_norm() const;

 private:
  bool is_box_ = true;
  int dim_ = 0;
  Vec lo_, hi_;
  std::vector<Vec> list_;
};

/// Which arguments a coefficient actually reads. Mollification skips the
/// integrals over arguments a coefficient ignores.
struct Dependence {
  bool time = true;
  bool state = true;
  bool measure = true;
};

/// b, sigma, sigma0, f, g of the controlled state equation and cost, with
/// the constants K and beta of the standing assumptions.
class CoefficientSet {
 public:
  virtual ~CoefficientSet() = default;

  virtual Vec b(double t, const Vec& x, const ParticleEnsemble& mu, const Vec& a) const = 0;
  virtual Mat sigma(double t, const Vec& x, const Vec& a) const = 0;
  virtual Mat sigma0(double t) const = 0;
  virtual double f(double t, const Vec& x, const ParticleEnsemble& mu, const Vec& a) const = 0;
  virtual double g(const Vec& x, const ParticleEnsemble& mu) const = 0;

  /// Drift of every particle (columns of x, actions in columns of a).
  virtual void drift_all(double t, const Mat& x, const ParticleEnsemble& mu, const Mat& a,
                         Mat* out) const;
  /// Adds sigma(t, x_i, a_i) dw_i to column i of out.
  virtual void add_diffusion(double t, const Mat& x, const Mat& a, const Mat& dw, Mat* out) const;
  /// (1/n) sum_i f(t, x_i, mu, a_i).
  virtual double mean_running_cost(double t, const Mat& x, const ParticleEnsemble& mu,
                                   const Mat& a) const;
  /// (1/n) sum_i g(x_i, mu).
  virtual double mean_terminal_cost(const Mat& x, const ParticleEnsemble& mu) const;

  std::string name;
  int d = 1;
  double horizon = 1.0;
  double k_bound = 0.0;
  double beta = 1.0;
  ActionSet actions = ActionSet::box(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0));
  Dependence dep_b, dep_sigma, dep_f, dep_g;
  bool running_cost_zero = false;
};

/// A coefficient set assembled from callables; unset callables are zero.
class FunctionCoefficients : public CoefficientSet {
 public:
  using DriftFn = std::function<Vec(double, const Vec&, const ParticleEnsemble&, const Vec&)>;
  using SigmaFn = std::function<Mat(double, const Vec&, const Vec&)>;
  using Sigma0Fn = std::function<Mat(double)>;
  using RunningFn = std::function<double(double, const Vec&, const ParticleEnsemble&, const Vec&)>;
  using TerminalFn = std::function<double(const Vec&, const ParticleEnsemble&)>;

  Vec b(double t, const Vec& x, const ParticleEnsemble& mu, const Vec& a) const override;
  Mat sigma(double t, const Vec& x, const Vec& a) const override;
  Mat sigma0(double t) const override;
  double f(double t, const Vec& x, const ParticleEnsemble& mu, const Vec& a) const override;
  double g(const Vec& x, const ParticleEnsemble& mu) const override;

  DriftFn b_fn;
  SigmaFn sigma_fn;
  Sigma0Fn sigma0_fn;
  RunningFn f_fn;
  TerminalFn g_fn;
};

struct ProbeReport {
  double max_b = 0.0, max_sigma = 0.0, max_sigma0 = 0.0, max_f = 0.0, max_g = 0.0;
  double max_lipschitz_ratio = 0.0;  // worst |h(x) - h(x')| / |x - x'| over coefficients
  bool ok = false;
};

/// Checks the advertised bound K on random probes inside the ball of radius
/// `radius`, and Lipschitz ratios in x on nearby probe pairs.
ProbeReport probe_coefficients(const CoefficientSet& c, int probes, double radius,
                               std::uint64_t seed);

/// Piecewise-constant-in-time control. Each interval holds either a constant
/// action or a feedback table on a uniform grid of cells in R^d (points
/// outside the grid use the nearest cell).
class StepControl {
 public:
  struct Feedback {
    Vec origin;                  // lower corner of the grid
    double cell = 1.0;           // cell edge length
    std::vector<int> cells;      // cells per axis
    std::vector<Vec> actions;    // row-major over the cell index
  };

  static StepControl constant(double t0, double t1, const Vec& a);
  static StepControl piecewise(std::vector<double> breakpoints, std::vector<Vec> actions);
  static StepControl feedback(std::vector<double> breakpoints, std::vector<Feedback> tables);

  const std::vector<double>& breakpoints() const { return breaks_; }
  int pieces() const { return static_cast<int>(breaks_.size()) - 1; }
  int piece_at(double t) const;
  Vec action(double t, const Vec& x) const;
  /// Actions of every particle, one column each.
  void actions_all(double t, const Mat& x, int action_dim, Mat* out) const;
  /// Throws unless every action lies in `set` and breakpoints increase.
  void validate(const ActionSet& set) const;
  std::string describe() const;

 private:
  std::vector<double> breaks_;
  std::vector<Vec> constants_;
  std::vector<Feedback> tables_;
};

/// A function u(t, mu) with the derivatives the Ito formula and the HJB
/// operator need. `d2mu` is optional and only serves the H cross-check.
struct TestFunction {
  std::function<double(double, const ParticleEnsemble&)> value;
  std::function<double(double, const ParticleEnsemble&)> dt;
  std::function<Vec(double, const ParticleEnsemble&, const Vec&)> dmu;
  std::function<Mat(double, const ParticleEnsemble&, const Vec&)> dxdmu;
  std::function<Mat(double, const ParticleEnsemble&)> h;
  std::function<Mat(double, const ParticleEnsemble&, const Vec&, const Vec&)> d2mu;
  double growth = 0.0;

  bool complete() const { return value && dt && dmu && dxdmu && h; }
};

/// H u computed as int d_x d_mu u dmu + int int d2_mu u dmu dmu.
Mat h_from_second_derivatives(const TestFunction& u, double t, const ParticleEnsemble& mu);

/// u(mu) = <p, mean(mu)>.
TestFunction linear_mean_function(const Vec& p);
/// u(mu) = int |x|^2 dmu.
TestFunction second_moment_function(int d);
/// u(mu) = |mean(mu)|^2.
TestFunction squared_mean_function(int d);

}  // namespace mfhjb
