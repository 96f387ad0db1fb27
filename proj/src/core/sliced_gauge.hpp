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
#include <memory>
#include <vector>

#include "core/measures.hpp"
#include "core/transport1d.hpp"

namespace mfhjb {

/// Directions on S^{d-1} with weights summing to one (normalized spherical
/// measure, so the exact second moment matrix is I/d).
class SphereQuadrature {
 public:
  /// d = 1: the two points {+1, -1}. d = 2: `count` equispaced angles.
  /// d >= 3: `count` seeded random directions in antipodal pairs.
  static SphereQuadrature make(int d, int count = 0, std::uint64_t seed = 0x5eedULL);

  int d() const { return d_; }
  int size() const { return static_cast<int>(dirs_.size()); }
  const Vec& direction(int j) const { return dirs_[static_cast<std::size_t>(j)]; }
  double weight(int j) const { return weights_[static_cast<std::size_t>(j)]; }
  /// sum_j w_j theta_j theta_j^T.
  const Mat& second_moment() const { return second_moment_; }

 private:
  int d_ = 0;
  std::vector<Vec> dirs_;
  std::vector<double> weights_;
  Mat second_moment_;
};

int default_direction_count(int d);

/// Numerical resolution shared by the sliced computations.
struct SliceSettings {
  int w2_points = kDefaultW2Points;     // quantile levels per direction
  double derivative_tolerance = 1e-11;  // absolute, adaptive map-moment quadrature
};

/// Per-direction smoothed projections of one ensemble. Quantile tables are
/// built on first use and kept, so a profile used as a fixed target is cheap
/// to reuse.
class SlicedProfile {
 public:
  SlicedProfile(const ParticleEnsemble& ens, double sigma, const SphereQuadrature& quad);

  double sigma() const { return sigma_; }
  int d() const { return d_; }
  const SphereQuadrature& quad() const { return *quad_; }
  SmoothedProjection& at(int j) { return proj_[static_cast<std::size_t>(j)]; }
  const SmoothedProjection& at(int j) const { return proj_[static_cast<std::size_t>(j)]; }

 private:
  const SphereQuadrature* quad_;
  double sigma_;
  int d_;
  std::vector<SmoothedProjection> proj_;
};

/// Squared sliced distance sum_j w_j W2^2 between two profiles.
double sw2_sq(SlicedProfile& mu, SlicedProfile& nu, const SliceSettings& s = {});

double sw2(const ParticleEnsemble& mu, const ParticleEnsemble& nu, double sigma,
           const SphereQuadrature& quad, const SliceSettings& s = {});

/// The gauge functional is kGaugeScale * sw2^2; with this factor the
/// L-derivative below is its exact derivative (fixed by finite differences).
inline constexpr double kGaugeScale = 0.5;

double gauge_g(const ParticleEnsemble& mu, const ParticleEnsemble& nu, double sigma,
               const SphereQuadrature& quad, const SliceSettings& s = {});

/// |t - s|^2 + sw2(mu, nu)^2.
double rho(double s_time, const ParticleEnsemble& mu, double t_time, const ParticleEnsemble& nu,
           double sigma, const SphereQuadrature& quad, const SliceSettings& s = {});

/// L-derivative in mu of gauge_g(mu, nu) at x:
///   sum_j w_j theta_j (theta_j^T x - E[T_j(theta_j^T x + sigma Z)]).
/// The expectation is an adaptive Gauss-Kronrod integral in Z.
Vec dmu_gauge(SlicedProfile& mu, SlicedProfile& nu, const Vec& x, const SliceSettings& s = {});
/// Its derivative in x: sum_j w_j theta_j theta_j^T (1 - E[T_j'(y)]).
Mat dxdmu_gauge(SlicedProfile& mu, SlicedProfile& nu, const Vec& x, const SliceSettings& s = {});

Vec dmu_gauge(const ParticleEnsemble& mu, const ParticleEnsemble& nu, double sigma,
              const SphereQuadrature& quad, const Vec& x, const SliceSettings& s = {});
Mat dxdmu_gauge(const ParticleEnsemble& mu, const ParticleEnsemble& nu, double sigma,
                const SphereQuadrature& quad, const Vec& x, const SliceSettings& s = {});

/// Second derivative of gauge_g((I + w)#mu, nu) in w; reads only the quadrature.
Mat h_gauge(const SphereQuadrature& quad);

/// Caches the target side of gauge evaluations against a fixed nu.
class GaugeTarget {
 public:
  GaugeTarget(const ParticleEnsemble& nu, double sigma, const SphereQuadrature& quad,
              SliceSettings settings = {});

  double sw2_sq(const ParticleEnsemble& mu);
  double gauge(const ParticleEnsemble& mu) { return kGaugeScale * sw2_sq(mu); }
  Vec dmu(const ParticleEnsemble& mu, const Vec& x);
  Mat dxdmu(const ParticleEnsemble& mu, const Vec& x);
  SlicedProfile& profile() { return profile_; }
  const SliceSettings& settings() const { return settings_; }

 private:
  SliceSettings settings_;
  SlicedProfile profile_;
};

/// Anchor sequence (t_k, mu_k) with weights 2^{-k}, truncated after index
/// k_max. With `repeat_last` the final anchor repeats forever and its weight
/// is the exact geometric tail.
struct GaugeAnchors {
  std::vector<double> times;
  std::vector<ParticleEnsemble> ensembles;
  double delta = 1.0;
  double lambda = 0.0;
  double horizon = 1.0;
  int k_max = 40;
  bool repeat_last = false;

  void add(double t, ParticleEnsemble mu);
  std::size_t size() const { return times.size(); }
};

/// Anchors with identical (t, mu) merged and their weights summed.
struct CollapsedAnchors {
  std::vector<double> weights;
  std::vector<std::size_t> index;  // representative anchor
};
CollapsedAnchors collapse_anchors(const GaugeAnchors& anchors);

struct PhiValue {
  double value = 0.0;
  double tail_bound = 0.0;  // 2^{-k_max} * max_k rho_k when truncation drops anchors
};

PhiValue phi_delta(const GaugeAnchors& anchors, double t, const ParticleEnsemble& mu,
                   const SphereQuadrature& quad, const SliceSettings& s = {});

/// Derivatives of phi_delta at (t, mu): d_mu and d_x d_mu at every particle.
struct PhiDerivatives {
  double dt = 0.0;
  Mat dmu;                   // d x n
  std::vector<Mat> dxdmu;    // n matrices d x d
  Mat h;
  double weight_sum = 0.0;
};

PhiDerivatives phi_delta_derivatives(const GaugeAnchors& anchors, double t,
                                     const ParticleEnsemble& mu, const SphereQuadrature& quad,
                                     const SliceSettings& s = {});

/// Constant in the four derivative bounds of the series perturbation; see
/// phi_delta_derivative_bounds.
inline constexpr double kPhiBoundConstant = 256.0;

struct PhiDerivativeBounds {
  double dt_abs = 0.0;
  double dmu_l2 = 0.0;    // integral of |d_mu phi|^2 against mu
  double dxdmu_l2 = 0.0;  // integral of |d_x d_mu phi|_F^2 against mu
  double h_norm = 0.0;    // Frobenius norm of H phi
  double dt_bound = 0.0;
  double dmu_bound = 0.0;
  double dxdmu_bound = 0.0;
  double h_bound = 0.0;
  double weight_sum = 0.0;
  bool holds() const {
    return dt_abs <= dt_bound && dmu_l2 <= dmu_bound && dxdmu_l2 <= dxdmu_bound &&
           h_norm <= h_bound;
  }
};

/// Term-wise derivatives of phi_delta at (t, mu) and the bounds
///   |d_t phi| <= 4T, |H phi| <= C,
///   int |d_mu phi|^2 dmu <= C ((1 + lambda)/delta^2 + m2(mu) + m2(mu_0)),
///   int |d_x d_mu phi|^2 dmu <= C delta^2 ((1 + lambda)/delta^2 + m2(mu_0)),
/// with C = kPhiBoundConstant and mu_0 the first anchor.
PhiDerivativeBounds phi_delta_derivative_bounds(const GaugeAnchors& anchors, double t,
                                                const ParticleEnsemble& mu,
                                                const SphereQuadrature& quad,
                                                const SliceSettings& s = {});

}  // namespace mfhjb
