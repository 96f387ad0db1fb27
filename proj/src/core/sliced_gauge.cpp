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

#include "core/sliced_gauge.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace mfhjb {

namespace {

// Row j holds theta_j^T x_i for every particle i.
Mat quad_directions_times(const ParticleEnsemble& ens, const SphereQuadrature& quad) {
  Mat dirs(quad.size(), quad.d());
  for (int j = 0; j < quad.size(); ++j) dirs.row(j) = quad.direction(j).transpose();
  return dirs * ens.points();
}

}  // namespace

int default_direction_count(int d) {
  if (d == 1) return 2;
  if (d == 2) return 128;
  return 1024;
}

SphereQuadrature SphereQuadrature::make(int d, int count, std::uint64_t seed) {
  require(d >= 1, ErrorCode::kInvalidArgument, "sphere quadrature needs d >= 1");
  SphereQuadrature q;
  q.d_ = d;
  if (count <= 0) count = default_direction_count(d);
  if (d == 1) {
    q.dirs_ = {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
  } else if (d == 2) {
    require(count >= 3, ErrorCode::kInvalidArgument, "d = 2 quadrature needs >= 3 angles");
    for (int j = 0; j < count; ++j) {
      const double a = 2.0 * kPi * j / count;
      Vec v(2);
      v << std::cos(a), std::sin(a);
      q.dirs_.push_back(v);
    }
  } else {
    require(count >= 2 && count % 2 == 0, ErrorCode::kInvalidArgument,
            "d >= 3 quadrature needs an even direction count");
    for (int j = 0; j < count / 2; ++j) {
      Stream rng({seed, Channel::kDirections, 0, static_cast<std::uint32_t>(j), 0});
      Vec v(d);
      do {
        for (int k = 0; k < d; ++k) v[k] = rng.normal();
      } while (v.norm() < 1e-8);
      v /= v.norm();
      q.dirs_.push_back(v);
      q.dirs_.push_back(-v);
    }
  }
  q.weights_.assign(q.dirs_.size(), 1.0 / static_cast<double>(q.dirs_.size()));
  q.second_moment_ = Mat::Zero(d, d);
  for (std::size_t j = 0; j < q.dirs_.size(); ++j) {
    q.second_moment_ += q.weights_[j] * q.dirs_[j] * q.dirs_[j].transpose();
  }
  return q;
}

SlicedProfile::SlicedProfile(const ParticleEnsemble& ens, double sigma,
                             const SphereQuadrature& quad)
    : quad_(&quad), sigma_(sigma), d_(ens.d()) {
  require(ens.d() == quad.d(), ErrorCode::kDimensionMismatch,
          "sliced profile: ensemble and quadrature dimensions differ");
  proj_.reserve(static_cast<std::size_t>(quad.size()));
  const Mat proj = quad_directions_times(ens, quad);
  for (int j = 0; j < quad.size(); ++j) {
    const auto row = proj.row(j);
    proj_.emplace_back(std::vector<double>(row.begin(), row.end()), sigma);
  }
}

namespace {

double ordered_sum(const std::vector<double>& terms) {
  KahanSum s;
  for (double v : terms) s.add(v);
  return s.value();
}

void require_match(const SlicedProfile& mu, const SlicedProfile& nu) {
  require(&mu.quad() == &nu.quad() || mu.quad().size() == nu.quad().size(),
          ErrorCode::kInvalidArgument, "profiles use different quadratures");
  require(mu.d() == nu.d(), ErrorCode::kDimensionMismatch, "profiles differ in dimension");
  require(mu.sigma() == nu.sigma(), ErrorCode::kInvalidArgument, "profiles differ in sigma");
}

}  // namespace

double sw2_sq(SlicedProfile& mu, SlicedProfile& nu, const SliceSettings& s) {
  require_match(mu, nu);
  const auto& quad = mu.quad();
  std::vector<double> terms(static_cast<std::size_t>(quad.size()));
  parallel_for(terms.size(), [&](std::size_t j) {
    const int jj = static_cast<int>(j);
    terms[j] = quad.weight(jj) * w2_smoothed_sq(mu.at(jj), nu.at(jj), graded_midpoint_grid(s.w2_points));
  });
  return ordered_sum(terms);
}

double sw2(const ParticleEnsemble& mu, const ParticleEnsemble& nu, double sigma,
           const SphereQuadrature& quad, const SliceSettings& s) {
  require(mu.d() == nu.d() && mu.d() == quad.d(), ErrorCode::kDimensionMismatch,
          "sw2: dimension mismatch");
  require(sigma >= 0.0 && std::isfinite(sigma), ErrorCode::kInvalidArgument,
          "sw2: sigma must be finite and >= 0");
  if (sigma == 0.0) {
    require(mu.n() == nu.n(), ErrorCode::kInvalidArgument,
            "sw2: sigma = 0 needs equal particle counts");
    const Mat pm = quad_directions_times(mu, quad);
    const Mat pn = quad_directions_times(nu, quad);
    std::vector<double> terms(static_cast<std::size_t>(quad.size()));
    for (int j = 0; j < quad.size(); ++j) {
      const Vec a = pm.row(j).transpose();
      const Vec b = pn.row(j).transpose();
      const double w = w2_discrete_oracle(std::span<const double>(a.data(), a.size()),
                                          std::span<const double>(b.data(), b.size()));
      terms[static_cast<std::size_t>(j)] = quad.weight(j) * w * w;
    }
    return std::sqrt(ordered_sum(terms));
  }
  SlicedProfile a(mu, sigma, quad);
  SlicedProfile b(nu, sigma, quad);
  return std::sqrt(sw2_sq(a, b, s));
}

double gauge_g(const ParticleEnsemble& mu, const ParticleEnsemble& nu, double sigma,
               const SphereQuadrature& quad, const SliceSettings& s) {
  require(sigma > 0.0, ErrorCode::kInvalidArgument, "gauge_g: sigma must be > 0");
  const double d = sw2(mu, nu, sigma, quad, s);
  return kGaugeScale * d * d;
}

double rho(double s_time, const ParticleEnsemble& mu, double t_time, const ParticleEnsemble& nu,
           double sigma, const SphereQuadrature& quad, const SliceSettings& s) {
  const double d = sw2(mu, nu, sigma, quad, s);
  return (t_time - s_time) * (t_time - s_time) + d * d;
}

namespace {

// Along one direction, with y = a + sigma Z and T the monotone map:
//   shift = E[T(y) - y],  slope = E[T'(y)] - 1,  T'(y) = f_src(y) / f_tgt(T(y)).
// Both are smooth in a, which finite differences of the derivatives rely on.
constexpr double kZSpan = 9.0;
constexpr int kMaxBisections = 12;

// Gauss-Kronrod with bisection under an absolute tolerance. A relative
// criterion never settles when T is the identity and the integrand is
// solver noise.
template <typename F>
double integrate_abs(const F& f, double lo, double hi, double tolerance, int depth) {
  double err = 0.0;
  const double v =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 0, 0.0, &err);
  if (err <= tolerance || depth == 0) return v;
  const double mid = 0.5 * (lo + hi);
  return integrate_abs(f, lo, mid, 0.5 * tolerance, depth - 1) +
         integrate_abs(f, mid, hi, 0.5 * tolerance, depth - 1);
}

double map_shift(const SmoothedProjection& src, const SmoothedProjection& tgt, double a,
                 double tolerance) {
  const TransportMap1D map(src, tgt);
  const double sigma = src.sigma();
  const auto f = [&](double z) {
    const double y = a + sigma * z;
    return normal_pdf(z) * (map(y) - y);
  };
  return integrate_abs(f, -kZSpan, kZSpan, tolerance, kMaxBisections);
}

double map_slope(const SmoothedProjection& src, const SmoothedProjection& tgt, double a,
                 double tolerance) {
  const TransportMap1D map(src, tgt);
  const double sigma = src.sigma();
  const auto f = [&](double z) {
    const double y = a + sigma * z;
    const double den = tgt.pdf(map(y));
    // Both densities underflow together far out, where the map is a shift.
    if (den <= 0.0) return 0.0;
    return normal_pdf(z) * (src.pdf(y) / den - 1.0);
  };
  return integrate_abs(f, -kZSpan, kZSpan, tolerance, kMaxBisections);
}

}  // namespace

Vec dmu_gauge(SlicedProfile& mu, SlicedProfile& nu, const Vec& x, const SliceSettings& s) {
  require_match(mu, nu);
  require(x.size() == mu.d() && x.allFinite(), ErrorCode::kDimensionMismatch,
          "dmu_gauge: x must be a finite point of matching dimension");
  const auto& quad = mu.quad();
  std::vector<double> coef(static_cast<std::size_t>(quad.size()));
  parallel_for(coef.size(), [&](std::size_t j) {
    const int jj = static_cast<int>(j);
    const double a = quad.direction(jj).dot(x);
    // theta^T x - E[T(y)] = -E[T(y) - y] since E[y] = theta^T x.
    coef[j] = -quad.weight(jj) * map_shift(mu.at(jj), nu.at(jj), a, s.derivative_tolerance);
  });
  Vec out = Vec::Zero(x.size());
  for (int j = 0; j < quad.size(); ++j) out += coef[static_cast<std::size_t>(j)] * quad.direction(j);
  return out;
}

Mat dxdmu_gauge(SlicedProfile& mu, SlicedProfile& nu, const Vec& x, const SliceSettings& s) {
  require_match(mu, nu);
  require(x.size() == mu.d() && x.allFinite(), ErrorCode::kDimensionMismatch,
          "dxdmu_gauge: x must be a finite point of matching dimension");
  const auto& quad = mu.quad();
  std::vector<double> coef(static_cast<std::size_t>(quad.size()));
  parallel_for(coef.size(), [&](std::size_t j) {
    const int jj = static_cast<int>(j);
    const double a = quad.direction(jj).dot(x);
    coef[j] = -quad.weight(jj) * map_slope(mu.at(jj), nu.at(jj), a, s.derivative_tolerance);
  });
  Mat out = Mat::Zero(x.size(), x.size());
  for (int j = 0; j < quad.size(); ++j) {
    const Vec& th = quad.direction(j);
    out += coef[static_cast<std::size_t>(j)] * th * th.transpose();
  }
  return out;
}

Vec dmu_gauge(const ParticleEnsemble& mu, const ParticleEnsemble& nu, double sigma,
              const SphereQuadrature& quad, const Vec& x, const SliceSettings& s) {
  GaugeTarget target(nu, sigma, quad, s);
  return target.dmu(mu, x);
}

Mat dxdmu_gauge(const ParticleEnsemble& mu, const ParticleEnsemble& nu, double sigma,
                const SphereQuadrature& quad, const Vec& x, const SliceSettings& s) {
  GaugeTarget target(nu, sigma, quad, s);
  return target.dxdmu(mu, x);
}

Mat h_gauge(const SphereQuadrature& quad) { return quad.second_moment(); }

GaugeTarget::GaugeTarget(const ParticleEnsemble& nu, double sigma, const SphereQuadrature& quad,
                         SliceSettings settings)
    : settings_(settings), profile_(nu, sigma, quad) {
  require(sigma > 0.0, ErrorCode::kInvalidArgument, "gauge target: sigma must be > 0");
  parallel_for(static_cast<std::size_t>(quad.size()), [&](std::size_t j) {
    profile_.at(static_cast<int>(j)).build_table(graded_midpoint_grid(settings_.w2_points));
  });
}

double GaugeTarget::sw2_sq(const ParticleEnsemble& mu) {
  SlicedProfile p(mu, profile_.sigma(), profile_.quad());
  return mfhjb::sw2_sq(p, profile_, settings_);
}

Vec GaugeTarget::dmu(const ParticleEnsemble& mu, const Vec& x) {
  SlicedProfile p(mu, profile_.sigma(), profile_.quad());
  return dmu_gauge(p, profile_, x, settings_);
}

Mat GaugeTarget::dxdmu(const ParticleEnsemble& mu, const Vec& x) {
  SlicedProfile p(mu, profile_.sigma(), profile_.quad());
  return dxdmu_gauge(p, profile_, x, settings_);
}

void GaugeAnchors::add(double t, ParticleEnsemble mu) {
  require(std::isfinite(t), ErrorCode::kNonFinite, "anchor time must be finite");
  times.push_back(t);
  ensembles.push_back(std::move(mu));
}

CollapsedAnchors collapse_anchors(const GaugeAnchors& anchors) {
  require(anchors.size() >= 1, ErrorCode::kInvalidArgument, "anchor list is empty");
  require(anchors.k_max >= 0 && anchors.k_max <= 1000, ErrorCode::kInvalidArgument,
          "k_max out of range");
  const std::size_t count = std::min<std::size_t>(anchors.size(), static_cast<std::size_t>(anchors.k_max) + 1);
  CollapsedAnchors out;
  auto add_weight = [&](std::size_t k, double w) {
    for (std::size_t u = 0; u < out.index.size(); ++u) {
      const std::size_t r = out.index[u];
      if (anchors.times[r] == anchors.times[k] &&
          anchors.ensembles[r].points() == anchors.ensembles[k].points()) {
        out.weights[u] += w;
        return;
      }
    }
    out.index.push_back(k);
    out.weights.push_back(w);
  };
  for (std::size_t k = 0; k < count; ++k) add_weight(k, std::ldexp(1.0, -static_cast<int>(k)));
  if (anchors.repeat_last && count == anchors.size()) {
    // sum_{k >= count} 2^{-k} in closed form.
    add_weight(count - 1, std::ldexp(1.0, 1 - static_cast<int>(count)));
  }
  return out;
}

namespace {

struct AnchorTerms {
  CollapsedAnchors collapsed;
  std::vector<double> rho;
};

AnchorTerms anchor_rhos(const GaugeAnchors& anchors, double t, const ParticleEnsemble& mu,
                        const SphereQuadrature& quad, const SliceSettings& s,
                        std::vector<std::unique_ptr<SlicedProfile>>* keep) {
  require(anchors.delta > 0.0, ErrorCode::kInvalidArgument, "anchors need delta > 0");
  AnchorTerms out;
  out.collapsed = collapse_anchors(anchors);
  const double sigma = 1.0 / anchors.delta;
  SlicedProfile here(mu, sigma, quad);
  for (std::size_t u = 0; u < out.collapsed.index.size(); ++u) {
    const std::size_t k = out.collapsed.index[u];
    auto prof = std::make_unique<SlicedProfile>(anchors.ensembles[k], sigma, quad);
    const double dt = t - anchors.times[k];
    out.rho.push_back(dt * dt + sw2_sq(here, *prof, s));
    if (keep) keep->push_back(std::move(prof));
  }
  return out;
}

}  // namespace

PhiValue phi_delta(const GaugeAnchors& anchors, double t, const ParticleEnsemble& mu,
                   const SphereQuadrature& quad, const SliceSettings& s) {
  const AnchorTerms terms = anchor_rhos(anchors, t, mu, quad, s, nullptr);
  PhiValue out;
  KahanSum sum;
  double sup = 0.0;
  for (std::size_t u = 0; u < terms.rho.size(); ++u) {
    sum.add(terms.collapsed.weights[u] * terms.rho[u]);
    sup = std::max(sup, terms.rho[u]);
  }
  out.value = sum.value();
  const bool truncated = anchors.size() > static_cast<std::size_t>(anchors.k_max) + 1;
  out.tail_bound = truncated ? std::ldexp(sup, -anchors.k_max) : 0.0;
  return out;
}

PhiDerivatives phi_delta_derivatives(const GaugeAnchors& anchors, double t,
                                     const ParticleEnsemble& mu, const SphereQuadrature& quad,
                                     const SliceSettings& s) {
  std::vector<std::unique_ptr<SlicedProfile>> profiles;
  const AnchorTerms terms = anchor_rhos(anchors, t, mu, quad, s, &profiles);
  const double sigma = 1.0 / anchors.delta;
  const double rho_scale = 1.0 / kGaugeScale;
  SlicedProfile here(mu, sigma, quad);
  const int d = mu.d();
  PhiDerivatives out;
  for (std::size_t u = 0; u < terms.rho.size(); ++u) {
    const double w = terms.collapsed.weights[u];
    out.dt += w * 2.0 * (t - anchors.times[terms.collapsed.index[u]]);
    out.weight_sum += w;
  }
  out.h = out.weight_sum * rho_scale * h_gauge(quad);
  out.dmu = Mat::Zero(d, mu.n());
  out.dxdmu.assign(static_cast<std::size_t>(mu.n()), Mat::Zero(d, d));
  for (int i = 0; i < mu.n(); ++i) {
    const Vec x = mu.point(i);
    for (std::size_t u = 0; u < terms.rho.size(); ++u) {
      const double w = terms.collapsed.weights[u] * rho_scale;
      out.dmu.col(i) += w * dmu_gauge(here, *profiles[u], x, s);
      out.dxdmu[static_cast<std::size_t>(i)] += w * dxdmu_gauge(here, *profiles[u], x, s);
    }
  }
  return out;
}

PhiDerivativeBounds phi_delta_derivative_bounds(const GaugeAnchors& anchors, double t,
                                                const ParticleEnsemble& mu,
                                                const SphereQuadrature& quad,
                                                const SliceSettings& s) {
  const PhiDerivatives der = phi_delta_derivatives(anchors, t, mu, quad, s);
  PhiDerivativeBounds out;
  out.dt_abs = std::abs(der.dt);
  out.weight_sum = der.weight_sum;
  out.h_norm = der.h.norm();
  KahanSum g1, g2;
  for (int i = 0; i < mu.n(); ++i) {
    g1.add(der.dmu.col(i).squaredNorm());
    g2.add(der.dxdmu[static_cast<std::size_t>(i)].squaredNorm());
  }
  out.dmu_l2 = g1.value() / mu.n();
  out.dxdmu_l2 = g2.value() / mu.n();

  const double c = kPhiBoundConstant;
  const double delta2 = anchors.delta * anchors.delta;
  const double m0 = second_moment(anchors.ensembles.front());
  const double lam = (1.0 + anchors.lambda) / delta2;
  out.dt_bound = 4.0 * anchors.horizon;
  out.dmu_bound = c * (lam + second_moment(mu) + m0);
  out.dxdmu_bound = c * delta2 * (lam + m0);
  out.h_bound = c;
  return out;
}

}  // namespace mfhjb
