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

#include "core/dynamics.hpp"

#include <numeric>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace mfhjb {

void SimConfig::validate() const {
  require(steps >= 1, ErrorCode::kInvalidArgument, "simulation needs at least one step");
  require(std::isfinite(t0) && std::isfinite(t1) && t0 < t1, ErrorCode::kInvalidArgument,
          "simulation interval must satisfy t0 < t1");
  require(std::isfinite(epsilon) && epsilon >= 0.0, ErrorCode::kInvalidArgument,
          "epsilon must be finite and non-negative");
}

namespace {

std::vector<int> lexicographic_order(const Mat& pts) {
  std::vector<int> order(static_cast<std::size_t>(pts.cols()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    for (Eigen::Index l = 0; l < pts.rows(); ++l) {
      if (pts(l, a) != pts(l, b)) return pts(l, a) < pts(l, b);
    }
    return false;
  });
  return order;
}

Mat unpermute(const Mat& sorted, const std::vector<int>& order) {
  Mat out(sorted.rows(), sorted.cols());
  for (std::size_t r = 0; r < order.size(); ++r) {
    out.col(order[r]) = sorted.col(static_cast<Eigen::Index>(r));
  }
  return out;
}

void fill_normals(std::uint64_t seed, Channel ch, std::uint32_t path, int step, double scale,
                  Mat* out) {
  for (Eigen::Index i = 0; i < out->cols(); ++i) {
    Stream s(StreamKey{seed, ch, path, static_cast<std::uint32_t>(i),
                       static_cast<std::uint32_t>(step)});
    for (Eigen::Index l = 0; l < out->rows(); ++l) (*out)(l, i) = scale * s.normal();
  }
}

}  // namespace

PathBundle simulate(const CoefficientSet& coeffs, const ParticleEnsemble& init,
                    const StepControl& policy, const SimConfig& cfg,
                    const StepObserver& observer) {
  cfg.validate();
  const int d = coeffs.d;
  const int n = init.n();
  const int da = coeffs.actions.dim();
  require(init.d() == d, ErrorCode::kDimensionMismatch,
          "simulate: ensemble dimension differs from the coefficients");
  require(policy.breakpoints().front() <= cfg.t0 + 1e-12 &&
              policy.breakpoints().back() >= cfg.t1 - 1e-12,
          ErrorCode::kInvalidArgument, "simulate: policy does not cover [t0, t1]");
  require(cfg.path < (1u << 24), ErrorCode::kInvalidArgument, "simulate: path index too large");

  const std::uint64_t idio = cfg.idio_seed.value_or(cfg.seed);
  const double dt = cfg.dt();
  const double sq = std::sqrt(dt);

  std::vector<int> order;
  Mat x;
  if (cfg.keying == NoiseKeying::kSortedRank) {
    order = lexicographic_order(init.points());
    x.resize(d, n);
    for (int r = 0; r < n; ++r) x.col(r) = init.point(order[static_cast<std::size_t>(r)]);
  } else {
    x = init.points();
  }

  PathBundle out;
  out.times.resize(static_cast<std::size_t>(cfg.steps) + 1);
  out.common_path = Mat::Zero(d, cfg.steps + 1);
  if (cfg.record_trajectories) out.trajectories.reserve(static_cast<std::size_t>(cfg.steps) + 1);

  Mat a, drift, next, dw(d, n), db(d, n);
  KahanSum running;
  for (int k = 0; k <= cfg.steps; ++k) {
    const double t = cfg.time(k);
    out.times[static_cast<std::size_t>(k)] = t;
    if (!x.allFinite()) {
      fail(ErrorCode::kNumerical, "simulate: non-finite state at step " + std::to_string(k));
    }
    const ParticleEnsemble mu(x);
    if (cfg.record_trajectories) out.trajectories.push_back(order.empty() ? x : unpermute(x, order));
    if (k == cfg.steps) {
      if (observer) observer(k, t, mu, Mat());
      out.terminal_cost = coeffs.mean_terminal_cost(x, mu);
      break;
    }
    policy.actions_all(t, x, da, &a);
    if (cfg.record_controls) out.controls_used.push_back(order.empty() ? a : unpermute(a, order));
    if (observer) observer(k, t, mu, a);
    if (!coeffs.running_cost_zero) running.add(coeffs.mean_running_cost(t, x, mu, a) * dt);

    coeffs.drift_all(t, x, mu, a, &drift);
    next = x + dt * drift;
    fill_normals(idio, Channel::kIdiosyncratic, cfg.path, k, sq, &dw);
    coeffs.add_diffusion(t, x, a, dw, &next);

    Stream common(StreamKey{cfg.seed, Channel::kCommon, cfg.path, 0, static_cast<std::uint32_t>(k)});
    Vec dw0(d);
    for (int l = 0; l < d; ++l) dw0[l] = sq * common.normal();
    out.common_path.col(k + 1) = out.common_path.col(k) + dw0;
    next.colwise() += coeffs.sigma0(t) * dw0;

    if (cfg.epsilon > 0.0) {
      fill_normals(idio, Channel::kPerturbation, cfg.path, k, sq * cfg.epsilon, &db);
      next += db;
    }
    x.swap(next);
  }
  out.running_cost = running.value();
  out.final_state = order.empty() ? x : unpermute(x, order);
  return out;
}

ParticleEnsemble conditional_law(const PathBundle& bundle, int k) {
  require(!bundle.trajectories.empty(), ErrorCode::kInvalidArgument,
          "conditional_law: trajectories were not recorded");
  require(k >= 0 && k < static_cast<int>(bundle.trajectories.size()),
          ErrorCode::kInvalidArgument, "conditional_law: step out of range");
  return ParticleEnsemble(bundle.trajectories[static_cast<std::size_t>(k)]);
}

void write_trajectory_csv(const PathBundle& bundle, std::ostream& os) {
  require(!bundle.trajectories.empty(), ErrorCode::kInvalidArgument,
          "trajectory CSV: trajectories were not recorded");
  const auto d = bundle.trajectories.front().rows();
  os << "step,particle";
  for (Eigen::Index l = 0; l < d; ++l) os << ",x" << (l + 1);
  os << "\n";
  os.precision(17);
  for (std::size_t k = 0; k < bundle.trajectories.size(); ++k) {
    const Mat& x = bundle.trajectories[k];
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      os << k << "," << i;
      for (Eigen::Index l = 0; l < d; ++l) os << "," << x(l, i);
      os << "\n";
    }
  }
}

MomentReport moment_checks(const std::vector<PathBundle>& base,
                           const std::vector<PathBundle>& shifted, double p, double h) {
  require(!base.empty() && base.size() == shifted.size(), ErrorCode::kInvalidArgument,
          "moment_checks: need paired, non-empty bundle lists");
  require(p >= 1.0 && h > 0.0, ErrorCode::kInvalidArgument, "moment_checks: need p >= 1, h > 0");
  KahanSum growth, base_moment, lip, lip_base, inc;
  double count = 0.0;
  for (std::size_t q = 0; q < base.size(); ++q) {
    const auto& A = base[q].trajectories;
    const auto& B = shifted[q].trajectories;
    require(!A.empty() && A.size() == B.size(), ErrorCode::kInvalidArgument,
            "moment_checks: bundles lack matching trajectories");
    const double t0 = base[q].times.front();
    const auto n = A.front().cols();
    for (Eigen::Index i = 0; i < n; ++i) {
      double sup_x = 0.0, sup_diff = 0.0, sup_inc = 0.0;
      for (std::size_t k = 0; k < A.size(); ++k) {
        sup_x = std::max(sup_x, A[k].col(i).norm());
        sup_diff = std::max(sup_diff, (A[k].col(i) - B[k].col(i)).norm());
        if (base[q].times[k] <= t0 + h * (1.0 + 1e-12)) {
          sup_inc = std::max(sup_inc, (A[k].col(i) - A.front().col(i)).squaredNorm());
        }
      }
      growth.add(std::pow(sup_x, p));
      base_moment.add(std::pow(A.front().col(i).norm(), p));
      lip.add(std::pow(sup_diff, p));
      lip_base.add(std::pow((A.front().col(i) - B.front().col(i)).norm(), p));
      inc.add(sup_inc);
      count += 1.0;
    }
  }
  MomentReport r;
  r.growth_lhs = growth.value() / count;
  r.growth_base = 1.0 + base_moment.value() / count;
  r.growth_constant = r.growth_lhs / r.growth_base;
  r.lipschitz_lhs = lip.value() / count;
  r.lipschitz_base = lip_base.value() / count;
  r.lipschitz_constant = r.lipschitz_base > 0.0 ? r.lipschitz_lhs / r.lipschitz_base : 0.0;
  r.increment_lhs = inc.value() / count;
  r.increment_h = h;
  r.increment_constant = r.increment_lhs / h;
  r.finite = std::isfinite(r.growth_constant) && std::isfinite(r.lipschitz_constant) &&
             std::isfinite(r.increment_constant);
  return r;
}

MomentReport moment_sweep(const CoefficientSet& coeffs, const ParticleEnsemble& init,
                          const Vec& shift, const StepControl& policy, const SimConfig& cfg,
                          int paths, double p, double h) {
  require(paths >= 1, ErrorCode::kInvalidArgument, "moment_sweep: need at least one path");
  std::vector<PathBundle> a(static_cast<std::size_t>(paths)), b(a.size());
  const ParticleEnsemble moved = translate(init, shift);
  parallel_for(a.size(), [&](std::size_t q) {
    SimConfig c = cfg;
    c.path = static_cast<std::uint32_t>(q);
    c.record_trajectories = true;
    c.keying = NoiseKeying::kParticleIndex;
    a[q] = simulate(coeffs, init, policy, c);
    b[q] = simulate(coeffs, moved, policy, c);
  });
  return moment_checks(a, b, p, h);
}

ItoReport ito_expectation_check(const CoefficientSet& coeffs, const ParticleEnsemble& init,
                                const TestFunction& u, const StepControl& policy,
                                const SimConfig& cfg, int paths) {
  require(u.complete(), ErrorCode::kInvalidArgument,
          "ito check: test function lacks a derivative evaluator");
  require(paths >= 2, ErrorCode::kInvalidArgument, "ito check: need at least two paths");
  const double u0 = u.value(cfg.t0, init);
  std::vector<double> lhs(static_cast<std::size_t>(paths)), rhs(lhs.size()), gap(lhs.size());
  parallel_for(lhs.size(), [&](std::size_t q) {
    SimConfig c = cfg;
    c.path = static_cast<std::uint32_t>(q);
    c.record_trajectories = false;
    KahanSum integral;
    double final_value = 0.0;
    Mat drift;
    const double eps2 = cfg.epsilon * cfg.epsilon;
    auto observer = [&](int k, double t, const ParticleEnsemble& mu, const Mat& a) {
      if (k == c.steps) {
        final_value = u.value(t, mu);
        return;
      }
      coeffs.drift_all(t, mu.points(), mu, a, &drift);
      KahanSum first, second;
      for (int i = 0; i < mu.n(); ++i) {
        const Vec xi = mu.point(i);
        first.add(u.dmu(t, mu, xi).dot(drift.col(i)));
        const Mat s = coeffs.sigma(t, xi, a.col(i));
        Mat cov = s * s.transpose();
        if (eps2 > 0.0) cov.diagonal().array() += eps2;
        second.add(0.5 * (u.dxdmu(t, mu, xi).cwiseProduct(cov)).sum());
      }
      const Mat s0 = coeffs.sigma0(t);
      const double common = 0.5 * (u.h(t, mu).cwiseProduct(s0 * s0.transpose())).sum();
      const double gen = u.dt(t, mu) + (first.value() + second.value()) / mu.n() + common;
      integral.add(gen * c.dt());
    };
    simulate(coeffs, init, policy, c, observer);
    lhs[q] = final_value - u0;
    rhs[q] = integral.value();
    gap[q] = lhs[q] - rhs[q];
  });
  ItoReport r;
  r.paths = paths;
  r.lhs = mean_and_stderr(lhs).mean;
  r.rhs = mean_and_stderr(rhs).mean;
  const MeanStderr g = mean_and_stderr(gap);
  r.gap = g.mean;
  r.stderr_ = g.stderr_;
  return r;
}

}  // namespace mfhjb
