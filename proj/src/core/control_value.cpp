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

#include "core/control_value.hpp"

#include "core/error.hpp"
#include "core/rng.hpp"

namespace mfhjb {

CostEstimate cost_j(const CoefficientSet& coeffs, const ParticleEnsemble& init,
                    const StepControl& policy, const SimConfig& cfg, int paths) {
  require(paths >= 1, ErrorCode::kInvalidArgument, "cost_j: need at least one path");
  require(cfg.path + static_cast<std::uint32_t>(paths) <= (1u << 24), ErrorCode::kInvalidArgument,
          "cost_j: path indices exceed the stream range");
  policy.validate(coeffs.actions);
  CostEstimate out;
  out.per_path.resize(static_cast<std::size_t>(paths));
  parallel_for(out.per_path.size(), [&](std::size_t q) {
    SimConfig c = cfg;
    c.path = cfg.path + static_cast<std::uint32_t>(q);
    c.record_trajectories = false;
    c.record_controls = false;
    out.per_path[q] = simulate(coeffs, init, policy, c).cost();
  });
  const MeanStderr ms = mean_and_stderr(out.per_path);
  out.mean = ms.mean;
  out.stderr_ = ms.stderr_;
  return out;
}

std::vector<Vec> PolicySearch::resolved_actions(const ActionSet& set) const {
  const std::vector<Vec> list = actions.empty() ? set.vertices() : actions;
  require(!list.empty(), ErrorCode::kInvalidArgument, "policy search: empty action list");
  for (const auto& a : list) {
    require(set.contains(a), ErrorCode::kInvalidArgument, "policy search: action outside A");
  }
  return list;
}

namespace {

std::vector<double> uniform_breaks(double t0, double t1, int pieces) {
  std::vector<double> b(static_cast<std::size_t>(pieces) + 1);
  for (int k = 0; k <= pieces; ++k) b[static_cast<std::size_t>(k)] = t0 + (t1 - t0) * k / pieces;
  b.back() = t1;
  return b;
}

struct Best {
  double mean = -std::numeric_limits<double>::infinity();
  double stderr_ = 0.0;
  StepControl policy;
};

void consider(const CoefficientSet& coeffs, const ParticleEnsemble& init, const SimConfig& cfg,
              int paths, const StepControl& policy, Best* best, ValueEstimate* out) {
  const CostEstimate c = cost_j(coeffs, init, policy, cfg, paths);
  out->trace.push_back(PolicyTrace{policy.describe(), c.mean, c.stderr_});
  if (c.mean > best->mean) {
    best->mean = c.mean;
    best->stderr_ = c.stderr_;
    best->policy = policy;
  }
}

}  // namespace

ValueEstimate value_estimate(const CoefficientSet& coeffs, const ParticleEnsemble& init,
                             const SimConfig& cfg, int paths, const PolicySearch& search) {
  cfg.validate();
  require(search.pieces >= 1, ErrorCode::kInvalidArgument, "policy search: pieces must be >= 1");
  const std::vector<Vec> list = search.resolved_actions(coeffs.actions);
  const auto breaks = uniform_breaks(cfg.t0, cfg.t1, search.pieces);
  ValueEstimate out;
  Best best;

  double combos = 1.0;
  for (int k = 0; k < search.pieces; ++k) combos *= static_cast<double>(list.size());
  if (search.kind == PolicySearch::Kind::kExhaustive) {
    require(combos <= static_cast<double>(search.max_policies), ErrorCode::kConfig,
            "policy search: exhaustive class exceeds max_policies");
    const auto total = static_cast<std::size_t>(combos);
    for (std::size_t code = 0; code < total; ++code) {
      std::vector<Vec> acts;
      std::size_t rest = code;
      for (int k = 0; k < search.pieces; ++k) {
        acts.push_back(list[rest % list.size()]);
        rest /= list.size();
      }
      consider(coeffs, init, cfg, paths, StepControl::piecewise(breaks, acts), &best, &out);
    }
  } else {
    require(!search.grid_cells.empty() &&
                static_cast<Eigen::Index>(search.grid_cells.size()) == search.grid_origin.size() &&
                search.grid_origin.size() == coeffs.d,
            ErrorCode::kConfig, "policy search: feedback grid does not match d");
    std::size_t cells = 1;
    for (int c : search.grid_cells) cells *= static_cast<std::size_t>(c);
    // Start from the best constant action.
    std::size_t start = 0;
    for (std::size_t j = 0; j < list.size(); ++j) {
      const double before = best.mean;
      consider(coeffs, init, cfg, paths, StepControl::constant(cfg.t0, cfg.t1, list[j]), &best,
               &out);
      if (best.mean > before) start = j;
    }
    StepControl::Feedback base;
    base.origin = search.grid_origin;
    base.cell = search.grid_cell;
    base.cells = search.grid_cells;
    base.actions.assign(cells, list[start]);
    std::vector<StepControl::Feedback> tables(static_cast<std::size_t>(search.pieces), base);
    std::vector<std::size_t> choice(cells * tables.size(), start);
    auto current = StepControl::feedback(breaks, tables);
    consider(coeffs, init, cfg, paths, current, &best, &out);
    for (int sweep = 0; sweep < search.sweeps; ++sweep) {
      for (std::size_t k = 0; k < tables.size(); ++k) {
        for (std::size_t c = 0; c < cells; ++c) {
          require(out.trace.size() < search.max_policies, ErrorCode::kConfig,
                  "policy search: coordinate ascent exceeded max_policies");
          for (std::size_t j = 0; j < list.size(); ++j) {
            if (j == choice[k * cells + c]) continue;
            auto trial = tables;
            trial[k].actions[c] = list[j];
            const double before = best.mean;
            consider(coeffs, init, cfg, paths, StepControl::feedback(breaks, trial), &best, &out);
            if (best.mean > before) {
              tables = trial;
              choice[k * cells + c] = j;
            }
          }
        }
      }
    }
  }
  out.value = best.mean;
  out.stderr_ = best.stderr_;
  out.best_policy = best.policy;
  return out;
}

MeanStderr value_fd_approx(std::shared_ptr<const CoefficientSet> coeffs,
                           const DistributionSpec& mu, const FdApproxConfig& fd,
                           const SimConfig& cfg, int paths, const PolicySearch& search) {
  require(coeffs != nullptr, ErrorCode::kInvalidArgument, "value_fd_approx: null coefficients");
  require(fd.n >= 1 && fd.resamples >= 1, ErrorCode::kInvalidArgument,
          "value_fd_approx: n and resamples must be positive");
  const auto smooth = mollified_coefficients(coeffs, fd.mollifier);
  SimConfig c = cfg;
  c.t0 = fd.t;
  c.epsilon = fd.epsilon;
  std::vector<double> values;
  double inner_se = 0.0;
  const std::uint64_t draw_seed = fd.sample_seed.value_or(cfg.seed);
  for (int r = 0; r < fd.resamples; ++r) {
    const ParticleEnsemble init =
        sample_iid(mu, fd.n, coeffs->d, derive_seed(draw_seed, static_cast<std::uint64_t>(r)));
    const ValueEstimate v = value_estimate(*smooth, init, c, paths, search);
    values.push_back(v.value);
    inner_se = v.stderr_;
  }
  MeanStderr out = mean_and_stderr(values);
  if (fd.resamples == 1) out.stderr_ = inner_se;
  return out;
}

DppReport dpp_residual(const CoefficientSet& coeffs, const ParticleEnsemble& init, double s_mid,
                       const SimConfig& cfg, int paths, int inner_paths,
                       const PolicySearch& search) {
  cfg.validate();
  require(cfg.t0 < s_mid && s_mid < cfg.t1, ErrorCode::kInvalidArgument,
          "dpp_residual: need t < s_mid < t1");
  require(paths >= 2 && inner_paths >= 1, ErrorCode::kInvalidArgument,
          "dpp_residual: need at least two outer paths");
  const int first_steps = std::clamp(
      static_cast<int>(std::lround(cfg.steps * (s_mid - cfg.t0) / (cfg.t1 - cfg.t0))), 1,
      std::max(1, cfg.steps - 1));
  const int second_steps = std::max(1, cfg.steps - first_steps);

  DppReport out;
  SimConfig whole = cfg;
  whole.seed = derive_seed(cfg.seed, 1);
  whole.idio_seed.reset();
  const ValueEstimate lhs = value_estimate(coeffs, init, whole, paths, search);
  out.lhs = lhs.value;

  SimConfig leg = cfg;
  leg.t1 = s_mid;
  leg.steps = first_steps;
  leg.seed = derive_seed(cfg.seed, 2);
  leg.idio_seed.reset();
  const std::uint64_t inner_root = derive_seed(cfg.seed, 3);

  double best = -std::numeric_limits<double>::infinity();
  double best_se = 0.0;
  for (const Vec& a : search.resolved_actions(coeffs.actions)) {
    const StepControl first = StepControl::constant(cfg.t0, s_mid, a);
    std::vector<double> per_path(static_cast<std::size_t>(paths));
    parallel_for(per_path.size(), [&](std::size_t q) {
      SimConfig c = leg;
      c.path = static_cast<std::uint32_t>(q);
      const PathBundle b = simulate(coeffs, init, first, c);
      SimConfig rest = cfg;
      rest.t0 = s_mid;
      rest.steps = second_steps;
      rest.seed = derive_seed(inner_root, q);
      rest.idio_seed.reset();
      rest.path = 0;
      const ValueEstimate cont =
          value_estimate(coeffs, ParticleEnsemble(b.final_state), rest, inner_paths, search);
      per_path[q] = b.running_cost + cont.value;
    });
    const MeanStderr ms = mean_and_stderr(per_path);
    if (ms.mean > best) {
      best = ms.mean;
      best_se = ms.stderr_;
      out.first_leg = a;
    }
  }
  out.rhs = best;
  out.gap = out.lhs - out.rhs;
  out.stderr_ = std::sqrt(lhs.stderr_ * lhs.stderr_ + best_se * best_se);
  return out;
}

double hjb_residual_values(const CoefficientSet& coeffs, double t, const ParticleEnsemble& mu,
                           double dt, const Mat& dmu, const std::vector<Mat>& dxdmu,
                           const Mat& h, const std::vector<Vec>& action_grid) {
  require(!action_grid.empty(), ErrorCode::kInvalidArgument, "hjb_residual: empty action grid");
  require(dmu.rows() == mu.d() && dmu.cols() == mu.n() &&
              static_cast<int>(dxdmu.size()) == mu.n(),
          ErrorCode::kDimensionMismatch, "hjb_residual: derivative shapes do not match mu");
  KahanSum sum;
  for (int i = 0; i < mu.n(); ++i) {
    const Vec x = mu.point(i);
    double top = -std::numeric_limits<double>::infinity();
    for (const Vec& a : action_grid) {
      const Mat s = coeffs.sigma(t, x, a);
      const double val = coeffs.f(t, x, mu, a) + coeffs.b(t, x, mu, a).dot(dmu.col(i)) +
                         0.5 * (dxdmu[static_cast<std::size_t>(i)].cwiseProduct(s * s.transpose())).sum();
      top = std::max(top, val);
    }
    sum.add(top);
  }
  const Mat s0 = coeffs.sigma0(t);
  return dt + sum.value() / mu.n() + 0.5 * (h.cwiseProduct(s0 * s0.transpose())).sum();
}

double hjb_residual(const CoefficientSet& coeffs, const TestFunction& u, double t,
                    const ParticleEnsemble& mu, const std::vector<Vec>& action_grid) {
  require(u.complete(), ErrorCode::kInvalidArgument, "hjb_residual: undefined evaluator");
  Mat dmu(mu.d(), mu.n());
  std::vector<Mat> dxdmu;
  for (int i = 0; i < mu.n(); ++i) {
    dmu.col(i) = u.dmu(t, mu, mu.point(i));
    dxdmu.push_back(u.dxdmu(t, mu, mu.point(i)));
  }
  return hjb_residual_values(coeffs, t, mu, u.dt(t, mu), dmu, dxdmu, u.h(t, mu), action_grid);
}

ViscosityReport viscosity_check(const CoefficientSet& coeffs, const TestFunction& candidate,
                                const std::vector<ViscosityProbe>& probes,
                                const std::vector<Vec>& action_grid,
                                const ViscosityConfig& vc) {
  require(candidate.complete(), ErrorCode::kInvalidArgument,
          "viscosity_check: candidate lacks evaluators");
  require(vc.delta > 0.0, ErrorCode::kInvalidArgument, "viscosity_check: delta must be positive");
  const SphereQuadrature quad = SphereQuadrature::make(coeffs.d, vc.directions);
  const double d2 = vc.delta * vc.delta;
  ViscosityReport rep;
  for (const auto& pr : probes) {
    const ParticleEnsemble& mu = pr.mu;
    Mat dmu(mu.d(), mu.n());
    std::vector<Mat> dxdmu;
    for (int i = 0; i < mu.n(); ++i) {
      dmu.col(i) = candidate.dmu(pr.t, mu, mu.point(i));
      dxdmu.push_back(candidate.dxdmu(pr.t, mu, mu.point(i)));
    }
    const double dt = candidate.dt(pr.t, mu);
    const Mat h = candidate.h(pr.t, mu);
    rep.residual.push_back(hjb_residual_values(coeffs, pr.t, mu, dt, dmu, dxdmu, h, action_grid));

    GaugeAnchors anchors;
    anchors.delta = vc.delta;
    anchors.horizon = coeffs.horizon;
    anchors.repeat_last = true;
    anchors.add(pr.t, mu);
    const PhiDerivatives phi = phi_delta_derivatives(anchors, pr.t, mu, quad, vc.slice);
    for (int sign : {1, -1}) {
      if (sign < 0 && !vc.check_super) break;
      const double sd = sign * d2;
      std::vector<Mat> mixed = dxdmu;
      for (std::size_t i = 0; i < mixed.size(); ++i) mixed[i] += sd * phi.dxdmu[i];
      const double r = hjb_residual_values(coeffs, pr.t, mu, dt + sd * phi.dt, dmu + sd * phi.dmu,
                                           mixed, h + sd * phi.h, action_grid);
      if (sign > 0) {
        rep.sub_residual.push_back(r);
        if (r >= -vc.tolerance) ++rep.sub_pass;
      } else {
        rep.super_residual.push_back(r);
        if (r <= vc.tolerance) ++rep.super_pass;
      }
    }
  }
  return rep;
}

TestFunction add_time_bump(const TestFunction& u, double kappa, double horizon) {
  require(horizon > 0.0, ErrorCode::kInvalidArgument, "time bump: horizon must be positive");
  TestFunction out = u;
  const auto value = u.value;
  const auto dt = u.dt;
  out.value = [value, kappa, horizon](double t, const ParticleEnsemble& mu) {
    return value(t, mu) + 0.5 * kappa * (1.0 + std::cos(kPi * t / horizon));
  };
  out.dt = [dt, kappa, horizon](double t, const ParticleEnsemble& mu) {
    return dt(t, mu) - 0.5 * kappa * kPi / horizon * std::sin(kPi * t / horizon);
  };
  out.growth = u.growth + std::abs(kappa);
  return out;
}

}  // namespace mfhjb
