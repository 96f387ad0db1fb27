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


#include <gtest/gtest.h>

#include <cmath>

#include "core/control_value.hpp"
#include "core/error.hpp"
#include "core/scenarios.hpp"

namespace mfhjb {
namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

ParticleEnsemble cloud(int n, int d, std::uint64_t seed, double scale = 1.0) {
  return sample_iid(DistributionSpec::gaussian(Vec::Zero(d), Vec::Constant(d, scale)), n, d,
                    seed);
}

TEST(ActionSet, BoxVerticesAndGrid) {
  const ActionSet box = ActionSet::box(Vec::Constant(3, -1.0), Vec::Constant(3, 2.0));
  EXPECT_EQ(box.vertices().size(), 8u);
  for (const Vec& v : box.vertices()) {
    EXPECT_TRUE(box.contains(v));
    for (int k = 0; k < 3; ++k) EXPECT_TRUE(v(k) == -1.0 || v(k) == 2.0);
  }
  EXPECT_EQ(box.grid(3).size(), 27u);
  EXPECT_FALSE(box.contains(Vec::Constant(3, 2.1)));
  EXPECT_NEAR(box.max_norm(), std::sqrt(12.0), 1e-14);
}

TEST(ActionSet, FiniteListIsItsOwnGrid) {
  const std::vector<Vec> list = {Vec::Constant(2, 0.25), Vec::Constant(2, -0.5)};
  const ActionSet set = ActionSet::finite(list);
  EXPECT_FALSE(set.is_box());
  EXPECT_EQ(set.vertices().size(), 2u);
  EXPECT_EQ(set.grid(5).size(), 2u);
  EXPECT_TRUE(set.contains(list[1]));
  EXPECT_FALSE(set.contains(Vec::Zero(2)));
}

TEST(StepControl, PiecewiseLookup) {
  const StepControl c = StepControl::piecewise({0.0, 0.5, 1.0}, {Vec::Constant(1, -1.0),
                                                                 Vec::Constant(1, 1.0)});
  EXPECT_EQ(c.pieces(), 2);
  EXPECT_EQ(c.piece_at(0.0), 0);
  EXPECT_EQ(c.piece_at(0.49), 0);
  EXPECT_EQ(c.piece_at(0.5), 1);
  EXPECT_EQ(c.piece_at(1.0), 1);
  EXPECT_EQ(c.action(0.7, Vec::Zero(1))(0), 1.0);
}

TEST(StepControl, FeedbackUsesNearestCell) {
  StepControl::Feedback fb;
  fb.origin = Vec::Constant(1, 0.0);
  fb.cell = 1.0;
  fb.cells = {2};
  fb.actions = {Vec::Constant(1, -1.0), Vec::Constant(1, 1.0)};
  const StepControl c = StepControl::feedback({0.0, 1.0}, {fb});
  EXPECT_EQ(c.action(0.2, Vec::Constant(1, 0.5))(0), -1.0);
  EXPECT_EQ(c.action(0.2, Vec::Constant(1, 1.5))(0), 1.0);
  EXPECT_EQ(c.action(0.2, Vec::Constant(1, -7.0))(0), -1.0);
  EXPECT_EQ(c.action(0.2, Vec::Constant(1, 9.0))(0), 1.0);
}

TEST(StepControl, ValidateRejectsOutOfSetActions) {
  const ActionSet box = ActionSet::box(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0));
  EXPECT_NO_THROW(StepControl::constant(0, 1, Vec::Constant(1, 0.5)).validate(box));
  EXPECT_THROW(StepControl::constant(0, 1, Vec::Constant(1, 1.5)).validate(box), Error);
}

TEST(Scenarios, AllNamedScenariosPassTheirProbes) {
  ScenarioParams p;
  for (const char* name : {"zero", "lq_drift", "mean_reversion_mf", "bounded_trig"}) {
    const auto c = scenario(name, p);
    EXPECT_EQ(c->name, name);
    EXPECT_EQ(c->d, 2);
    const ProbeReport r = probe_coefficients(*c, 50, 3.0, 5);
    EXPECT_TRUE(r.ok) << name;
  }
  EXPECT_TRUE(probe_coefficients(*clamp_coefficients(p), 50, 3.0, 5).ok);
}

TEST(Scenarios, UnknownNameAndBadParams) {
  ScenarioParams p;
  EXPECT_EQ(code_of([&] { scenario("nope", p); }), ErrorCode::kUnknownName);
  EXPECT_EQ(code_of([] { ScenarioParams::from_json("{not json"); }), ErrorCode::kConfig);
  const ScenarioParams q = ScenarioParams::from_json(R"({"d": 3, "sigma": 0.1})");
  EXPECT_EQ(q.d, 3);
  EXPECT_EQ(q.sigma, 0.1);
  EXPECT_EQ(q.payoff().size(), 3);
}

TEST(Scenarios, SmoothClipRadius) {
  const double R = 4.0;
  EXPECT_EQ(smooth_clip_radius(1.5, R), 1.5);
  double prev = 0.0;
  for (double r = 0.0; r < 50.0; r += 0.25) {
    const double v = smooth_clip_radius(r, R);
    EXPECT_GE(v, prev);
    EXPECT_LE(v, R);
    prev = v;
  }
  const double h = 1e-6;
  EXPECT_NEAR((smooth_clip_radius(2.0 + h, R) - smooth_clip_radius(2.0 - h, R)) / (2 * h), 1.0,
              1e-6);
}

TEST(Scenarios, LqHamiltonianMaxIsL1NormOnSymmetricBox) {
  ScenarioParams p;
  p.p = (Vec(2) << 0.5, -0.3).finished();
  EXPECT_NEAR(lq_hamiltonian_max(p), 0.8, 1e-15);
  p.action_list = {Vec::Constant(2, 0.25)};
  EXPECT_NEAR(lq_hamiltonian_max(p), 0.25 * 0.2, 1e-15);
}

TEST(TestFunctions, HMatchesSecondDerivativeIdentity) {
  const ParticleEnsemble mu = cloud(15, 2, 4);
  for (const TestFunction& u : {squared_mean_function(2), second_moment_function(2),
                                linear_mean_function(Vec::Ones(2))}) {
    const Mat direct = u.h(0.0, mu);
    const Mat via = h_from_second_derivatives(u, 0.0, mu);
    EXPECT_LE((direct - via).norm(), 1e-12);
  }
  EXPECT_LE((squared_mean_function(2).h(0.0, mu) - 2.0 * Mat::Identity(2, 2)).norm(), 1e-12);
}

TEST(TestFunctions, DmuMatchesParticleFiniteDifference) {
  const ParticleEnsemble mu = cloud(6, 2, 9);
  const TestFunction u = squared_mean_function(2);
  const double h = 1e-6;
  for (int i = 0; i < mu.n(); ++i) {
    const Vec g = u.dmu(0.0, mu, mu.point(i));
    for (int k = 0; k < 2; ++k) {
      Mat plus = mu.points(), minus = mu.points();
      plus(k, i) += h;
      minus(k, i) -= h;
      const double fd = (u.value(0.0, ParticleEnsemble(plus)) -
                         u.value(0.0, ParticleEnsemble(minus))) / (2 * h);
      EXPECT_NEAR(mu.n() * fd, g(k), 1e-7);
    }
  }
}

TEST(Hjb, LqClosedFormHasZeroResidual) {
  ScenarioParams p;
  const auto c = scenario("lq_drift", p);
  const TestFunction u = lq_closed_form(p, 1.0);
  const std::vector<Vec> grid = c->actions.vertices();
  for (int s = 0; s < 5; ++s) {
    const double r = hjb_residual(*c, u, 0.2 * s, cloud(10, 2, 20 + s), grid);
    EXPECT_LE(std::abs(r), 1e-12);
  }
}

TEST(Hjb, TimeBumpBreaksTheEquation) {
  ScenarioParams p;
  const auto c = scenario("lq_drift", p);
  const TestFunction u = add_time_bump(lq_closed_form(p, 1.0), 0.1, 1.0);
  const std::vector<Vec> grid = c->actions.vertices();
  for (double t : {0.1, 0.5, 0.9}) {
    EXPECT_LT(hjb_residual(*c, u, t, cloud(10, 2, 3), grid), -1e-3);
  }
  EXPECT_GT(u.value(0.0, cloud(10, 2, 3)), lq_closed_form(p, 1.0).value(0.0, cloud(10, 2, 3)));
}

TEST(Value, ZeroScenarioCostsNothing) {
  ScenarioParams p;
  const auto z = scenario("zero", p);
  SimConfig cfg;
  cfg.steps = 5;
  const CostEstimate e =
      cost_j(*z, cloud(8, 2, 1), StepControl::constant(0, 1, Vec::Zero(2)), cfg, 4);
  EXPECT_EQ(e.mean, 0.0);
  EXPECT_EQ(e.stderr_, 0.0);
  EXPECT_EQ(e.per_path.size(), 4u);
}

TEST(Value, SingleActionValueEqualsItsCost) {
  ScenarioParams p;
  p.action_list = {Vec::Constant(2, 0.25)};
  const auto c = scenario("mean_reversion_mf", p);
  SimConfig cfg;
  cfg.steps = 10;
  cfg.seed = 17;
  const ParticleEnsemble init = cloud(16, 2, 2);
  PolicySearch search;
  search.pieces = 2;
  const ValueEstimate v = value_estimate(*c, init, cfg, 6, search);
  const CostEstimate j =
      cost_j(*c, init, StepControl::constant(0, 1, Vec::Constant(2, 0.25)), cfg, 6);
  EXPECT_NEAR(v.value, j.mean, 1e-12);
  EXPECT_EQ(v.trace.size(), 1u);
}

TEST(Value, LqValueIsLinearPayoffPlusBestDrift) {
  ScenarioParams p;
  const auto c = scenario("lq_drift", p);
  SimConfig cfg;
  cfg.steps = 10;
  cfg.seed = 5;
  const ParticleEnsemble init = cloud(32, 2, 6, 0.5);
  PolicySearch search;
  const ValueEstimate v = value_estimate(*c, init, cfg, 40, search);
  const double closed = lq_closed_form(p, 1.0).value(0.0, init);
  EXPECT_LE(std::abs(v.value - closed), 4.0 * v.stderr_ + 0.05);
  EXPECT_EQ(v.trace.size(), 4u);
}

TEST(Value, DppSingleActionGapIsSmall) {
  ScenarioParams p;
  p.action_list = {Vec::Constant(2, 0.25)};
  const auto c = scenario("mean_reversion_mf", p);
  SimConfig cfg;
  cfg.steps = 8;
  cfg.seed = 8;
  PolicySearch search;
  const DppReport r = dpp_residual(*c, cloud(12, 2, 1), 0.5, cfg, 6, 4, search);
  EXPECT_LE(std::abs(r.gap), 3.0 * r.stderr_ + 0.02);
}

}  // namespace
}  // namespace mfhjb
