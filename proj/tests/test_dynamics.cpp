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

#include <algorithm>
#include <sstream>

#include "core/dynamics.hpp"
#include "core/error.hpp"
#include "core/scenarios.hpp"

namespace mfhjb {
namespace {

std::shared_ptr<FunctionCoefficients> affine(int d, const Vec& drift, double s, double s0) {
  auto c = std::make_shared<FunctionCoefficients>();
  c->d = d;
  c->actions = ActionSet::box(Vec::Constant(d, -1.0), Vec::Constant(d, 1.0));
  c->b_fn = [drift](double, const Vec&, const ParticleEnsemble&, const Vec&) { return drift; };
  c->sigma_fn = [d, s](double, const Vec&, const Vec&) { return Mat(s * Mat::Identity(d, d)); };
  c->sigma0_fn = [d, s0](double) { return Mat(s0 * Mat::Identity(d, d)); };
  return c;
}

ParticleEnsemble cloud(int n, int d, std::uint64_t seed) {
  return sample_iid(DistributionSpec::gaussian(Vec::Zero(d), Vec::Ones(d)), n, d, seed);
}

SimConfig config(int steps, std::uint64_t seed) {
  SimConfig c;
  c.steps = steps;
  c.seed = seed;
  return c;
}

TEST(Simulate, ZeroScenarioLeavesStateAndCostAtZero) {
  ScenarioParams p;
  const auto z = scenario("zero", p);
  const ParticleEnsemble init = cloud(20, 2, 1);
  const PathBundle b =
      simulate(*z, init, StepControl::constant(0, 1, Vec::Zero(2)), config(10, 3));
  EXPECT_EQ(b.final_state, init.points());
  EXPECT_EQ(b.cost(), 0.0);
}

TEST(Simulate, ConstantDriftIsExact) {
  const Vec c = (Vec(2) << 0.5, -1.5).finished();
  auto k = affine(2, c, 0.0, 0.0);
  k->f_fn = [](double, const Vec&, const ParticleEnsemble&, const Vec&) { return 1.0; };
  const ParticleEnsemble init = cloud(10, 2, 2);
  SimConfig cfg = config(40, 1);
  cfg.t1 = 2.0;
  const PathBundle b = simulate(*k, init, StepControl::constant(0, 2, Vec::Zero(2)), cfg);
  for (int i = 0; i < init.n(); ++i) {
    EXPECT_LE((b.final_state.col(i) - init.point(i) - 2.0 * c).norm(), 1e-12);
  }
  EXPECT_NEAR(b.running_cost, 2.0, 1e-12);
  EXPECT_EQ(b.times.size(), 41u);
  EXPECT_EQ(b.times.back(), 2.0);
}

TEST(Simulate, CommonNoiseMovesAllParticlesTogether) {
  auto k = affine(2, Vec::Zero(2), 0.0, 0.7);
  const ParticleEnsemble init = cloud(8, 2, 3);
  const PathBundle b = simulate(*k, init, StepControl::constant(0, 1, Vec::Zero(2)), config(25, 4));
  const Vec shift = 0.7 * b.common_path.col(b.common_path.cols() - 1);
  for (int i = 0; i < init.n(); ++i) {
    EXPECT_LE((b.final_state.col(i) - init.point(i) - shift).norm(), 1e-12);
  }
  EXPECT_GT(shift.norm(), 0.0);
}

TEST(Simulate, DeterministicPerSeedAndPath) {
  auto k = affine(2, Vec::Zero(2), 1.0, 0.5);
  const ParticleEnsemble init = cloud(16, 2, 5);
  const auto pol = StepControl::constant(0, 1, Vec::Zero(2));
  SimConfig cfg = config(20, 9);
  const PathBundle a = simulate(*k, init, pol, cfg);
  const PathBundle b = simulate(*k, init, pol, cfg);
  EXPECT_EQ(a.final_state, b.final_state);
  cfg.path = 1;
  EXPECT_NE(simulate(*k, init, pol, cfg).final_state, a.final_state);
  // The idiosyncratic seed can be varied with the common noise held fixed.
  SimConfig other = config(20, 9);
  other.idio_seed = 77;
  const PathBundle c = simulate(*k, init, pol, other);
  EXPECT_EQ(c.common_path, a.common_path);
  EXPECT_NE(c.final_state, a.final_state);
}

TEST(Simulate, SortedRankKeyingIsPermutationInvariant) {
  ScenarioParams p;
  const auto mf = scenario("mean_reversion_mf", p);
  const ParticleEnsemble init = cloud(12, 2, 6);
  std::vector<int> perm(12);
  for (int i = 0; i < 12; ++i) perm[static_cast<std::size_t>(i)] = (5 * i + 3) % 12;
  const ParticleEnsemble shuffled = permute(init, perm);
  SimConfig cfg = config(15, 2);
  cfg.keying = NoiseKeying::kSortedRank;
  const auto pol = StepControl::constant(0, 1, Vec::Constant(2, 0.5));
  const PathBundle a = simulate(*mf, init, pol, cfg);
  const PathBundle b = simulate(*mf, shuffled, pol, cfg);
  EXPECT_EQ(a.cost(), b.cost());
  for (int i = 0; i < 12; ++i) {
    EXPECT_EQ(b.final_state.col(i), a.final_state.col(perm[static_cast<std::size_t>(i)]));
  }
}

TEST(Simulate, IdiosyncraticVarianceGrowsLinearly) {
  auto k = affine(1, Vec::Zero(1), 1.0, 0.0);
  const ParticleEnsemble init(Mat::Zero(1, 20000));
  const PathBundle b = simulate(*k, init, StepControl::constant(0, 1, Vec::Zero(1)), config(10, 8));
  const double var = b.final_state.squaredNorm() / 20000.0;
  EXPECT_NEAR(var, 1.0, 4.0 * std::sqrt(2.0 / 20000.0));
}

TEST(Simulate, PerturbationNoiseHasEpsilonScale) {
  auto k = affine(1, Vec::Zero(1), 0.0, 0.0);
  const ParticleEnsemble init(Mat::Zero(1, 20000));
  SimConfig cfg = config(10, 8);
  cfg.epsilon = 0.3;
  const PathBundle b = simulate(*k, init, StepControl::constant(0, 1, Vec::Zero(1)), cfg);
  EXPECT_NEAR(b.final_state.squaredNorm() / 20000.0, 0.09, 4.0 * 0.09 * std::sqrt(2.0 / 20000.0));
}

TEST(Simulate, ObserverSeesEveryStep) {
  auto k = affine(2, Vec::Zero(2), 0.0, 0.0);
  std::vector<int> steps;
  std::vector<bool> empty;
  simulate(*k, cloud(4, 2, 1), StepControl::constant(0, 1, Vec::Constant(2, 0.25)), config(6, 1),
           [&](int s, double, const ParticleEnsemble&, const Mat& a) {
             steps.push_back(s);
             empty.push_back(a.size() == 0);
           });
  EXPECT_EQ(steps, (std::vector<int>{0, 1, 2, 3, 4, 5, 6}));
  EXPECT_FALSE(empty.front());
  EXPECT_TRUE(empty.back());
}

TEST(Simulate, RecordsTrajectoriesAndCsv) {
  auto k = affine(2, Vec::Ones(2), 0.0, 0.0);
  SimConfig cfg = config(4, 1);
  cfg.record_trajectories = true;
  cfg.record_controls = true;
  const ParticleEnsemble init = cloud(3, 2, 1);
  const PathBundle b = simulate(*k, init, StepControl::constant(0, 1, Vec::Zero(2)), cfg);
  ASSERT_EQ(b.trajectories.size(), 5u);
  EXPECT_EQ(b.controls_used.size(), 4u);
  EXPECT_EQ(conditional_law(b, 0).points(), init.points());
  std::ostringstream os;
  write_trajectory_csv(b, os);
  const std::string text = os.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 5 * 3);
}

TEST(Simulate, BlowUpIsReportedAsNumericalError) {
  auto k = std::make_shared<FunctionCoefficients>();
  k->d = 1;
  k->b_fn = [](double, const Vec& x, const ParticleEnsemble&, const Vec&) {
    return Vec(1e300 * x.array().abs() + 1e300);
  };
  try {
    simulate(*k, cloud(3, 1, 1), StepControl::constant(0, 1, Vec::Zero(1)), config(50, 1));
    FAIL() << "expected a numerical error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNumerical);
  }
}

TEST(Simulate, RejectsBadConfig) {
  auto k = affine(2, Vec::Zero(2), 0.0, 0.0);
  SimConfig cfg = config(0, 1);
  EXPECT_THROW(simulate(*k, cloud(3, 2, 1), StepControl::constant(0, 1, Vec::Zero(2)), cfg), Error);
  EXPECT_THROW(simulate(*k, cloud(3, 1, 1), StepControl::constant(0, 1, Vec::Zero(2)), config(5, 1)),
               Error);
}

TEST(Ito, LinearFunctionalOfConstantDrift) {
  const Vec c = (Vec(2) << 0.3, -0.2).finished();
  auto k = affine(2, c, 0.5, 0.5);
  const ItoReport r = ito_expectation_check(*k, cloud(500, 2, 1),
                                            linear_mean_function(Vec::Ones(2)),
                                            StepControl::constant(0, 1, Vec::Zero(2)),
                                            config(20, 3), 16);
  EXPECT_NEAR(r.rhs, c.sum(), 1e-12);
  EXPECT_LE(std::abs(r.gap), 3.0 * r.stderr_ + 1e-12);
}

TEST(Moments, AffineFlowHasUnitLipschitzConstant) {
  auto k = affine(2, Vec::Zero(2), 1.0, 0.0);
  SimConfig cfg = config(20, 1);
  cfg.t1 = 0.1;
  const MomentReport r = moment_sweep(*k, cloud(200, 2, 1), Vec::Constant(2, 0.5),
                                      StepControl::constant(0, 0.1, Vec::Zero(2)), cfg, 3, 2.0, 0.1);
  EXPECT_TRUE(r.finite);
  EXPECT_NEAR(r.lipschitz_constant, 1.0, 1e-9);
  EXPECT_GT(r.increment_constant, 0.0);
  EXPECT_LE(r.increment_constant, 8.0);
}

}  // namespace
}  // namespace mfhjb
