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

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "core/error.hpp"
#include "core/mollify.hpp"
#include "core/scenarios.hpp"

namespace mfhjb {
namespace {

double bump(double u) { return std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0; }

double bump_moment(double (*h)(double)) {
  boost::math::quadrature::tanh_sinh<double> ts;
  const double mass = ts.integrate([](double u) { return bump(u); }, -1.0, 1.0);
  return ts.integrate([&](double u) { return h(u) * bump(u); }, -1.0, 1.0) / mass;
}

TEST(BumpKernel, NormalizedSymmetricCompact) {
  const BumpKernel k(2048);
  double s = 0.0;
  for (double w : k.weights()) s += w;
  EXPECT_NEAR(s, 1.0, 1e-14);
  boost::math::quadrature::tanh_sinh<double> ts;
  EXPECT_NEAR(k.raw_mass(), ts.integrate([](double u) { return bump(u); }, -1.0, 1.0), 1e-10);
  EXPECT_EQ(k.density(1.0), 0.0);
  EXPECT_EQ(k.density(-1.5), 0.0);
  EXPECT_NEAR(k.density(0.3), k.density(-0.3), 1e-15);
  EXPECT_NEAR(k.inverse_cdf(0.5), 0.0, 1e-12);
  double prev = -1.0;
  for (double p = 0.01; p < 1.0; p += 0.01) {
    const double q = k.inverse_cdf(p);
    EXPECT_GT(q, prev);
    EXPECT_NEAR(q, -k.inverse_cdf(1.0 - p), 1e-9);
    prev = q;
  }
}

TEST(KernelMoments, MatchIndependentQuadrature) {
  const double abs_moment = bump_moment([](double u) { return std::abs(u); });
  MollifierSpec spec;
  spec.m = 8;
  // Interior time, beta = 1: the one-sided shift has mean |u|/m.
  EXPECT_NEAR(time_term(spec, 0.5, 1.0, 1.0), abs_moment / 8.0, 1e-6);
  EXPECT_NEAR(space_first_moment(spec, 1), abs_moment / 8.0, 1e-4);
  // A shift into [0, T] truncates at the boundary.
  EXPECT_LE(time_term(spec, 0.0, 1.0, 1.0), time_term(spec, 0.5, 1.0, 1.0));
  EXPECT_GT(space_first_moment(spec, 2), space_first_moment(spec, 1));
}

std::shared_ptr<FunctionCoefficients> linear_coeffs() {
  auto c = std::make_shared<FunctionCoefficients>();
  c->d = 2;
  c->k_bound = 10.0;
  c->b_fn = [](double, const Vec& x, const ParticleEnsemble& mu, const Vec& a) {
    return Vec(2.0 * x - 0.5 * mu.mean() + a);
  };
  c->f_fn = [](double, const Vec& x, const ParticleEnsemble& mu, const Vec&) {
    return x.sum() + mu.mean()[0];
  };
  c->g_fn = [](const Vec& x, const ParticleEnsemble&) { return 3.0 * x[1]; };
  c->dep_b = Dependence{false, true, true};
  c->dep_f = Dependence{false, true, true};
  c->dep_g = Dependence{false, true, false};
  return c;
}

// Antithetic pairs make mollification of affine coefficients exact.
TEST(Mollified, AffineCoefficientsAreExact) {
  const auto c = linear_coeffs();
  MollifierSpec spec;
  spec.m = 3;
  spec.samples = 64;
  const Mat xbar = (Mat(2, 3) << 0.1, -1.0, 2.0, 0.5, 0.3, -0.7).finished();
  const ParticleEnsemble mu(xbar);
  const Vec a = Vec::Constant(2, 0.25);
  for (int i = 0; i < 3; ++i) {
    const Vec want = c->b(0.4, xbar.col(i), mu, a);
    EXPECT_LE((mollified_b(*c, spec, i, 0.4, xbar, a).value - want).norm(), 1e-12);
    EXPECT_NEAR(mollified_f(*c, spec, i, 0.4, xbar, a).value, c->f(0.4, xbar.col(i), mu, a), 1e-12);
    EXPECT_NEAR(mollified_g(*c, spec, i, xbar).value, c->g(xbar.col(i), mu), 1e-12);
  }
}

TEST(Mollified, ErrorWithinBoundAtKink) {
  ScenarioParams p;
  p.d = 1;
  const auto clamp = clamp_coefficients(p);
  const Mat xbar = Mat::Constant(1, 1, p.clamp_level);
  for (int m : {2, 8, 32}) {
    MollifierSpec spec;
    spec.m = m;
    const MollifiedVector v = mollified_b(*clamp, spec, 0, 0.5, xbar, Vec::Zero(1));
    const double err = std::abs(v.value[0] - p.clamp_level);
    EXPECT_LE(err, mollifier_error_bound(*clamp, clamp->dep_b, spec, 0.5) + 4.0 * v.stderr_) << m;
    EXPECT_GT(err, 0.0);
  }
}

TEST(Mollified, SeededAndReproducible) {
  ScenarioParams p;
  const auto mf = scenario("mean_reversion_mf", p);
  const Mat xbar = (Mat(2, 2) << 0.1, -0.4, 0.7, 0.2).finished();
  MollifierSpec spec;
  spec.samples = 256;
  const auto a = mollified_g(*mf, spec, 1, xbar);
  const auto b = mollified_g(*mf, spec, 1, xbar);
  EXPECT_EQ(a.value, b.value);
  spec.seed = 2;
  EXPECT_NE(mollified_g(*mf, spec, 1, xbar).value, a.value);
  spec.stderr_cap = 0.0;
  EXPECT_TRUE(mollified_g(*mf, spec, 1, xbar).flagged);
}

TEST(Mollified, ValidatesSpecAndArguments) {
  ScenarioParams p;
  const auto mf = scenario("mean_reversion_mf", p);
  MollifierSpec spec;
  spec.samples = 7;
  EXPECT_THROW(spec.validate(), Error);
  spec.samples = 8;
  spec.m = 0;
  EXPECT_THROW(spec.validate(), Error);
  spec.m = 2;
  EXPECT_THROW(mollified_g(*mf, spec, 5, Mat::Zero(2, 2)), Error);
  EXPECT_THROW(mollified_g(*mf, spec, 0, Mat::Zero(3, 2)), Error);
}

TEST(Mollified, WrappedSetMatchesPointwise) {
  ScenarioParams p;
  auto base = scenario("mean_reversion_mf", p);
  MollifierSpec spec;
  spec.samples = 64;
  const auto wrapped = mollified_coefficients(base, spec);
  const Mat xbar = (Mat(2, 3) << 0.1, -0.4, 0.7, 0.2, 1.0, -1.0).finished();
  const ParticleEnsemble mu(xbar);
  const Vec a = Vec::Constant(2, 0.5);
  EXPECT_LE((wrapped->b(0.3, xbar.col(1), mu, a) - mollified_b(*base, spec, 1, 0.3, xbar, a).value)
                .norm(),
            1e-14);
  EXPECT_EQ(wrapped->d, base->d);
  EXPECT_EQ(wrapped->k_bound, base->k_bound);
}

TEST(RateSweep, SpaceSlopeAtKink) {
  ScenarioParams p;
  p.d = 1;
  const auto clamp = clamp_coefficients(p);
  MollifyProbe probe;
  probe.t = 0.5;
  probe.xbar = Mat::Constant(1, 1, p.clamp_level);
  probe.a = Vec::Zero(1);
  MollifierSpec base;
  base.samples = 2048;
  const RateTable t = mollify_rate_sweep(*clamp, base, {2, 4, 8, 16}, {probe});
  EXPECT_NEAR(t.slope, -1.0, 0.25);
  EXPECT_TRUE(t.bounded);
  ASSERT_EQ(t.rows.size(), 4u);
}

}  // namespace
}  // namespace mfhjb
