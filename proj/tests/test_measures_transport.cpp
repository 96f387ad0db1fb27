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
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <numeric>

#include "core/error.hpp"
#include "core/measures.hpp"
#include "core/rng.hpp"
#include "core/transport1d.hpp"

namespace mfhjb {
namespace {

double brute_force_w2(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<int> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = HUGE_VAL;
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[static_cast<std::size_t>(perm[i])];
      c += d * d;
    }
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::sqrt(best / static_cast<double>(a.size()));
}

TEST(Ensemble, BasicAccessorsAndJsonRoundTrip) {
  const ParticleEnsemble e = ParticleEnsemble::from_rows({{1.0, 2.0}, {3.0, -4.0}, {0.5, 0.25}});
  EXPECT_EQ(e.n(), 3);
  EXPECT_EQ(e.d(), 2);
  EXPECT_NEAR(e.mean()[0], 1.5, 1e-15);
  EXPECT_NEAR(e.mean()[1], -1.75 / 3.0, 1e-15);
  EXPECT_NEAR(second_moment(e), (1 + 4 + 9 + 16 + 0.25 + 0.0625) / 3.0, 1e-14);
  const ParticleEnsemble r = ensemble_from_json(ensemble_to_json(e));
  EXPECT_EQ(r.points(), e.points());
}

TEST(Ensemble, RejectsBadInput) {
  EXPECT_THROW(ensemble_from_json("[[1, 2], [3]]"), Error);
  EXPECT_THROW(ensemble_from_json("not json"), Error);
  Mat bad(1, 2);
  bad << 1.0, std::nan("");
  EXPECT_THROW(ParticleEnsemble{bad}, Error);
  EXPECT_THROW(Direction(Vec::Constant(2, 1.0)), Error);
  EXPECT_THROW(Direction::normalized(Vec::Zero(2)), Error);
}

TEST(Ensemble, TranslateAndPermute) {
  const ParticleEnsemble e = ParticleEnsemble::from_rows({{0.0}, {1.0}, {5.0}});
  const ParticleEnsemble t = translate(e, Vec::Constant(1, 2.0));
  EXPECT_EQ(t.points()(0, 2), 7.0);
  const ParticleEnsemble p = permute(e, {2, 0, 1});
  EXPECT_EQ(p.points()(0, 0), 5.0);
  EXPECT_EQ(p.mean(), e.mean());
}

TEST(Sampling, DeterministicAndMomentsMatch) {
  const auto spec = DistributionSpec::gaussian(Vec::Constant(2, 1.0), Vec::Constant(2, 2.0));
  const ParticleEnsemble a = sample_iid(spec, 20000, 2, 5);
  const ParticleEnsemble b = sample_iid(spec, 20000, 2, 5);
  EXPECT_EQ(a.points(), b.points());
  EXPECT_NEAR(a.mean()[0], 1.0, 4.0 * 2.0 / std::sqrt(20000.0));
  const auto box = DistributionSpec::from_json(R"({"name": "uniform_box", "lo": -1, "hi": 3})", 2);
  const ParticleEnsemble u = sample_iid(box, 1000, 2, 1);
  EXPECT_GE(u.points().minCoeff(), -1.0);
  EXPECT_LE(u.points().maxCoeff(), 3.0);
  const auto pm = DistributionSpec::from_json(R"({"name": "point_mass", "center": [1, 2]})", 2);
  EXPECT_EQ(sample_iid(pm, 3, 2, 1).points().col(2), (Vec(2) << 1, 2).finished());
  EXPECT_THROW(DistributionSpec::from_json(R"({"name": "cauchy"})", 2), Error);
}

TEST(TransportOracle, SortedCouplingMatchesBruteForce) {
  for (int q = 0; q < 60; ++q) {
    Stream s(StreamKey{3, Channel::kAuxiliary, 9, static_cast<std::uint32_t>(q), 0});
    const int n = 1 + q % 7;
    std::vector<double> a(static_cast<std::size_t>(n)), b(a.size());
    for (auto& v : a) v = s.normal();
    for (auto& v : b) v = 2.0 * s.normal() - 1.0;
    EXPECT_NEAR(w2_discrete_oracle(a, b), brute_force_w2(a, b), 1e-14);
  }
}

TEST(TransportOracle, FrozenValue) {
  const std::vector<double> a = {0.0, 1.0, 3.0};
  const std::vector<double> b = {2.0, -1.0, 0.5};
  // Sorted pairs (0,-1), (1,0.5), (3,2): (1 + 0.25 + 1) / 3.
  EXPECT_NEAR(w2_discrete_oracle(a, b), std::sqrt(2.25 / 3.0), 1e-15);
  EXPECT_THROW(w2_discrete_oracle(a, std::vector<double>{1.0}), Error);
}

TEST(SmoothedProjection, CdfQuantileInverse) {
  SmoothedProjection p({-2.0, 0.0, 0.3, 5.0}, 0.5);
  for (double z = -6.0; z <= 9.0; z += 0.25) {
    const double c = p.cdf(z);
    if (c > 1e-9 && c < 1 - 1e-9) EXPECT_NEAR(p.quantile(c), z, 1e-8) << z;
    if (z > 1.0) EXPECT_NEAR(p.upper_quantile(p.upper_tail(z)), z, 1e-8) << z;
  }
  for (double q : {1e-14, 1e-9, 1e-4}) EXPECT_NEAR(p.sf(p.upper_quantile(q)) / q, 1.0, 1e-8);
  // Mixture CDF against its definition.
  const double z = 0.7;
  double expect = 0.0;
  for (double v : {-2.0, 0.0, 0.3, 5.0}) expect += 0.25 * normal_cdf((z - v) / 0.5);
  EXPECT_NEAR(p.cdf(z), expect, 1e-15);
}

TEST(SmoothedW2, TranslatedGaussiansGiveTheShift) {
  // N(a, s^2) to N(b, s^2) is a pure translation.
  SmoothedProjection x({0.3}, 0.7), y({-1.2}, 0.7);
  EXPECT_NEAR(w2_smoothed(x, y), 1.5, 1e-9);
  // Translating a mixture moves every quantile by the same amount.
  SmoothedProjection m({-1.0, 0.0, 2.0}, 0.5), mt({1.0, 2.0, 4.0}, 0.5);
  EXPECT_NEAR(w2_smoothed(m, mt), 2.0, 1e-9);
  SmoothedProjection m2({-1.0, 0.0, 2.0}, 0.5);
  EXPECT_NEAR(w2_smoothed(m, m2), 0.0, 1e-12);
}

TEST(SmoothedW2, ScaledGaussianClosedForm) {
  // W2(N(0, s^2), N(0, t^2)) = |s - t|; a single atom with sigma s versus
  // the same atom: use two one-atom projections with different sigma is not
  // allowed, so compare against the closed form via the map slope instead.
  SmoothedProjection a({0.0}, 0.5), b({1.0}, 0.5);
  const TransportMap1D t(a, b);
  for (double z : {-2.0, 0.0, 1.5}) EXPECT_NEAR(t(z), z + 1.0, 1e-9);
  SmoothedProjection c({0.0}, 1.0);
  EXPECT_THROW(w2_smoothed(a, c), Error);
}

TEST(TransportMap, Monotone) {
  SmoothedProjection a({-1.0, 0.2, 0.5, 3.0}, 0.4), b({0.0, 0.1, 4.0}, 0.4);
  const TransportMap1D t(a, b);
  double prev = -HUGE_VAL;
  for (double z = -4.0; z <= 6.0; z += 0.05) {
    const double v = t(z);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(W1StandardNormal, MatchesNumericalIntegral) {
  const std::vector<double> v = {-1.3, -0.2, 0.0, 0.4, 2.2};
  auto ecdf = [&](double z) {
    return static_cast<double>(std::count_if(v.begin(), v.end(), [&](double x) { return x <= z; })) /
           static_cast<double>(v.size());
  };
  // Integrate |F_n - Phi| piecewise between sorted points.
  std::vector<double> cuts = {-12.0};
  cuts.insert(cuts.end(), v.begin(), v.end());
  cuts.push_back(12.0);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = cuts[k], hi = cuts[k + 1];
    const double level = ecdf(0.5 * (lo + hi));
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double z) { return std::abs(level - normal_cdf(z)); }, lo, hi, 20, 1e-14);
  }
  EXPECT_NEAR(w1_to_standard_normal(v), total, 1e-12);
}

TEST(Grids, WeightsSumToOne) {
  for (const ProbabilityGrid* g : {&midpoint_grid(64), &graded_midpoint_grid(512)}) {
    double s = 0.0;
    for (double w : g->weight) s += w;
    EXPECT_NEAR(s, 1.0, 1e-13);
  }
}

}  // namespace
}  // namespace mfhjb
