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

#include "core/error.hpp"
#include "core/rng.hpp"
#include "core/variational.hpp"

namespace mfhjb {
namespace {

CandidateSet random_set(std::uint64_t seed, int count, double lambda, double delta) {
  Stream s(StreamKey{seed, Channel::kAuxiliary, 0, 0, 0});
  CandidateSet cs;
  cs.lambda = lambda;
  cs.delta = delta;
  for (int k = 0; k < count; ++k) {
    const double t = s.uniform();
    Mat p(2, 3);
    for (int i = 0; i < 3; ++i) {
      for (int l = 0; l < 2; ++l) p(l, i) = 1.5 * s.normal();
    }
    cs.items.push_back(Candidate{t, ParticleEnsemble(p), s.uniform()});
  }
  for (int k = 1; k < count; ++k) {
    if (cs.items[static_cast<std::size_t>(k)].g > cs.items[static_cast<std::size_t>(cs.start)].g) {
      cs.start = k;
    }
  }
  return cs;
}

class VariationalProperty : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(VariationalProperty, CertificateAndSelectionInvariants) {
  const auto quad = SphereQuadrature::make(2, 16);
  SliceSettings s;
  s.w2_points = 128;
  const CandidateSet cs = random_set(GetParam(), 7, 0.5, 1.0);
  const VariationalResult r = borwein_preiss(cs, quad, 64, s);
  EXPECT_TRUE(r.terminated);
  EXPECT_TRUE(r.certificate.item1);
  EXPECT_TRUE(r.certificate.item2);
  EXPECT_TRUE(r.certificate.item3);
  EXPECT_TRUE(r.certificate.monotone);
  EXPECT_LE(r.certificate.item1_worst_ratio, 1.0 + 1e-12);
  EXPECT_EQ(r.selected.front(), cs.start);
  EXPECT_EQ(r.selected.back(), r.tilde);
  EXPECT_EQ(r.anchors.size(), r.selected.size());
  EXPECT_TRUE(r.anchors.repeat_last);
}

INSTANTIATE_TEST_SUITE_P(RandomSets, VariationalProperty, ::testing::Range<std::uint64_t>(0, 25));

TEST(Variational, SingletonTerminatesImmediately) {
  CandidateSet cs = random_set(99, 1, 0.1, 1.0);
  const auto quad = SphereQuadrature::make(2, 8);
  const VariationalResult r = borwein_preiss(cs, quad);
  EXPECT_TRUE(r.terminated);
  EXPECT_EQ(r.tilde, 0);
  EXPECT_TRUE(r.certificate.all());
}

TEST(Variational, RhoMatrixSymmetricWithZeroDiagonal) {
  const CandidateSet cs = random_set(5, 5, 0.5, 1.0);
  const Mat r = candidate_rho(cs, SphereQuadrature::make(2, 8));
  EXPECT_EQ((r - r.transpose()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(r.diagonal().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT(r(0, 1), 0.0);
}

TEST(Variational, RejectsInvalidInput) {
  const auto quad = SphereQuadrature::make(2, 8);
  CandidateSet empty;
  EXPECT_THROW(borwein_preiss(empty, quad), Error);
  CandidateSet bad = random_set(1, 4, 0.5, 1.0);
  bad.lambda = 0.0;
  EXPECT_THROW(borwein_preiss(bad, quad), Error);
  // A start point more than lambda below the best value is not admissible.
  CandidateSet low = random_set(2, 4, 0.01, 1.0);
  low.items[0].g = -10.0;
  low.start = 0;
  try {
    borwein_preiss(low, quad);
    FAIL() << "expected a hypothesis error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kHypothesis);
  }
  CandidateSet dup = random_set(3, 2, 0.5, 1.0);
  dup.items[1] = dup.items[0];
  EXPECT_THROW(borwein_preiss(dup, quad), Error);
}

}  // namespace
}  // namespace mfhjb
