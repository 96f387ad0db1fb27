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

#include <atomic>
#include <boost/math/distributions/normal.hpp>
#include <set>
#include <stdexcept>

#include "core/error.hpp"
#include "core/numeric.hpp"
#include "core/rng.hpp"

namespace mfhjb {
namespace {

// Published known-answer vectors for Philox4x32-10.
TEST(Philox, KnownAnswers) {
  using A4 = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}), (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Stream, ReproducibleAndKeyed) {
  const StreamKey k{42, Channel::kCommon, 3, 5, 7};
  Stream a(k), b(k);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.normal(), b.normal());
  StreamKey other = k;
  other.step = 8;
  Stream c(k), d(other);
  EXPECT_NE(c.uniform(), d.uniform());
  other = k;
  other.channel = Channel::kIdiosyncratic;
  Stream e(k), f(other);
  EXPECT_NE(e.uniform(), f.uniform());
}

TEST(Stream, UniformInOpenIntervalWithRightMoments) {
  Stream s(StreamKey{7, Channel::kAuxiliary, 0, 0, 0});
  const int n = 200000;
  KahanSum m1, m2;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    m1.add(u);
    m2.add(u * u);
  }
  EXPECT_NEAR(m1.value() / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(m2.value() / n, 1.0 / 3.0, 4.0 * std::sqrt(4.0 / 45.0 / n));
}

TEST(Stream, NormalMoments) {
  Stream s(StreamKey{11, Channel::kAuxiliary, 1, 2, 3});
  const int n = 200000;
  KahanSum m1, m2, m4;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    m1.add(z);
    m2.add(z * z);
    m4.add(z * z * z * z);
  }
  EXPECT_NEAR(m1.value() / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(m2.value() / n, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(m4.value() / n, 3.0, 4.0 * std::sqrt(96.0 / n));
}

TEST(DeriveSeed, DistinctChildren) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 20; ++s) {
    for (std::uint64_t t = 0; t < 50; ++t) seen.insert(derive_seed(s, t));
  }
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(derive_seed(5, 9), derive_seed(5, 9));
}

TEST(NormalFunctions, AgreeWithBoost) {
  const boost::math::normal_distribution<double> nd;
  for (double x = -8.0; x <= 8.0; x += 0.37) {
    EXPECT_NEAR(normal_cdf(x), boost::math::cdf(nd, x), 1e-15);
    EXPECT_NEAR(normal_sf(x) / boost::math::cdf(boost::math::complement(nd, x)), 1.0, 1e-12);
    EXPECT_NEAR(normal_pdf(x), boost::math::pdf(nd, x), 1e-15);
  }
  for (double p : {1e-300, 1e-12, 1e-5, 0.01, 0.3, 0.5, 0.77, 0.999, 1 - 1e-10}) {
    const double q = boost::math::quantile(nd, p);
    EXPECT_NEAR(normal_quantile(p), q, 1e-12 * std::max(1.0, std::abs(q))) << p;
  }
}

TEST(GaussHermite, IntegratesGaussianMoments) {
  const auto& rule = gauss_hermite(20);
  double expected = 1.0;  // (2k - 1)!!
  for (int k = 0; k <= 10; ++k) {
    KahanSum s;
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      s.add(rule.weights[j] * std::pow(rule.nodes[j], 2 * k));
    }
    EXPECT_NEAR(s.value() / expected, 1.0, 1e-11) << "moment " << 2 * k;
    expected *= 2 * k + 1;
  }
}

TEST(KahanSum, RecoversCancellation) {
  const std::vector<double> v = {1e16, 1.0, -1e16, 1.0};
  EXPECT_EQ(compensated_sum(v), 2.0);
}

TEST(MeanStderr, SmallSample) {
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  const MeanStderr r = mean_and_stderr(v);
  EXPECT_DOUBLE_EQ(r.mean, 2.5);
  EXPECT_NEAR(r.stderr_, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
  const std::vector<double> one = {3.0};
  EXPECT_EQ(mean_and_stderr(one).stderr_, 0.0);
}

TEST(LineFit, ExactLines) {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  std::vector<double> y;
  for (double v : x) y.push_back(0.5 - 2.0 * v);
  const LineFit f = fit_line(x, y);
  EXPECT_NEAR(f.slope, -2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 0.5, 1e-14);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-14);
  std::vector<double> z;
  for (double v : x) z.push_back(3.0 * v);
  const LineFit g = fit_through_origin(x, z);
  EXPECT_NEAR(g.slope, 3.0, 1e-14);
  EXPECT_NEAR(g.r_squared, 1.0, 1e-14);
}

TEST(Fnv1a, ReferenceValues) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(fnv1a_hex("foobar"), "85944171f73967e8");
}

TEST(ParallelFor, ResultIndependentOfThreadCount) {
  std::vector<double> a(1000), b(1000);
  set_thread_count(1);
  parallel_for(a.size(), [&](std::size_t i) { a[i] = std::sin(static_cast<double>(i)); });
  set_thread_count(4);
  parallel_for(b.size(), [&](std::size_t i) { b[i] = std::sin(static_cast<double>(i)); });
  EXPECT_EQ(a, b);
  set_thread_count(1);
}

TEST(ParallelFor, PropagatesWorkerExceptions) {
  set_thread_count(3);
  EXPECT_THROW(parallel_for(10,
                            [](std::size_t i) {
                              if (i == 7) fail(ErrorCode::kNumerical, "boom");
                            }),
               Error);
  std::atomic<int> count{0};
  parallel_for(5, [&](std::size_t) { parallel_for(4, [&](std::size_t) { ++count; }); });
  EXPECT_EQ(count.load(), 20);
  set_thread_count(1);
}

TEST(ThreadCount, RejectsOutOfRange) {
  EXPECT_THROW(set_thread_count(0), Error);
  EXPECT_THROW(set_thread_count(1000), Error);
}

}  // namespace
}  // namespace mfhjb
