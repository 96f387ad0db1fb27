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

#include "core/numeric.hpp"

#include <atomic>
#include <cstdio>
#include <map>
#include <mutex>

#include <boost/math/special_functions/erf.hpp>

#include "core/error.hpp"

namespace mfhjb {

namespace {
constexpr double kSqrt2 = 1.41421356237309504880;
std::atomic<int> g_threads{1};
}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * 0.39894228040143267794;
}

double normal_quantile(double p) {
  require(p > 0.0 && p < 1.0, ErrorCode::kInvalidArgument,
          "normal_quantile: p must lie in (0, 1)");
  return -kSqrt2 * boost::math::erfc_inv(2.0 * p);
}

const GaussHermiteRule& gauss_hermite(std::size_t count) {
  require(count >= 1 && count <= 400, ErrorCode::kInvalidArgument,
          "gauss_hermite: node count must lie in [1, 400]");
  static std::mutex mu;
  static std::map<std::size_t, GaussHermiteRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(count);
  if (it != cache.end()) return it->second;

  // Jacobi matrix of the monic probabilists' Hermite recurrence.
  Vec diag = Vec::Zero(static_cast<Eigen::Index>(count));
  Vec off(static_cast<Eigen::Index>(count > 1 ? count - 1 : 0));
  for (Eigen::Index k = 0; k < off.size(); ++k) off[k] = std::sqrt(static_cast<double>(k + 1));
  GaussHermiteRule rule;
  rule.nodes.resize(count);
  rule.weights.resize(count);
  if (count == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = 1.0;
  } else {
    Eigen::SelfAdjointEigenSolver<Mat> solver;
    solver.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
    require(solver.info() == Eigen::Success, ErrorCode::kNumerical,
            "gauss_hermite: eigen decomposition failed");
    KahanSum total;
    for (std::size_t k = 0; k < count; ++k) {
      const auto ki = static_cast<Eigen::Index>(k);
      rule.nodes[k] = solver.eigenvalues()[ki];
      const double v0 = solver.eigenvectors()(0, ki);
      rule.weights[k] = v0 * v0;
      total.add(rule.weights[k]);
    }
    const double norm = total.value();
    for (auto& w : rule.weights) w /= norm;
    // Symmetrize so odd moments cancel to rounding.
    for (std::size_t k = 0; k < count / 2; ++k) {
      const std::size_t j = count - 1 - k;
      const double x = 0.5 * (rule.nodes[j] - rule.nodes[k]);
      const double w = 0.5 * (rule.weights[j] + rule.weights[k]);
      rule.nodes[k] = -x;
      rule.nodes[j] = x;
      rule.weights[k] = w;
      rule.weights[j] = w;
    }
    if (count % 2 == 1) rule.nodes[count / 2] = 0.0;
  }
  return cache.emplace(count, std::move(rule)).first->second;
}

double compensated_sum(std::span<const double> values) {
  KahanSum s;
  for (double v : values) s.add(v);
  return s.value();
}

MeanStderr mean_and_stderr(std::span<const double> values) {
  MeanStderr out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = compensated_sum(values) / n;
  if (values.size() < 2) return out;
  KahanSum ss;
  for (double v : values) ss.add((v - out.mean) * (v - out.mean));
  out.stderr_ = std::sqrt(ss.value() / (n - 1.0) / n);
  return out;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorCode::kInvalidArgument,
          "fit_line: need at least two paired samples");
  const double n = static_cast<double>(x.size());
  const double mx = compensated_sum(x) / n;
  const double my = compensated_sum(y) / n;
  KahanSum sxx, sxy, syy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx.add((x[i] - mx) * (x[i] - mx));
    sxy.add((x[i] - mx) * (y[i] - my));
    syy.add((y[i] - my) * (y[i] - my));
  }
  require(sxx.value() > 0.0, ErrorCode::kNumerical, "fit_line: degenerate abscissae");
  LineFit fit;
  fit.slope = sxy.value() / sxx.value();
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy.value() > 0.0 ? sxy.value() * sxy.value() / (sxx.value() * syy.value()) : 1.0;
  return fit;
}

LineFit fit_through_origin(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && !x.empty(), ErrorCode::kInvalidArgument,
          "fit_through_origin: need paired samples");
  KahanSum sxx, sxy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx.add(x[i] * x[i]);
    sxy.add(x[i] * y[i]);
  }
  require(sxx.value() > 0.0, ErrorCode::kNumerical, "fit_through_origin: zero abscissae");
  LineFit fit;
  fit.slope = sxy.value() / sxx.value();
  const double my = compensated_sum(y) / static_cast<double>(y.size());
  KahanSum res, tot;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.slope * x[i];
    res.add(r * r);
    tot.add((y[i] - my) * (y[i] - my));
  }
  if (tot.value() > 0.0) {
    fit.r_squared = 1.0 - res.value() / tot.value();
  } else {
    fit.r_squared = res.value() == 0.0 ? 1.0 : 0.0;
  }
  return fit;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

void set_thread_count(int threads) {
  require(threads >= 1 && threads <= 256, ErrorCode::kInvalidArgument,
          "thread count must lie in [1, 256]");
  g_threads.store(threads);
}

int thread_count() { return g_threads.load(); }

}  // namespace mfhjb
