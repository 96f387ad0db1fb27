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

#include "core/variational.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "core/error.hpp"

namespace mfhjb {

namespace {
// Relative slack for comparisons whose exact counterparts are equalities in
// the construction.
constexpr double kRoundoff = 1e-12;
}  // namespace

Mat candidate_rho(const CandidateSet& cands, const SphereQuadrature& quad,
                  const SliceSettings& s) {
  const int n = static_cast<int>(cands.items.size());
  const double sigma = 1.0 / cands.delta;
  std::vector<std::unique_ptr<SlicedProfile>> prof;
  prof.reserve(static_cast<std::size_t>(n));
  for (const auto& c : cands.items) prof.push_back(std::make_unique<SlicedProfile>(c.mu, sigma, quad));
  Mat r = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double dt = cands.items[static_cast<std::size_t>(i)].t - cands.items[static_cast<std::size_t>(j)].t;
      r(i, j) = r(j, i) = dt * dt + sw2_sq(*prof[static_cast<std::size_t>(i)], *prof[static_cast<std::size_t>(j)], s);
    }
  }
  return r;
}

VariationalResult borwein_preiss(const CandidateSet& cands, const SphereQuadrature& quad,
                                 int max_iter, const SliceSettings& s) {
  const int n = static_cast<int>(cands.items.size());
  require(n >= 1, ErrorCode::kInvalidArgument, "variational: empty candidate set");
  require(cands.lambda > 0.0 && std::isfinite(cands.lambda), ErrorCode::kInvalidArgument,
          "variational: lambda must be > 0");
  require(cands.delta > 0.0 && std::isfinite(cands.delta), ErrorCode::kInvalidArgument,
          "variational: delta must be > 0");
  require(cands.start >= 0 && cands.start < n, ErrorCode::kInvalidArgument,
          "variational: start index out of range");
  require(max_iter >= 1, ErrorCode::kInvalidArgument, "variational: max_iter must be >= 1");
  double gmax = -HUGE_VAL;
  for (const auto& c : cands.items) {
    require(std::isfinite(c.g), ErrorCode::kNonFinite, "variational: non-finite G value");
    gmax = std::max(gmax, c.g);
  }
  const auto g = [&](int i) { return cands.items[static_cast<std::size_t>(i)].g; };
  require(gmax - cands.lambda <= g(cands.start), ErrorCode::kHypothesis,
          "variational: start point is not lambda-maximal");

  const Mat r = candidate_rho(cands, quad, s);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      require(r(i, j) > 0.0, ErrorCode::kHypothesis,
              "variational: candidates " + std::to_string(i) + " and " + std::to_string(j) +
                  " coincide");
    }
  }

  const double d2 = cands.delta * cands.delta;
  VariationalResult out;
  out.selected.push_back(cands.start);
  std::vector<double> penalty(static_cast<std::size_t>(n));
  for (int x = 0; x < n; ++x) penalty[static_cast<std::size_t>(x)] = d2 * r(x, cands.start);
  std::vector<char> admissible(static_cast<std::size_t>(n), 1);
  const auto s_k = [&](int x) { return g(x) - penalty[static_cast<std::size_t>(x)]; };

  for (int k = 0; k < max_iter; ++k) {
    const int xk = out.selected.back();
    const double level = s_k(xk);
    int members = 0;
    double sup = -HUGE_VAL;
    for (int x = 0; x < n; ++x) {
      auto& a = admissible[static_cast<std::size_t>(x)];
      a = a && (x == xk || s_k(x) >= level);
      if (a) {
        ++members;
        sup = std::max(sup, s_k(x));
      }
    }
    out.iterations = k;
    if (members == 1) {
      out.terminated = true;
      break;
    }
    out.sup_over_a.push_back(sup);
    const double slack = std::ldexp(cands.lambda, -2 * (k + 1));
    int next = xk;
    for (int x = 0; x < n; ++x) {
      if (admissible[static_cast<std::size_t>(x)] && s_k(x) >= sup - slack) {
        next = x;
        break;
      }
    }
    out.s_at_next.push_back(s_k(next));
    out.selected.push_back(next);
    const double w = std::ldexp(d2, -(k + 1));
    for (int x = 0; x < n; ++x) penalty[static_cast<std::size_t>(x)] += w * r(x, next);
    out.iterations = k + 1;
  }
  out.tilde = out.selected.back();

  GaugeAnchors& anchors = out.anchors;
  anchors.delta = cands.delta;
  anchors.lambda = cands.lambda;
  anchors.horizon = cands.horizon;
  anchors.repeat_last = true;
  anchors.k_max = std::max(40, static_cast<int>(out.selected.size()));
  for (int idx : out.selected) {
    anchors.add(cands.items[static_cast<std::size_t>(idx)].t, cands.items[static_cast<std::size_t>(idx)].mu);
  }

  // Exhaustive certificate on the finite set, from the same rho matrix.
  const int count = static_cast<int>(out.selected.size());
  const auto phi = [&](int x) {
    KahanSum acc;
    for (int k = 0; k < count; ++k) acc.add(std::ldexp(r(x, out.selected[static_cast<std::size_t>(k)]), -k));
    acc.add(std::ldexp(r(x, out.tilde), 1 - count));
    return acc.value();
  };
  Certificate& cert = out.certificate;
  cert.item1 = true;
  for (int k = 0; k < count; ++k) {
    const double bound = std::ldexp(cands.lambda / d2, -k);
    const double value = r(out.tilde, out.selected[static_cast<std::size_t>(k)]);
    cert.item1_worst_ratio = std::max(cert.item1_worst_ratio, value / bound);
    if (value > bound * (1.0 + kRoundoff)) cert.item1 = false;
  }
  const double top = g(out.tilde) - d2 * phi(out.tilde);
  const double scale = 1.0 + std::abs(top);
  cert.item2_margin = top - g(cands.start);
  cert.item2 = cert.item2_margin >= -kRoundoff * scale;
  cert.item3 = true;
  cert.item3_margin = HUGE_VAL;
  for (int x = 0; x < n; ++x) {
    if (x == out.tilde) continue;
    const double gap = top - (g(x) - d2 * phi(x));
    cert.item3_margin = std::min(cert.item3_margin, gap);
    if (!(gap > 0.0)) cert.item3 = false;
  }
  if (n == 1) cert.item3_margin = 0.0;
  cert.monotone = true;
  for (std::size_t k = 1; k < out.s_at_next.size(); ++k) {
    const double tol = kRoundoff * (1.0 + std::abs(out.s_at_next[k]));
    if (out.s_at_next[k] < out.s_at_next[k - 1] - tol) cert.monotone = false;
    if (out.sup_over_a[k] > out.sup_over_a[k - 1] + tol) cert.monotone = false;
  }
  return out;
}

}  // namespace mfhjb
