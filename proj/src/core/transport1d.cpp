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

#include "core/transport1d.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>

#include "core/error.hpp"
#include "core/numeric.hpp"

namespace mfhjb {

namespace {
// Beyond this many standard deviations a component's CDF is exactly 0 or 1
// in double precision.
constexpr double kCutoff = 40.0;
}  // namespace

SmoothedProjection::SmoothedProjection(std::vector<double> values, double sigma)
    : sorted_(std::move(values)), sigma_(sigma) {
  require(!sorted_.empty(), ErrorCode::kInvalidArgument, "smoothed projection needs n >= 1");
  require(sigma_ > 0.0 && std::isfinite(sigma_), ErrorCode::kInvalidArgument,
          "smoothed projection needs a finite sigma > 0");
  for (double v : sorted_) {
    require(std::isfinite(v), ErrorCode::kNonFinite, "smoothed projection: non-finite value");
  }
  std::sort(sorted_.begin(), sorted_.end());
  scale_ = std::max({1.0, sigma_, std::abs(sorted_.front()), std::abs(sorted_.back())});
}

double SmoothedProjection::raw_lower(double z) const {
  const double reach = kCutoff * sigma_;
  const auto first = std::lower_bound(sorted_.begin(), sorted_.end(), z - reach);
  const auto last = std::upper_bound(first, sorted_.end(), z + reach);
  double s = static_cast<double>(first - sorted_.begin());
  for (auto it = first; it != last; ++it) s += normal_cdf((z - *it) / sigma_);
  return s / static_cast<double>(sorted_.size());
}

double SmoothedProjection::raw_upper(double z) const {
  const double reach = kCutoff * sigma_;
  const auto first = std::lower_bound(sorted_.begin(), sorted_.end(), z - reach);
  const auto last = std::upper_bound(first, sorted_.end(), z + reach);
  double s = static_cast<double>(sorted_.end() - last);
  for (auto it = first; it != last; ++it) s += normal_sf((z - *it) / sigma_);
  return s / static_cast<double>(sorted_.size());
}

double SmoothedProjection::cdf(double z) const {
  require(std::isfinite(z), ErrorCode::kNonFinite, "cdf: non-finite argument");
  return std::clamp(raw_lower(z), kProbFloor, 1.0 - kProbFloor);
}

double SmoothedProjection::sf(double z) const {
  require(std::isfinite(z), ErrorCode::kNonFinite, "sf: non-finite argument");
  return std::clamp(raw_upper(z), kProbFloor, 1.0 - kProbFloor);
}

double SmoothedProjection::lower_tail(double z) const {
  require(std::isfinite(z), ErrorCode::kNonFinite, "lower_tail: non-finite argument");
  return std::max(raw_lower(z), kTailFloor);
}

double SmoothedProjection::upper_tail(double z) const {
  require(std::isfinite(z), ErrorCode::kNonFinite, "upper_tail: non-finite argument");
  return std::max(raw_upper(z), kTailFloor);
}

double SmoothedProjection::pdf(double z) const {
  const double reach = kCutoff * sigma_;
  const auto first = std::lower_bound(sorted_.begin(), sorted_.end(), z - reach);
  const auto last = std::upper_bound(first, sorted_.end(), z + reach);
  double s = 0.0;
  for (auto it = first; it != last; ++it) s += normal_pdf((z - *it) / sigma_);
  return s / (static_cast<double>(sorted_.size()) * sigma_);
}

std::pair<double, double> SmoothedProjection::global_bracket(double target, bool upper) const {
  const double zq = upper ? -normal_quantile(target) : normal_quantile(target);
  return {sorted_.front() + sigma_ * zq - 1.0, sorted_.back() + sigma_ * zq + 1.0};
}

double SmoothedProjection::solve(double target, bool upper) const {
  // Residual g(x) is increasing in x either way: F(x) - p, or q - S(x).
  auto [lo, hi] = global_bracket(target, upper);
  double guess = 0.5 * (lo + hi);

  if (grid_ != nullptr) {
    const auto& levels = upper ? grid_->upper : grid_->lower;
    const int m = static_cast<int>(levels.size());
    // k: first level strictly beyond the target in the direction of growing x.
    const int k = static_cast<int>(
        upper ? std::upper_bound(levels.begin(), levels.end(), target, std::greater<>()) -
                    levels.begin()
              : std::upper_bound(levels.begin(), levels.end(), target) - levels.begin());
    const auto at = [&](int i) { return table_[static_cast<std::size_t>(i)]; };
    if (k >= 1 && k < m) {
      lo = at(std::max(0, k - 2));
      hi = at(std::min(m - 1, k + 1));
      const double p0 = levels[static_cast<std::size_t>(k - 1)];
      const double p1 = levels[static_cast<std::size_t>(k)];
      const double frac = p1 != p0 ? (target - p0) / (p1 - p0) : 0.5;
      guess = at(k - 1) + frac * (at(k) - at(k - 1));
    } else if (k == 0) {
      hi = std::min(hi, at(std::min(1, m - 1)));
      guess = at(0);
    } else {
      lo = std::max(lo, at(std::max(0, m - 2)));
      guess = at(m - 1);
    }
  }
  return solve_bracketed(target, upper, lo, hi, guess);
}

SmoothedProjection::TailEval SmoothedProjection::eval(double z, bool upper) const {
  const double reach = kCutoff * sigma_;
  const auto first = std::lower_bound(sorted_.begin(), sorted_.end(), z - reach);
  const auto last = std::upper_bound(first, sorted_.end(), z + reach);
  double tail = upper ? static_cast<double>(sorted_.end() - last)
                      : static_cast<double>(first - sorted_.begin());
  double dens = 0.0;
  for (auto it = first; it != last; ++it) {
    const double u = (z - *it) / sigma_;
    tail += upper ? normal_sf(u) : normal_cdf(u);
    dens += normal_pdf(u);
  }
  const double n = static_cast<double>(sorted_.size());
  return {tail / n, dens / (n * sigma_)};
}

double SmoothedProjection::solve_bracketed(double target, bool upper, double lo, double hi,
                                           double x) const {
  const double tol = 1e-12 * std::min(target, 1.0 - target);
  const double width_tol = 1e-13 * scale_;
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    const TailEval e = eval(x, upper);
    const double g = upper ? target - e.tail : e.tail - target;
    if (std::abs(g) <= tol) return x;
    if (g < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (hi - lo <= width_tol) return 0.5 * (lo + hi);
    double next = 0.5 * (lo + hi);
    // Newton while it stays inside the bracket; plain bisection once Newton
    // has had a fair chance.
    if (it < 24 && e.density > 0.0) {
      const double newton = x - g / e.density;
      if (newton > lo && newton < hi) {
        // Quadratic convergence: the error left after so small a step is
        // far below the residual tolerance.
        if (std::abs(newton - x) <= 1e-8 * sigma_) return newton;
        next = newton;
      }
    }
    if (std::abs(next - x) <= 1e-15 * scale_) return next;
    x = next;
  }
  fail(ErrorCode::kNumerical, "quantile solver did not converge");
}

double SmoothedProjection::quantile(double p) const {
  require(p > 0.0 && p < 1.0, ErrorCode::kInvalidArgument, "quantile: p must lie in (0, 1)");
  return p > 0.5 ? solve(1.0 - p, true) : solve(p, false);
}

double SmoothedProjection::upper_quantile(double q) const {
  require(q > 0.0 && q < 1.0, ErrorCode::kInvalidArgument,
          "upper_quantile: q must lie in (0, 1)");
  return q < 0.5 ? solve(q, true) : solve(1.0 - q, false);
}

void SmoothedProjection::build_table(const ProbabilityGrid& grid) {
  require(grid.size() >= 2, ErrorCode::kInvalidArgument, "quantile table needs >= 2 levels");
  std::vector<double> table(static_cast<std::size_t>(grid.size()));
  grid_ = nullptr;
  double prev = -HUGE_VAL;
  for (int k = 0; k < grid.size(); ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const bool upper = grid.upper[kk] < grid.lower[kk];
    const double target = upper ? grid.upper[kk] : grid.lower[kk];
    auto [lo, hi] = global_bracket(target, upper);
    double start = 0.5 * (lo + hi);
    if (k > 0) {
      lo = std::max(lo, prev);
      // One Newton step from the previous level.
      const double dp = upper ? grid.upper[kk - 1] - target : target - grid.lower[kk - 1];
      const double f = pdf(prev);
      start = f > 0.0 ? prev + dp / f : prev;
    }
    prev = solve_bracketed(target, upper, lo, hi, start);
    table[kk] = prev;
  }
  table_ = std::move(table);
  grid_ = &grid;
}

const std::vector<double>& SmoothedProjection::grid_quantiles(const ProbabilityGrid& grid) {
  if (grid_ != &grid) build_table(grid);
  return table_;
}

const ProbabilityGrid& midpoint_grid(int m) {
  require(m >= 8 && m <= (1 << 20), ErrorCode::kInvalidArgument,
          "midpoint grid needs 8 <= m <= 2^20");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<ProbabilityGrid>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[m];
  if (!slot) {
    slot = std::make_unique<ProbabilityGrid>();
    for (int j = 0; j < m; ++j) {
      slot->lower.push_back((j + 0.5) / m);
      slot->upper.push_back((m - j - 0.5) / m);
      slot->weight.push_back(1.0 / m);
    }
  }
  return *slot;
}

const ProbabilityGrid& graded_midpoint_grid(int m) {
  require(m >= 8 && m <= (1 << 20), ErrorCode::kInvalidArgument,
          "graded midpoint grid needs 8 <= m <= 2^20");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<ProbabilityGrid>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[m];
  if (!slot) {
    slot = std::make_unique<ProbabilityGrid>();
    constexpr int kHalvings = 48;
    // End cell (0, 1/m] split into (2^{-k-1}/m, 2^{-k}/m], k < kHalvings;
    // the remaining sliver has mass 2^{-48}/m and is dropped.
    std::vector<double> tail_mid, tail_w;
    for (int k = kHalvings - 1; k >= 0; --k) {
      const double hi = std::ldexp(1.0, -k) / m;
      tail_mid.push_back(0.75 * hi);
      tail_w.push_back(0.5 * hi);
    }
    auto& g = *slot;
    for (std::size_t k = 0; k < tail_mid.size(); ++k) {
      g.lower.push_back(tail_mid[k]);
      g.upper.push_back(1.0 - tail_mid[k]);
      g.weight.push_back(tail_w[k]);
    }
    for (int j = 1; j < m - 1; ++j) {
      g.lower.push_back((j + 0.5) / m);
      g.upper.push_back((m - j - 0.5) / m);
      g.weight.push_back(1.0 / m);
    }
    for (std::size_t k = tail_mid.size(); k-- > 0;) {
      g.lower.push_back(1.0 - tail_mid[k]);
      g.upper.push_back(tail_mid[k]);
      g.weight.push_back(tail_w[k]);
    }
  }
  return *slot;
}

const ProbabilityGrid& normal_score_grid(int m) {
  require(m >= 8 && m <= 400, ErrorCode::kInvalidArgument,
          "normal-score grid needs 8 <= m <= 400");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<ProbabilityGrid>> cache;
  const auto& rule = gauss_hermite(static_cast<std::size_t>(m));
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[m];
  if (!slot) {
    slot = std::make_unique<ProbabilityGrid>();
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      // Levels beyond the double range carry weights below 1e-300.
      if (normal_cdf(-std::abs(rule.nodes[k])) < 1e-300) continue;
      slot->lower.push_back(normal_cdf(rule.nodes[k]));
      slot->upper.push_back(normal_sf(rule.nodes[k]));
      slot->weight.push_back(rule.weights[k]);
    }
  }
  return *slot;
}

double TransportMap1D::operator()(double z) const {
  const double p = source_.lower_tail(z);
  if (p <= 0.5) return target_.quantile(p);
  return target_.upper_quantile(source_.upper_tail(z));
}

double w2_smoothed_sq(SmoothedProjection& src, SmoothedProjection& tgt,
                      const ProbabilityGrid& grid) {
  require(grid.size() >= 8, ErrorCode::kInvalidArgument,
          "w2_smoothed: need at least 8 quadrature levels");
  require(src.sigma() == tgt.sigma(), ErrorCode::kInvalidArgument,
          "w2_smoothed: source and target must share sigma");
  const auto& qs = src.grid_quantiles(grid);
  const auto& qt = tgt.grid_quantiles(grid);
  KahanSum s;
  for (std::size_t k = 0; k < qs.size(); ++k) {
    const double diff = qs[k] - qt[k];
    s.add(grid.weight[k] * diff * diff);
  }
  return s.value();
}

double w2_smoothed(SmoothedProjection& src, SmoothedProjection& tgt,
                   const ProbabilityGrid& grid) {
  return std::sqrt(w2_smoothed_sq(src, tgt, grid));
}

double w2_smoothed(SmoothedProjection& src, SmoothedProjection& tgt, int m) {
  return w2_smoothed(src, tgt, graded_midpoint_grid(m));
}

double w2_discrete_oracle(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size() && !a.empty(), ErrorCode::kDimensionMismatch,
          "w2_discrete_oracle: inputs must be non-empty and of equal length");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  KahanSum s;
  for (std::size_t i = 0; i < sa.size(); ++i) s.add((sa[i] - sb[i]) * (sa[i] - sb[i]));
  return std::sqrt(s.value() / static_cast<double>(sa.size()));
}

namespace {
// Antiderivative of Phi vanishing at -infinity.
double phi_integral(double x) { return x * normal_cdf(x) + normal_pdf(x); }
// Integral of 1 - Phi over [x, infinity).
double sf_integral(double x) { return normal_pdf(x) - x * normal_sf(x); }

// Integral of |level - Phi| over [a, b] with a <= b finite.
double abs_gap(double level, double a, double b) {
  auto signed_part = [&](double lo, double hi) {
    return level * (hi - lo) - (phi_integral(hi) - phi_integral(lo));
  };
  if (level <= 0.0 || level >= 1.0) return std::abs(signed_part(a, b));
  const double c = normal_quantile(level);
  if (c <= a || c >= b) return std::abs(signed_part(a, b));
  return std::abs(signed_part(a, c)) + std::abs(signed_part(c, b));
}
}  // namespace

double w1_to_standard_normal(std::span<const double> values) {
  require(!values.empty(), ErrorCode::kInvalidArgument, "w1_to_standard_normal: empty input");
  std::vector<double> x(values.begin(), values.end());
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  KahanSum s;
  s.add(phi_integral(x.front()));
  for (std::size_t k = 1; k < n; ++k) {
    if (x[k] > x[k - 1]) s.add(abs_gap(static_cast<double>(k) / static_cast<double>(n), x[k - 1], x[k]));
  }
  s.add(sf_integral(x.back()));
  return s.value();
}

}  // namespace mfhjb
