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

#include "core/coefficients.hpp"

#include <sstream>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace mfhjb {

ActionSet ActionSet::box(Vec lo, Vec hi) {
  require(lo.size() >= 1 && lo.size() == hi.size(), ErrorCode::kDimensionMismatch,
          "action box: lo and hi must share a positive dimension");
  require(lo.allFinite() && hi.allFinite(), ErrorCode::kNonFinite, "action box: non-finite bound");
  require((lo.array() <= hi.array()).all(), ErrorCode::kInvalidArgument,
          "action box: lo must not exceed hi");
  ActionSet s;
  s.is_box_ = true;
  s.dim_ = static_cast<int>(lo.size());
  s.lo_ = std::move(lo);
  s.hi_ = std::move(hi);
  return s;
}

ActionSet ActionSet::finite(std::vector<Vec> actions) {
  require(!actions.empty(), ErrorCode::kInvalidArgument, "action list is empty");
  const auto dim = actions.front().size();
  require(dim >= 1, ErrorCode::kDimensionMismatch, "action list: zero-dimensional action");
  for (const auto& a : actions) {
    require(a.size() == dim, ErrorCode::kDimensionMismatch, "action list: mixed dimensions");
    require(a.allFinite(), ErrorCode::kNonFinite, "action list: non-finite action");
  }
  ActionSet s;
  s.is_box_ = false;
  s.dim_ = static_cast<int>(dim);
  s.list_ = std::move(actions);
  return s;
}

bool ActionSet::contains(const Vec& a, double tol) const {
  if (a.size() != dim_) return false;
  if (is_box_) {
    return ((a.array() >= lo_.array() - tol) && (a.array() <= hi_.array() + tol)).all();
  }
  for (const auto& b : list_) {
    if ((a - b).lpNorm<Eigen::Infinity>() <= tol) return true;
  }
  return false;
}

std::vector<Vec> ActionSet::vertices() const {
  if (!is_box_) return list_;
  std::vector<Vec> out;
  const int count = 1 << dim_;
  for (int mask = 0; mask < count; ++mask) {
    Vec a(dim_);
    for (int l = 0; l < dim_; ++l) a[l] = (mask >> l) & 1 ? hi_[l] : lo_[l];
    out.push_back(a);
  }
  return out;
}

std::vector<Vec> ActionSet::grid(int per_axis) const {
  if (!is_box_) return list_;
  require(per_axis >= 2, ErrorCode::kInvalidArgument, "action grid needs two points per axis");
  std::vector<Vec> out;
  std::vector<int> idx(static_cast<std::size_t>(dim_), 0);
  while (true) {
    Vec a(dim_);
    for (int l = 0; l < dim_; ++l) {
      a[l] = lo_[l] + (hi_[l] - lo_[l]) * idx[static_cast<std::size_t>(l)] / (per_axis - 1);
    }
    out.push_back(a);
    int l = 0;
    while (l < dim_ && ++idx[static_cast<std::size_t>(l)] == per_axis) {
      idx[static_cast<std::size_t>(l)] = 0;
      ++l;
    }
    if (l == dim_) break;
  }
  return out;
}

double ActionSet::max_norm() const {
  double best = 0.0;
  for (const auto& a : vertices()) best = std::max(best, a.norm());
  return best;
}

void CoefficientSet::drift_all(double t, const Mat& x, const ParticleEnsemble& mu, const Mat& a,
                               Mat* out) const {
  out->resize(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    out->col(i) = b(t, x.col(i), mu, a.col(i));
  }
}

void CoefficientSet::add_diffusion(double t, const Mat& x, const Mat& a, const Mat& dw,
                                   Mat* out) const {
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    out->col(i) += sigma(t, x.col(i), a.col(i)) * dw.col(i);
  }
}

double CoefficientSet::mean_running_cost(double t, const Mat& x, const ParticleEnsemble& mu,
                                         const Mat& a) const {
  if (running_cost_zero) return 0.0;
  KahanSum s;
  for (Eigen::Index i = 0; i < x.cols(); ++i) s.add(f(t, x.col(i), mu, a.col(i)));
  return s.value() / static_cast<double>(x.cols());
}

double CoefficientSet::mean_terminal_cost(const Mat& x, const ParticleEnsemble& mu) const {
  KahanSum s;
  for (Eigen::Index i = 0; i < x.cols(); ++i) s.add(g(x.col(i), mu));
  return s.value() / static_cast<double>(x.cols());
}

Vec FunctionCoefficients::b(double t, const Vec& x, const ParticleEnsemble& mu,
                            const Vec& a) const {
  return b_fn ? b_fn(t, x, mu, a) : Vec::Zero(d);
}

Mat FunctionCoefficients::sigma(double t, const Vec& x, const Vec& a) const {
  return sigma_fn ? sigma_fn(t, x, a) : Mat::Zero(d, d);
}

Mat FunctionCoefficients::sigma0(double t) const {
  return sigma0_fn ? sigma0_fn(t) : Mat::Zero(d, d);
}

double FunctionCoefficients::f(double t, const Vec& x, const ParticleEnsemble& mu,
                               const Vec& a) const {
  return f_fn ? f_fn(t, x, mu, a) : 0.0;
}

double FunctionCoefficients::g(const Vec& x, const ParticleEnsemble& mu) const {
  return g_fn ? g_fn(x, mu) : 0.0;
}

namespace {

Vec random_point(Stream& s, int d, double radius) {
  Vec v(d);
  for (int l = 0; l < d; ++l) v[l] = s.normal();
  const double norm = v.norm();
  if (norm == 0.0) return Vec::Zero(d);
  const double r = radius * std::pow(s.uniform(), 1.0 / d);
  return v * (r / norm);
}

Vec random_action(Stream& s, const ActionSet& set) {
  if (!set.is_box()) {
    const auto k = static_cast<std::size_t>(s.uniform() * static_cast<double>(set.list().size()));
    return set.list()[std::min(k, set.list().size() - 1)];
  }
  Vec a(set.dim());
  for (int l = 0; l < set.dim(); ++l) {
    a[l] = set.lo()[l] + (set.hi()[l] - set.lo()[l]) * s.uniform();
  }
  return a;
}

}  // namespace

ProbeReport probe_coefficients(const CoefficientSet& c, int probes, double radius,
                               std::uint64_t seed) {
  require(probes >= 1, ErrorCode::kInvalidArgument, "probe count must be positive");
  ProbeReport r;
  const int d = c.d;
  const int cloud = 8;
  const double tol = 1e-12 * std::max(1.0, c.k_bound);
  for (int p = 0; p < probes; ++p) {
    Stream s(StreamKey{seed, Channel::kAuxiliary, 0, static_cast<std::uint32_t>(p), 0});
    const double t = c.horizon * s.uniform();
    Mat pts(d, cloud);
    for (int j = 0; j < cloud; ++j) pts.col(j) = random_point(s, d, radius);
    const ParticleEnsemble mu(pts);
    const Vec x = random_point(s, d, radius);
    const Vec a = random_action(s, c.actions);
    Vec dx(d);
    for (int l = 0; l < d; ++l) dx[l] = s.normal();
    dx *= 1e-3 / std::max(dx.norm(), 1e-300);
    const Vec x2 = x + dx;

    const double bx = c.b(t, x, mu, a).norm();
    const double fx = c.f(t, x, mu, a);
    const double gx = c.g(x, mu);
    r.max_b = std::max(r.max_b, bx);
    r.max_sigma = std::max(r.max_sigma, c.sigma(t, x, a).norm());
    r.max_sigma0 = std::max(r.max_sigma0, c.sigma0(t).norm());
    r.max_f = std::max(r.max_f, std::abs(fx));
    r.max_g = std::max(r.max_g, std::abs(gx));
    const double h = dx.norm();
    r.max_lipschitz_ratio = std::max(
        {r.max_lipschitz_ratio, (c.b(t, x2, mu, a) - c.b(t, x, mu, a)).norm() / h,
         (c.sigma(t, x2, a) - c.sigma(t, x, a)).norm() / h,
         std::abs(c.f(t, x2, mu, a) - fx) / h, std::abs(c.g(x2, mu) - gx) / h});
  }
  r.ok = r.max_b <= c.k_bound + tol && r.max_sigma <= c.k_bound + tol &&
         r.max_sigma0 <= c.k_bound + tol && r.max_f <= c.k_bound + tol &&
         r.max_g <= c.k_bound + tol && r.max_lipschitz_ratio <= c.k_bound * (1.0 + 1e-6) + tol;
  return r;
}

StepControl StepControl::constant(double t0, double t1, const Vec& a) {
  return piecewise({t0, t1}, {a});
}

StepControl StepControl::piecewise(std::vector<double> breakpoints, std::vector<Vec> actions) {
  require(breakpoints.size() >= 2 && actions.size() + 1 == breakpoints.size(),
          ErrorCode::kInvalidArgument, "step control: need one action per interval");
  StepControl c;
  c.breaks_ = std::move(breakpoints);
  c.constants_ = std::move(actions);
  for (std::size_t k = 1; k < c.breaks_.size(); ++k) {
    require(c.breaks_[k] > c.breaks_[k - 1], ErrorCode::kInvalidArgument,
            "step control: breakpoints must increase strictly");
  }
  return c;
}

StepControl StepControl::feedback(std::vector<double> breakpoints, std::vector<Feedback> tables) {
  require(breakpoints.size() >= 2 && tables.size() + 1 == breakpoints.size(),
          ErrorCode::kInvalidArgument, "step control: need one table per interval");
  for (const auto& tb : tables) {
    require(tb.cell > 0.0 && !tb.cells.empty() &&
                static_cast<Eigen::Index>(tb.cells.size()) == tb.origin.size(),
            ErrorCode::kInvalidArgument, "feedback table: malformed grid");
    std::size_t total = 1;
    for (int c : tb.cells) {
      require(c >= 1, ErrorCode::kInvalidArgument, "feedback table: empty axis");
      total *= static_cast<std::size_t>(c);
    }
    require(tb.actions.size() == total, ErrorCode::kInvalidArgument,
            "feedback table: one action per cell required");
  }
  StepControl c;
  c.breaks_ = std::move(breakpoints);
  c.tables_ = std::move(tables);
  for (std::size_t k = 1; k < c.breaks_.size(); ++k) {
    require(c.breaks_[k] > c.breaks_[k - 1], ErrorCode::kInvalidArgument,
            "step control: breakpoints must increase strictly");
  }
  return c;
}

int StepControl::piece_at(double t) const {
  const auto it = std::upper_bound(breaks_.begin() + 1, breaks_.end() - 1, t);
  return static_cast<int>(it - breaks_.begin()) - 1;
}

namespace {

std::size_t cell_index(const StepControl::Feedback& tb, const Eigen::Ref<const Vec>& x) {
  std::size_t index = 0;
  for (int l = static_cast<int>(tb.cells.size()) - 1; l >= 0; --l) {
    const double u = std::floor((x[l] - tb.origin[l]) / tb.cell);
    const int c = static_cast<int>(std::clamp(u, 0.0, static_cast<double>(tb.cells[static_cast<std::size_t>(l)] - 1)));
    index = index * static_cast<std::size_t>(tb.cells[static_cast<std::size_t>(l)]) +
            static_cast<std::size_t>(c);
  }
  return index;
}

}  // namespace

Vec StepControl::action(double t, const Vec& x) const {
  const auto k = static_cast<std::size_t>(piece_at(t));
  if (!constants_.empty()) return constants_[k];
  require(x.size() == tables_[k].origin.size(), ErrorCode::kDimensionMismatch,
          "feedback table: state dimension mismatch");
  return tables_[k].actions[cell_index(tables_[k], x)];
}

void StepControl::actions_all(double t, const Mat& x, int action_dim, Mat* out) const {
  const auto k = static_cast<std::size_t>(piece_at(t));
  out->resize(action_dim, x.cols());
  if (!constants_.empty()) {
    require(constants_[k].size() == action_dim, ErrorCode::kDimensionMismatch,
            "step control: action dimension mismatch");
    out->colwise() = constants_[k];
    return;
  }
  const auto& tb = tables_[k];
  require(x.rows() == tb.origin.size(), ErrorCode::kDimensionMismatch,
          "feedback table: state dimension mismatch");
  for (Eigen::Index i = 0; i < x.cols(); ++i) out->col(i) = tb.actions[cell_index(tb, x.col(i))];
}

void StepControl::validate(const ActionSet& set) const {
  for (const auto& a : constants_) {
    require(set.contains(a), ErrorCode::kInvalidArgument, "step control: action outside A");
  }
  for (const auto& tb : tables_) {
    for (const auto& a : tb.actions) {
      require(set.contains(a), ErrorCode::kInvalidArgument, "step control: action outside A");
    }
  }
}

std::string StepControl::describe() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t k = 0; k + 1 < breaks_.size(); ++k) {
    os << "[" << breaks_[k] << "," << breaks_[k + 1] << "):";
    if (!constants_.empty()) {
      os << "(";
      for (Eigen::Index l = 0; l < constants_[k].size(); ++l) {
        os << (l ? "," : "") << constants_[k][l];
      }
      os << ")";
    } else {
      os << "table" << tables_[k].actions.size();
    }
    if (k + 2 < breaks_.size()) os << ";";
  }
  return os.str();
}

Mat h_from_second_derivatives(const TestFunction& u, double t, const ParticleEnsemble& mu) {
  require(static_cast<bool>(u.dxdmu) && static_cast<bool>(u.d2mu), ErrorCode::kInvalidArgument,
          "H cross-check needs d_x d_mu and d2_mu evaluators");
  const int n = mu.n();
  const int d = mu.d();
  Mat out = Mat::Zero(d, d);
  for (int i = 0; i < n; ++i) out += u.dxdmu(t, mu, mu.point(i)) / n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out += u.d2mu(t, mu, mu.point(i), mu.point(j)) / (static_cast<double>(n) * n);
    }
  }
  return out;
}

TestFunction linear_mean_function(const Vec& p) {
  TestFunction u;
  u.value = [p](double, const ParticleEnsemble& mu) { return p.dot(mu.mean()); };
  u.dt = [](double, const ParticleEnsemble&) { return 0.0; };
  u.dmu = [p](double, const ParticleEnsemble&, const Vec&) { return p; };
  u.dxdmu = [p](double, const ParticleEnsemble&, const Vec&) {
    return Mat::Zero(p.size(), p.size()).eval();
  };
  u.h = [p](double, const ParticleEnsemble&) { return Mat::Zero(p.size(), p.size()).eval(); };
  u.d2mu = [p](double, const ParticleEnsemble&, const Vec&, const Vec&) {
    return Mat::Zero(p.size(), p.size()).eval();
  };
  u.growth = p.norm();
  return u;
}

TestFunction second_moment_function(int d) {
  TestFunction u;
  u.value = [](double, const ParticleEnsemble& mu) { return second_moment(mu); };
  u.dt = [](double, const ParticleEnsemble&) { return 0.0; };
  u.dmu = [](double, const ParticleEnsemble&, const Vec& x) { return (2.0 * x).eval(); };
  u.dxdmu = [d](double, const ParticleEnsemble&, const Vec&) {
    return (2.0 * Mat::Identity(d, d)).eval();
  };
  u.h = [d](double, const ParticleEnsemble&) { return (2.0 * Mat::Identity(d, d)).eval(); };
  u.d2mu = [d](double, const ParticleEnsemble&, const Vec&, const Vec&) {
    return Mat::Zero(d, d).eval();
  };
  u.growth = 1.0;
  return u;
}

TestFunction squared_mean_function(int d) {
  TestFunction u;
  u.value = [](double, const ParticleEnsemble& mu) { return mu.mean().squaredNorm(); };
  u.dt = [](double, const ParticleEnsemble&) { return 0.0; };
  u.dmu = [](double, const ParticleEnsemble& mu, const Vec&) { return (2.0 * mu.mean()).eval(); };
  u.dxdmu = [d](double, const ParticleEnsemble&, const Vec&) { return Mat::Zero(d, d).eval(); };
  u.h = [d](double, const ParticleEnsemble&) { return (2.0 * Mat::Identity(d, d)).eval(); };
  u.d2mu = [d](double, const ParticleEnsemble&, const Vec&, const Vec&) {
    return (2.0 * Mat::Identity(d, d)).eval();
  };
  u.growth = 1.0;
  return u;
}

}  // namespace mfhjb
