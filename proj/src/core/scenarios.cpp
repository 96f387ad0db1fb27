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

#include "core/scenarios.hpp"

#include <json.hpp>

#include "core/error.hpp"

namespace mfhjb {

using nlohmann::json;

namespace {

double sq_bounded(double r2) { return r2 / (1.0 + r2); }

void check_probes(const CoefficientSet& c, double radius) {
  const ProbeReport r = probe_coefficients(c, 256, radius, 0x9e3779b97f4a7c15ULL);
  require(r.ok, ErrorCode::kHypothesis,
          "scenario " + c.name + ": advertised bound K=" + std::to_string(c.k_bound) +
              " violated on probes");
}

void fill_common(CoefficientSet& c, const ScenarioParams& p) {
  c.d = p.d;
  c.horizon = p.horizon;
  c.actions = p.action_set();
}

class ZeroScenario final : public CoefficientSet {
 public:
  explicit ZeroScenario(const ScenarioParams& p) {
    fill_common(*this, p);
    name = "zero";
    k_bound = 0.0;
    beta = 1.0;
    dep_b = dep_sigma = dep_f = dep_g = Dependence{false, false, false};
    running_cost_zero = true;
  }
  Vec b(double, const Vec&, const ParticleEnsemble&, const Vec&) const override {
    return Vec::Zero(d);
  }
  Mat sigma(double, const Vec&, const Vec&) const override { return Mat::Zero(d, d); }
  Mat sigma0(double) const override { return Mat::Zero(d, d); }
  double f(double, const Vec&, const ParticleEnsemble&, const Vec&) const override { return 0.0; }
  double g(const Vec&, const ParticleEnsemble&) const override { return 0.0; }
  void drift_all(double, const Mat& x, const ParticleEnsemble&, const Mat&,
                 Mat* out) const override {
    out->setZero(x.rows(), x.cols());
  }
  void add_diffusion(double, const Mat&, const Mat&, const Mat&, Mat*) const override {}
  double mean_terminal_cost(const Mat&, const ParticleEnsemble&) const override { return 0.0; }
};

class LqScenario final : public CoefficientSet {
 public:
  explicit LqScenario(const ScenarioParams& p) : s_(p.sigma), s0_(p.sigma0), r_(p.radius) {
    fill_common(*this, p);
    require(actions.dim() == d, ErrorCode::kConfig, "lq_drift: action dimension must equal d");
    name = "lq_drift";
    p_ = p.payoff();
    beta = 1.0;
    const double rd = std::sqrt(static_cast<double>(d));
    k_bound = std::max({actions.max_norm(), std::abs(s_) * rd, std::abs(s0_) * rd,
                        p_.norm() * r_, 2.0 * p_.norm()});
    dep_b = Dependence{false, false, false};
    dep_sigma = Dependence{false, false, false};
    dep_f = Dependence{false, false, false};
    dep_g = Dependence{false, true, false};
    running_cost_zero = true;
  }
  Vec b(double, const Vec&, const ParticleEnsemble&, const Vec& a) const override { return a; }
  Mat sigma(double, const Vec&, const Vec&) const override { return s_ * Mat::Identity(d, d); }
  Mat sigma0(double) const override { return s0_ * Mat::Identity(d, d); }
  double f(double, const Vec&, const ParticleEnsemble&, const Vec&) const override { return 0.0; }
  double g(const Vec& x, const ParticleEnsemble&) const override { return terminal(x); }
  void drift_all(double, const Mat&, const ParticleEnsemble&, const Mat& a,
                 Mat* out) const override {
    *out = a;
  }
  void add_diffusion(double, const Mat&, const Mat&, const Mat& dw, Mat* out) const override {
    *out += s_ * dw;
  }
  double mean_terminal_cost(const Mat& x, const ParticleEnsemble&) const override {
    KahanSum s;
    for (Eigen::Index i = 0; i < x.cols(); ++i) s.add(terminal(x.col(i)));
    return s.value() / static_cast<double>(x.cols());
  }

 private:
  double terminal(const Eigen::Ref<const Vec>& x) const {
    const double r = x.norm();
    const double lin = p_.dot(x);
    if (r <= 0.5 * r_) return lin;
    return lin * smooth_clip_radius(r, r_) / r;
  }
  double s_, s0_, r_;
  Vec p_;
};

class MeanReversionScenario final : public CoefficientSet {
 public:
  explicit MeanReversionScenario(const ScenarioParams& p)
      : s_(p.sigma), s0_(p.sigma0), c_(p.penalty) {
    fill_common(*this, p);
    require(actions.dim() == d, ErrorCode::kConfig,
            "mean_reversion_mf: action dimension must equal d");
    name = "mean_reversion_mf";
    beta = 1.0;
    const double rd = std::sqrt(static_cast<double>(d));
    k_bound = std::max({rd + actions.max_norm(), std::abs(s_) * rd, std::abs(s0_) * rd,
                        std::abs(c_), 1.0});
    dep_b = Dependence{false, true, true};
    dep_sigma = Dependence{false, false, false};
    dep_f = Dependence{false, false, false};
    dep_g = Dependence{false, true, true};
  }
  Vec b(double, const Vec& x, const ParticleEnsemble& mu, const Vec& a) const override {
    return (mu.mean() - x).array().tanh().matrix() + a;
  }
  Mat sigma(double, const Vec&, const Vec&) const override { return s_ * Mat::Identity(d, d); }
  Mat sigma0(double) const override { return s0_ * Mat::Identity(d, d); }
  double f(double, const Vec&, const ParticleEnsemble&, const Vec& a) const override {
    return -c_ * sq_bounded(a.squaredNorm());
  }
  double g(const Vec& x, const ParticleEnsemble& mu) const override {
    return -sq_bounded((x - mu.mean()).squaredNorm());
  }
  void drift_all(double, const Mat& x, const ParticleEnsemble& mu, const Mat& a,
                 Mat* out) const override {
    *out = ((-x).colwise() + mu.mean()).array().tanh().matrix() + a;
  }
  void add_diffusion(double, const Mat&, const Mat&, const Mat& dw, Mat* out) const override {
    *out += s_ * dw;
  }
  double mean_running_cost(double, const Mat& x, const ParticleEnsemble&,
                           const Mat& a) const override {
    KahanSum s;
    for (Eigen::Index i = 0; i < x.cols(); ++i) s.add(-c_ * sq_bounded(a.col(i).squaredNorm()));
    return s.value() / static_cast<double>(x.cols());
  }

 private:
  double s_, s0_, c_;
};

class TrigScenario final : public CoefficientSet {
 public:
  explicit TrigScenario(const ScenarioParams& p) : s_(p.sigma), s0_(p.sigma0), c_(p.penalty) {
    fill_common(*this, p);
    require(actions.dim() == d, ErrorCode::kConfig, "bounded_trig: action dimension must equal d");
    name = "bounded_trig";
    beta = 0.5;
    const double rd = std::sqrt(static_cast<double>(d));
    const double hmax = std::sqrt(0.5 * horizon);
    k_bound = std::max({rd * (hmax + 0.5) + actions.max_norm(), std::abs(s_) * rd,
                        std::abs(s0_) * rd, hmax + std::abs(c_), 1.5, rd});
    dep_b = Dependence{true, true, true};
    dep_sigma = Dependence{false, false, false};
    dep_f = Dependence{true, true, false};
    dep_g = Dependence{false, true, true};
  }
  double h(double t) const { return std::sqrt(std::abs(t - 0.5 * horizon)); }
  Vec b(double t, const Vec& x, const ParticleEnsemble& mu, const Vec& a) const override {
    return h(t) * x.array().cos().matrix() + 0.5 * mu.mean().array().sin().matrix() + a;
  }
  Mat sigma(double, const Vec&, const Vec&) const override { return s_ * Mat::Identity(d, d); }
  Mat sigma0(double) const override { return s0_ * Mat::Identity(d, d); }
  double f(double t, const Vec& x, const ParticleEnsemble&, const Vec& a) const override {
    return h(t) * std::sin(x[0]) - c_ * sq_bounded(a.squaredNorm());
  }
  double g(const Vec& x, const ParticleEnsemble& mu) const override {
    return std::cos(x[0]) + 0.5 * std::sin(mu.mean()[0]);
  }
  void add_diffusion(double, const Mat&, const Mat&, const Mat& dw, Mat* out) const override {
    *out += s_ * dw;
  }

 private:
  double s_, s0_, c_;
};

class ClampScenario final : public CoefficientSet {
 public:
  explicit ClampScenario(const ScenarioParams& p) : level_(p.clamp_level) {
    fill_common(*this, p);
    require(level_ > 0.0, ErrorCode::kConfig, "clamp level must be positive");
    name = "clamp";
    beta = 1.0;
    k_bound = std::max(level_ * std::sqrt(static_cast<double>(d)), 1.0);
    dep_b = Dependence{false, true, false};
    dep_sigma = dep_f = dep_g = Dependence{false, false, false};
    running_cost_zero = true;
  }
  Vec b(double, const Vec& x, const ParticleEnsemble&, const Vec&) const override {
    return x.cwiseMax(-level_).cwiseMin(level_);
  }
  Mat sigma(double, const Vec&, const Vec&) const override { return Mat::Zero(d, d); }
  Mat sigma0(double) const override { return Mat::Zero(d, d); }
  double f(double, const Vec&, const ParticleEnsemble&, const Vec&) const override { return 0.0; }
  double g(const Vec&, const ParticleEnsemble&) const override { return 0.0; }
  void add_diffusion(double, const Mat&, const Mat&, const Mat&, Mat*) const override {}

 private:
  double level_;
};

Vec broadcast(const json& v, int d, const char* what) {
  if (v.is_number()) return Vec::Constant(d, v.get<double>());
  require(v.is_array() && static_cast<int>(v.size()) == d, ErrorCode::kConfig,
          std::string("scenario params: ") + what + " must be a number or a length-d array");
  Vec out(d);
  for (int l = 0; l < d; ++l) out[l] = v[static_cast<std::size_t>(l)].get<double>();
  return out;
}

}  // namespace

ScenarioParams ScenarioParams::from_json(const std::string& json_text) {
  ScenarioParams p;
  json j;
  try {
    j = json::parse(json_text.empty() ? std::string("{}") : json_text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("scenario params: ") + e.what());
  }
  require(j.is_object(), ErrorCode::kConfig, "scenario params must be a JSON object");
  try {
    p.d = j.value("d", p.d);
    require(p.d >= 1 && p.d <= 64, ErrorCode::kConfig, "scenario params: d must lie in [1, 64]");
    p.horizon = j.value("horizon", p.horizon);
    p.action_lo = j.value("action_lo", p.action_lo);
    p.action_hi = j.value("action_hi", p.action_hi);
    p.sigma = j.value("sigma", p.sigma);
    p.sigma0 = j.value("sigma0", p.sigma0);
    p.radius = j.value("radius", p.radius);
    p.penalty = j.value("penalty", p.penalty);
    p.clamp_level = j.value("clamp_level", p.clamp_level);
    if (j.contains("p")) p.p = broadcast(j.at("p"), p.d, "p");
    if (j.contains("actions")) {
      for (const auto& a : j.at("actions")) p.action_list.push_back(broadcast(a, p.d, "actions"));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("scenario params: ") + e.what());
  }
  require(p.horizon > 0.0 && p.radius > 0.0, ErrorCode::kConfig,
          "scenario params: horizon and radius must be positive");
  return p;
}

Vec ScenarioParams::payoff() const {
  if (p.size() == 0) return Vec::Constant(d, 0.5);
  require(p.size() == d, ErrorCode::kDimensionMismatch, "scenario params: p has wrong length");
  return p;
}

ActionSet ScenarioParams::action_set() const {
  if (!action_list.empty()) return ActionSet::finite(action_list);
  return ActionSet::box(Vec::Constant(d, action_lo), Vec::Constant(d, action_hi));
}

double smooth_clip_radius(double r, double radius) {
  const double half = 0.5 * radius;
  if (r <= half) return r;
  return half + half * std::tanh((r - half) / half);
}

std::shared_ptr<const CoefficientSet> scenario(const std::string& name,
                                               const ScenarioParams& params) {
  std::shared_ptr<CoefficientSet> out;
  if (name == "zero") {
    out = std::make_shared<ZeroScenario>(params);
  } else if (name == "lq_drift") {
    out = std::make_shared<LqScenario>(params);
  } else if (name == "mean_reversion_mf") {
    out = std::make_shared<MeanReversionScenario>(params);
  } else if (name == "bounded_trig") {
    out = std::make_shared<TrigScenario>(params);
  } else {
    fail(ErrorCode::kUnknownName, "unknown scenario: " + name);
  }
  check_probes(*out, name == "lq_drift" ? 0.5 * params.radius : 5.0);
  return out;
}

std::shared_ptr<const CoefficientSet> clamp_coefficients(const ScenarioParams& params) {
  auto out = std::make_shared<ClampScenario>(params);
  check_probes(*out, 5.0);
  return out;
}

double lq_hamiltonian_max(const ScenarioParams& params) {
  const Vec p = params.payoff();
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& a : params.action_set().vertices()) best = std::max(best, p.dot(a));
  return best;
}

TestFunction lq_closed_form(const ScenarioParams& params, double t1) {
  const Vec p = params.payoff();
  const double hmax = lq_hamiltonian_max(params);
  const int d = params.d;
  TestFunction u;
  u.value = [p, hmax, t1](double t, const ParticleEnsemble& mu) {
    return p.dot(mu.mean()) + (t1 - t) * hmax;
  };
  u.dt = [hmax](double, const ParticleEnsemble&) { return -hmax; };
  u.dmu = [p](double, const ParticleEnsemble&, const Vec&) { return p; };
  u.dxdmu = [d](double, const ParticleEnsemble&, const Vec&) { return Mat::Zero(d, d).eval(); };
  u.h = [d](double, const ParticleEnsemble&) { return Mat::Zero(d, d).eval(); };
  u.d2mu = [d](double, const ParticleEnsemble&, const Vec&, const Vec&) {
    return Mat::Zero(d, d).eval();
  };
  u.growth = p.norm() + std::abs(hmax) * t1;
  return u;
}

}  // namespace mfhjb
