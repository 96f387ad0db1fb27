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

#include "core/experiments.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>

#include "core/control_value.hpp"
#include "core/error.hpp"
#include "core/rng.hpp"
#include "core/scenarios.hpp"
#include "core/variational.hpp"

namespace mfhjb {

using nlohmann::json;

double SuiteResult::metric(const std::string& key) const {
  const auto it = metrics.find(key);
  require(it != metrics.end(), ErrorCode::kInternal, "suite metric not found: " + key);
  return it->second;
}

namespace {

template <typename T>
T opt(const Config& c, const char* key, T fallback) {
  return c.contains(key) ? c.at(key).get<T>() : fallback;
}

template <typename T>
std::vector<T> opt_list(const Config& c, const char* key, std::vector<T> fallback) {
  return c.contains(key) ? c.at(key).get<std::vector<T>>() : fallback;
}

class Recorder {
 public:
  Recorder(SuiteResult* out, std::uint64_t seed) : out_(out), seed_(seed) {}

  void add(const std::string& op, const json& inputs, double value, double se = 0.0) {
    push(op, inputs, value, se, std::nullopt);
  }
  // An asserted quantity; a failure marks the whole suite as failed.
  bool check(const std::string& op, const json& inputs, double value, double se, bool ok) {
    push(op, inputs, value, se, ok);
    if (!ok) out_->pass = false;
    return ok;
  }
  void metric(const std::string& key, double v) { out_->metrics[key] = v; }

 private:
  void push(const std::string& op, const json& inputs, double value, double se,
            std::optional<bool> pass) {
    Record r;
    r.operation = op;
    r.inputs_hash = fnv1a_hex(op + "|" + inputs.dump());
    r.value = value;
    r.stderr_ = se;
    r.seed = seed_;
    r.pass = pass;
    out_->records.push_back(std::move(r));
  }
  SuiteResult* out_;
  std::uint64_t seed_;
};

ScenarioParams params_from(const Config& cfg) {
  return ScenarioParams::from_json(cfg.contains("params") ? cfg.at("params").dump() : "{}");
}

DistributionSpec dist_from(const Config& cfg, const char* key, int d, const DistributionSpec& def) {
  if (!cfg.contains(key)) return def;
  return DistributionSpec::from_json(cfg.at(key).dump(), d);
}

// An explicit list of points, or a law sampled with n points.
ParticleEnsemble ensemble_from(const Config& cfg, const char* key, int d, int n,
                               const DistributionSpec& def, std::uint64_t seed) {
  if (cfg.contains(key) && cfg.at(key).is_array()) {
    return ensemble_from_json(cfg.at(key).dump());
  }
  return sample_iid(dist_from(cfg, key, d, def), n, d, seed);
}

SliceSettings slice_from(const Config& cfg) {
  SliceSettings s;
  s.w2_points = opt(cfg, "w2_points", s.w2_points);
  s.derivative_tolerance = opt(cfg, "derivative_tolerance", s.derivative_tolerance);
  return s;
}

SimConfig sim_from(const Config& cfg, std::uint64_t seed, double t1_default) {
  SimConfig s;
  s.steps = opt(cfg, "steps", 50);
  s.t0 = opt(cfg, "t0", 0.0);
  s.t1 = opt(cfg, "t1", t1_default);
  s.epsilon = opt(cfg, "epsilon", 0.0);
  s.seed = seed;
  const std::string keying = opt<std::string>(cfg, "keying", "particle_index");
  if (keying == "sorted_rank") {
    s.keying = NoiseKeying::kSortedRank;
  } else {
    require(keying == "particle_index", ErrorCode::kConfig, "unknown noise keying: " + keying);
  }
  s.validate();
  return s;
}

std::string csv_series(const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
  os << "\n";
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << r[c];
    os << "\n";
  }
  return os.str();
}

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

SuiteResult transport_oracle_suite(const Config& cfg, std::uint64_t seed) {
  SuiteResult out;
  Recorder rec(&out, seed);
  const int pairs = opt(cfg, "oracle_pairs", 100);
  const int max_n = opt(cfg, "oracle_max_n", 8);
  require(pairs >= 0 && max_n >= 1 && max_n <= 9, ErrorCode::kConfig,
          "oracle: need pairs >= 0 and 1 <= max_n <= 9");
  double worst = 0.0;
  for (int q = 0; q < pairs; ++q) {
    Stream s(StreamKey{seed, Channel::kAuxiliary, 0, static_cast<std::uint32_t>(q), 1});
    const int n = 1 + static_cast<int>(s.uniform() * max_n);
    std::vector<double> a(static_cast<std::size_t>(n)), b(a.size());
    for (auto& v : a) v = 3.0 * s.normal();
    for (auto& v : b) v = 1.0 + 2.0 * s.normal();
    const double sorted = w2_discrete_oracle(a, b);
    std::vector<int> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      KahanSum c;
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[static_cast<std::size_t>(perm[i])];
        c.add(diff * diff);
      }
      best = std::min(best, c.value() / n);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const double brute = std::sqrt(best);
    worst = std::max(worst, std::abs(sorted - brute) / std::max(1.0, brute));
  }
  rec.metric("oracle_pairs", pairs);
  rec.metric("oracle_max_rel_diff", worst);
  rec.check("w2_sorted_vs_bruteforce", {{"pairs", pairs}, {"max_n", max_n}}, worst, 0.0,
            worst <= 1e-12);
  return out;
}

SuiteResult metric_suite(const Config& cfg, std::uint64_t seed) {
  SuiteResult out;
  Recorder rec(&out, seed);
  const int d = opt(cfg, "d", 2);
  const int n = opt(cfg, "n", 16);
  const double sigma = opt(cfg, "sigma", 0.5);
  const int dirs = opt(cfg, "quad", default_direction_count(d));
  const auto quad = SphereQuadrature::make(d, dirs);
  const auto def = DistributionSpec::gaussian(Vec::Zero(d), Vec::Ones(d));
  const ParticleEnsemble mu = ensemble_from(cfg, "mu", d, n, def, derive_seed(seed, 1));
  const ParticleEnsemble nu = cfg.contains("nu")
                                  ? ensemble_from(cfg, "nu", d, n, def, derive_seed(seed, 2))
                                  : mu;
  const SliceSettings s = slice_from(cfg);
  const double ab = sw2(mu, nu, sigma, quad, s);
  const double ba = sw2(nu, mu, sigma, quad, s);
  const json in = {{"d", d}, {"sigma", sigma}, {"quad", dirs}, {"mu", mu.to_rows()},
                   {"nu", nu.to_rows()}};
  rec.metric("sw2", ab);
  rec.metric("sw2_reversed", ba);
  rec.check("sw2", in, ab, 0.0, std::isfinite(ab) && ab >= 0.0);
  rec.check("sw2_symmetry", in, std::abs(ab - ba), 0.0, std::abs(ab - ba) <= 1e-9 * (1.0 + ab));
  rec.add("gauge", in, gauge_g(mu, nu, sigma, quad, s));
  if (opt(cfg, "oracle_pairs", 100) > 0) {
    const SuiteResult o = transport_oracle_suite(cfg, seed);
    out.records.insert(out.records.end(), o.records.begin(), o.records.end());
    out.metrics.insert(o.metrics.begin(), o.metrics.end());
    out.pass = out.pass && o.pass;
  }
  return out;
}

SuiteResult gradient_suite(const Config& cfg, std::uint64_t seed) {
  SuiteResult out;
  Recorder rec(&out, seed);
  const int d = opt(cfg, "d", 2);
  const int n = opt(cfg, "n", 16);
  const double sigma = opt(cfg, "sigma", 0.5);
  const int dirs = opt(cfg, "quad", 128);
  const double h = opt(cfg, "h", 1e-4);
  const double tol = opt(cfg, "tolerance", 1e-3);
  const bool mixed = opt(cfg, "mixed", true);
  const auto quad = SphereQuadrature::make(d, dirs);
  const ParticleEnsemble mu = ensemble_from(
      cfg, "mu", d, n, DistributionSpec::gaussian(Vec::Zero(d), Vec::Ones(d)), derive_seed(seed, 1));
  const ParticleEnsemble nu =
      ensemble_from(cfg, "nu", d, n,
                    DistributionSpec::gaussian(Vec::Constant(d, 0.5), Vec::Constant(d, 1.5)),
                    derive_seed(seed, 2));
  GaugeTarget target(nu, sigma, quad, slice_from(cfg));
  const json in = {{"d", d}, {"n", mu.n()}, {"sigma", sigma}, {"quad", dirs}, {"h", h}};

  // Lifted functional: moving particle i by e_l changes the gauge at rate
  // (1/n) d_mu gauge(x_i)_l.
  double worst = 0.0, num = 0.0, den = 0.0;
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < mu.n(); ++i) {
    const Vec an = target.dmu(mu, mu.point(i));
    for (int l = 0; l < d; ++l) {
      Mat p = mu.points();
      p(l, i) += h;
      const double up = target.sw2_sq(ParticleEnsemble(p));
      p(l, i) -= 2.0 * h;
      const double dn = target.sw2_sq(ParticleEnsemble(p));
      const double fd_sw = mu.n() * (up - dn) / (2.0 * h);
      const double fd = kGaugeScale * fd_sw;
      num += an[l] * fd_sw;
      den += fd_sw * fd_sw;
      const double rel = std::abs(an[l] - fd) / std::max(std::abs(fd), 1e-12);
      worst = std::max(worst, rel);
      rows.push_back({static_cast<double>(i), static_cast<double>(l), an[l], fd, rel});
    }
  }
  const double s_fit = num / den;
  rec.metric("gradient_max_rel_err", worst);
  rec.metric("gauge_scale_fit", s_fit);
  rec.check("dmu_gauge_vs_fd", in, worst, 0.0, worst <= tol);
  rec.add("gauge_scale_fit", in, s_fit);
  out.csv.emplace_back("gradient_check.csv",
                       csv_series({"particle", "coord", "analytic", "finite_difference", "rel_err"},
                                  rows));
  if (mixed) {
    double worst_mixed = 0.0;
    for (int i = 0; i < mu.n(); ++i) {
      const Vec x = mu.point(i);
      const Mat an = target.dxdmu(mu, x);
      Mat fd(d, d);
      for (int l = 0; l < d; ++l) {
        Vec xp = x, xm = x;
        xp[l] += h;
        xm[l] -= h;
        fd.col(l) = (target.dmu(mu, xp) - target.dmu(mu, xm)) / (2.0 * h);
      }
      worst_mixed = std::max(worst_mixed, (an - fd).norm() / std::max(fd.norm(), 1e-12));
    }
    rec.metric("mixed_max_rel_err", worst_mixed);
    rec.check("dxdmu_gauge_vs_fd", in, worst_mixed, 0.0, worst_mixed <= tol);
  }
  return out;
}

SuiteResult h_suite(const Config& cfg, std::uint64_t seed) {
  SuiteResult out;
  Recorder rec(&out, seed);
  const int d = opt(cfg, "d", 2);
  const int n = opt(cfg, "n", 16);
  const double sigma = opt(cfg, "sigma", 0.5);
  const int dirs = opt(cfg, "quad", 128);
  const double h = opt(cfg, "h", 1e-2);
  const auto quad = SphereQuadrature::make(d, dirs);
  const Mat hg = h_gauge(quad);
  const double id_err = (hg - Mat::Identity(d, d) / d).cwiseAbs().maxCoeff();
  const json in = {{"d", d}, {"n", n}, {"sigma", sigma}, {"quad", dirs}, {"h", h}};
  rec.metric("h_identity_err", id_err);
  rec.check("h_gauge_identity", in, id_err, 0.0, id_err <= 1e-14);

  const ParticleEnsemble mu = ensemble_from(
      cfg, "mu", d, n, DistributionSpec::gaussian(Vec::Zero(d), Vec::Ones(d)), derive_seed(seed, 1));
  const ParticleEnsemble nu =
      ensemble_from(cfg, "nu", d, n,
                    DistributionSpec::gaussian(Vec::Constant(d, 0.5), Vec::Constant(d, 1.5)),
                    derive_seed(seed, 2));
  GaugeTarget target(nu, sigma, quad, slice_from(cfg));
  const double g0 = target.gauge(mu);
  double worst = 0.0;
  std::vector<Vec> ws;
  for (int l = 0; l < d; ++l) ws.push_back(Vec::Unit(d, l));
  ws.push_back(Vec::Ones(d) / std::sqrt(static_cast<double>(d)));
  for (const Vec& w : ws) {
    const double up = target.gauge(translate(mu, h * w));
    const double dn = target.gauge(translate(mu, -h * w));
    const double fd = (up - 2.0 * g0 + dn) / (h * h);
    const double an = w.dot(hg * w);
    worst = std::max(worst, std::abs(fd - an) / std::abs(an));
  }
  rec.metric("h_fd_rel_err", worst);
  rec.check("h_gauge_vs_translation_fd", in, worst, 0.0, worst <= 1e-2);
  return out;
}

namespace {

CandidateSet random_candidates(Stream& s, int count, int n, int d, double lambda, double delta,
                               double horizon) {
  CandidateSet cs;
  cs.lambda = lambda;
  cs.delta = delta;
  cs.horizon = horizon;
  for (int k = 0; k < count; ++k) {
    const double t = horizon * s.uniform();
    Mat pts(d, n);
    Vec center(d);
    for (int l = 0; l < d; ++l) center[l] = 2.0 * s.normal();
    for (int i = 0; i < n; ++i) {
      for (int l = 0; l < d; ++l) pts(l, i) = center[l] + s.normal();
    }
    cs.items.push_back(Candidate{t, ParticleEnsemble(pts), s.uniform()});
  }
  cs.start = 0;
  for (int k = 1; k < count; ++k) {
    if (cs.items[static_cast<std::size_t>(k)].g > cs.items[static_cast<std::size_t>(cs.start)].g) {
      cs.start = k;
    }
  }
  return cs;
}

}  // namespace

SuiteResult variational_suite(const Config& cfg, std::uint64_t seed) {
  SuiteResult out;
  Recorder rec(&out, seed);
  const int sets = opt(cfg, "sets", 200);
  const int phi_configs = opt(cfg, "phi_configs", 20);
  const int count = opt(cfg, "candidates", 6);
  const int n = opt(cfg, "n", 3);
  const int d = opt(cfg, "d", 2);
  const double lambda = opt(cfg, "lambda", 0.5);
  const double delta = opt(cfg, "delta", 1.0);
  const double horizon = opt(cfg, "horizon", 1.0);
  const int dirs = opt(cfg, "quad", 16);
  SliceSettings slice = slice_from(cfg);
  slice.w2_points = opt(cfg, "w2_points", 128);
  const auto quad = SphereQuadrature::make(d, dirs);
  const json in = {{"sets", sets}, {"candidates", count}, {"n", n}, {"d", d},
                   {"lambda", lambda}, {"delta", delta}, {"quad", dirs}};

  int passed = 0;
  double worst_ratio = 0.0;
  for (int q = 0; q < sets; ++q) {
    Stream s(StreamKey{seed, Channel::kAuxiliary, 1, static_cast<std::uint32_t>(q), 0});
    const CandidateSet cs = random_candidates(s, count, n, d, lambda, delta, horizon);
    const VariationalResult r = borwein_preiss(cs, quad, 64, slice);
    if (r.certificate.all() && r.terminated) ++passed;
    worst_ratio = std::max(worst_ratio, r.certificate.item1_worst_ratio);
  }
  rec.metric("certificate_sets", sets);
  rec.metric("certificate_passed", passed);
  rec.metric("certificate_worst_item1_ratio", worst_ratio);
  rec.check("borwein_preiss_certificate", in, passed, 0.0, passed == sets);

  int phi_passed = 0, phi_points = 0;
  std::vector<std::vector<double>> rows;
  for (int q = 0; q < phi_configs; ++q) {
    Stream s(StreamKey{seed, Channel::kAuxiliary, 2, static_cast<std::uint32_t>(q), 0});
    const CandidateSet cs = random_candidates(s, count, n, d, lambda, delta, horizon);
    const VariationalResult r = borwein_preiss(cs, quad, 64, slice);
    bool ok = true;
    for (int k : {r.tilde, (r.tilde + 1) % count}) {
      const auto& c = cs.items[static_cast<std::size_t>(k)];
      const PhiDerivativeBounds b = phi_delta_derivative_bounds(r.anchors, c.t, c.mu, quad, slice);
      ok = ok && b.holds();
      ++phi_points;
      rows.push_back({static_cast<double>(q), static_cast<double>(k), b.dt_abs, b.dt_bound,
                      b.dmu_l2, b.dmu_bound, b.dxdmu_l2, b.dxdmu_bound, b.h_norm, b.h_bound});
    }
    if (ok) ++phi_passed;
  }
  if (phi_configs > 0) {
    rec.metric("phi_configs", phi_configs);
    rec.metric("phi_passed", phi_passed);
    rec.check("phi_delta_derivative_bounds", in, phi_passed, 0.0, phi_passed == phi_configs);
    out.csv.emplace_back("phi_bounds.csv",
                         csv_series({"config", "candidate", "dt", "dt_bound", "dmu_l2",
                                     "dmu_bound", "dxdmu_l2", "dxdmu_bound", "h", "h_bound"},
                                    rows));
  }
  return out;
}

SuiteResult simulate_suite(const Config& cfg, std::uint64_t seed) {
  SuiteResult out;
  Recorder rec(&out, seed);
  const std::string name = opt<std::string>(cfg, "scenario", "mean_reversion_mf");
  const ScenarioParams params = params_from(cfg);
  const auto coeffs = scenario(name, params);
  const int n = opt(cfg, "n", 1000);
  const int paths = opt(cfg, "paths", 4);
  const SimConfig sim = sim_from(cfg, seed, params.horizon);
  const ParticleEnsemble init =
      sample_iid(dist_from(cfg, "init", params.d,
                           DistributionSpec::gaussian(Vec::Zero(params.d), Vec::Ones(params.d))),
                 n, params.d, derive_seed(seed, 1));
  Vec a = cfg.contains("action") ? Vec(Eigen::Map<const Vec>(
                                       cfg.at("action").get<std::vector<double>>().data(),
                                       static_cast<Eigen::Index>(cfg.at("action").size())))
                                 : coeffs->actions.vertices().front();
  const StepControl policy = StepControl::constant(sim.t0, sim.t1, a);
  const CostEstimate c = cost_j(*coeffs, init, policy, sim, paths);
  const json in = {{"scenario", name}, {"n", n}, {"paths", paths}, {"steps", sim.steps},
                   {"action", vec_json(a)}};
  rec.check("cost_j", in, c.mean, c.stderr_, std::isfinite(c.mean));
  rec.metric("cost_mean", c.mean);
  rec.metric("cost_stderr", c.stderr_);
  if (opt(cfg, "csv", false)) {
    SimConfig one = sim;
    one.record_trajectories = true;
    const PathBundle b = simulate(*coeffs, init, policy, one);
    std::ostringstream os;
    write_trajectory_csv(b, os);
    out.csv.emplace_back("trajectories.csv", os.str());
  }
  for (const auto& check : opt_list<std::string>(cfg, "checks", {})) {
    SuiteResult sub;
    if (check == "ito") {
      sub = ito_suite(cfg.value("ito", json::object()), seed);
    } else if (check == "moments") {
      sub = moment_suite(cfg.value("moments", json::object()), seed);
    } else {
      fail(ErrorCode::kConfig, "unknown simulate check: " + check);
    }
    out.records.insert(out.records.end(), sub.records.begin(), sub.records.end());
    out.metrics.insert(sub.metrics.begin(), sub.metrics.end());
    out.pass = out.pass && sub.pass;
  }
  return out;
}

namespace {

std::shared_ptr<FunctionCoefficients> constant_coefficients(int d, const Vec& b, double s,
                                                            double s0) {
  auto c = std::make_shared<FunctionCoefficients>();
  c->name = "constant";
  c->d = d;
  c->actions = ActionSet::box(Vec::Zero(d), Vec::Zero(d));
  c->b_fn = [b](double, const Vec&, const ParticleEnsemble&, const Vec&) { return b; };
  c->sigma_fn = [d, s](double, const Vec&, const Vec&) { return (s * Mat::Identity(d, d)).eval(); };
  c->sigma0_fn = [d, s0](double) { return (s0 * Mat::Identity(d, d)).eval(); };
  c->dep_b = c->dep_sigma = c->dep_f = c->dep_g = Dependence{false, false, false};
  c->running_cost_zero = true;
  c->k_bound = std::max({b.norm(), std::abs(s) * std::sqrt(d), std::abs(s0) * std::sqrt(d)});
  return c;
}

}  // namespace

SuiteResult ito_suite(const Config& cfg, std::uint64_t seed) {
  SuiteResult out;
  Recorder rec(&out, seed);
  const int d = opt(cfg, "d", 2);
  const int n = opt(cfg, "n", 10000);
  const int paths = opt(cfg, "paths", 64);
  SimConfig sim = sim_from(cfg, seed, 1.0);
  sim.steps = opt(cfg, "steps", 100);
  const ParticleEnsemble init = sample_iid(
      dist_from(cfg, "init", d, DistributionSpec::gaussian(Vec::Zero(d), Vec::Constant(d, 0.5))),
      n, d, derive_seed(seed, 1));
  const StepControl policy = StepControl::constant(sim.t0, sim.t1, Vec::Zero(d));
  Vec c(d), p(d);
  for (int l = 0; l < d; ++l) {
    c[l] = 0.3 - 0.5 * l;
    p[l] = 1.0 + l;
  }
  struct Case {
    std::string name;
    std::shared_ptr<FunctionCoefficients> coeffs;
    TestFunction u;
  };
  const std::vector<Case> cases = {
      {"linear_mean", constant_coefficients(d, c, 0.5, 0.5), linear_mean_function(p)},
      {"second_moment", constant_coefficients(d, Vec::Zero(d), 1.0, 0.0),
       second_moment_function(d)},
      {"squared_mean", constant_coefficients(d, Vec::Zero(d), 0.0, 1.0),
       squared_mean_function(d)},
  };
  int ok_count = 0;
  for (const auto& cs : cases) {
    const ItoReport r = ito_expectation_check(*cs.coeffs, init, cs.u, policy, sim, paths);
    const double allowed = 3.0 * r.stderr_ + 2.0 * sim.dt();
    const json in = {{"case", cs.name}, {"n", n}, {"steps", sim.steps}, {"paths", paths}};
    rec.add("ito_lhs_" + cs.name, in, r.lhs);
    rec.add("ito_rhs_" + cs.name, in, r.rhs);
    if (rec.check("ito_gap_" + cs.name, in, r.gap, r.stderr_, std::abs(r.gap) <= allowed)) {
      ++ok_count;
    }
    rec.metric("ito_gap_" + cs.name, r.gap);
    rec.metric("ito_stderr_" + cs.name, r.stderr_);
    rec.metric("ito_allowed_" + cs.name, allowed);
  }
  rec.metric("ito_cases_passed", ok_count);
  return out;
}

SuiteResult moment_suite(const Config& cfg, std::uint64_t seed) {
  SuiteResult out;
  Recorder rec(&out, seed);
  const int d = opt(cfg, "d", 2);
  const int n = opt(cfg, "n", 2000);
  const int paths = opt(cfg, "paths", 8);
  const double p = opt(cfg, "p", 2.0);
  const auto hs = opt_list<double>(cfg, "h", {0.1, 0.05, 0.025});
  SimConfig sim = sim_from(cfg, seed, *std::max_element(hs.begin(), hs.end()));
  sim.steps = opt(cfg, "steps", 80);
  const ParticleEnsemble init = sample_iid(
      dist_from(cfg, "init", d, DistributionSpec::gaussian(Vec::Zero(d), Vec::Ones(d))), n, d,
      derive_seed(seed, 1));
  Vec shift = Vec::Zero(d);
  shift[0] = 0.3;
  if (d > 1) shift[1] = 0.4;
  const auto coeffs = constant_coefficients(d, Vec::Zero(d), 1.0, 0.0);
  const StepControl policy = StepControl::constant(sim.t0, sim.t1, Vec::Zero(d));

  std::vector<PathBundle> a(static_cast<std::size_t>(paths)), b(a.size());
  const ParticleEnsemble moved = translate(init, shift);
  parallel_for(a.size(), [&](std::size_t q) {
    SimConfig c = sim;
    c.path = static_cast<std::uint32_t>(q);
    c.record_trajectories = true;
    a[q] = simulate(*coeffs, init, policy, c);
    b[q] = simulate(*coeffs, moved, policy, c);
  });
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  bool finite = true;
  std::vector<std::vector<double>> rows;
  MomentReport last;
  for (double h : hs) {
    const MomentReport r = moment_checks(a, b, p, h);
    finite = finite && r.finite;
    lo = std::min(lo, r.increment_constant);
    hi = std::max(hi, r.increment_constant);
    rows.push_back({h, r.increment_constant, r.growth_constant, r.lipschitz_constant});
    rec.add("increment_constant", {{"h", h}, {"n", n}, {"paths", paths}}, r.increment_constant);
    last = r;
  }
  const json in = {{"d", d}, {"n", n}, {"paths", paths}, {"steps", sim.steps}, {"p", p}};
  const double doob = 4.0 * d;
  rec.metric("increment_constant_min", lo);
  rec.metric("increment_constant_max", hi);
  rec.metric("growth_constant", last.growth_constant);
  rec.metric("lipschitz_constant", last.lipschitz_constant);
  rec.check("moments_finite", in, finite ? 1.0 : 0.0, 0.0, finite);
  rec.check("increment_constant_bounded", in, hi, 0.0, hi <= doob);
  rec.check("increment_constant_stable", in, hi / lo, 0.0, hi / lo <= 1.5);
  rec.check("lipschitz_affine_flow", in, last.lipschitz_constant, 0.0,
            std::abs(last.lipschitz_constant - 1.0) <= 1e-9);
  out.csv.emplace_back("moments.csv",
                       csv_series({"h", "increment_constant", "growth_constant",
                                   "lipschitz_constant"},
                                  rows));

  // Same estimates for a mean-field drift; reported, not asserted beyond finiteness.
  ScenarioParams mp;
  mp.d = d;
  mp.horizon = sim.t1;
  const auto mf = scenario("mean_reversion_mf", mp);
  const MomentReport r =
      moment_sweep(*mf, init, shift, StepControl::constant(sim.t0, sim.t1, Vec::Zero(d)), sim,
                   std::max(2, paths / 4), p, hs.front());
  rec.metric("mf_growth_constant", r.growth_constant);
  rec.metric("mf_lipschitz_constant", r.lipschitz_constant);
  rec.metric("mf_increment_constant", r.increment_constant);
  rec.check("mean_field_moments_finite", in, r.lipschitz_constant, 0.0, r.finite);
  return out;
}

SuiteResult mollify_suite(const Config& cfg, std::uint64_t seed) {
  SuiteResult out;
  Recorder rec(&out, seed);
  MollifierSpec base;
  base.samples = opt(cfg, "samples", 4096);
  base.seed = seed;
  const auto ms = opt_list<int>(cfg, "m", {2, 4, 8, 16, 32});
  const int pairs = opt(cfg, "pairs", 100);
  const json in = {{"samples", base.samples}, {"m", ms}, {"pairs", pairs}};

  // Constant coefficients: exact.
  {
    const Vec c = Vec::Constant(2, 0.7);
    auto k = constant_coefficients(2, c, 0.0, 0.0);
    const MollifiedVector v = mollified_b(*k, base, 0, 0.3, Mat::Random(2, 3), Vec::Zero(2));
    const double err = (v.value - c).norm();
    rec.check("mollified_constant_exact", in, err, 0.0, err == 0.0);
  }
  // Space term at the kink of a clamp.
  ScenarioParams cp;
  cp.d = 1;
  const auto clamp = clamp_coefficients(cp);
  MollifyProbe kink;
  kink.t = 0.5;
  kink.xbar = Mat::Constant(1, 1, cp.clamp_level);
  kink.a = Vec::Zero(1);
  const RateTable space = mollify_rate_sweep(*clamp, base, ms, {kink});
  rec.metric("space_slope", space.slope);
  rec.check("space_rate_slope", in, space.slope, 0.0, space.slope >= -1.25 && space.slope <= -0.75);
  rec.check("space_error_within_bound", in, space.rows.back().sup_error, space.rows.back().stderr_,
            space.bounded);

  // Time term at the cusp of |t - T/2|^{1/2}.
  ScenarioParams tp;
  tp.d = 1;
  const auto trig = scenario("bounded_trig", tp);
  MollifyProbe cusp;
  cusp.t = 0.5 * tp.horizon;
  cusp.xbar = Mat::Zero(1, 2);
  cusp.a = Vec::Zero(1);
  const RateTable time = mollify_rate_sweep(*trig, base, ms, {cusp});
  rec.metric("time_slope", time.slope);
  rec.check("time_rate_slope", in, time.slope, 0.0, time.slope >= -0.7 && time.slope <= -0.3);
  rec.check("time_error_within_bound", in, time.rows.back().sup_error, time.rows.back().stderr_,
            time.bounded);
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < ms.size(); ++k) {
    rows.push_back({static_cast<double>(ms[k]), space.rows[k].sup_error, space.rows[k].bound,
                    time.rows[k].sup_error, time.rows[k].bound});
  }
  out.csv.emplace_back("mollify_rates.csv",
                       csv_series({"m", "space_error", "space_bound", "time_error", "time_bound"},
                                  rows));

  // Uniform bound and Lipschitz transfer on random probes of a mean-field set.
  ScenarioParams mp;
  mp.d = 2;
  const auto mf = scenario("mean_reversion_mf", mp);
  const auto tr2 = scenario("bounded_trig", mp);
  MollifierSpec lip = base;
  lip.m = 4;
  lip.samples = opt(cfg, "pair_samples", 512);
  double worst_bound = 0.0, worst_excess = -std::numeric_limits<double>::infinity();
  int lip_ok = 0;
  const int n = 4;
  for (int q = 0; q < pairs; ++q) {
    Stream s(StreamKey{seed, Channel::kAuxiliary, 3, static_cast<std::uint32_t>(q), 0});
    Mat x(2, n), y(2, n);
    for (int i = 0; i < n; ++i) {
      for (int l = 0; l < 2; ++l) {
        x(l, i) = 2.0 * s.normal();
        y(l, i) = x(l, i) + 0.3 * s.normal();
      }
    }
    const int i = static_cast<int>(s.uniform() * n) % n;
    const Vec a = Vec::Constant(2, 2.0 * s.uniform() - 1.0);
    const double t = s.uniform();
    for (const CoefficientSet* c : {mf.get(), tr2.get()}) {
      const double kb = c->k_bound;
      worst_bound = std::max(
          {worst_bound, mollified_b(*c, lip, i, t, x, a).value.norm() / kb,
           std::abs(mollified_f(*c, lip, i, t, x, a).value) / kb,
           std::abs(mollified_g(*c, lip, i, x).value) / kb});
    }
    const MollifiedScalar gx = mollified_g(*mf, lip, i, x);
    const MollifiedScalar gy = mollified_g(*mf, lip, i, y);
    KahanSum avg;
    for (int j = 0; j < n; ++j) avg.add((x.col(j) - y.col(j)).norm());
    const double rhs = mf->k_bound * ((x.col(i) - y.col(i)).norm() + avg.value() / n);
    const double lhs = std::abs(gx.value - gy.value);
    const double slack = 3.0 * std::hypot(gx.stderr_, gy.stderr_);
    worst_excess = std::max(worst_excess, lhs - rhs);
    if (lhs <= rhs + slack) ++lip_ok;
  }
  rec.metric("uniform_bound_ratio", worst_bound);
  rec.metric("lipschitz_transfer_passed", lip_ok);
  rec.check("mollified_uniform_bound", in, worst_bound, 0.0, worst_bound <= 1.0);
  rec.check("lipschitz_transfer", in, lip_ok, 0.0, lip_ok == pairs);
  rec.add("lipschitz_transfer_worst_excess", in, worst_excess);
  return out;
}

namespace {

PolicySearch search_from(const Config& cfg) {
  PolicySearch s;
  s.pieces = opt(cfg, "pieces", 1);
  return s;
}

}  // namespace

SuiteResult value_suite(const Config& cfg, std::uint64_t seed) {
  SuiteResult out;
  Recorder rec(&out, seed);
  const std::string name = opt<std::string>(cfg, "scenario", "lq_drift");
  ScenarioParams params = params_from(cfg);
  if (!cfg.contains("params") || !cfg.at("params").contains("p")) {
    params.p = Vec(params.d);
    for (int l = 0; l < params.d; ++l) params.p[l] = l % 2 == 0 ? 0.5 : -0.3;
  }
  const auto coeffs = scenario(name, params);
  const int n = opt(cfg, "n", 2048);
  const int paths = opt(cfg, "paths", 64);
  SimConfig sim = sim_from(cfg, seed, params.horizon);
  sim.steps = opt(cfg, "steps", 50);
  const int d = params.d;
  const ParticleEnsemble init = sample_iid(
      dist_from(cfg, "init", d,
                DistributionSpec::gaussian(Vec::Constant(d, 0.2), Vec::Constant(d, 0.5))),
      n, d, derive_seed(seed, 1));
  const ValueEstimate v = value_estimate(*coeffs, init, sim, paths, search_from(cfg));
  const json in = {{"scenario", name}, {"n", n}, {"paths", paths}, {"steps", sim.steps},
                   {"p", vec_json(params.payoff())}};
  rec.metric("value", v.value);
  rec.metric("value_stderr", v.stderr_);
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < v.trace.size(); ++k) {
    rows.push_back({static_cast<double>(k), v.trace[k].mean, v.trace[k].stderr_});
  }
  out.csv.emplace_back("value_trace.csv", csv_series({"policy", "mean", "stderr"}, rows));
  if (name == "lq_drift") {
    const Vec p = params.payoff();
    const double closed = p.dot(init.mean()) + (sim.t1 - sim.t0) * lq_hamiltonian_max(params);
    const double allowed = 3.0 * v.stderr_ + 0.05 * p.lpNorm<1>();
    rec.metric("closed_form", closed);
    rec.metric("abs_err", std::abs(v.value - closed));
    rec.metric("allowed", allowed);
    rec.check("value_vs_closed_form", in, v.value, v.stderr_,
              std::abs(v.value - closed) <= allowed);
    const Vec best = v.best_policy.action(sim.t0, init.mean());
    bool sign_ok = true;
    for (int l = 0; l < d; ++l) {
      const double want = p[l] > 0 ? params.action_hi : params.action_lo;
      if (p[l] != 0.0 && best[l] != want) sign_ok = false;
    }
    rec.metric("sign_vertex", sign_ok ? 1.0 : 0.0);
    rec.check("optimizer_sign_vertex", in, sign_ok ? 1.0 : 0.0, 0.0, sign_ok);
  } else {
    rec.check("value", in, v.value, v.stderr_, std::isfinite(v.value));
  }
  return out;
}

namespace {

struct FdSetup {
  std::shared_ptr<const CoefficientSet> coeffs;
  ScenarioParams params;
  DistributionSpec mu;
  SimConfig sim;
  int paths = 0;
  MollifierSpec moll;
};

FdSetup fd_setup(const Config& cfg, std::uint64_t seed, int default_paths, int default_steps) {
  FdSetup s;
  s.params = params_from(cfg);
  s.coeffs = scenario(opt<std::string>(cfg, "scenario", "lq_drift"), s.params);
  s.mu = dist_from(cfg, "init", s.params.d,
                   DistributionSpec::gaussian(Vec::Constant(s.params.d, 0.2),
                                              Vec::Constant(s.params.d, 0.5)));
  s.sim = sim_from(cfg, seed, s.params.horizon);
  s.sim.steps = opt(cfg, "steps", default_steps);
  s.paths = opt(cfg, "paths", default_paths);
  s.moll.m = opt(cfg, "m_smooth", 32);
  s.moll.samples = opt(cfg, "samples", 256);
  s.moll.seed = derive_seed(seed, 9);
  return s;
}

}  // namespace

SuiteResult eps_suite(const Config& cfg, std::uint64_t seed) {
  SuiteResult out;
  Recorder rec(&out, seed);
  const FdSetup s = fd_setup(cfg, seed, 32, 20);
  const auto eps = opt_list<double>(cfg, "eps", {0.4, 0.2, 0.1, 0.05});
  FdApproxConfig fd;
  fd.n = opt(cfg, "n", 256);
  fd.mollifier = s.moll;
  fd.resamples = opt(cfg, "resamples", 1);
  fd.t = s.sim.t0;
  const PolicySearch search = search_from(cfg);
  fd.epsilon = 0.0;
  const MeanStderr v0 = value_fd_approx(s.coeffs, s.mu, fd, s.sim, s.paths, search);
  const json in = {{"n", fd.n}, {"paths", s.paths}, {"steps", s.sim.steps},
                   {"m", s.moll.m}, {"eps", eps}};
  rec.add("v_eps0", in, v0.mean, v0.stderr_);
  std::vector<double> xs, ys;
  std::vector<std::vector<double>> rows;
  for (double e : eps) {
    fd.epsilon = e;
    const MeanStderr v = value_fd_approx(s.coeffs, s.mu, fd, s.sim, s.paths, search);
    xs.push_back(e);
    ys.push_back(std::abs(v.mean - v0.mean));
    rows.push_back({e, v.mean, v.stderr_, ys.back()});
    rec.add("v_eps", {{"eps", e}, {"n", fd.n}}, v.mean, v.stderr_);
  }
  const LineFit origin = fit_through_origin(xs, ys);
  const LineFit free = fit_line(xs, ys);
  rec.metric("slope", origin.slope);
  rec.metric("r_squared", origin.r_squared);
  rec.metric("intercept", free.intercept);
  rec.check("eps_linearity_r2", in, origin.r_squared, 0.0, origin.r_squared >= 0.9);
  out.csv.emplace_back("eps_sweep.csv",
                       csv_series({"eps", "value", "stderr", "abs_diff"}, rows));

  // Near-identity mollification of smooth LQ coefficients.
  const ParticleEnsemble init = sample_iid(s.mu, fd.n, s.params.d, derive_seed(seed, 0));
  const ValueEstimate plain = value_estimate(*s.coeffs, init, s.sim, s.paths, search);
  fd.epsilon = 0.0;
  const double diff = std::abs(plain.value - v0.mean);
  rec.metric("mollified_vs_plain", diff);
  rec.check("mollified_vs_plain", in, diff, std::hypot(plain.stderr_, v0.stderr_),
            diff <= 3.0 * std::hypot(plain.stderr_, v0.stderr_) + 1e-9);
  return out;
}

SuiteResult n_sweep_suite(const Config& cfg, std::uint64_t seed) {
  SuiteResult out;
  Recorder rec(&out, seed);
  const FdSetup s = fd_setup(cfg, seed, 8, 10);
  const auto ns = opt_list<int>(cfg, "ns", {16, 32, 64, 128, 256});
  const int resamples = opt(cfg, "resamples", 8);
  const int ref_n = opt(cfg, "reference_n", 4096);
  const PolicySearch search = search_from(cfg);
  const ParticleEnsemble ref_init = sample_iid(s.mu, ref_n, s.params.d, derive_seed(seed, 77));
  const ValueEstimate ref = value_estimate(*s.coeffs, ref_init, s.sim, s.paths, search);
  const json in = {{"ns", ns}, {"resamples", resamples}, {"reference_n", ref_n}};
  rec.add("reference_value", in, ref.value, ref.stderr_);
  std::vector<double> lx, ly;
  std::vector<std::vector<double>> rows;
  for (int n : ns) {
    FdApproxConfig fd;
    fd.n = n;
    fd.mollifier = s.moll;
    fd.t = s.sim.t0;
    KahanSum sq;
    for (int r = 0; r < resamples; ++r) {
      // Common noise shared with the reference; only the initial draw varies.
      fd.sample_seed = derive_seed(seed, 1000 + static_cast<std::uint64_t>(r));
      const MeanStderr v = value_fd_approx(s.coeffs, s.mu, fd, s.sim, s.paths, search);
      sq.add((v.mean - ref.value) * (v.mean - ref.value));
    }
    const double rms = std::sqrt(sq.value() / resamples);
    lx.push_back(std::log(static_cast<double>(n)));
    ly.push_back(std::log(rms));
    rows.push_back({static_cast<double>(n), rms});
    rec.add("rms_error", {{"n", n}, {"resamples", resamples}}, rms);
  }
  const LineFit fit = fit_line(lx, ly);
  rec.metric("trend_slope", fit.slope);
  rec.check("n_sweep_trend", in, fit.slope, 0.0, fit.slope < 0.0);
  out.csv.emplace_back("n_sweep.csv", csv_series({"n", "rms_error"}, rows));
  return out;
}

SuiteResult dpp_suite(const Config& cfg, std::uint64_t seed) {
  SuiteResult out;
  Recorder rec(&out, seed);
  const int n = opt(cfg, "n", 256);
  const int paths = opt(cfg, "paths", 32);
  const int inner = opt(cfg, "inner_paths", 16);
  const double s_mid = opt(cfg, "s_mid", 0.5);
  ScenarioParams lq = params_from(cfg);
  SimConfig sim = sim_from(cfg, seed, lq.horizon);
  sim.steps = opt(cfg, "steps", 20);
  const int d = lq.d;
  const ParticleEnsemble init = sample_iid(
      dist_from(cfg, "init", d,
                DistributionSpec::gaussian(Vec::Constant(d, 0.2), Vec::Constant(d, 0.5))),
      n, d, derive_seed(seed, 1));
  const PolicySearch search = search_from(cfg);
  const json in = {{"n", n}, {"paths", paths}, {"inner_paths", inner}, {"s_mid", s_mid},
                   {"steps", sim.steps}};

  const auto lq_coeffs = scenario("lq_drift", lq);
  const DppReport a = dpp_residual(*lq_coeffs, init, s_mid, sim, paths, inner, search);
  rec.add("dpp_lhs_lq", in, a.lhs);
  rec.add("dpp_rhs_lq", in, a.rhs);
  rec.check("dpp_gap_lq", in, a.gap, a.stderr_, std::abs(a.gap) <= 3.0 * a.stderr_);
  rec.metric("lq_gap", a.gap);
  rec.metric("lq_stderr", a.stderr_);

  ScenarioParams single = lq;
  single.action_list = {Vec::Constant(d, 0.25)};
  const auto mf = scenario("mean_reversion_mf", single);
  const DppReport b = dpp_residual(*mf, init, s_mid, sim, paths, inner, search);
  rec.add("dpp_lhs_single_action", in, b.lhs);
  rec.add("dpp_rhs_single_action", in, b.rhs);
  rec.check("dpp_gap_single_action", in, b.gap, b.stderr_, std::abs(b.gap) <= 3.0 * b.stderr_);
  rec.metric("single_gap", b.gap);
  rec.metric("single_stderr", b.stderr_);
  return out;
}

SuiteResult hjb_suite(const Config& cfg, std::uint64_t seed) {
  SuiteResult out;
  Recorder rec(&out, seed);
  ScenarioParams params = params_from(cfg);
  if (!cfg.contains("params") || !cfg.at("params").contains("p")) {
    params.p = Vec(params.d);
    for (int l = 0; l < params.d; ++l) params.p[l] = l % 2 == 0 ? 0.5 : -0.3;
  }
  const int probes = opt(cfg, "probes", 20);
  const int n = opt(cfg, "n", 8);
  const double kappa = opt(cfg, "bump", 1.0);
  const auto coeffs = scenario("lq_drift", params);
  const double t1 = params.horizon;
  const TestFunction u = lq_closed_form(params, t1);
  const auto grid = coeffs->actions.grid(opt(cfg, "action_grid", 5));
  std::vector<ViscosityProbe> pr;
  for (int q = 0; q < probes; ++q) {
    Stream s(StreamKey{seed, Channel::kAuxiliary, 4, static_cast<std::uint32_t>(q), 0});
    const double t = t1 * (0.1 + 0.8 * s.uniform());
    Vec center(params.d);
    for (int l = 0; l < params.d; ++l) center[l] = s.normal();
    pr.push_back({t, sample_iid(DistributionSpec::gaussian(center, Vec::Constant(params.d, 0.5)),
                                n, params.d, derive_seed(seed, 100 + static_cast<std::uint64_t>(q)))});
  }
  ViscosityConfig vc;
  vc.delta = opt(cfg, "delta", 0.1);
  vc.directions = opt(cfg, "quad", 0);
  const json in = {{"probes", probes}, {"n", n}, {"delta", vc.delta}, {"bump", kappa},
                   {"p", vec_json(params.payoff())}};

  double worst = 0.0;
  for (const auto& p : pr) worst = std::max(worst, std::abs(hjb_residual(*coeffs, u, p.t, p.mu, grid)));
  rec.metric("lq_max_abs_residual", worst);
  rec.check("hjb_residual_lq_closed_form", in, worst, 0.0, worst <= 1e-12);

  const ViscosityReport exact = viscosity_check(*coeffs, u, pr, grid, vc);
  rec.metric("closed_form_sub_pass", exact.sub_pass);
  rec.metric("closed_form_super_pass", exact.super_pass);
  rec.check("viscosity_closed_form", in, exact.sub_pass + exact.super_pass, 0.0,
            exact.all_sub() && exact.all_super());

  vc.check_super = false;
  const ViscosityReport bumped = viscosity_check(*coeffs, add_time_bump(u, kappa, t1), pr, grid, vc);
  const int detected = probes - bumped.sub_pass;
  rec.metric("negative_control_detected", detected);
  rec.check("viscosity_negative_control", in, detected, 0.0, detected == probes);
  return out;
}

SuiteResult rates_suite(const Config& cfg, std::uint64_t seed) {
  SuiteResult out;
  Recorder rec(&out, seed);
  const int d = opt(cfg, "d", 1);
  require(d == 1, ErrorCode::kConfig, "rates: only d = 1 has an exact W1 evaluator");
  const auto ns = opt_list<int>(cfg, "ns", {32, 64, 128, 256, 512, 1024, 2048, 4096});
  const int reps = opt(cfg, "reps", 64);
  std::vector<double> lx, ly;
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    const int n = ns[k];
    std::vector<double> w(static_cast<std::size_t>(reps));
    parallel_for(w.size(), [&](std::size_t r) {
      const ParticleEnsemble e = sample_iid(DistributionSpec::gaussian(Vec::Zero(1), Vec::Ones(1)),
                                            n, 1, derive_seed(seed, k * 100003 + r));
      const std::vector<double> v(e.points().data(), e.points().data() + n);
      w[r] = w1_to_standard_normal(v);
    });
    const MeanStderr ms = mean_and_stderr(w);
    lx.push_back(std::log(static_cast<double>(n)));
    ly.push_back(std::log(ms.mean));
    rows.push_back({static_cast<double>(n), ms.mean, ms.stderr_});
    rec.add("mean_w1", {{"n", n}, {"reps", reps}}, ms.mean, ms.stderr_);
  }
  const LineFit fit = fit_line(lx, ly);
  rec.metric("slope", fit.slope);
  rec.check("w1_rate_slope", {{"ns", ns}, {"reps", reps}}, fit.slope, 0.0,
            fit.slope >= -0.62 && fit.slope <= -0.38);
  out.csv.emplace_back("rates.csv", csv_series({"n", "mean_w1", "stderr"}, rows));
  return out;
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {
      "metric", "gradient-check", "h-check",   "variational", "simulate",     "mollify-rates",
      "value",  "eps-sweep",      "n-sweep",   "dpp-check",   "hjb-residual", "rates"};
  return names;
}

ExperimentOutput run_experiment(const std::string& subcommand, const std::string& config_text,
                                std::optional<std::uint64_t> seed) {
  using Suite = std::function<SuiteResult(const Config&, std::uint64_t)>;
  static const std::map<std::string, Suite> table = {
      {"metric", metric_suite},       {"gradient-check", gradient_suite},
      {"h-check", h_suite},           {"variational", variational_suite},
      {"simulate", simulate_suite},   {"mollify-rates", mollify_suite},
      {"value", value_suite},         {"eps-sweep", eps_suite},
      {"n-sweep", n_sweep_suite},     {"dpp-check", dpp_suite},
      {"hjb-residual", hjb_suite},    {"rates", rates_suite}};
  const auto it = table.find(subcommand);
  require(it != table.end(), ErrorCode::kUnknownName, "unknown subcommand: " + subcommand);

  Config cfg;
  try {
    cfg = config_text.empty() ? json::object() : json::parse(config_text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("malformed config: ") + e.what());
  }
  require(cfg.is_object(), ErrorCode::kConfig, "config must be a JSON object");
  std::uint64_t s = 1;
  try {
    if (cfg.contains("seed")) s = cfg.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("config seed: ") + e.what());
  }
  if (seed) s = *seed;

  SuiteResult r;
  try {
    r = it->second(cfg, s);
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("config: ") + e.what());
  }

  json doc;
  doc["schema_version"] = 1;
  doc["subcommand"] = subcommand;
  doc["config_hash"] = fnv1a_hex(cfg.dump());
  doc["seed"] = s;
  json records = json::array();
  for (const auto& rec : r.records) {
    json j = {{"operation", rec.operation}, {"inputs_hash", rec.inputs_hash},
              {"value", rec.value},         {"stderr", rec.stderr_},
              {"seed", rec.seed}};
    if (rec.pass) j["pass"] = *rec.pass;
    records.push_back(std::move(j));
  }
  doc["records"] = std::move(records);
  doc["pass"] = r.pass;
  ExperimentOutput out;
  out.results_json = doc.dump(2) + "\n";
  out.csv = std::move(r.csv);
  out.pass = r.pass;
  return out;
}

}  // namespace mfhjb
