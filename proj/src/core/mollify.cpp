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

#include "core/mollify.hpp"

#include <map>
#include <mutex>
#include <optional>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace mfhjb {

namespace {

constexpr int kSamplingTable = 8192;
constexpr std::uint32_t kTimeSlot = 0xffffff00u;

double raw_bump(double u) {
  const double r = 1.0 - u * u;
  return r > 0.0 ? std::exp(-1.0 / r) : 0.0;
}

const BumpKernel& kernel(int nodes) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<BumpKernel>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[nodes];
  if (!slot) slot = std::make_unique<BumpKernel>(nodes);
  return *slot;
}

struct Offsets {
  std::uint64_t seed;
  double scale;  // 1 / m
  const BumpKernel& table;

  double time(std::uint32_t q) const {
    Stream s(StreamKey{seed, Channel::kMollifier, q, kTimeSlot, 0});
    return scale * table.inverse_cdf(s.uniform());
  }
  void space(std::uint32_t q, int j, Eigen::Ref<Vec> out) const {
    Stream s(StreamKey{seed, Channel::kMollifier, q, static_cast<std::uint32_t>(j), 0});
    for (Eigen::Index l = 0; l < out.size(); ++l) out[l] = scale * table.inverse_cdf(s.uniform());
  }
};

// Averages eval(t', x', mu') over antithetic offset pairs. Returns pair means.
template <typename Eval>
std::vector<Vec> pair_means(const Dependence& dep, const MollifierSpec& spec, int i, double t,
                            double horizon, const Mat& xbar, Eval&& eval) {
  const Offsets off{spec.seed, 1.0 / spec.m, kernel(kSamplingTable)};
  const int pairs = spec.samples / 2;
  const int d = static_cast<int>(xbar.rows());
  const int n = static_cast<int>(xbar.cols());
  std::vector<Vec> out(static_cast<std::size_t>(pairs));
  const std::optional<ParticleEnsemble> fixed =
      dep.measure ? std::nullopt : std::optional<ParticleEnsemble>(ParticleEnsemble(xbar));
  parallel_for(out.size(), [&](std::size_t qi) {
    const auto q = static_cast<std::uint32_t>(qi);
    const double s = dep.time ? off.time(q) : 0.0;
    Mat v = Mat::Zero(d, n);
    if (dep.measure) {
      for (int j = 0; j < n; ++j) off.space(q, j, v.col(j));
    } else if (dep.state) {
      off.space(q, i, v.col(i));
    }
    Vec acc;
    for (int sign : {1, -1}) {
      const double tt = std::min(std::max(t - sign * s, 0.0), horizon);
      if (dep.measure) {
        const ParticleEnsemble mu(xbar - sign * v);
        const Vec xi = mu.point(i);
        Vec val = eval(tt, xi, mu);
        acc = acc.size() ? (acc + val).eval() : val;
      } else {
        const Vec xi = xbar.col(i) - sign * v.col(i);
        Vec val = eval(tt, xi, *fixed);
        acc = acc.size() ? (acc + val).eval() : val;
      }
    }
    out[qi] = 0.5 * acc;
  });
  return out;
}

MollifiedVector summarize(const std::vector<Vec>& pm, const MollifierSpec& spec) {
  MollifiedVector r;
  const auto dim = pm.front().size();
  r.value.resize(dim);
  std::vector<double> col(pm.size());
  for (Eigen::Index l = 0; l < dim; ++l) {
    for (std::size_t q = 0; q < pm.size(); ++q) col[q] = pm[q][l];
    const MeanStderr ms = mean_and_stderr(col);
    r.value[l] = ms.mean;
    r.stderr_ = std::max(r.stderr_, ms.stderr_);
  }
  r.flagged = r.stderr_ > spec.stderr_cap;
  return r;
}

void check_args(const CoefficientSet& c, const MollifierSpec& spec, int i, const Mat& xbar) {
  spec.validate();
  require(xbar.rows() == c.d, ErrorCode::kDimensionMismatch, "mollify: xbar has wrong dimension");
  require(i >= 0 && i < xbar.cols(), ErrorCode::kInvalidArgument, "mollify: index out of range");
  require(xbar.allFinite(), ErrorCode::kNonFinite, "mollify: non-finite point");
}

bool any(const Dependence& d) { return d.time || d.state || d.measure; }

}  // namespace

BumpKernel::BumpKernel(int nodes) {
  require(nodes >= 8, ErrorCode::kInvalidArgument, "bump kernel needs at least 8 intervals");
  const auto count = static_cast<std::size_t>(nodes) + 1;
  nodes_.resize(count);
  weights_.resize(count);
  cdf_.resize(count);
  const double h = 2.0 / nodes;
  KahanSum mass;
  for (std::size_t j = 0; j < count; ++j) {
    nodes_[j] = -1.0 + h * static_cast<double>(j);
    weights_[j] = (j == 0 || j + 1 == count ? 0.5 : 1.0) * h * raw_bump(nodes_[j]);
    mass.add(weights_[j]);
  }
  raw_mass_ = mass.value();
  KahanSum run;
  for (std::size_t j = 0; j < count; ++j) {
    weights_[j] /= raw_mass_;
    if (j > 0) run.add(0.5 * (weights_[j - 1] + weights_[j]));
    cdf_[j] = run.value();
  }
  for (auto& c : cdf_) c /= cdf_.back();
}

double BumpKernel::density(double u) const { return raw_bump(u) / raw_mass_; }

double BumpKernel::inverse_cdf(double p) const {
  require(p >= 0.0 && p <= 1.0, ErrorCode::kInvalidArgument, "inverse_cdf: p outside [0, 1]");
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), p);
  if (it == cdf_.begin()) return nodes_.front();
  if (it == cdf_.end()) return nodes_.back();
  const auto k = static_cast<std::size_t>(it - cdf_.begin());
  const double lo = cdf_[k - 1], hi = cdf_[k];
  const double w = hi > lo ? (p - lo) / (hi - lo) : 0.5;
  return nodes_[k - 1] + w * (nodes_[k] - nodes_[k - 1]);
}

void MollifierSpec::validate() const {
  require(m >= 1, ErrorCode::kInvalidArgument, "mollifier index m must be at least 1");
  require(samples >= 2 && samples % 2 == 0, ErrorCode::kInvalidArgument,
          "mollifier sample count must be even and positive");
  require(phi_nodes >= 8 && Phi_nodes >= 8, ErrorCode::kInvalidArgument,
          "mollifier quadrature needs at least 8 intervals");
}

MollifiedVector mollified_b(const CoefficientSet& c, const MollifierSpec& spec, int i, double t,
                            const Mat& xbar, const Vec& a) {
  check_args(c, spec, i, xbar);
  if (!any(c.dep_b)) {
    MollifiedVector r;
    r.value = c.b(t, xbar.col(i), ParticleEnsemble(xbar), a);
    return r;
  }
  const auto pm = pair_means(c.dep_b, spec, i, t, c.horizon, xbar,
                             [&](double tt, const Vec& x, const ParticleEnsemble& mu) {
                               return c.b(tt, x, mu, a);
                             });
  return summarize(pm, spec);
}

MollifiedScalar mollified_f(const CoefficientSet& c, const MollifierSpec& spec, int i, double t,
                            const Mat& xbar, const Vec& a) {
  check_args(c, spec, i, xbar);
  MollifiedScalar r;
  if (c.running_cost_zero) return r;
  if (!any(c.dep_f)) {
    r.value = c.f(t, xbar.col(i), ParticleEnsemble(xbar), a);
    return r;
  }
  const auto pm = pair_means(c.dep_f, spec, i, t, c.horizon, xbar,
                             [&](double tt, const Vec& x, const ParticleEnsemble& mu) {
                               return Vec::Constant(1, c.f(tt, x, mu, a)).eval();
                             });
  const MollifiedVector v = summarize(pm, spec);
  r.value = v.value[0];
  r.stderr_ = v.stderr_;
  r.flagged = v.flagged;
  return r;
}

MollifiedScalar mollified_g(const CoefficientSet& c, const MollifierSpec& spec, int i,
                            const Mat& xbar) {
  check_args(c, spec, i, xbar);
  MollifiedScalar r;
  Dependence dep = c.dep_g;
  dep.time = false;
  if (!any(dep)) {
    r.value = c.g(xbar.col(i), ParticleEnsemble(xbar));
    return r;
  }
  const auto pm = pair_means(dep, spec, i, 0.0, c.horizon, xbar,
                             [&](double, const Vec& x, const ParticleEnsemble& mu) {
                               return Vec::Constant(1, c.g(x, mu)).eval();
                             });
  const MollifiedVector v = summarize(pm, spec);
  r.value = v.value[0];
  r.stderr_ = v.stderr_;
  r.flagged = v.flagged;
  return r;
}

double time_term(const MollifierSpec& spec, double t, double horizon, double beta) {
  spec.validate();
  const BumpKernel& k = kernel(spec.phi_nodes);
  return k.integrate([&](double u) {
    const double shifted = std::min(std::max(t - u / spec.m, 0.0), horizon);
    return std::pow(std::abs(t - shifted), beta);
  });
}

double space_first_moment(const MollifierSpec& spec, int d) {
  spec.validate();
  require(d >= 1, ErrorCode::kInvalidArgument, "space moment: d must be positive");
  const BumpKernel& k = kernel(spec.Phi_nodes);
  const double second = k.integrate([](double u) { return u * u; });
  double first = 0.0;
  const double cells = std::pow(static_cast<double>(k.nodes().size()), d);
  if (d == 1) {
    first = k.integrate([](double u) { return std::abs(u); });
  } else if (cells <= 2e6) {
    // Tensor rule over the product kernel.
    const auto count = k.nodes().size();
    std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
    KahanSum s;
    while (true) {
      double w = 1.0, r2 = 0.0;
      for (std::size_t l = 0; l < idx.size(); ++l) {
        w *= k.weights()[idx[l]];
        r2 += k.nodes()[idx[l]] * k.nodes()[idx[l]];
      }
      if (w > 0.0) s.add(w * std::sqrt(r2));
      std::size_t l = 0;
      while (l < idx.size() && ++idx[l] == count) idx[l++] = 0;
      if (l == idx.size()) break;
    }
    first = s.value();
  } else {
    first = std::sqrt(d * second);  // Jensen bound
  }
  return first / spec.m;
}

double mollifier_error_bound(const CoefficientSet& c, const Dependence& dep,
                             const MollifierSpec& spec, double t) {
  double total = 0.0;
  if (dep.time) total += time_term(spec, t, c.horizon, c.beta);
  const double first = (dep.state || dep.measure) ? space_first_moment(spec, c.d) : 0.0;
  if (dep.state) total += first;
  if (dep.measure) total += first;
  return c.k_bound * total;
}

RateTable mollify_rate_sweep(const CoefficientSet& c, const MollifierSpec& base,
                             const std::vector<int>& ms, const std::vector<MollifyProbe>& probes) {
  require(!ms.empty() && !probes.empty(), ErrorCode::kInvalidArgument,
          "rate sweep: need smoothing indices and probes");
  RateTable table;
  std::vector<double> lx, ly;
  table.bounded = true;
  for (int m : ms) {
    MollifierSpec spec = base;
    spec.m = m;
    RateRow row;
    row.m = m;
    for (const auto& pr : probes) {
      const ParticleEnsemble mu(pr.xbar);
      const Vec exact = c.b(pr.t, pr.xbar.col(pr.i), mu, pr.a);
      const MollifiedVector mv = mollified_b(c, spec, pr.i, pr.t, pr.xbar, pr.a);
      const double err = (mv.value - exact).norm();
      const double bound = mollifier_error_bound(c, c.dep_b, spec, pr.t);
      if (err > bound + 4.0 * std::sqrt(static_cast<double>(c.d)) * mv.stderr_) {
        table.bounded = false;
      }
      if (err >= row.sup_error) {
        row.sup_error = err;
        row.stderr_ = mv.stderr_;
      }
      row.bound = std::max(row.bound, bound);
    }
    table.rows.push_back(row);
    if (row.sup_error > 0.0) {
      lx.push_back(std::log(static_cast<double>(m)));
      ly.push_back(std::log(row.sup_error));
    }
  }
  if (lx.size() >= 2) {
    const LineFit fit = fit_line(lx, ly);
    table.slope = fit.slope;
    table.r_squared = fit.r_squared;
  }
  return table;
}

namespace {

class MollifiedSet final : public CoefficientSet {
 public:
  MollifiedSet(std::shared_ptr<const CoefficientSet> base, const MollifierSpec& spec)
      : base_(std::move(base)), spec_(spec) {
    const CoefficientSet& b0 = *base_;
    name = b0.name + "_mollified";
    d = b0.d;
    horizon = b0.horizon;
    k_bound = b0.k_bound;
    beta = b0.beta;
    actions = b0.actions;
    dep_b = b0.dep_b;
    dep_sigma = b0.dep_sigma;
    dep_f = b0.dep_f;
    dep_g = b0.dep_g;
    running_cost_zero = b0.running_cost_zero;
  }

  Vec b(double t, const Vec& x, const ParticleEnsemble& mu, const Vec& a) const override {
    return mollified_b(*base_, spec_, locate(x, mu), t, mu.points(), a).value;
  }
  Mat sigma(double t, const Vec& x, const Vec& a) const override { return base_->sigma(t, x, a); }
  Mat sigma0(double t) const override { return base_->sigma0(t); }
  double f(double t, const Vec& x, const ParticleEnsemble& mu, const Vec& a) const override {
    return mollified_f(*base_, spec_, locate(x, mu), t, mu.points(), a).value;
  }
  double g(const Vec& x, const ParticleEnsemble& mu) const override {
    return mollified_g(*base_, spec_, locate(x, mu), mu.points()).value;
  }

  void drift_all(double t, const Mat& x, const ParticleEnsemble& mu, const Mat& a,
                 Mat* out) const override {
    if (!any(dep_b)) {
      base_->drift_all(t, x, mu, a, out);
      return;
    }
    out->resize(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      out->col(i) = mollified_b(*base_, spec_, static_cast<int>(i), t, x, a.col(i)).value;
    }
  }
  void add_diffusion(double t, const Mat& x, const Mat& a, const Mat& dw,
                     Mat* out) const override {
    base_->add_diffusion(t, x, a, dw, out);
  }
  double mean_running_cost(double t, const Mat& x, const ParticleEnsemble& mu,
                           const Mat& a) const override {
    if (running_cost_zero) return 0.0;
    if (!any(dep_f)) return base_->mean_running_cost(t, x, mu, a);
    KahanSum s;
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      s.add(mollified_f(*base_, spec_, static_cast<int>(i), t, x, a.col(i)).value);
    }
    return s.value() / static_cast<double>(x.cols());
  }
  double mean_terminal_cost(const Mat& x, const ParticleEnsemble& mu) const override {
    if (!dep_g.state && !dep_g.measure) return base_->mean_terminal_cost(x, mu);
    KahanSum s;
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      s.add(mollified_g(*base_, spec_, static_cast<int>(i), x).value);
    }
    return s.value() / static_cast<double>(x.cols());
  }

 private:
  static int locate(const Vec& x, const ParticleEnsemble& mu) {
    for (int i = 0; i < mu.n(); ++i) {
      if (mu.point(i) == x) return i;
    }
    fail(ErrorCode::kInvalidArgument, "mollified coefficients: x is not a particle of mu");
  }

  std::shared_ptr<const CoefficientSet> base_;
  MollifierSpec spec_;
};

}  // namespace

std::shared_ptr<const CoefficientSet> mollified_coefficients(
    std::shared_ptr<const CoefficientSet> base, const MollifierSpec& spec) {
  require(base != nullptr, ErrorCode::kInvalidArgument, "mollified coefficients: null base");
  spec.validate();
  return std::make_shared<MollifiedSet>(std::move(base), spec);
}

}  // namespace mfhjb
