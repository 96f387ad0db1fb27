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


// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Each criterion is a suite run at its pinned setup plus a
// wall-clock limit.

#include <chrono>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>

#include "core/experiments.hpp"

namespace {

using mfhjb::Config;
using mfhjb::SuiteResult;

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<SuiteResult()> run;
  std::function<std::string(const SuiteResult&)> summary;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

constexpr std::uint64_t kSeed = 20240601;

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "transport oracle", 5.0,
       [] { return mfhjb::transport_oracle_suite(Config::object(), kSeed); },
       [](const SuiteResult& r) {
         return fmt("pairs=%.0f max_rel_diff=%.3g", r.metric("oracle_pairs"),
                    r.metric("oracle_max_rel_diff"));
       }},
      {2, "gradient pinning", 30.0,
       [] { return mfhjb::gradient_suite(Config{{"mixed", false}}, kSeed); },
       [](const SuiteResult& r) {
         return fmt("max_rel_err=%.3g (tol 1e-3) s_fit=%.6f", r.metric("gradient_max_rel_err"),
                    r.metric("gauge_scale_fit"));
       }},
      {3, "mixed derivative", 60.0,
       [] { return mfhjb::gradient_suite(Config{{"mixed", true}}, kSeed); },
       [](const SuiteResult& r) {
         return fmt("max_rel_err=%.3g (tol 1e-3)", r.metric("mixed_max_rel_err"));
       }},
      {4, "H identity", 30.0, [] { return mfhjb::h_suite(Config::object(), kSeed); },
       [](const SuiteResult& r) {
         return fmt("identity_err=%.3g (tol 1e-14) fd_rel_err=%.3g (tol 1e-2)",
                    r.metric("h_identity_err"), r.metric("h_fd_rel_err"));
       }},
      {5, "variational certificate", 60.0,
       [] { return mfhjb::variational_suite(Config{{"phi_configs", 0}}, kSeed); },
       [](const SuiteResult& r) {
         return fmt("%.0f/%.0f sets certified", r.metric("certificate_passed"),
                    r.metric("certificate_sets"));
       }},
      {6, "phi derivative bounds", 60.0,
       [] { return mfhjb::variational_suite(Config{{"sets", 0}}, kSeed); },
       [](const SuiteResult& r) {
         return fmt("%.0f/%.0f configurations within bounds", r.metric("phi_passed"),
                    r.metric("phi_configs"));
       }},
      {7, "Ito expectation", 120.0, [] { return mfhjb::ito_suite(Config::object(), kSeed); },
       [](const SuiteResult& r) {
         return fmt("cases passed=%.0f/3", r.metric("ito_cases_passed"));
       }},
      {8, "moment bounds", 60.0, [] { return mfhjb::moment_suite(Config::object(), kSeed); },
       [](const SuiteResult& r) {
         return fmt("increment constant in [%.4g, %.4g], lipschitz=%.6g",
                    r.metric("increment_constant_min"), r.metric("increment_constant_max"),
                    r.metric("lipschitz_constant"));
       }},
      {9, "mollifier suite", 120.0, [] { return mfhjb::mollify_suite(Config::object(), kSeed); },
       [](const SuiteResult& r) {
         return fmt("space_slope=%.3f time_slope=%.3f bound_ratio=%.3f",
                    r.metric("space_slope"), r.metric("time_slope"),
                    r.metric("uniform_bound_ratio"));
       }},
      {10, "epsilon linearity", 300.0, [] { return mfhjb::eps_suite(Config::object(), kSeed); },
       [](const SuiteResult& r) {
         return fmt("R2=%.4f (min 0.9) slope=%.4g", r.metric("r_squared"), r.metric("slope"));
       }},
      {11, "empirical W1 rate", 120.0, [] { return mfhjb::rates_suite(Config::object(), kSeed); },
       [](const SuiteResult& r) {
         return fmt("slope=%.4f (range [-0.62, -0.38])", r.metric("slope"));
       }},
      {12, "LQ closed form", 180.0, [] { return mfhjb::value_suite(Config::object(), kSeed); },
       [](const SuiteResult& r) {
         return fmt("value=%.4f closed=%.4f |err|=%.3g", r.metric("value"),
                    r.metric("closed_form"), r.metric("abs_err")) +
                fmt(" allowed=%.3g sign_vertex=%.0f", r.metric("allowed"),
                    r.metric("sign_vertex"));
       }},
      {13, "DPP residual", 300.0, [] { return mfhjb::dpp_suite(Config::object(), kSeed); },
       [](const SuiteResult& r) {
         return fmt("lq gap=%.4g se=%.3g; ", r.metric("lq_gap"), r.metric("lq_stderr")) +
                fmt("single-action gap=%.4g se=%.3g", r.metric("single_gap"),
                    r.metric("single_stderr"));
       }},
      {14, "HJB residual", 60.0, [] { return mfhjb::hjb_suite(Config::object(), kSeed); },
       [](const SuiteResult& r) {
         return fmt("max|residual|=%.3g negative control %.0f/20",
                    r.metric("lq_max_abs_residual"), r.metric("negative_control_detected"));
       }},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    bool ok = false;
    std::string detail;
    try {
      const SuiteResult r = c.run();
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      ok = r.pass && secs < c.limit_seconds;
      detail = c.summary(r) + fmt(" time=%.1fs (limit %.0fs)", secs, c.limit_seconds);
    } catch (const std::exception& e) {
      detail = std::string("error: ") + e.what();
    }
    if (!ok) ++failed;
    std::printf("[%s] criterion %2d %s: %s\n", ok ? "PASS" : "FAIL", c.id, c.name,
                detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
