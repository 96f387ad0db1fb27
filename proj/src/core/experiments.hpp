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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace mfhjb {

struct Record {
  std::string operation;
  std::string inputs_hash;
  double value = 0.0;
  double stderr_ = 0.0;
  std::uint64_t seed = 0;
  std::optional<bool> pass;
};

/// Output of one verification suite: JSON records, named scalar metrics for
/// programmatic checks, optional CSV series, and the suite's own verdict.
struct SuiteResult {
  std::vector<Record> records;
  std::map<std::string, double> metrics;
  std::vector<std::pair<std::string, std::string>> csv;  // file name, contents
  bool pass = true;

  double metric(const std::string& key) const;
};

using Config = nlohmann::json;

SuiteResult transport_oracle_suite(const Config& cfg, std::uint64_t seed);
SuiteResult metric_suite(const Config& cfg, std::uint64_t seed);
SuiteResult gradient_suite(const Config& cfg, std::uint64_t seed);
SuiteResult h_suite(const Config& cfg, std::uint64_t seed);
SuiteResult variational_suite(const Config& cfg, std::uint64_t seed);
SuiteResult simulate_suite(const Config& cfg, std::uint64_t seed);
SuiteResult ito_suite(const Config& cfg, std::uint64_t seed);
SuiteResult moment_suite(const Config& cfg, std::uint64_t seed);
SuiteResult mollify_suite(const Config& cfg, std::uint64_t seed);
SuiteResult value_suite(const Config& cfg, std::uint64_t seed);
SuiteResult eps_suite(const Config& cfg, std::uint64_t seed);
SuiteResult n_sweep_suite(const Config& cfg, std::uint64_t seed);
SuiteResult dpp_suite(const Config& cfg, std::uint64_t seed);
SuiteResult hjb_suite(const Config& cfg, std::uint64_t seed);
SuiteResult rates_suite(const Config& cfg, std::uint64_t seed);

const std::vector<std::string>& subcommands();

struct ExperimentOutput {
  std::string results_json;  // byte-stable for a fixed config and seed
  std::vector<std::pair<std::string, std::string>> csv;
  bool pass = false;
};

/// Parses the config (an empty string means defaults), runs the suite and
/// renders the results document. `seed` overrides the config's "seed".
ExperimentOutput run_experiment(const std::string& subcommand, const std::string& config_text,
                                std::optional<std::uint64_t> seed);

}  // namespace mfhjb
