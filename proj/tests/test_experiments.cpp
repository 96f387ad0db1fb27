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

#include <json.hpp>

#include "core/error.hpp"
#include "core/experiments.hpp"

namespace mfhjb {
namespace {

using nlohmann::json;

const char* kIdentical = R"({"d": 2, "oracle_pairs": 0,
  "mu": [[0.0, 1.0], [2.0, -1.0], [0.5, 0.5]],
  "nu": [[0.0, 1.0], [2.0, -1.0], [0.5, 0.5]]})";

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

TEST(Experiments, ResultsDocumentHasTheSchema) {
  const ExperimentOutput o = run_experiment("metric", kIdentical, 7);
  const json doc = json::parse(o.results_json);
  EXPECT_EQ(doc.at("schema_version"), 1);
  EXPECT_EQ(doc.at("subcommand"), "metric");
  EXPECT_EQ(doc.at("seed"), 7);
  EXPECT_TRUE(doc.at("config_hash").is_string());
  EXPECT_TRUE(doc.at("pass").get<bool>());
  ASSERT_FALSE(doc.at("records").empty());
  for (const json& r : doc.at("records")) {
    for (const char* key : {"operation", "inputs_hash", "value", "stderr", "seed"}) {
      EXPECT_TRUE(r.contains(key)) << key;
    }
  }
  EXPECT_TRUE(o.pass);
}

TEST(Experiments, IdenticalEnsemblesHaveZeroDistance) {
  const json doc = json::parse(run_experiment("metric", kIdentical, std::nullopt).results_json);
  bool found = false;
  for (const json& r : doc.at("records")) {
    if (r.at("operation") == "sw2") {
      EXPECT_EQ(r.at("value").get<double>(), 0.0);
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST(Experiments, RerunsAreByteIdentical) {
  const std::string cfg = R"({"d": 2, "n": 8, "oracle_pairs": 5})";
  EXPECT_EQ(run_experiment("metric", cfg, 3).results_json,
            run_experiment("metric", cfg, 3).results_json);
  EXPECT_NE(run_experiment("metric", cfg, 3).results_json,
            run_experiment("metric", cfg, 4).results_json);
}

TEST(Experiments, ConfigSeedIsUsedUnlessOverridden) {
  const json a = json::parse(run_experiment("metric", R"({"seed": 11, "oracle_pairs": 0})",
                                            std::nullopt).results_json);
  EXPECT_EQ(a.at("seed"), 11);
  const json b =
      json::parse(run_experiment("metric", R"({"seed": 11, "oracle_pairs": 0})", 12).results_json);
  EXPECT_EQ(b.at("seed"), 12);
}

TEST(Experiments, BadInputsReportConfigOrUnknownName) {
  EXPECT_EQ(code_of([] { run_experiment("metric", "{\"d\": ", 1); }), ErrorCode::kConfig);
  EXPECT_EQ(code_of([] { run_experiment("metric", "[1, 2]", 1); }), ErrorCode::kConfig);
  EXPECT_EQ(code_of([] { run_experiment("no-such-thing", "", 1); }), ErrorCode::kUnknownName);
}

TEST(Experiments, EverySubcommandIsListed) {
  EXPECT_EQ(subcommands().size(), 12u);
  for (const std::string& name : subcommands()) {
    EXPECT_NE(code_of([&] { run_experiment(name, "{\"d\": ", 1); }), ErrorCode::kUnknownName)
        << name;
  }
}

TEST(Experiments, RatesSuiteFitsHalfOrder) {
  const ExperimentOutput o = run_experiment("rates", "", 1);
  EXPECT_TRUE(o.pass);
  EXPECT_FALSE(o.csv.empty());
}

}  // namespace
}  // namespace mfhjb
