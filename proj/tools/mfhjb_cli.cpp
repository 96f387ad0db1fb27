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

// Batch runner for the verification suites.
//
//   mfhjb run <subcommand> [config.json] [--config path] [--seed u64]
//             [--out dir] [--threads k]
//
// Exit status: 0 all asserted tolerances hold, 3 a tolerance failed,
// 2 bad invocation or config, 1 internal error.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mfhjb/mfhjb.h"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitTolerance = 3;

int exit_for(mfhjb_status s) {
  switch (s) {
    case MFHJB_OK: return kExitPass;
    case MFHJB_TOLERANCE: return kExitTolerance;
    case MFHJB_INVALID_ARGUMENT:
    case MFHJB_DIMENSION_MISMATCH:
    case MFHJB_UNKNOWN_NAME:
    case MFHJB_CONFIG:
    case MFHJB_HYPOTHESIS: return kExitConfig;
    default: return kExitInternal;
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mfhjb experiment runner"};
  app.require_subcommand(1);
  CLI::App* run = app.add_subcommand("run", "run one verification suite");
  std::string sub, positional_config, config_path, out_dir = "out";
  std::uint64_t seed = 0;
  int threads = 1;
  std::string names;
  for (int i = 0; i < mfhjb_experiment_count(); ++i) {
    names += (i ? ", " : "") + std::string(mfhjb_experiment_name(i));
  }
  run->add_option("subcommand", sub, "one of: " + names)->required();
  run->add_option("config_file", positional_config, "JSON config (same as --config)");
  run->add_option("--config", config_path, "JSON config file");
  CLI::Option* seed_opt = run->add_option("--seed", seed, "seed; overrides the config seed");
  run->add_option("--out", out_dir, "output directory")->capture_default_str();
  run->add_option("--threads", threads, "worker threads")->capture_default_str()
      ->check(CLI::Range(1, 256));
  app.add_subcommand("list", "print the suite names")->callback([&] {
    for (int i = 0; i < mfhjb_experiment_count(); ++i) std::cout << mfhjb_experiment_name(i) << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfig;
  }
  if (!run->parsed()) return kExitPass;

  if (!positional_config.empty() && !config_path.empty() && positional_config != config_path) {
    std::cerr << "error: config given twice\n";
    return kExitConfig;
  }
  if (config_path.empty()) config_path = positional_config;
  std::string config_text;
  if (!config_path.empty()) {
    std::ifstream is(config_path, std::ios::binary);
    if (!is) {
      std::cerr << "error: cannot read config " << config_path << "\n";
      return kExitConfig;
    }
    std::ostringstream ss;
    ss << is.rdbuf();
    config_text = ss.str();
  }

  mfhjb_set_threads(threads);
  int pass = 0;
  const auto started = std::chrono::steady_clock::now();
  const mfhjb_status st = mfhjb_experiment_run(sub.c_str(), config_text.c_str(), seed,
                                               seed_opt->count() > 0 ? 1 : 0, out_dir.c_str(),
                                               &pass);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (st != MFHJB_OK) {
    std::cerr << "error (" << mfhjb_status_name(st) << "): " << mfhjb_last_error() << "\n";
    return exit_for(st);
  }

  nlohmann::json meta = {{"timestamp", utc_timestamp()},
                         {"library_version", mfhjb_version()},
                         {"subcommand", sub},
                         {"config_path", config_path},
                         {"threads", threads},
                         {"wall_seconds", seconds}};
  std::ofstream(std::filesystem::path(out_dir) / "run_meta.json") << meta.dump(2) << "\n";
  std::cout << sub << ": " << (pass ? "PASS" : "FAIL") << " (" << out_dir << "/results.json)\n";
  return pass ? kExitPass : kExitTolerance;
}
