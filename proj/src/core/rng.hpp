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

#include <array>
#include <cstdint>

namespace mfhjb {

/// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

enum class Channel : std::uint32_t {
  kIdiosyncratic = 1,
  kCommon = 2,
  kPerturbation = 3,
  kSampling = 4,
  kMollifier = 5,
  kDirections = 6,
  kAuxiliary = 7,
};

/// Identifies one independent stream: (seed; channel, path, particle, step).
/// Draws within a stream are indexed by the block counter, so any draw can be
/// recomputed without replaying earlier ones.
struct StreamKey {
  std::uint64_t seed = 0;
  Channel channel = Channel::kAuxiliary;
  std::uint32_t path = 0;
  std::uint32_t particle = 0;
  std::uint32_t step = 0;
};

/// Independent child seed for nested experiments (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

class Stream {
 public:
  explicit Stream(const StreamKey& key);

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  double normal();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mfhjb
