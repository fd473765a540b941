// Copyright 2026 The mattrib Authors.
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

#ifndef MATTRIB_RANDOM_H_
#define MATTRIB_RANDOM_H_

#include <cstdint>
#include <limits>

namespace mattrib {

// Purposes of keyed random streams. Distinct purposes never share a sequence
// even when seed and index coincide.
enum class Stream : uint64_t {
  kRegularEdge = 1,
  kSkewedEdge = 2,
  kGroundTruth = 3,
  kFeatures = 4,
  kSplit = 5,
  kPoissonBatch = 6,
  kGaussianNoise = 7,
  kTieShuffle = 8,
  kRandomBaseline = 9,
  kTrainInit = 10,
};

uint64_t Mix64(uint64_t x);

// Counter-based generator: the tuple (seed, stream, index) selects an
// independent SplitMix64 sequence, so any item can be regenerated without
// replaying the items before it. Satisfies UniformRandomBitGenerator.
class KeyedRng {
 public:
  using result_type = uint64_t;

  KeyedRng(uint64_t seed, Stream stream, uint64_t index = 0,
           uint64_t subindex = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  // Uniform double in [0, 1) with 53 random bits.
  double Uniform();

 private:
  uint64_t state_;
};

}  // namespace mattrib

#endif  // MATTRIB_RANDOM_H_
