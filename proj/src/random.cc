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

#include "mattrib/random.h"

namespace mattrib {

namespace {
constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}  // namespace

uint64_t Mix64(uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

KeyedRng::KeyedRng(uint64_t seed, Stream stream, uint64_t index,
                   uint64_t subindex) {
  uint64_t h = Mix64(seed + kGolden);
  h = Mix64(h ^ (static_cast<uint64_t>(stream) * kGolden));
  h = Mix64(h ^ (index + 0x632BE59BD9B4E019ULL));
  state_ = Mix64(h ^ (subindex * 0xD1B54A32D192ED03ULL));
}

KeyedRng::result_type KeyedRng::operator()() {
  state_ += kGolden;
  return Mix64(state_);
}

double KeyedRng::Uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

}  // namespace mattrib
