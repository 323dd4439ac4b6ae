// Copyright 2026 The dpsteer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPSTEER_RNG_H_
#define DPSTEER_RNG_H_

#include <cstdint>
#include <random>

namespace dpsteer {

// All randomness flows through explicitly seeded engines owned by the caller.
using Rng = std::mt19937_64;

// splitmix64 finalizer.
inline uint64_t MixBits(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for the index-th unit of work under a run seed. Independent of the
// order in which units are processed.
inline uint64_t DeriveSeed(uint64_t base, uint64_t index) {
  return MixBits(MixBits(base) ^ MixBits(index + 0x632be59bd9b4e019ULL));
}

// Named sub-streams so that stages of one run never share a seed.
enum class SeedStream : uint64_t {
  kCandidatePool = 1,
  kHistogramNoise = 2,
  kNegativeSet = 3,
  kSubsample = 4,
  kPairing = 5,
  kVectorNoise = 6,
  kSynthetic = 7,
  kQuantize = 8,
  kTraining = 9,
};

inline uint64_t StreamSeed(uint64_t run_seed, SeedStream stream) {
  return DeriveSeed(run_seed,
                    0xd1b54a32d192ed03ULL * static_cast<uint64_t>(stream));
}

}  // namespace dpsteer

#endif  // DPSTEER_RNG_H_
