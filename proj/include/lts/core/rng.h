// include/lts/core/rng.h

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LTS_CORE_RNG_H_
#define LTS_CORE_RNG_H_

#include <cmath>
#include <cstdint>
#include <string>

#include "lts/common.h"

namespace lts {

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t hash_str(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Derives an independent stream seed from a base seed and a path of tags. All
// randomness in the toolkit flows through this, so any (seed, step, purpose)
// triple reproduces the same stream regardless of execution history.
inline uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
  uint64_t s = base;
  splitmix64(s);
  s ^= a * 0x9e3779b97f4a7c15ULL;
  splitmix64(s);
  s ^= b * 0xc2b2ae3d27d4eb4fULL;
  splitmix64(s);
  s ^= c * 0x165667b19e3779f9ULL;
  return splitmix64(s);
}

inline uint64_t derive_seed(uint64_t base, const std::string& tag, uint64_t a = 0,
                            uint64_t b = 0) {
  return derive_seed(base, hash_str(tag), a, b);
}

// Small deterministic PRNG (splitmix64 core). Distribution code is written
// out explicitly so sequences are identical across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() { return splitmix64(state_); }

  // Uniform in [0, 1).
  real uniform() { return static_cast<real>(next_u64() >> 11) * 0x1.0p-53; }

  real uniform(real lo, real hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi] inclusive.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    require(hi >= lo, "Rng::uniform_int: empty range");
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    // Rejection sampling to avoid modulo bias.
    uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return lo + static_cast<int64_t>(x % span);
  }

  bool bernoulli(real p) { return uniform() < p; }

  // Standard normal via Box-Muller.
  real normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    real u1 = uniform();
    real u2 = uniform();
    while (u1 <= 0) u1 = uniform();
    real r = std::sqrt(-2.0 * std::log(u1));
    real theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  real normal(real mean, real stddev) { return mean + stddev * normal(); }

 private:
  uint64_t state_;
  real spare_ = 0;
  bool has_spare_ = false;
};

}  // namespace lts

#endif  // LTS_CORE_RNG_H_
