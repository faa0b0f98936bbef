// tests/test_util.h

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

#ifndef LTS_TESTS_TEST_UTIL_H_
#define LTS_TESTS_TEST_UTIL_H_

#include <vector>

#include "lts/core/rng.h"
#include "lts/core/tensor.h"

namespace lts {

inline Tensor rand_tensor(Rng& rng, std::vector<int64_t> shape, real lo = -1,
                          real hi = 1) {
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

}  // namespace lts

#endif  // LTS_TESTS_TEST_UTIL_H_
