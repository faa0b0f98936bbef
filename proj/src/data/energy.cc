// src/data/energy.cc

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

#include "lts/data/energy.h"

namespace lts {

std::vector<real> extract_energy(const MelSpectrogram& mel) {
  mel.validate();
  int64_t t_m = mel.t_m();
  require<DataError>(t_m % kMelPerVideoFrame == 0,
                     strprintf("energy: mel length %lld not divisible by %lld",
                               static_cast<long long>(t_m),
                               static_cast<long long>(kMelPerVideoFrame)));
  int64_t t_v = t_m / kMelPerVideoFrame;
  std::vector<real> out(t_v, 0);
  for (int64_t i = 0; i < t_v; ++i) {
    real acc = 0;
    for (int64_t j = 0; j < kMelPerVideoFrame; ++j)
      acc += mel.values.mat().row(i * kMelPerVideoFrame + j).norm();
    out[i] = acc / real(kMelPerVideoFrame);
  }
  return out;
}

}  // namespace lts
