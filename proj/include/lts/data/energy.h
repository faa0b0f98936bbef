// include/lts/data/energy.h

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

#ifndef LTS_DATA_ENERGY_H_
#define LTS_DATA_ENERGY_H_

#include <vector>

#include "lts/data/types.h"

namespace lts {

// Euclidean norm of each mel frame over the frequency axis, then mean-pooled
// every 4 frames down to video rate. T_m must be divisible by 4.
std::vector<real> extract_energy(const MelSpectrogram& mel);

}  // namespace lts

#endif  // LTS_DATA_ENERGY_H_
