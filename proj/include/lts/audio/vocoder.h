// include/lts/audio/vocoder.h

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

#ifndef LTS_AUDIO_VOCODER_H_
#define LTS_AUDIO_VOCODER_H_

#include <vector>

#include "lts/data/types.h"

namespace lts {

struct GriffinLimConfig {
  int64_t iterations = 60;
  uint64_t seed = 0;  // phase initialisation stream
};

// Inverts a log-mel spectrogram to a waveform: mel pseudo-inverse to linear
// magnitudes, then Griffin-Lim phase reconstruction.
std::vector<real> griffin_lim(const MelSpectrogram& mel,
                              const GriffinLimConfig& cfg = {});

}  // namespace lts

#endif  // LTS_AUDIO_VOCODER_H_
