// include/lts/audio/mel.h

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

#ifndef LTS_AUDIO_MEL_H_
#define LTS_AUDIO_MEL_H_

#include <vector>

#include "lts/audio/dsp.h"
#include "lts/data/types.h"

namespace lts {

constexpr real kMelFloor = 1e-5;
constexpr real kMelFminHz = 0.0;
constexpr real kMelFmaxHz = 8000.0;

// Analysis parameters shared by mel extraction and the vocoder: 40 ms window,
// 10 ms hop at 16 kHz.
StftConfig mel_stft_config();

// Natural-log mel magnitudes, floored at kMelFloor before the log.
MelSpectrogram extract_mel(const std::vector<real>& waveform,
                           int64_t sample_rate);

}  // namespace lts

#endif  // LTS_AUDIO_MEL_H_
