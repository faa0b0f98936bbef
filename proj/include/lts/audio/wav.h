// include/lts/audio/wav.h

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

#ifndef LTS_AUDIO_WAV_H_
#define LTS_AUDIO_WAV_H_

#include <cstdint>
#include <string>
#include <vector>

#include "lts/common.h"

namespace lts {

struct WavData {
  std::vector<real> samples;  // mono, in [-1, 1]
  int64_t sample_rate = 0;
};

// 16-bit PCM only. Multi-channel input is rejected.
WavData read_wav(const std::string& path);
void write_wav(const std::string& path, const std::vector<real>& samples,
               int64_t sample_rate);

}  // namespace lts

#endif  // LTS_AUDIO_WAV_H_
