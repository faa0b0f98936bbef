// include/lts/data/types.h

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

#ifndef LTS_DATA_TYPES_H_
#define LTS_DATA_TYPES_H_

#include <cstdint>
#include <string>
#include <vector>

#include "lts/common.h"
#include "lts/core/tensor.h"

namespace lts {

constexpr int64_t kMelBands = 80;
constexpr int64_t kMelPerVideoFrame = 4;
constexpr int64_t kFrameSize = 112;
constexpr int64_t kSampleRate = 16000;
constexpr real kVideoFps = 25.0;
constexpr real kHopSeconds = 0.010;
constexpr real kWindowSeconds = 0.040;

// Grayscale lip-region frame sequence at a fixed rate.
struct VideoClip {
  Tensor frames;  // (T_v, 1, 112, 112), values in [0,1]
  real frame_rate = kVideoFps;
  int64_t speaker_id = 0;

  int64_t t_v() const { return frames.defined() ? frames.dim(0) : 0; }
  void validate() const;
};

// Log-magnitude mel energies, time by band.
struct MelSpectrogram {
  Tensor values;  // (T_m, 80)
  int64_t sample_rate = kSampleRate;
  real hop_s = kHopSeconds;
  real window_s = kWindowSeconds;

  int64_t t_m() const { return values.defined() ? values.dim(0) : 0; }
  void validate() const;
};

// Per-video-frame supervision for the variance decoder.
struct VarianceTargets {
  std::vector<int64_t> linguistic;  // values in [0, K)
  std::vector<real> pitch;          // standardised units
  std::vector<real> energy;         // non-negative
  bool all_unvoiced = false;

  void validate(int64_t t_v, int64_t k) const;
};

// One aligned training example.
struct AlignedPair {
  std::string id;
  VideoClip clip;
  MelSpectrogram mel;
  VarianceTargets targets;

  void validate(int64_t k) const;
};

}  // namespace lts

#endif  // LTS_DATA_TYPES_H_
