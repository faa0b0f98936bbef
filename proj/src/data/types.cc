// src/data/types.cc

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

#include "lts/data/types.h"

namespace lts {

void VideoClip::validate() const {
  require<DataError>(frames.defined() && frames.ndim() == 4,
                     "VideoClip: frames must be (T,1,112,112)");
  require<DataError>(frames.dim(0) >= 1, "VideoClip: need at least one frame");
  require<DataError>(frames.dim(1) == 1, "VideoClip: frames must be grayscale");
  require<DataError>(frames.dim(2) == kFrameSize && frames.dim(3) == kFrameSize,
                     "VideoClip: spatial dimensions must be 112x112");
  require<DataError>(frames.all_finite(), "VideoClip: non-finite pixel values");
}

void MelSpectrogram::validate() const {
  require<DataError>(values.defined() && values.ndim() == 2 &&
                         values.dim(1) == kMelBands,
                     "MelSpectrogram: values must be (T_m,80)");
  require<DataError>(sample_rate == kSampleRate,
                     "MelSpectrogram: expected 16 kHz");
  require<DataError>(values.all_finite(), "MelSpectrogram: non-finite values");
}

void VarianceTargets::validate(int64_t t_v, int64_t k) const {
  require<DataError>(static_cast<int64_t>(linguistic.size()) == t_v &&
                         static_cast<int64_t>(pitch.size()) == t_v &&
                         static_cast<int64_t>(energy.size()) == t_v,
                     "VarianceTargets: sequence lengths must equal T_v");
  for (int64_t u : linguistic)
    require<DataError>(u >= 0 && u < k,
                       "VarianceTargets: linguistic index out of range");
  for (real e : energy)
    require<DataError>(e >= 0, "VarianceTargets: negative energy");
}

void AlignedPair::validate(int64_t k) const {
  clip.validate();
  mel.validate();
  targets.validate(clip.t_v(), k);
  require<DataError>(mel.t_m() == kMelPerVideoFrame * clip.t_v(),
                     "AlignedPair: mel frames must be 4x video frames");
}

}  // namespace lts
