// src/data/augment.cc

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

#include "lts/data/augment.h"

namespace lts {

AugmentParams sample_augment_params(uint64_t seed) {
  Rng rng(derive_seed(seed, "augment"));
  AugmentParams p;
  p.flip = rng.bernoulli(0.5);
  p.mask_h = rng.uniform_int(10, 30);
  p.mask_w = rng.uniform_int(10, 30);
  p.mask_y = rng.uniform_int(0, kFrameSize - p.mask_h);
  p.mask_x = rng.uniform_int(0, kFrameSize - p.mask_w);
  return p;
}

VideoClip apply_augment(const VideoClip& clip, const AugmentParams& params) {
  clip.validate();
  require(params.mask_h >= 0 && params.mask_w >= 0 && params.mask_y >= 0 &&
              params.mask_x >= 0 &&
              params.mask_y + params.mask_h <= kFrameSize &&
              params.mask_x + params.mask_w <= kFrameSize,
          "augment: mask rectangle out of bounds");

  VideoClip out;
  out.frames = clip.frames.clone();
  out.frame_rate = clip.frame_rate;
  out.speaker_id = clip.speaker_id;

  int64_t t_v = out.t_v();
  for (int64_t t = 0; t < t_v; ++t) {
    real* frame = out.frames.data() + t * kFrameSize * kFrameSize;
    if (params.flip)
      for (int64_t r = 0; r < kFrameSize; ++r)
        for (int64_t c = 0; c < kFrameSize / 2; ++c)
          std::swap(frame[r * kFrameSize + c],
                    frame[r * kFrameSize + (kFrameSize - 1 - c)]);
    for (int64_t r = 0; r < params.mask_h; ++r)
      for (int64_t c = 0; c < params.mask_w; ++c)
        frame[(params.mask_y + r) * kFrameSize + (params.mask_x + c)] = 0;
  }
  return out;
}

}  // namespace lts
