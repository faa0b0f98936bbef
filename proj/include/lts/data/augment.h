// include/lts/data/augment.h

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

#ifndef LTS_DATA_AUGMENT_H_
#define LTS_DATA_AUGMENT_H_

#include "lts/core/rng.h"
#include "lts/data/types.h"

namespace lts {

// Training-time video augmentation: horizontal flip with probability 0.5 and
// one rectangular zero-mask with side lengths drawn uniformly from [10, 30],
// placed at one position shared by every frame of the clip.
struct AugmentParams {
  bool flip = false;
  int64_t mask_h = 0;
  int64_t mask_w = 0;
  int64_t mask_y = 0;
  int64_t mask_x = 0;
};

AugmentParams sample_augment_params(uint64_t seed);
VideoClip apply_augment(const VideoClip& clip, const AugmentParams& params);

inline VideoClip augment(const VideoClip& clip, uint64_t seed) {
  return apply_augment(clip, sample_augment_params(seed));
}

}  // namespace lts

#endif  // LTS_DATA_AUGMENT_H_
