// include/lts/data/window.h

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

#ifndef LTS_DATA_WINDOW_H_
#define LTS_DATA_WINDOW_H_

#include "lts/core/rng.h"
#include "lts/data/types.h"

namespace lts {

// Deterministic contiguous window: video frames [start, start+length) with
// the mel rows [4*start, 4*(start+length)) and targets sliced to match.
AlignedPair slice_pair(const AlignedPair& pair, int64_t start, int64_t length);

// Repeats the final video frame (and its aligned mel rows and targets) until
// the pair is at least `length` frames long.
AlignedPair pad_pair(const AlignedPair& pair, int64_t length);

// Uniformly sampled training window. Clips shorter than `length` are padded
// when pad_short is set and rejected with a data error otherwise.
AlignedPair sample_window(const AlignedPair& pair, int64_t length, Rng& rng,
                          bool pad_short = false);

}  // namespace lts

#endif  // LTS_DATA_WINDOW_H_
