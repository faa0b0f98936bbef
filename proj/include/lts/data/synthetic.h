// include/lts/data/synthetic.h

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

#ifndef LTS_DATA_SYNTHETIC_H_
#define LTS_DATA_SYNTHETIC_H_

#include <string>

#include "lts/data/manifest.h"

namespace lts {

// Deterministic toy audio-visual corpus. A hidden word-state sequence drives
// both the mouth aperture of a rendered face and a matching harmonic tone
// (one word type is an unvoiced noise burst), giving a learnable video to
// audio mapping with known transcripts.
struct SyntheticConfig {
  int64_t clips = 8;
  int64_t words_per_clip = 6;
  int64_t word_types = 8;
  int64_t speakers = 2;
  int64_t frames_per_word = 8;  // at 25 fps
  uint64_t seed = 0;
};

// Writes video/<id>.lvf, audio/<id>.wav, manifest.tsv, and transcripts.tsv
// under out_dir. Byte-identical output for identical config. Split rule:
// with three or more clips the last is "test" and the second-to-last "val";
// smaller corpora are all "train".
Manifest generate_synthetic_corpus(const SyntheticConfig& config,
                                   const std::string& out_dir);

}  // namespace lts

#endif  // LTS_DATA_SYNTHETIC_H_
