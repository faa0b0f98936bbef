// include/lts/audio/pitch.h

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

#ifndef LTS_AUDIO_PITCH_H_
#define LTS_AUDIO_PITCH_H_

#include <cstdint>
#include <vector>

#include "lts/common.h"

namespace lts {

struct PitchConfig {
  real fmin = 60.0;
  real fmax = 400.0;
  int64_t window = 512;  // correlation window, must cover one fmin period
  int64_t hop = 160;     // mel-rate hop at 16 kHz
  real bin_semitones = 0.1;
  real threshold_step = 0.01;
  real prior_global_min = 0.01;
  real yin_trust = 0.5;
  real voiced_trust = 0.5;
  real switch_prob = 0.01;  // voiced <-> unvoiced transition probability
  int64_t transition_width = 25;
};

// Mel-rate pitch track: f0[i] in Hz for voiced frames, 0 elsewhere. Frame
// centres follow the mel framing, so the track length equals the mel frame
// count for the same waveform.
struct PitchTrack {
  std::vector<real> f0;
  std::vector<uint8_t> voiced;

  int64_t frames() const { return static_cast<int64_t>(f0.size()); }
  int64_t voiced_count() const;
};

// Probabilistic YIN: cumulative-mean-normalised difference troughs weighted
// by a Beta(2,18) threshold prior, decoded by a forward pass over a
// voiced/unvoiced pitch-bin HMM.
PitchTrack pyin_pitch(const std::vector<real>& waveform, int64_t sample_rate,
                      const PitchConfig& cfg = {});

// Corpus statistics over voiced frames only (population standard deviation).
struct PitchStats {
  real mean = 0;
  real stddev = 0;
  int64_t voiced_frames = 0;
};

PitchStats accumulate_pitch_stats(const std::vector<const PitchTrack*>& tracks);

// Unvoiced frames take the corpus mean before standardisation (mapping to 0
// after), then the mel-rate sequence is mean-pooled by 4 to video rate. The
// track must hold exactly 4*t_v frames.
struct StandardisedPitch {
  std::vector<real> values;  // length t_v
  bool all_unvoiced = false;
};

StandardisedPitch standardise_pitch(const PitchTrack& track,
                                    const PitchStats& stats, int64_t t_v);

}  // namespace lts

#endif  // LTS_AUDIO_PITCH_H_
