// src/audio/mel.cc

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

#include "lts/audio/mel.h"

#include <cmath>

namespace lts {

StftConfig mel_stft_config() {
  StftConfig cfg;
  cfg.n_fft = 1024;
  cfg.win = static_cast<int64_t>(kWindowSeconds * kSampleRate);  // 640
  cfg.hop = static_cast<int64_t>(kHopSeconds * kSampleRate);     // 160
  return cfg;
}

MelSpectrogram extract_mel(const std::vector<real>& waveform,
                           int64_t sample_rate) {
  require<DataError>(!waveform.empty(), "extract_mel: empty waveform");
  require<DataError>(sample_rate == kSampleRate,
                     "extract_mel: expected 16 kHz input, got " +
                         std::to_string(sample_rate));
  StftConfig cfg = mel_stft_config();
  Tensor mag = stft_magnitude(waveform, cfg);
  static const Tensor fb =
      mel_filterbank(kMelBands, cfg.n_fft, kSampleRate, kMelFminHz, kMelFmaxHz);
  // Scalar accumulation keeps the spectrogram bitwise reproducible no matter
  // how the surrounding buffers happen to be aligned.
  MelSpectrogram mel;
  mel.values = Tensor({mag.dim(0), kMelBands});
  int64_t bins = mag.dim(1);
  for (int64_t t = 0; t < mag.dim(0); ++t)
    for (int64_t m = 0; m < kMelBands; ++m) {
      real acc = 0;
      for (int64_t k = 0; k < bins; ++k) acc += mag.at(t, k) * fb.at(m, k);
      mel.values.at(t, m) = std::log(std::max(acc, kMelFloor));
    }
  mel.sample_rate = kSampleRate;
  mel.hop_s = kHopSeconds;
  mel.window_s = kWindowSeconds;
  return mel;
}

}  // namespace lts
