// include/lts/audio/dsp.h

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

#ifndef LTS_AUDIO_DSP_H_
#define LTS_AUDIO_DSP_H_

#include <complex>
#include <cstdint>
#include <vector>

#include "lts/common.h"
#include "lts/core/tensor.h"

namespace lts {

using cplx = std::complex<real>;

// In-place radix-2 transform; length must be a power of two. The inverse
// includes the 1/N scaling.
void fft_inplace(std::vector<cplx>& a, bool inverse);

std::vector<real> hann_window(int64_t n);  // periodic form

struct StftConfig {
  int64_t n_fft = 1024;
  int64_t win = 640;
  int64_t hop = 160;
};

// Frame count is floor(len/hop); frame i is centred at (i + 1/2)*hop with
// reflective padding at the signal edges, so hop-aligned signals produce an
// exact frame grid. Each row holds n_fft/2+1 bins.
std::vector<std::vector<cplx>> stft(const std::vector<real>& x,
                                    const StftConfig& cfg);

// Least-squares overlap-add inverse of stft() for the same configuration.
std::vector<real> istft(const std::vector<std::vector<cplx>>& spec,
                        const StftConfig& cfg, int64_t length);

Tensor stft_magnitude(const std::vector<real>& x, const StftConfig& cfg);

// HTK mel scale.
real hz_to_mel(real hz);
real mel_to_hz(real mel);

// (n_mels, n_fft/2+1) triangular filters with unit peak height.
Tensor mel_filterbank(int64_t n_mels, int64_t n_fft, int64_t sample_rate,
                      real fmin, real fmax);
std::vector<real> mel_center_freqs(int64_t n_mels, real fmin, real fmax);

}  // namespace lts

#endif  // LTS_AUDIO_DSP_H_
