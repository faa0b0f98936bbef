// src/audio/vocoder.cc

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

#include "lts/audio/vocoder.h"

#include <Eigen/Dense>
#include <cmath>

#include "lts/audio/mel.h"
#include "lts/core/rng.h"

namespace lts {

namespace {

constexpr real kTwoPi = 6.28318530717958647692;

// Moore-Penrose pseudo-inverse of the mel filterbank, computed once.
const EMat& mel_pinv(int64_t n_fft) {
  static const EMat pinv = [n_fft] {
    Tensor fb =
        mel_filterbank(kMelBands, n_fft, kSampleRate, kMelFminHz, kMelFmaxHz);
    Eigen::MatrixXd m = fb.mat();
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(m);
    EMat out = cod.pseudoInverse();
    return out;
  }();
  return pinv;
}

}  // namespace

std::vector<real> griffin_lim(const MelSpectrogram& mel,
                              const GriffinLimConfig& cfg) {
  mel.validate();
  require(cfg.iterations >= 1, "griffin_lim: need at least one iteration");
  StftConfig stft_cfg = mel_stft_config();
  int64_t frames = mel.t_m();
  int64_t bins = stft_cfg.n_fft / 2 + 1;
  int64_t length = frames * stft_cfg.hop;

  // Undo the log compression, then lift mel to linear frequency and clamp the
  // least-squares solution to non-negative magnitudes.
  EMat mel_lin(frames, kMelBands);
  for (int64_t t = 0; t < frames; ++t)
    for (int64_t m = 0; m < kMelBands; ++m)
      mel_lin(t, m) = std::exp(mel.values.at(t, m));
  EMat mag = (mel_lin * mel_pinv(stft_cfg.n_fft).transpose()).cwiseMax(0.0);

  Rng rng(derive_seed(cfg.seed, "griffinlim-phase"));
  std::vector<std::vector<cplx>> spec(frames, std::vector<cplx>(bins));
  for (int64_t t = 0; t < frames; ++t)
    for (int64_t k = 0; k < bins; ++k) {
      real phase = rng.uniform(0, kTwoPi);
      spec[t][k] = std::polar(mag(t, k), phase);
    }

  std::vector<real> x;
  for (int64_t it = 0; it < cfg.iterations; ++it) {
    x = istft(spec, stft_cfg, length);
    auto est = stft(x, stft_cfg);
    for (int64_t t = 0; t < frames; ++t)
      for (int64_t k = 0; k < bins; ++k) {
        real a = std::abs(est[t][k]);
        cplx unit = a > 1e-12 ? est[t][k] / a : cplx(1, 0);
        spec[t][k] = mag(t, k) * unit;
      }
  }
  x = istft(spec, stft_cfg, length);

  real peak = 0;
  for (real s : x) peak = std::max(peak, std::abs(s));
  if (peak > 0.95)
    for (real& s : x) s *= 0.95 / peak;
  return x;
}

}  // namespace lts
