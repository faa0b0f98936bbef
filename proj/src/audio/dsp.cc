// src/audio/dsp.cc

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

#include "lts/audio/dsp.h"

#include <algorithm>
#include <cmath>

namespace lts {

namespace {

constexpr real kPi = 3.14159265358979323846;

bool is_pow2(int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

// Mirror an out-of-range sample index back into [0, n) without repeating the
// edge sample, matching reflective padding.
int64_t reflect_index(int64_t i, int64_t n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

}  // namespace

void fft_inplace(std::vector<cplx>& a, bool inverse) {
  int64_t n = static_cast<int64_t>(a.size());
  require(is_pow2(n), "fft_inplace: length must be a power of two");
  for (int64_t i = 1, j = 0; i < n; ++i) {
    int64_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (int64_t len = 2; len <= n; len <<= 1) {
    real ang = 2 * kPi / real(len) * (inverse ? 1 : -1);
    cplx wl(std::cos(ang), std::sin(ang));
    for (int64_t i = 0; i < n; i += len) {
      cplx w(1);
      for (int64_t j = 0; j < len / 2; ++j) {
        cplx u = a[i + j];
        cplx v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse)
    for (auto& x : a) x /= real(n);
}

std::vector<real> hann_window(int64_t n) {
  std::vector<real> w(n);
  for (int64_t i = 0; i < n; ++i)
    w[i] = 0.5 * (1 - std::cos(2 * kPi * real(i) / real(n)));
  return w;
}

std::vector<std::vector<cplx>> stft(const std::vector<real>& x,
                                    const StftConfig& cfg) {
  require(is_pow2(cfg.n_fft) && cfg.win <= cfg.n_fft && cfg.hop > 0,
          "stft: bad configuration");
  int64_t len = static_cast<int64_t>(x.size());
  require<DataError>(len > 0, "stft: empty signal");
  int64_t frames = len / cfg.hop;
  require<DataError>(frames > 0, "stft: signal shorter than one hop");
  std::vector<real> window = hann_window(cfg.win);
  int64_t bins = cfg.n_fft / 2 + 1;
  int64_t lead = (cfg.n_fft - cfg.win) / 2;
  std::vector<std::vector<cplx>> out(frames);
  std::vector<cplx> buf(cfg.n_fft);
  for (int64_t f = 0; f < frames; ++f) {
    int64_t center = f * cfg.hop + cfg.hop / 2;
    std::fill(buf.begin(), buf.end(), cplx(0));
    for (int64_t j = 0; j < cfg.win; ++j) {
      int64_t src = reflect_index(center - cfg.win / 2 + j, len);
      buf[lead + j] = x[src] * window[j];
    }
    fft_inplace(buf, false);
    out[f].assign(buf.begin(), buf.begin() + bins);
  }
  return out;
}

std::vector<real> istft(const std::vector<std::vector<cplx>>& spec,
                        const StftConfig& cfg, int64_t length) {
  require(!spec.empty(), "istft: empty spectrogram");
  int64_t bins = cfg.n_fft / 2 + 1;
  int64_t lead = (cfg.n_fft - cfg.win) / 2;
  std::vector<real> window = hann_window(cfg.win);
  std::vector<real> out(length, 0);
  std::vector<real> norm(length, 0);
  std::vector<cplx> buf(cfg.n_fft);
  for (size_t f = 0; f < spec.size(); ++f) {
    require(static_cast<int64_t>(spec[f].size()) == bins,
            "istft: bin count mismatch");
    for (int64_t k = 0; k < bins; ++k) buf[k] = spec[f][k];
    for (int64_t k = bins; k < cfg.n_fft; ++k)
      buf[k] = std::conj(spec[f][cfg.n_fft - k]);
    fft_inplace(buf, true);
    int64_t center = static_cast<int64_t>(f) * cfg.hop + cfg.hop / 2;
    for (int64_t j = 0; j < cfg.win; ++j) {
      int64_t dst = center - cfg.win / 2 + j;
      if (dst < 0 || dst >= length) continue;
      out[dst] += buf[lead + j].real() * window[j];
      norm[dst] += window[j] * window[j];
    }
  }
  for (int64_t i = 0; i < length; ++i)
    if (norm[i] > 1e-10) out[i] /= norm[i];
  return out;
}

Tensor stft_magnitude(const std::vector<real>& x, const StftConfig& cfg) {
  auto spec = stft(x, cfg);
  int64_t frames = static_cast<int64_t>(spec.size());
  int64_t bins = cfg.n_fft / 2 + 1;
  Tensor mag({frames, bins});
  for (int64_t f = 0; f < frames; ++f)
    for (int64_t k = 0; k < bins; ++k) mag.at(f, k) = std::abs(spec[f][k]);
  return mag;
}

real hz_to_mel(real hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

real mel_to_hz(real mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Tensor mel_filterbank(int64_t n_mels, int64_t n_fft, int64_t sample_rate,
                      real fmin, real fmax) {
  require(fmax > fmin && fmax <= real(sample_rate) / 2,
          "mel_filterbank: bad frequency range");
  int64_t bins = n_fft / 2 + 1;
  std::vector<real> hz(n_mels + 2);
  real m_lo = hz_to_mel(fmin), m_hi = hz_to_mel(fmax);
  for (int64_t i = 0; i < n_mels + 2; ++i)
    hz[i] = mel_to_hz(m_lo + (m_hi - m_lo) * real(i) / real(n_mels + 1));
  Tensor fb = Tensor::zeros({n_mels, bins});
  for (int64_t m = 0; m < n_mels; ++m) {
    real lo = hz[m], mid = hz[m + 1], hi = hz[m + 2];
    for (int64_t k = 0; k < bins; ++k) {
      real fk = real(k) * real(sample_rate) / real(n_fft);
      real up = (fk - lo) / (mid - lo);
      real down = (hi - fk) / (hi - mid);
      fb.at(m, k) = std::max(real(0), std::min(up, down));
    }
  }
  return fb;
}

std::vector<real> mel_center_freqs(int64_t n_mels, real fmin, real fmax) {
  std::vector<real> centers(n_mels);
  real m_lo = hz_to_mel(fmin), m_hi = hz_to_mel(fmax);
  for (int64_t m = 0; m < n_mels; ++m)
    centers[m] = mel_to_hz(m_lo + (m_hi - m_lo) * real(m + 1) / real(n_mels + 1));
  return centers;
}

}  // namespace lts
