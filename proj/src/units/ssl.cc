// src/units/ssl.cc

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

#include "lts/units/ssl.h"

#include <cmath>
#include <filesystem>

#include "lts/audio/dsp.h"
#include "lts/core/archive.h"
#include "lts/core/rng.h"

namespace lts {

namespace {

constexpr int64_t kSynthFftSize = 512;
constexpr int64_t kSynthMelBands = 40;
constexpr uint64_t kSynthSeed = 0x55531;

// One fixed projection per round, shared across processes via the seed.
Tensor projection(int64_t round_index, int64_t in_dim, int64_t out_dim) {
  Rng rng(derive_seed(kSynthSeed, "projection", round_index));
  Tensor w = Tensor::zeros({in_dim, out_dim});
  real scale = 1.0 / std::sqrt(real(in_dim));
  for (int64_t i = 0; i < w.numel(); ++i)
    w[i] = rng.normal(0.0, 1.0) * scale;
  return w;
}

}  // namespace

SSLFeatures SyntheticSslBackend::extract(const std::vector<real>& waveform,
                                         int64_t sample_rate,
                                         int64_t layer_index) {
  require<DataError>(!waveform.empty(), "ssl: empty waveform");
  require<DataError>(sample_rate == kSampleRate,
                     strprintf("ssl: expected %lld Hz audio, got %lld",
                               static_cast<long long>(kSampleRate),
                               static_cast<long long>(sample_rate)));
  require<DataError>(layer_index >= 1, "ssl: layer index must be >= 1");

  int64_t len = static_cast<int64_t>(waveform.size());
  int64_t t_f = len / kStrideSamples;
  require<DataError>(t_f >= 1, "ssl: waveform shorter than one frame");

  static const Tensor fb = mel_filterbank(kSynthMelBands, kSynthFftSize,
                                          kSampleRate, 0, 8000);
  auto window = hann_window(kSynthFftSize);

  // Scalar arithmetic throughout: unit targets must be bitwise reproducible,
  // so no vectorised reductions whose rounding depends on buffer alignment.
  Tensor bands = Tensor::zeros({t_f, kSynthMelBands});
  std::vector<cplx> buf(kSynthFftSize);
  std::vector<real> mag(kSynthFftSize / 2 + 1);
  for (int64_t f = 0; f < t_f; ++f) {
    int64_t center = f * kStrideSamples + kStrideSamples / 2;
    for (int64_t j = 0; j < kSynthFftSize; ++j) {
      int64_t idx = center - kSynthFftSize / 2 + j;
      real s = (idx >= 0 && idx < len) ? waveform[idx] : 0;
      buf[j] = s * window[j];
    }
    fft_inplace(buf, false);
    for (int64_t k = 0; k <= kSynthFftSize / 2; ++k) mag[k] = std::abs(buf[k]);
    for (int64_t m = 0; m < kSynthMelBands; ++m) {
      real acc = 0;
      for (int64_t k = 0; k <= kSynthFftSize / 2; ++k)
        acc += fb.at(m, k) * mag[k];
      bands.at(f, m) = std::log(std::max(acc, real(1e-10)));
    }
  }

  // Each round re-mixes the representation; deeper layers are progressively
  // more abstract transforms of the same filterbank input.
  static const Tensor first = projection(0, kSynthMelBands, kDim);
  Tensor h = Tensor::zeros({t_f, kDim});
  for (int64_t f = 0; f < t_f; ++f)
    for (int64_t j = 0; j < kDim; ++j) {
      real acc = 0;
      for (int64_t i = 0; i < kSynthMelBands; ++i)
        acc += bands.at(f, i) * first.at(i, j);
      h.at(f, j) = std::tanh(acc);
    }
  for (int64_t r = 1; r < layer_index; ++r) {
    Tensor w = projection(r, kDim, kDim);
    Tensor next = Tensor::zeros({t_f, kDim});
    for (int64_t f = 0; f < t_f; ++f)
      for (int64_t j = 0; j < kDim; ++j) {
        real acc = 0;
        for (int64_t i = 0; i < kDim; ++i) acc += h.at(f, i) * w.at(i, j);
        next.at(f, j) = std::tanh(acc);
      }
    h = next;
  }

  SSLFeatures out;
  out.features = h;
  out.layer_index = layer_index;
  out.backend_id = id();
  return out;
}

int64_t PrecomputedSslBackend::dim() const {
  throw DependencyError(
      "ssl backend 'precomputed' declares its width per file; query a loaded "
      "feature sequence instead");
}

SSLFeatures PrecomputedSslBackend::extract(const std::vector<real>& waveform,
                                           int64_t sample_rate,
                                           int64_t layer_index) {
  (void)waveform;
  (void)sample_rate;
  require<DependencyError>(!clip_id_.empty(),
                           "ssl backend 'precomputed' needs a clip id before "
                           "extraction");
  std::filesystem::path path =
      std::filesystem::path(dir_) / (clip_id_ + ".ssl");
  require<DependencyError>(std::filesystem::exists(path),
                           strprintf("ssl backend 'precomputed' has no "
                                     "feature file '%s'",
                                     path.string().c_str()));
  Archive a = Archive::load(path.string());
  SSLFeatures out;
  out.features = a.tensor("features");
  out.layer_index = a.meta().value("layer_index", layer_index);
  out.backend_id = id();
  require<DataError>(out.features.ndim() == 2,
                     strprintf("ssl: '%s' does not hold a (T, D) matrix",
                               path.string().c_str()));
  return out;
}

std::unique_ptr<SslBackend> make_ssl_backend(const std::string& name) {
  if (name == "synthetic") return std::make_unique<SyntheticSslBackend>();
  const std::string prefix = "precomputed:";
  if (name.rfind(prefix, 0) == 0)
    return std::make_unique<PrecomputedSslBackend>(name.substr(prefix.size()));
  throw DependencyError(strprintf(
      "unknown ssl backend '%s' (available: synthetic, precomputed:<dir>)",
      name.c_str()));
}

}  // namespace lts
