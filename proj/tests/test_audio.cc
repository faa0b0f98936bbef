// tests/test_audio.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "lts/audio/dsp.h"
#include "lts/audio/mel.h"
#include "lts/audio/pitch.h"
#include "lts/audio/vocoder.h"
#include "lts/audio/wav.h"
#include "test_util.h"

using namespace lts;

namespace {

constexpr real kPi = 3.14159265358979323846;

std::vector<real> sine(real freq, real seconds, real amp = 0.5,
                       int64_t sr = 16000) {
  auto n = static_cast<int64_t>(seconds * sr);
  std::vector<real> x(n);
  for (int64_t i = 0; i < n; ++i)
    x[i] = amp * std::sin(2 * kPi * freq * real(i) / real(sr));
  return x;
}

}  // namespace

TEST_CASE("fft matches a direct dft") {
  Rng rng(derive_seed(21, "fft"));
  int64_t n = 64;
  std::vector<cplx> a(n);
  for (auto& v : a) v = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
  std::vector<cplx> fast = a;
  fft_inplace(fast, false);
  for (int64_t k = 0; k < n; ++k) {
    cplx acc(0);
    for (int64_t j = 0; j < n; ++j) {
      real ang = -2 * kPi * real(k * j) / real(n);
      acc += a[j] * cplx(std::cos(ang), std::sin(ang));
    }
    CHECK(std::abs(fast[k] - acc) < 1e-9);
  }
  std::vector<cplx> back = fast;
  fft_inplace(back, true);
  for (int64_t j = 0; j < n; ++j) CHECK(std::abs(back[j] - a[j]) < 1e-12);
}

TEST_CASE("hann window satisfies constant overlap-add at hop win/4") {
  auto w = hann_window(640);
  for (int64_t n = 320; n < 960; ++n) {
    real acc = 0;
    for (int64_t m = -4; m <= 8; ++m) {
      int64_t idx = n - m * 160;
      if (idx >= 0 && idx < 640) acc += w[idx] * w[idx];
    }
    CHECK(acc == doctest::Approx(1.5).epsilon(1e-10));
  }
}

TEST_CASE("stft produces floor(len/hop) frames and istft inverts it") {
  StftConfig cfg = mel_stft_config();
  CHECK(cfg.win == 640);
  CHECK(cfg.hop == 160);
  auto x = sine(330, 1.0);
  auto spec = stft(x, cfg);
  CHECK(spec.size() == 100);
  CHECK(spec[0].size() == 513);

  auto y = istft(spec, cfg, static_cast<int64_t>(x.size()));
  real err = 0, ref = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    err += (y[i] - x[i]) * (y[i] - x[i]);
    ref += x[i] * x[i];
  }
  CHECK(std::sqrt(err / ref) < 1e-6);
}

TEST_CASE("mel extraction frame count and silence floor") {
  auto mel = extract_mel(std::vector<real>(16000, 0.0), 16000);
  CHECK(mel.t_m() == 100);
  CHECK(mel.values.dim(1) == 80);
  for (int64_t i = 0; i < mel.values.numel(); ++i)
    CHECK(mel.values[i] == doctest::Approx(std::log(1e-5)).epsilon(1e-12));

  CHECK_THROWS_AS(extract_mel({}, 16000), DataError);
  CHECK_THROWS_AS(extract_mel(std::vector<real>(100, 0.1), 22050), DataError);
}

TEST_CASE("pure tone concentrates energy in the nearest mel band") {
  real tone = 440;
  auto mel = extract_mel(sine(tone, 1.0), 16000);
  EVec mean_energy = mel.values.mat().colwise().mean().transpose();
  int64_t argmax = 0;
  mean_energy.maxCoeff(&argmax);

  auto centers = mel_center_freqs(80, kMelFminHz, kMelFmaxHz);
  int64_t nearest = 0;
  for (int64_t m = 1; m < 80; ++m)
    if (std::abs(centers[m] - tone) < std::abs(centers[nearest] - tone))
      nearest = m;
  CHECK(argmax == nearest);
}

TEST_CASE("mel filterbank has unit-height triangles inside the range") {
  Tensor fb = mel_filterbank(80, 1024, 16000, 0, 8000);
  for (int64_t m = 0; m < 80; ++m) {
    real peak = fb.mat().row(m).maxCoeff();
    CHECK(peak > 0.2);
    CHECK(peak <= 1.0 + 1e-12);
  }
}

TEST_CASE("wav io round trips within quantisation error") {
  namespace fs = std::filesystem;
  fs::path p = fs::temp_directory_path() / "lts_wav_test.wav";
  auto x = sine(220, 0.25);
  write_wav(p.string(), x, 16000);
  WavData back = read_wav(p.string());
  CHECK(back.sample_rate == 16000);
  REQUIRE(back.samples.size() == x.size());
  for (size_t i = 0; i < x.size(); ++i)
    CHECK(std::abs(back.samples[i] - x[i]) < 1.0 / 32000);
  fs::remove(p);
}

TEST_CASE("pyin tracks a steady tone") {
  auto track = pyin_pitch(sine(220, 1.0), 16000);
  CHECK(track.frames() == 100);
  CHECK(track.voiced_count() > 80);
  std::vector<real> voiced_f0;
  for (int64_t i = 0; i < track.frames(); ++i)
    if (track.voiced[i]) voiced_f0.push_back(track.f0[i]);
  std::nth_element(voiced_f0.begin(), voiced_f0.begin() + voiced_f0.size() / 2,
                   voiced_f0.end());
  real median = voiced_f0[voiced_f0.size() / 2];
  CHECK(median == doctest::Approx(220).epsilon(0.02));
}

TEST_CASE("pyin marks silence unvoiced") {
  auto track = pyin_pitch(std::vector<real>(8000, 0.0), 16000);
  CHECK(track.voiced_count() == 0);
}

TEST_CASE("pyin marks white noise mostly unvoiced") {
  Rng rng(derive_seed(7, "noise"));
  std::vector<real> x(16000);
  for (auto& v : x) v = rng.uniform(-0.5, 0.5);
  auto track = pyin_pitch(x, 16000);
  CHECK(track.voiced_count() < track.frames() / 2);
}

TEST_CASE("pitch statistics and standardisation closed form") {
  PitchTrack t;
  t.f0 = {100, 200, 300};
  t.voiced = {1, 1, 1};
  PitchStats stats = accumulate_pitch_stats({&t});
  CHECK(stats.mean == doctest::Approx(200.0));
  CHECK(stats.stddev == doctest::Approx(81.6497).epsilon(1e-4));

  PitchTrack corpus;
  for (real f : {100.0, 200.0, 300.0})
    for (int j = 0; j < 4; ++j) {
      corpus.f0.push_back(f);
      corpus.voiced.push_back(1);
    }
  StandardisedPitch sp = standardise_pitch(corpus, stats, 3);
  REQUIRE(sp.values.size() == 3);
  CHECK(sp.values[0] == doctest::Approx(-1.2247).epsilon(1e-4));
  CHECK(sp.values[1] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(sp.values[2] == doctest::Approx(1.2247).epsilon(1e-4));
  CHECK_FALSE(sp.all_unvoiced);
}

TEST_CASE("constant pitch at the corpus mean standardises to zero") {
  PitchTrack t;
  t.f0.assign(8, 200.0);
  t.voiced.assign(8, 1);
  PitchStats stats{200.0, 50.0, 8};
  StandardisedPitch sp = standardise_pitch(t, stats, 2);
  for (real v : sp.values) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("mean pooling by four reaches video rate") {
  PitchTrack t;
  t.f0 = {0, 0, 0, 0, 1, 1, 1, 1};
  t.voiced.assign(8, 1);
  PitchStats stats{0.0, 1.0, 8};
  StandardisedPitch sp = standardise_pitch(t, stats, 2);
  REQUIRE(sp.values.size() == 2);
  CHECK(sp.values[0] == doctest::Approx(0.0));
  CHECK(sp.values[1] == doctest::Approx(1.0));
}

TEST_CASE("all-unvoiced tracks standardise to the fill value and are flagged") {
  PitchTrack t;
  t.f0.assign(8, 0.0);
  t.voiced.assign(8, 0);
  PitchStats stats{150.0, 30.0, 100};
  StandardisedPitch sp = standardise_pitch(t, stats, 2);
  CHECK(sp.all_unvoiced);
  for (real v : sp.values) CHECK(v == doctest::Approx(0.0));

  PitchStats bad{150.0, 0.0, 100};
  CHECK_THROWS_AS(standardise_pitch(t, bad, 2), NumericalError);
}

TEST_CASE("griffin-lim reconstructs a tone and is deterministic") {
  auto x = sine(500, 0.5);
  auto mel = extract_mel(x, 16000);
  GriffinLimConfig cfg;
  cfg.iterations = 30;
  auto y1 = griffin_lim(mel, cfg);
  auto y2 = griffin_lim(mel, cfg);
  REQUIRE(y1.size() == y2.size());
  CHECK(y1.size() == mel.t_m() * 160);
  for (size_t i = 0; i < y1.size(); ++i) CHECK(y1[i] == y2[i]);

  // Dominant frequency of the reconstruction should match the tone.
  int64_t n = 8192;
  std::vector<cplx> buf(n, cplx(0));
  for (int64_t i = 0; i < n && i < static_cast<int64_t>(y1.size()); ++i)
    buf[i] = y1[i];
  fft_inplace(buf, false);
  int64_t peak = 0;
  real best = 0;
  for (int64_t k = 1; k < n / 2; ++k)
    if (std::abs(buf[k]) > best) {
      best = std::abs(buf[k]);
      peak = k;
    }
  real peak_hz = real(peak) * 16000.0 / real(n);
  CHECK(std::abs(peak_hz - 500) < 30);
}
