// src/data/synthetic.cc

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

#include "lts/data/synthetic.h"

#include <cmath>
#include <filesystem>
#include <map>

#include "lts/audio/wav.h"
#include "lts/core/rng.h"
#include "lts/data/types.h"
#include "lts/data/video_io.h"

namespace lts {

namespace fs = std::filesystem;

namespace {

constexpr real kPi = 3.14159265358979323846;
constexpr int64_t kHarmonics = 4;
constexpr int64_t kSamplesPerFrame = 640;  // 16 kHz / 25 fps

struct WordVoice {
  real f0 = 0;                 // 0 marks the unvoiced word type
  real harmonics[kHarmonics];  // relative amplitudes
  real aperture = 0;           // peak mouth opening in [0.2, 1]
  real spread = 0;             // peak lip widening in [0, 1]
};

std::vector<WordVoice> make_vocabulary(const SyntheticConfig& cfg) {
  std::vector<WordVoice> vocab(cfg.word_types);
  Rng rng(derive_seed(cfg.seed, "vocabulary"));
  for (int64_t w = 0; w < cfg.word_types; ++w) {
    WordVoice& v = vocab[w];
    bool unvoiced = cfg.word_types >= 4 && w == cfg.word_types - 1;
    v.f0 = unvoiced ? 0 : 110.0 * std::exp2(2.0 * real(w) / 12.0);
    for (int64_t h = 0; h < kHarmonics; ++h)
      v.harmonics[h] = rng.uniform(0.3, 1.0) / real(h + 1);
    v.aperture = rng.uniform(0.2, 1.0);
    v.spread = rng.uniform(0.0, 1.0);
  }
  return vocab;
}

// Smooth rise and fall over the word, zero at both ends.
real word_envelope(real t01) { return std::sin(kPi * t01); }

void render_frame(uint8_t* frame, real aperture, real spread,
                  int64_t speaker_id) {
  real face_level = 0.50 + 0.06 * real(speaker_id % 4);
  real face_cx = 56.0, face_cy = 52.0, face_rx = 44.0, face_ry = 50.0;
  real mouth_cx = 56.0, mouth_cy = 82.0;
  real mouth_rx = 12.0 + 10.0 * spread;
  real mouth_ry = 2.0 + 14.0 * aperture;

  for (int64_t y = 0; y < kFrameSize; ++y)
    for (int64_t x = 0; x < kFrameSize; ++x) {
      real level = 0.08;
      real fx = (real(x) - face_cx) / face_rx;
      real fy = (real(y) - face_cy) / face_ry;
      if (fx * fx + fy * fy <= 1.0) level = face_level;
      real mx = (real(x) - mouth_cx) / mouth_rx;
      real my = (real(y) - mouth_cy) / mouth_ry;
      if (mx * mx + my * my <= 1.0) level = 0.15;
      frame[y * kFrameSize + x] =
          static_cast<uint8_t>(std::lround(level * 255.0));
    }
}

}  // namespace

Manifest generate_synthetic_corpus(const SyntheticConfig& config,
                                   const std::string& out_dir) {
  require<DataError>(config.clips >= 1 && config.words_per_clip >= 1 &&
                         config.word_types >= 2 && config.speakers >= 1 &&
                         config.frames_per_word >= 2,
                     "synthetic corpus: degenerate configuration");

  auto vocab = make_vocabulary(config);
  fs::create_directories(fs::path(out_dir) / "video");
  fs::create_directories(fs::path(out_dir) / "audio");

  Manifest manifest;
  std::map<std::string, std::string> transcripts;

  for (int64_t c = 0; c < config.clips; ++c) {
    std::string id = strprintf("clip%04lld", static_cast<long long>(c));
    int64_t speaker = c % config.speakers;
    Rng rng(derive_seed(config.seed, "clip", c));

    std::vector<int64_t> words(config.words_per_clip);
    std::string text;
    for (int64_t i = 0; i < config.words_per_clip; ++i) {
      words[i] = rng.uniform_int(0, config.word_types - 1);
      if (i) text += ' ';
      text += strprintf("w%lld", static_cast<long long>(words[i]));
    }

    int64_t t_v = config.words_per_clip * config.frames_per_word;
    RawVideo video;
    video.frames = t_v;
    video.height = kFrameSize;
    video.width = kFrameSize;
    video.frame_rate = kVideoFps;
    video.pixels.resize(static_cast<size_t>(t_v) * kFrameSize * kFrameSize);

    std::vector<real> audio(static_cast<size_t>(t_v) * kSamplesPerFrame, 0.0);
    real speaker_pitch_scale = 1.0 + 0.06 * real(speaker);
    real speaker_tilt = 1.0 - 0.08 * real(speaker % 3);
    real phase = 0;

    for (int64_t t = 0; t < t_v; ++t) {
      int64_t word_pos = t / config.frames_per_word;
      const WordVoice& v = vocab[words[word_pos]];
      real within = (real(t % config.frames_per_word) + 0.5) /
                    real(config.frames_per_word);
      real env = word_envelope(within);
      render_frame(video.pixels.data() + t * kFrameSize * kFrameSize,
                   env * v.aperture, env * v.spread, speaker);

      real f0 = v.f0 * speaker_pitch_scale;
      for (int64_t s = 0; s < kSamplesPerFrame; ++s) {
        int64_t idx = t * kSamplesPerFrame + s;
        real sample_env =
            word_envelope((real(t % config.frames_per_word) +
                           real(s) / real(kSamplesPerFrame)) /
                          real(config.frames_per_word));
        real amp = 0.30 * sample_env * v.aperture;
        if (v.f0 <= 0) {
          audio[idx] = amp * rng.uniform(-1.0, 1.0);
        } else {
          phase += 2.0 * kPi * f0 / real(kSampleRate);
          real s_acc = 0;
          real tilt = 1.0;
          for (int64_t h = 0; h < kHarmonics; ++h) {
            s_acc += v.harmonics[h] * tilt * std::sin(real(h + 1) * phase);
            tilt *= speaker_tilt;
          }
          audio[idx] = amp * s_acc;
        }
      }
    }

    std::string video_rel = "video/" + id + ".lvf";
    std::string audio_rel = "audio/" + id + ".wav";
    write_video_file((fs::path(out_dir) / video_rel).string(), video);
    write_wav((fs::path(out_dir) / audio_rel).string(), audio, kSampleRate);

    ManifestEntry entry;
    entry.id = id;
    entry.video_path = video_rel;
    entry.audio_path = audio_rel;
    entry.speaker_id = speaker;
    if (config.clips >= 3 && c == config.clips - 1)
      entry.split = "test";
    else if (config.clips >= 3 && c == config.clips - 2)
      entry.split = "val";
    else
      entry.split = "train";
    manifest.entries.push_back(entry);
    transcripts[id] = text;
  }

  write_manifest((fs::path(out_dir) / "manifest.tsv").string(), manifest);
  write_transcripts((fs::path(out_dir) / "transcripts.tsv").string(),
                    transcripts);

  // Re-read so entry paths resolve relative to the manifest location.
  return read_manifest((fs::path(out_dir) / "manifest.tsv").string());
}

}  // namespace lts
