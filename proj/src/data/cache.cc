// src/data/cache.cc

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

#include "lts/data/cache.h"

#include <cmath>
#include <filesystem>

#include "lts/audio/mel.h"
#include "lts/audio/wav.h"
#include "lts/core/archive.h"
#include "lts/data/energy.h"
#include "lts/data/video_io.h"

namespace lts {

namespace fs = std::filesystem;

namespace {

constexpr const char* kStatsFile = "pitch_stats.ltsar";

std::vector<real> frames_to_waveform_aligned(const std::vector<real>& samples,
                                             int64_t t_v) {
  // Exactly 4 mel frames per video frame requires t_v * 4 * hop samples.
  auto target = static_cast<size_t>(t_v * kMelPerVideoFrame * 160);
  std::vector<real> out = samples;
  out.resize(target, 0.0);
  return out;
}

PitchTrack to_log_hz(const PitchTrack& track) {
  PitchTrack out = track;
  for (int64_t i = 0; i < out.frames(); ++i)
    if (out.voiced[i]) out.f0[i] = std::log(out.f0[i]);
  return out;
}

void save_pitch_stats(const std::string& cache_dir, const PitchStats& stats,
                      const PreprocessConfig& config) {
  Archive a;
  a.meta()["kind"] = "pitch_stats";
  a.meta()["mean"] = stats.mean;
  a.meta()["stddev"] = stats.stddev;
  a.meta()["voiced_frames"] = stats.voiced_frames;
  a.meta()["pitch_log_hz"] = config.pitch_log_hz;
  a.meta()["version"] = kCacheVersion;
  a.save((fs::path(cache_dir) / kStatsFile).string());
}

}  // namespace

AlignedPair ClipFeatures::to_pair() const {
  AlignedPair p;
  p.id = id;
  p.clip = clip;
  p.mel = mel;
  p.targets = targets;
  return p;
}

std::string feature_path(const std::string& cache_dir, const std::string& id) {
  return (fs::path(cache_dir) / (id + ".features.ltsar")).string();
}

void save_features(const std::string& cache_dir, const ClipFeatures& f) {
  Archive a;
  a.put_tensor("frames", f.clip.frames);
  a.put_tensor("mel", f.mel.values);
  a.put_tensor("ssl", f.ssl);

  Tensor f0 = Tensor::zeros({f.pitch_track.frames()});
  std::vector<uint8_t> voiced(f.pitch_track.voiced.begin(),
                              f.pitch_track.voiced.end());
  for (int64_t i = 0; i < f.pitch_track.frames(); ++i)
    f0[i] = f.pitch_track.f0[i];
  a.put_tensor("pitch_f0", f0);
  a.put_u8("pitch_voiced", voiced, {f.pitch_track.frames()});

  Tensor pitch = Tensor::zeros({static_cast<int64_t>(f.targets.pitch.size())});
  for (size_t i = 0; i < f.targets.pitch.size(); ++i)
    pitch[static_cast<int64_t>(i)] = f.targets.pitch[i];
  a.put_tensor("pitch", pitch);

  Tensor energy =
      Tensor::zeros({static_cast<int64_t>(f.targets.energy.size())});
  for (size_t i = 0; i < f.targets.energy.size(); ++i)
    energy[static_cast<int64_t>(i)] = f.targets.energy[i];
  a.put_tensor("energy", energy);

  if (f.has_units) {
    a.put_i64("linguistic", f.targets.linguistic);
    a.meta()["codebook_hash"] = f.codebook_hash;
  }

  a.meta()["kind"] = "clip_features";
  a.meta()["id"] = f.id;
  a.meta()["speaker_id"] = f.clip.speaker_id;
  a.meta()["frame_rate"] = f.clip.frame_rate;
  a.meta()["all_unvoiced"] = f.targets.all_unvoiced;
  a.meta()["ssl_backend"] = f.ssl_backend_id;
  a.meta()["ssl_layer"] = f.ssl_layer;
  a.meta()["version"] = kCacheVersion;
  a.save(feature_path(cache_dir, f.id));
}

ClipFeatures load_features(const std::string& cache_dir, const std::string& id,
                           bool require_units) {
  std::string path = feature_path(cache_dir, id);
  require<DataError>(fs::exists(path),
                     strprintf("cache: no features for clip '%s'; run the "
                               "preprocess command first",
                               id.c_str()));
  Archive a = Archive::load(path);
  require<DataError>(a.meta().value("version", int64_t(0)) == kCacheVersion,
                     strprintf("cache: '%s' was written by an incompatible "
                               "version; re-run preprocessing",
                               path.c_str()));
  ClipFeatures f;
  f.id = a.meta().value("id", id);
  f.clip.frames = a.tensor("frames");
  f.clip.frame_rate = a.meta().value("frame_rate", kVideoFps);
  f.clip.speaker_id = a.meta().value("speaker_id", int64_t(0));
  f.mel.values = a.tensor("mel");

  Tensor f0 = a.tensor("pitch_f0");
  const auto& voiced = a.u8("pitch_voiced");
  f.pitch_track.f0.assign(f0.data(), f0.data() + f0.numel());
  f.pitch_track.voiced.assign(voiced.begin(), voiced.end());

  f.ssl = a.tensor("ssl");
  f.ssl_backend_id = a.meta().value("ssl_backend", "");
  f.ssl_layer = a.meta().value("ssl_layer", int64_t(0));

  Tensor pitch = a.tensor("pitch");
  f.targets.pitch.assign(pitch.data(), pitch.data() + pitch.numel());
  Tensor energy = a.tensor("energy");
  f.targets.energy.assign(energy.data(), energy.data() + energy.numel());
  f.targets.all_unvoiced = a.meta().value("all_unvoiced", false);

  f.has_units = a.has("linguistic");
  if (f.has_units) {
    f.targets.linguistic = a.i64("linguistic");
    f.codebook_hash = a.meta().value("codebook_hash", "");
  }
  require<DataError>(!require_units || f.has_units,
                     strprintf("cache: clip '%s' has no linguistic targets; "
                               "run the fit-units command first",
                               id.c_str()));
  return f;
}

void preprocess_corpus(const Manifest& manifest, const std::string& cache_dir,
                       const PreprocessConfig& config) {
  fs::create_directories(cache_dir);
  auto backend = make_ssl_backend(config.ssl_backend);

  struct Staged {
    const ManifestEntry* entry;
    ClipFeatures features;
    std::vector<real> waveform;
  };
  std::vector<Staged> staged;
  staged.reserve(manifest.entries.size());

  for (const auto& entry : manifest.entries) {
    Staged s;
    s.entry = &entry;
    RawVideo raw = read_video_file(entry.video_path);
    s.features.id = entry.id;
    s.features.clip = to_clip(raw, entry.speaker_id);

    WavData wav = read_wav(entry.audio_path);
    require<DataError>(wav.sample_rate == kSampleRate,
                       strprintf("clip '%s': expected %lld Hz audio",
                                 entry.id.c_str(),
                                 static_cast<long long>(kSampleRate)));
    s.waveform =
        frames_to_waveform_aligned(wav.samples, s.features.clip.t_v());

    s.features.mel = extract_mel(s.waveform, kSampleRate);
    require(s.features.mel.t_m() ==
                kMelPerVideoFrame * s.features.clip.t_v(),
            "preprocess: alignment invariant violated");

    s.features.pitch_track = pyin_pitch(s.waveform, kSampleRate);
    if (auto* pre = dynamic_cast<PrecomputedSslBackend*>(backend.get()))
      pre->set_clip_id(entry.id);
    SSLFeatures ssl =
        backend->extract(s.waveform, kSampleRate, config.ssl_layer);
    s.features.ssl = ssl.features;
    s.features.ssl_backend_id = ssl.backend_id;
    s.features.ssl_layer = ssl.layer_index;
    s.features.targets.energy = extract_energy(s.features.mel);
    staged.push_back(std::move(s));
  }

  std::vector<PitchTrack> train_tracks;
  std::vector<const PitchTrack*> track_ptrs;
  for (const auto& s : staged)
    if (s.entry->split == "train")
      train_tracks.push_back(config.pitch_log_hz
                                 ? to_log_hz(s.features.pitch_track)
                                 : s.features.pitch_track);
  for (const auto& t : train_tracks) track_ptrs.push_back(&t);
  require<DataError>(!track_ptrs.empty(),
                     "preprocess: manifest has no training split");
  PitchStats stats = accumulate_pitch_stats(track_ptrs);

  for (auto& s : staged) {
    PitchTrack track = config.pitch_log_hz ? to_log_hz(s.features.pitch_track)
                                           : s.features.pitch_track;
    StandardisedPitch sp =
        standardise_pitch(track, stats, s.features.clip.t_v());
    s.features.targets.pitch = sp.values;
    s.features.targets.all_unvoiced = sp.all_unvoiced;
    save_features(cache_dir, s.features);
  }
  save_pitch_stats(cache_dir, stats, config);
}

Codebook fit_units(const Manifest& manifest, const std::string& cache_dir,
                   int64_t k, uint64_t seed,
                   const std::string& codebook_path) {
  std::vector<Tensor> train_features;
  std::string backend_id;
  int64_t layer_index = 0;
  for (const auto& entry : manifest.entries) {
    if (entry.split != "train") continue;
    ClipFeatures f = load_features(cache_dir, entry.id);
    backend_id = f.ssl_backend_id;
    layer_index = f.ssl_layer;
    train_features.push_back(f.ssl);
  }
  require<DataError>(!train_features.empty(),
                     "fit-units: manifest has no training split");

  Codebook cb = fit_codebook(train_features, k, seed);
  cb.backend_id = backend_id;
  cb.layer_index = layer_index;
  cb.save(codebook_path);

  for (const auto& entry : manifest.entries) {
    ClipFeatures f = load_features(cache_dir, entry.id);
    Tensor matched = length_match(f.ssl, f.clip.t_v());
    f.targets.linguistic = quantise(matched, cb);
    f.has_units = true;
    f.codebook_hash = cb.hash();
    save_features(cache_dir, f);
  }
  return cb;
}

PitchStats load_pitch_stats(const std::string& cache_dir) {
  std::string path = (fs::path(cache_dir) / kStatsFile).string();
  require<DataError>(fs::exists(path),
                     strprintf("cache: no pitch statistics at '%s'; run the "
                               "preprocess command first",
                               path.c_str()));
  Archive a = Archive::load(path);
  PitchStats stats;
  stats.mean = a.meta().value("mean", 0.0);
  stats.stddev = a.meta().value("stddev", 0.0);
  stats.voiced_frames = a.meta().value("voiced_frames", int64_t(0));
  return stats;
}

}  // namespace lts
