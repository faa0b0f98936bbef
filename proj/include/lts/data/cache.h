// include/lts/data/cache.h

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

#ifndef LTS_DATA_CACHE_H_
#define LTS_DATA_CACHE_H_

#include <string>
#include <vector>

#include "lts/audio/pitch.h"
#include "lts/data/manifest.h"
#include "lts/data/types.h"
#include "lts/units/kmeans.h"
#include "lts/units/ssl.h"

namespace lts {

constexpr int64_t kCacheVersion = 3;

struct PreprocessConfig {
  std::string ssl_backend = "synthetic";
  int64_t ssl_layer = 12;
  bool pitch_log_hz = false;  // standardise log F0 instead of Hz
};

// Everything preprocessing derives from one clip. The linguistic targets are
// absent until a codebook pass fills them in.
struct ClipFeatures {
  std::string id;
  VideoClip clip;
  MelSpectrogram mel;
  PitchTrack pitch_track;  // mel-rate, raw Hz
  Tensor ssl;              // (T_f, D)
  std::string ssl_backend_id;
  int64_t ssl_layer = 0;
  VarianceTargets targets;
  bool has_units = false;
  std::string codebook_hash;

  AlignedPair to_pair() const;
};

std::string feature_path(const std::string& cache_dir, const std::string& id);

void save_features(const std::string& cache_dir, const ClipFeatures& f);
ClipFeatures load_features(const std::string& cache_dir, const std::string& id,
                           bool require_units = false);

// Derives per-clip features for the whole manifest: decode, align audio to
// exactly 4 mel frames per video frame, extract mel / pitch / energy / SSL
// features, standardise pitch with training-split statistics, and write one
// archive per clip plus the corpus statistics file.
void preprocess_corpus(const Manifest& manifest, const std::string& cache_dir,
                       const PreprocessConfig& config = {});

// Fits a codebook on the training split's cached SSL features, quantises
// every cached clip, and rewrites the archives with linguistic targets.
Codebook fit_units(const Manifest& manifest, const std::string& cache_dir,
                   int64_t k, uint64_t seed, const std::string& codebook_path);

PitchStats load_pitch_stats(const std::string& cache_dir);

}  // namespace lts

#endif  // LTS_DATA_CACHE_H_
