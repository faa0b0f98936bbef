// include/lts/model/encoder.h

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

#ifndef LTS_MODEL_ENCODER_H_
#define LTS_MODEL_ENCODER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "lts/core/nn.h"
#include "lts/data/types.h"
#include "lts/model/conformer.h"
#include "lts/model/config.h"

namespace lts {

// Two 3x3 convolutions with group normalisation and an identity or projected
// skip connection.
struct BasicBlock2d {
  nn::Conv2d conv1, conv2;
  nn::GroupNorm gn1, gn2;
  nn::Conv2d down_conv;
  nn::GroupNorm down_gn;
  bool projected_skip = false;

  BasicBlock2d() = default;
  BasicBlock2d(nn::Params& ps, const std::string& name, int64_t in,
               int64_t out, int64_t stride);
  Var forward(const Var& x) const;
};

// 3D-convolution front end, per-frame residual trunk, speaker embedding, and
// a conformer stack. Maps a clip to per-frame hidden features (T_v, d_model).
class VideoEncoder {
 public:
  VideoEncoder() = default;
  VideoEncoder(nn::Params& ps, const ModelConfig& cfg);

  // Full encoder path. Requires speaker_id in [0, n_speakers).
  Var forward(const VideoClip& clip, int64_t speaker_id, uint64_t seed,
              bool training) const;
  // Spatial trunk only: (T_v, 1, 112, 112) frames -> (T_v, d_model).
  Var frame_features(const Var& frames) const;
  Var speaker_embedding(int64_t speaker_id) const;  // (1, d_model)

 private:
  nn::Conv3d stem_;
  nn::GroupNorm stem_gn_;
  std::vector<BasicBlock2d> blocks_;
  nn::Linear proj_;
  nn::Embedding spk_;
  ConformerStack stack_;
  int64_t n_speakers_ = 0;
};

}  // namespace lts

#endif  // LTS_MODEL_ENCODER_H_
