// include/lts/model/model.h

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

#ifndef LTS_MODEL_MODEL_H_
#define LTS_MODEL_MODEL_H_

#include <cstdint>
#include <vector>

#include "lts/core/nn.h"
#include "lts/data/types.h"
#include "lts/model/conformer.h"
#include "lts/model/config.h"
#include "lts/model/encoder.h"
#include "lts/model/variance.h"

namespace lts {

// Upsamples conditioned features to mel rate and decodes a coarse
// mel-spectrogram with a conformer stack.
struct MelDecoder {
  ConformerStack stack;
  nn::Linear out;

  struct Result {
    Var decoder_input;  // (T_m, d_model), the upsampled conditioned features
    Var coarse_mel;     // (T_m, mel_bands)
  };

  MelDecoder() = default;
  MelDecoder(nn::Params& ps, const ModelConfig& cfg);
  Result forward(const Var& conditioned, uint64_t seed, bool training) const;
};

// The full trainable network apart from the flow post-net: video encoder,
// variance heads, conditioning, and the mel decoder.
class LipToSpeechModel {
 public:
  LipToSpeechModel(const ModelConfig& cfg, uint64_t seed);

  struct ForwardOutput {
    Var h_v;                  // (T_v, d_model)
    VariancePrediction pred;  // heads over h_v
    Var decoder_input;        // (4*T_v, d_model)
    Var coarse_mel;           // (4*T_v, mel_bands)
  };

  // Teacher-forced path: conditions the decoder on ground-truth variances.
  ForwardOutput forward_teacher(const VideoClip& clip,
                                const VarianceTargets& targets,
                                int64_t speaker_id, uint64_t seed,
                                bool training);
  // Inference path: conditions the decoder on its own variance predictions.
  ForwardOutput forward_predicted(const VideoClip& clip, int64_t speaker_id,
                                  uint64_t seed, bool training);

  Var encode(const VideoClip& clip, int64_t speaker_id, uint64_t seed,
             bool training) const;
  Var speaker_embedding(int64_t speaker_id) const;

  const ModelConfig& config() const { return cfg_; }
  nn::Params& params() { return params_; }
  const nn::Params& params() const { return params_; }

  const VideoEncoder& encoder() const { return encoder_; }
  const VariancePredictor& variance_predictor() const { return variances_; }
  const VarianceConditioner& conditioner() const { return conditioner_; }
  const MelDecoder& decoder() const { return decoder_; }

 private:
  ForwardOutput decode_with(const Var& h_v, const VariancePrediction& pred,
                            const std::vector<int64_t>& units,
                            const Var& pitch, const Var& energy,
                            int64_t speaker_id, uint64_t seed, bool training);

  ModelConfig cfg_;
  nn::Params params_;
  VideoEncoder encoder_;
  VariancePredictor variances_;
  VarianceConditioner conditioner_;
  MelDecoder decoder_;
};

}  // namespace lts

#endif  // LTS_MODEL_MODEL_H_
