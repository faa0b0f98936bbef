// include/lts/model/variance.h

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

#ifndef LTS_MODEL_VARIANCE_H_
#define LTS_MODEL_VARIANCE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "lts/core/nn.h"
#include "lts/data/types.h"
#include "lts/model/config.h"

namespace lts {

using ag::Var;

// Per-frame variance estimates over the encoded video.
struct VariancePrediction {
  Var linguistic_logits;  // (T_v, K), unnormalised
  Var pitch_hat;          // (T_v, 1)
  Var energy_hat;         // (T_v, 1)

  std::vector<int64_t> unit_argmax() const;
  std::vector<real> pitch_values() const;
  std::vector<real> energy_values() const;
};

// One layer of a variance head: convolution, ReLU, LN, dropout.
struct ConvLnLayer {
  nn::Conv1d conv;
  nn::LayerNorm ln;

  ConvLnLayer() = default;
  ConvLnLayer(nn::Params& ps, const std::string& name, int64_t in, int64_t out,
              int64_t k);
  Var forward(const Var& x, real dropout, uint64_t seed, bool training) const;
};

// Three heads over shared visual features: a four-layer convolutional
// linguistic classifier and two-layer convolutional pitch/energy regressors.
struct VariancePredictor {
  std::vector<ConvLnLayer> ling_layers;
  nn::Linear ling_out;
  std::vector<ConvLnLayer> pitch_layers;
  nn::Linear pitch_out;
  std::vector<ConvLnLayer> energy_layers;
  nn::Linear energy_out;
  real dropout = 0.0;

  VariancePredictor() = default;
  VariancePredictor(nn::Params& ps, const ModelConfig& cfg);
  VariancePrediction forward(const Var& h_v, uint64_t seed,
                             bool training) const;
};

// Adds linguistic, pitch, and energy embeddings to the visual features.
struct VarianceConditioner {
  nn::Embedding unit_emb;   // (K, d_model)
  nn::Conv1d pitch_conv;    // 1 -> d_model
  nn::Conv1d energy_conv;   // 1 -> d_model

  VarianceConditioner() = default;
  VarianceConditioner(nn::Params& ps, const ModelConfig& cfg);
  Var forward(const Var& h_v, const std::vector<int64_t>& units,
              const Var& pitch, const Var& energy) const;
};

// Wraps ground-truth targets as graph constants for teacher forcing.
Var pitch_to_var(const std::vector<real>& values);
Var energy_to_var(const std::vector<real>& values);

}  // namespace lts

#endif  // LTS_MODEL_VARIANCE_H_
