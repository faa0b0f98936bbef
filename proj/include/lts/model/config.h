// include/lts/model/config.h

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

#ifndef LTS_MODEL_CONFIG_H_
#define LTS_MODEL_CONFIG_H_

#include <cstdint>
#include <string>

#include "json.hpp"
#include "lts/common.h"

namespace lts {

struct ModelConfig {
  int64_t d_model = 384;
  int64_t n_heads = 6;
  int64_t enc_layers = 4;
  int64_t dec_layers = 4;
  int64_t conv_kernel = 15;
  int64_t ff_expansion = 4;
  int64_t k_units = 200;
  int64_t n_speakers = 2;
  int64_t n_flow_steps = 8;
  int64_t mel_bands = 80;
  int64_t trunk_base = 64;
  int64_t flow_hidden = 192;
  int64_t relpos_max_dist = 64;
  real dropout = 0.1;
  bool decoder_speaker = false;

  void validate() const;
};

// GRID-scale preset: 6 attention heads, hidden width 384.
ModelConfig grid_preset();
// Lip2Wav-scale preset: 8 attention heads, hidden width 512.
ModelConfig lip2wav_preset();
// Tiny configuration for CPU smoke tests and overfit runs.
ModelConfig smoke_preset();
// Preset lookup by name ("grid", "lip2wav", "smoke").
ModelConfig preset_by_name(const std::string& name);

nlohmann::json model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace lts

#endif  // LTS_MODEL_CONFIG_H_
