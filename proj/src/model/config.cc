// src/model/config.cc

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

#include "lts/model/config.h"

namespace lts {

void ModelConfig::validate() const {
  require<DataError>(d_model > 0 && n_heads > 0,
                     "ModelConfig: d_model and n_heads must be positive");
  require<DataError>(d_model % n_heads == 0,
                     "ModelConfig: d_model must be divisible by n_heads");
  require<DataError>(enc_layers >= 1 && dec_layers >= 1,
                     "ModelConfig: need at least one conformer layer per stack");
  require<DataError>(conv_kernel >= 1 && conv_kernel % 2 == 1,
                     "ModelConfig: conv_kernel must be odd");
  require<DataError>(k_units >= 1, "ModelConfig: k_units must be positive");
  require<DataError>(n_speakers >= 1,
                     "ModelConfig: n_speakers must be positive");
  require<DataError>(n_flow_steps >= 1,
                     "ModelConfig: n_flow_steps must be positive");
  require<DataError>(mel_bands >= 2 && mel_bands % 2 == 0,
                     "ModelConfig: mel_bands must be even");
  require<DataError>(trunk_base >= 1 && trunk_base % 2 == 0,
                     "ModelConfig: trunk_base must be even");
  require<DataError>(flow_hidden >= 1,
                     "ModelConfig: flow_hidden must be positive");
  require<DataError>(relpos_max_dist >= 1,
                     "ModelConfig: relpos_max_dist must be positive");
  require<DataError>(dropout >= 0 && dropout < 1,
                     "ModelConfig: dropout must be in [0, 1)");
}

ModelConfig grid_preset() {
  ModelConfig cfg;
  cfg.d_model = 384;
  cfg.n_heads = 6;
  return cfg;
}

ModelConfig lip2wav_preset() {
  ModelConfig cfg;
  cfg.d_model = 512;
  cfg.n_heads = 8;
  return cfg;
}

ModelConfig smoke_preset() {
  ModelConfig cfg;
  cfg.d_model = 96;
  cfg.n_heads = 2;
  cfg.enc_layers = 2;
  cfg.dec_layers = 2;
  cfg.conv_kernel = 7;
  cfg.ff_expansion = 2;
  cfg.k_units = 8;
  cfg.trunk_base = 8;
  cfg.flow_hidden = 48;
  cfg.relpos_max_dist = 16;
  cfg.dropout = 0.0;
  return cfg;
}

ModelConfig preset_by_name(const std::string& name) {
  if (name == "grid") return grid_preset();
  if (name == "lip2wav") return lip2wav_preset();
  if (name == "smoke") return smoke_preset();
  throw DataError("unknown model preset '" + name +
                  "' (expected grid, lip2wav, or smoke)");
}

nlohmann::json model_config_to_json(const ModelConfig& cfg) {
  nlohmann::json j;
  j["d_model"] = cfg.d_model;
  j["n_heads"] = cfg.n_heads;
  j["enc_layers"] = cfg.enc_layers;
  j["dec_layers"] = cfg.dec_layers;
  j["conv_kernel"] = cfg.conv_kernel;
  j["ff_expansion"] = cfg.ff_expansion;
  j["k_units"] = cfg.k_units;
  j["n_speakers"] = cfg.n_speakers;
  j["n_flow_steps"] = cfg.n_flow_steps;
  j["mel_bands"] = cfg.mel_bands;
  j["trunk_base"] = cfg.trunk_base;
  j["flow_hidden"] = cfg.flow_hidden;
  j["relpos_max_dist"] = cfg.relpos_max_dist;
  j["dropout"] = cfg.dropout;
  j["decoder_speaker"] = cfg.decoder_speaker;
  return j;
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  cfg.d_model = j.value("d_model", cfg.d_model);
  cfg.n_heads = j.value("n_heads", cfg.n_heads);
  cfg.enc_layers = j.value("enc_layers", cfg.enc_layers);
  cfg.dec_layers = j.value("dec_layers", cfg.dec_layers);
  cfg.conv_kernel = j.value("conv_kernel", cfg.conv_kernel);
  cfg.ff_expansion = j.value("ff_expansion", cfg.ff_expansion);
  cfg.k_units = j.value("k_units", cfg.k_units);
  cfg.n_speakers = j.value("n_speakers", cfg.n_speakers);
  cfg.n_flow_steps = j.value("n_flow_steps", cfg.n_flow_steps);
  cfg.mel_bands = j.value("mel_bands", cfg.mel_bands);
  cfg.trunk_base = j.value("trunk_base", cfg.trunk_base);
  cfg.flow_hidden = j.value("flow_hidden", cfg.flow_hidden);
  cfg.relpos_max_dist = j.value("relpos_max_dist", cfg.relpos_max_dist);
  cfg.dropout = j.value("dropout", cfg.dropout);
  cfg.decoder_speaker = j.value("decoder_speaker", cfg.decoder_speaker);
  cfg.validate();
  return cfg;
}

}  // namespace lts
