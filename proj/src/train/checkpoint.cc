// src/train/checkpoint.cc

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

#include "lts/train/checkpoint.h"

#include <algorithm>
#include <cmath>

#include "lts/core/archive.h"
#include "lts/core/rng.h"

namespace lts {

namespace {
constexpr const char* kParamPrefix = "param/";
constexpr const char* kAdamMPrefix = "adam_m/";
constexpr const char* kAdamVPrefix = "adam_v/";
}  // namespace

TrainState make_train_state(const ModelConfig& model_cfg,
                            const TrainConfig& train_cfg) {
  model_cfg.validate();
  train_cfg.validate();
  TrainState st;
  st.model_cfg = model_cfg;
  st.train_cfg = train_cfg;
  st.model = std::make_unique<LipToSpeechModel>(
      model_cfg, derive_seed(train_cfg.seed, "model"));
  st.postnet = FlowPostnet(st.model->params(), model_cfg);
  opt::AdamW::Config ac;
  ac.lr = train_cfg.lr;
  ac.beta1 = train_cfg.beta1;
  ac.beta2 = train_cfg.beta2;
  ac.eps = train_cfg.eps;
  ac.weight_decay = train_cfg.weight_decay;
  st.adam = opt::AdamW(ac);
  return st;
}

void save_checkpoint(const std::string& path, const TrainState& state) {
  require<InternalError>(state.model != nullptr,
                         "save_checkpoint: state has no model");
  Archive ar;
  ar.meta()["kind"] = "checkpoint";
  ar.meta()["version"] = 1;
  ar.meta()["model_config"] = model_config_to_json(state.model_cfg);
  ar.meta()["train_config"] = train_config_to_json(state.train_cfg);
  ar.meta()["step"] = state.step;
  ar.meta()["epoch"] = state.epoch;
  ar.meta()["adam_steps"] = state.adam.steps();
  ar.meta()["flow_initialized"] = state.postnet.initialized();
  ar.meta()["codebook_hash"] = state.codebook_hash;
  if (std::isfinite(state.best_val)) ar.meta()["best_val"] = state.best_val;
  for (const auto& [name, v] : state.model->params().all())
    ar.put_tensor(kParamPrefix + name, v->value);
  for (const auto& [name, t] : state.adam.m())
    ar.put_tensor(kAdamMPrefix + name, t);
  for (const auto& [name, t] : state.adam.v())
    ar.put_tensor(kAdamVPrefix + name, t);
  ar.save(path);
}

TrainState load_checkpoint(const std::string& path) {
  Archive ar = Archive::load(path);
  require<DataError>(ar.meta().value("kind", "") == "checkpoint",
                     strprintf("%s is not a checkpoint", path.c_str()));
  ModelConfig mcfg = model_config_from_json(ar.meta().at("model_config"));
  TrainConfig tcfg = train_config_from_json(ar.meta().at("train_config"));
  TrainState st = make_train_state(mcfg, tcfg);

  const auto& params = st.model->params().all();
  int64_t stored_params = 0;
  for (const std::string& key : ar.keys())
    if (key.rfind(kParamPrefix, 0) == 0) ++stored_params;
  require<DataError>(
      stored_params == static_cast<int64_t>(params.size()),
      strprintf("checkpoint %s holds %lld parameters, model expects %lld",
                path.c_str(), static_cast<long long>(stored_params),
                static_cast<long long>(params.size())));
  for (const auto& [name, v] : params) {
    std::string key = kParamPrefix + name;
    require<DataError>(ar.has(key),
                       strprintf("checkpoint missing parameter '%s'",
                                 name.c_str()));
    Tensor t = ar.tensor(key);
    require<DataError>(t.same_shape(v->value),
                       strprintf("checkpoint parameter '%s' shape mismatch",
                                 name.c_str()));
    std::copy(t.data(), t.data() + t.numel(), v->value.data());
  }
  for (const std::string& key : ar.keys()) {
    if (key.rfind(kAdamMPrefix, 0) == 0) {
      std::string name = key.substr(std::string(kAdamMPrefix).size());
      require<DataError>(params.count(name) > 0,
                         strprintf("checkpoint optimiser state '%s' has no "
                                   "matching parameter",
                                   name.c_str()));
      st.adam.m()[name] = ar.tensor(key);
    } else if (key.rfind(kAdamVPrefix, 0) == 0) {
      std::string name = key.substr(std::string(kAdamVPrefix).size());
      require<DataError>(params.count(name) > 0,
                         strprintf("checkpoint optimiser state '%s' has no "
                                   "matching parameter",
                                   name.c_str()));
      st.adam.v()[name] = ar.tensor(key);
    }
  }
  st.adam.set_steps(ar.meta().value("adam_steps", int64_t(0)));
  st.step = ar.meta().value("step", int64_t(0));
  st.epoch = ar.meta().value("epoch", int64_t(0));
  st.best_val = ar.meta().contains("best_val")
                    ? ar.meta().at("best_val").get<real>()
                    : std::numeric_limits<real>::infinity();
  st.codebook_hash = ar.meta().value("codebook_hash", "");
  st.postnet.set_initialized(ar.meta().value("flow_initialized", false));
  return st;
}

}  // namespace lts
