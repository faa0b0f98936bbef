// include/lts/train/checkpoint.h

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

#ifndef LTS_TRAIN_CHECKPOINT_H_
#define LTS_TRAIN_CHECKPOINT_H_

#include <limits>
#include <memory>
#include <string>

#include "lts/flow/flow.h"
#include "lts/model/config.h"
#include "lts/model/model.h"
#include "lts/train/train.h"

namespace lts {

// Everything a run needs to stop and continue exactly: both configs, all
// parameters, the optimiser moments, and the progress counters. The post-net
// shares the model's parameter registry, so one archive holds the whole
// network.
struct TrainState {
  ModelConfig model_cfg;
  TrainConfig train_cfg;
  std::unique_ptr<LipToSpeechModel> model;
  FlowPostnet postnet;
  opt::AdamW adam{opt::AdamW::Config{}};
  int64_t step = 0;
  int64_t epoch = 0;
  real best_val = std::numeric_limits<real>::infinity();
  std::string codebook_hash;
};

// Fresh state: model parameters seeded from the train seed, optimiser empty.
TrainState make_train_state(const ModelConfig& model_cfg,
                            const TrainConfig& train_cfg);

// Atomic single-file snapshot. Saving a freshly loaded state reproduces the
// file byte for byte.
void save_checkpoint(const std::string& path, const TrainState& state);
TrainState load_checkpoint(const std::string& path);

}  // namespace lts

#endif  // LTS_TRAIN_CHECKPOINT_H_
