// include/lts/train/train.h

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

#ifndef LTS_TRAIN_TRAIN_H_
#define LTS_TRAIN_TRAIN_H_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "lts/common.h"
#include "lts/core/optim.h"
#include "lts/data/manifest.h"
#include "lts/data/types.h"
#include "lts/flow/flow.h"
#include "lts/model/config.h"
#include "lts/model/model.h"

namespace lts {

struct TrainConfig {
  real lr = 2e-4;
  real beta1 = 0.9;
  real beta2 = 0.98;
  real eps = 1e-9;
  real weight_decay = 1e-6;
  int64_t batch_size = 64;    // windows per optimiser step
  int64_t window_length = 50; // video frames per training window
  int64_t epochs = 400;       // one sampled window per clip per epoch
  real lambda_var = 0.1;
  real lambda_post = 0.1;
  uint64_t seed = 0;
  real grad_clip = 1.0;        // global-norm clip; 0 or less disables
  bool mean_reduction = true;  // per-frame means instead of frame sums
  bool deterministic = true;   // zero wall-time field in the metric log
  bool fixed_windows = false;  // window start pinned to 0 instead of sampled
  int64_t val_every = 1;       // epochs between validation passes
  int64_t checkpoint_every = 0;  // epochs between periodic snapshots; 0 = off

  void validate() const;
};

nlohmann::json train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

// One optimiser step's record. Loss fields use the configured reduction.
struct StepMetrics {
  int64_t step = 0;
  int64_t epoch = 0;
  real mel_l1 = 0;
  real linguistic = 0;
  real pitch = 0;
  real energy = 0;
  real nll = 0;
  real total = 0;
  real grad_norm = 0;
  real wall_s = 0;

  nlohmann::json to_json() const;
};

// Validation summary over a clip list, same reduction as StepMetrics.
struct ValMetrics {
  real mel_l1 = 0;
  real linguistic = 0;
  real pitch = 0;
  real energy = 0;
  real nll = 0;

  nlohmann::json to_json() const;
};

// One teacher-forced optimisation step over a window batch. Initialises the
// post-net's channel-affine statistics on the first window it ever sees.
// Throws NumericalError naming the first non-finite loss component.
StepMetrics train_step(const std::vector<AlignedPair>& batch,
                       LipToSpeechModel& model, FlowPostnet& postnet,
                       opt::AdamW& adam, const TrainConfig& cfg, int64_t step);

// Teacher-forced evaluation without dropout or parameter updates.
ValMetrics evaluate_clips(const std::vector<AlignedPair>& clips,
                          LipToSpeechModel& model, FlowPostnet& postnet,
                          const TrainConfig& cfg);

struct ExperimentResult {
  std::string last_checkpoint;
  std::string best_checkpoint;
  std::string metrics_path;
  int64_t steps = 0;
  real best_val_mel = 0;
  real first_train_mel = 0;
  real final_train_mel = 0;
};

// Full training run over the manifest's train split with per-epoch metrics,
// validation-based best-checkpoint tracking, periodic snapshots, and
// append-only JSONL metric logging. With `resume` set, continues from
// <out_dir>/last.lts using the checkpoint's stored configuration.
ExperimentResult run_experiment(const Manifest& manifest,
                                const std::string& cache_dir,
                                const ModelConfig& model_cfg,
                                const TrainConfig& train_cfg,
                                const std::string& out_dir,
                                bool resume = false);

}  // namespace lts

#endif  // LTS_TRAIN_TRAIN_H_
