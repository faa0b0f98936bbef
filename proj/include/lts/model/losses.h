// include/lts/model/losses.h

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

#ifndef LTS_MODEL_LOSSES_H_
#define LTS_MODEL_LOSSES_H_

#include "lts/core/autograd.h"
#include "lts/data/types.h"
#include "lts/model/variance.h"

namespace lts {

struct VarianceLosses {
  Var linguistic;  // summed cross-entropy over frames
  Var pitch;       // summed absolute error
  Var energy;      // summed absolute error
};

// Reduction is a frame sum for every term; a mean-reduction flag exists on
// the training config and is applied by dividing afterwards.
VarianceLosses variance_losses(const VariancePrediction& pred,
                               const VarianceTargets& targets);

// Summed per-frame L1 distance between predicted and reference mel frames.
Var mel_loss(const Var& predicted, const Tensor& reference);

// L_mel + lambda_var * (L_l + L_p + L_e) + lambda_post * L_post.
Var combine_losses(const Var& mel, const VarianceLosses& var, const Var& post,
                   real lambda_var, real lambda_post);
real combine_losses_value(real mel, real linguistic, real pitch, real energy,
                          real post, real lambda_var, real lambda_post);

}  // namespace lts

#endif  // LTS_MODEL_LOSSES_H_
