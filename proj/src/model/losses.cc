// src/model/losses.cc

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

#include "lts/model/losses.h"

namespace lts {

VarianceLosses variance_losses(const VariancePrediction& pred,
                               const VarianceTargets& targets) {
  int64_t t_v = pred.linguistic_logits->value.dim(0);
  require<DataError>(
      static_cast<int64_t>(targets.linguistic.size()) == t_v &&
          static_cast<int64_t>(targets.pitch.size()) == t_v &&
          static_cast<int64_t>(targets.energy.size()) == t_v,
      "variance_losses: prediction and target lengths differ");
  VarianceLosses out;
  out.linguistic =
      ag::cross_entropy_sum(pred.linguistic_logits, targets.linguistic);
  out.pitch = ag::l1_sum(pred.pitch_hat, pitch_to_var(targets.pitch));
  out.energy = ag::l1_sum(pred.energy_hat, energy_to_var(targets.energy));
  return out;
}

Var mel_loss(const Var& predicted, const Tensor& reference) {
  require<DataError>(predicted->value.ndim() == 2 && reference.ndim() == 2 &&
                         predicted->value.dim(0) == reference.dim(0) &&
                         predicted->value.dim(1) == reference.dim(1),
                     "mel_loss: shape mismatch");
  return ag::l1_sum(predicted, ag::constant(reference.clone()));
}

Var combine_losses(const Var& mel, const VarianceLosses& var, const Var& post,
                   real lambda_var, real lambda_post) {
  Var var_sum = ag::add(ag::add(var.linguistic, var.pitch), var.energy);
  Var total = ag::add(mel, ag::mul_scalar(var_sum, lambda_var));
  return ag::add(total, ag::mul_scalar(post, lambda_post));
}

real combine_losses_value(real mel, real linguistic, real pitch, real energy,
                          real post, real lambda_var, real lambda_post) {
  return mel + lambda_var * (linguistic + pitch + energy) + lambda_post * post;
}

}  // namespace lts
