// src/core/optim.cc

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

#include "lts/core/optim.h"

#include <cmath>

namespace lts {
namespace opt {

real global_grad_norm(const std::map<std::string, nn::Var>& params) {
  real sq = 0;
  for (const auto& [name, p] : params)
    if (p->grad.defined()) sq += p->grad.vec().squaredNorm();
  return std::sqrt(sq);
}

real clip_grad_norm(const std::map<std::string, nn::Var>& params, real max_norm) {
  real norm = global_grad_norm(params);
  if (norm > max_norm && norm > 0) {
    real scale = max_norm / norm;
    for (const auto& [name, p] : params)
      if (p->grad.defined()) p->grad.vec() *= scale;
  }
  return norm;
}

void AdamW::step(const std::map<std::string, nn::Var>& params) {
  ++t_;
  real bc1 = 1 - std::pow(cfg_.beta1, real(t_));
  real bc2 = 1 - std::pow(cfg_.beta2, real(t_));
  for (const auto& [name, p] : params) {
    if (!p->grad.defined()) continue;
    auto mit = m_.find(name);
    if (mit == m_.end()) {
      mit = m_.emplace(name, Tensor::zeros(p->value.shape())).first;
      v_.emplace(name, Tensor::zeros(p->value.shape()));
    }
    Tensor& m = mit->second;
    Tensor& v = v_.at(name);
    require(m.same_shape(p->value), "AdamW: state shape mismatch for " + name);
    auto g = p->grad.vec().array();
    m.vec().array() = cfg_.beta1 * m.vec().array() + (1 - cfg_.beta1) * g;
    v.vec().array() = cfg_.beta2 * v.vec().array() + (1 - cfg_.beta2) * g.square();
    auto mhat = m.vec().array() / bc1;
    auto vhat = v.vec().array() / bc2;
    p->value.vec().array() -=
        cfg_.lr * (mhat / (vhat.sqrt() + cfg_.eps) +
                   cfg_.weight_decay * p->value.vec().array());
  }
}

}  // namespace opt
}  // namespace lts
