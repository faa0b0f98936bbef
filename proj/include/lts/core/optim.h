// include/lts/core/optim.h

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

#ifndef LTS_CORE_OPTIM_H_
#define LTS_CORE_OPTIM_H_

#include <cstdint>
#include <map>
#include <string>

#include "lts/core/nn.h"

namespace lts {
namespace opt {

// L2 norm over every defined gradient in the registry.
real global_grad_norm(const std::map<std::string, nn::Var>& params);

// Scales all gradients in place so the global norm is at most max_norm.
// Returns the pre-clip norm.
real clip_grad_norm(const std::map<std::string, nn::Var>& params, real max_norm);

class AdamW {
 public:
  struct Config {
    real lr = 2e-4;
    real beta1 = 0.9;
    real beta2 = 0.98;
    real eps = 1e-9;
    real weight_decay = 1e-6;
  };

  explicit AdamW(Config cfg) : cfg_(cfg) {}

  // Applies one update to every parameter that has a gradient.
  void step(const std::map<std::string, nn::Var>& params);

  const Config& config() const { return cfg_; }
  int64_t steps() const { return t_; }
  void set_steps(int64_t t) { t_ = t; }
  std::map<std::string, Tensor>& m() { return m_; }
  std::map<std::string, Tensor>& v() { return v_; }
  const std::map<std::string, Tensor>& m() const { return m_; }
  const std::map<std::string, Tensor>& v() const { return v_; }

 private:
  Config cfg_;
  int64_t t_ = 0;
  std::map<std::string, Tensor> m_, v_;
};

}  // namespace opt
}  // namespace lts

#endif  // LTS_CORE_OPTIM_H_
