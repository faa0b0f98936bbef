// include/lts/core/nn.h

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

#ifndef LTS_CORE_NN_H_
#define LTS_CORE_NN_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lts/core/autograd.h"
#include "lts/core/rng.h"

namespace lts {
namespace nn {

using ag::Var;

// Registry of trainable parameters with stable hierarchical names. Each
// parameter's initialisation stream is derived from the registry seed and the
// parameter name, so the initial state does not depend on construction order.
class Params {
 public:
  explicit Params(uint64_t seed) : seed_(seed) {}

  uint64_t seed() const { return seed_; }
  uint64_t name_seed(const std::string& name) const {
    return derive_seed(seed_, name);
  }

  Var create(const std::string& name, Tensor init);
  Var get(const std::string& name) const;
  bool has(const std::string& name) const { return params_.count(name) > 0; }
  const std::map<std::string, Var>& all() const { return params_; }
  void zero_grads();
  int64_t count_scalars() const;

 private:
  uint64_t seed_ = 0;
  std::map<std::string, Var> params_;
};

// U(-sqrt(1/fan_in), +sqrt(1/fan_in)), the usual default for linear/conv maps.
Tensor fan_in_uniform(Rng& rng, std::vector<int64_t> shape, int64_t fan_in);
Tensor normal_init(Rng& rng, std::vector<int64_t> shape, real stddev);

struct Linear {
  Var w;  // (in, out)
  Var b;  // (out), may be null
  Linear() = default;
  Linear(Params& ps, const std::string& name, int64_t in, int64_t out,
         bool bias = true, bool zero_init = false);
  Var forward(const Var& x) const;  // (T, in) -> (T, out)
};

struct Conv1d {
  Var w;  // (out, in*k)
  Var b;
  int64_t k = 1;
  Conv1d() = default;
  Conv1d(Params& ps, const std::string& name, int64_t in, int64_t out,
         int64_t k, bool bias = true, bool zero_init = false);
  Var forward(const Var& x) const;  // (T, in) -> (T, out), 'same' padding
};

struct DepthwiseConv1d {
  Var w;  // (C, k)
  Var b;
  int64_t k = 1;
  DepthwiseConv1d() = default;
  DepthwiseConv1d(Params& ps, const std::string& name, int64_t channels,
                  int64_t k, bool bias = true);
  Var forward(const Var& x) const;
};

struct Conv2d {
  Var w;  // (out, in*kh*kw)
  Var b;
  int64_t kh = 1, kw = 1, stride = 1, pad = 0;
  Conv2d() = default;
  Conv2d(Params& ps, const std::string& name, int64_t in, int64_t out,
         int64_t kh, int64_t kw, int64_t stride, int64_t pad, bool bias = true);
  Var forward(const Var& x) const;  // (N, in, H, W) -> (N, out, H', W')
};

struct Conv3d {
  Var w;  // (out, in*kt*kh*kw)
  Var b;
  int64_t kt = 1, kh = 1, kw = 1, stride_hw = 1, pad_hw = 0;
  Conv3d() = default;
  Conv3d(Params& ps, const std::string& name, int64_t in, int64_t out,
         int64_t kt, int64_t kh, int64_t kw, int64_t stride_hw, int64_t pad_hw,
         bool bias = true);
  Var forward(const Var& x) const;  // (in, T, H, W) -> (out, T, H', W')
};

struct LayerNorm {
  Var gamma, beta;
  LayerNorm() = default;
  LayerNorm(Params& ps, const std::string& name, int64_t channels);
  Var forward(const Var& x) const;  // (T, C)
};

struct GroupNorm {
  Var gamma, beta;
  int64_t groups = 1;
  GroupNorm() = default;
  GroupNorm(Params& ps, const std::string& name, int64_t channels,
            int64_t groups);
  Var forward(const Var& x) const;  // (N, C, ...)
};

struct Embedding {
  Var table;  // (V, d)
  Embedding() = default;
  Embedding(Params& ps, const std::string& name, int64_t vocab, int64_t dim);
  Var forward(const std::vector<int64_t>& ids) const;
};

}  // namespace nn
}  // namespace lts

#endif  // LTS_CORE_NN_H_
