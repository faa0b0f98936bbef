// src/core/nn.cc

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

#include "lts/core/nn.h"

#include <cmath>

namespace lts {
namespace nn {

Var Params::create(const std::string& name, Tensor init) {
  require(!name.empty(), "Params::create: empty name");
  require(params_.find(name) == params_.end(),
          "Params::create: duplicate parameter '" + name + "'");
  Var v = ag::leaf(std::move(init), true, name);
  params_[name] = v;
  return v;
}

Var Params::get(const std::string& name) const {
  auto it = params_.find(name);
  require(it != params_.end(), "Params::get: unknown parameter '" + name + "'");
  return it->second;
}

void Params::zero_grads() {
  for (auto& [name, v] : params_) v->zero_grad();
}

int64_t Params::count_scalars() const {
  int64_t n = 0;
  for (const auto& [name, v] : params_) n += v->value.numel();
  return n;
}

Tensor fan_in_uniform(Rng& rng, std::vector<int64_t> shape, int64_t fan_in) {
  require(fan_in > 0, "fan_in_uniform: fan_in must be positive");
  real limit = std::sqrt(real(1) / real(fan_in));
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-limit, limit);
  return t;
}

Tensor normal_init(Rng& rng, std::vector<int64_t> shape, real stddev) {
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng.normal(0, stddev);
  return t;
}

Linear::Linear(Params& ps, const std::string& name, int64_t in, int64_t out,
               bool bias, bool zero_init) {
  Rng rng(ps.name_seed(name));
  w = ps.create(name + ".weight", zero_init ? Tensor::zeros({in, out})
                                            : fan_in_uniform(rng, {in, out}, in));
  if (bias)
    b = ps.create(name + ".bias", zero_init ? Tensor::zeros({out})
                                            : fan_in_uniform(rng, {out}, in));
}

Var Linear::forward(const Var& x) const {
  Var y = ag::matmul(x, w);
  return b ? ag::add_rowvec(y, b) : y;
}

Conv1d::Conv1d(Params& ps, const std::string& name, int64_t in, int64_t out,
               int64_t k_, bool bias, bool zero_init)
    : k(k_) {
  Rng rng(ps.name_seed(name));
  int64_t fan_in = in * k;
  w = ps.create(name + ".weight",
                zero_init ? Tensor::zeros({out, in * k})
                          : fan_in_uniform(rng, {out, in * k}, fan_in));
  if (bias)
    b = ps.create(name + ".bias", zero_init
                                      ? Tensor::zeros({out})
                                      : fan_in_uniform(rng, {out}, fan_in));
}

Var Conv1d::forward(const Var& x) const { return ag::conv1d_same(x, w, b, k); }

DepthwiseConv1d::DepthwiseConv1d(Params& ps, const std::string& name,
                                 int64_t channels, int64_t k_, bool bias)
    : k(k_) {
  Rng rng(ps.name_seed(name));
  w = ps.create(name + ".weight", fan_in_uniform(rng, {channels, k}, k));
  if (bias) b = ps.create(name + ".bias", fan_in_uniform(rng, {channels}, k));
}

Var DepthwiseConv1d::forward(const Var& x) const {
  return ag::depthwise_conv1d_same(x, w, b, k);
}

Conv2d::Conv2d(Params& ps, const std::string& name, int64_t in, int64_t out,
               int64_t kh_, int64_t kw_, int64_t stride_, int64_t pad_,
               bool bias)
    : kh(kh_), kw(kw_), stride(stride_), pad(pad_) {
  Rng rng(ps.name_seed(name));
  int64_t fan_in = in * kh * kw;
  w = ps.create(name + ".weight",
                fan_in_uniform(rng, {out, in * kh * kw}, fan_in));
  if (bias) b = ps.create(name + ".bias", fan_in_uniform(rng, {out}, fan_in));
}

Var Conv2d::forward(const Var& x) const {
  return ag::conv2d(x, w, b, kh, kw, stride, pad);
}

Conv3d::Conv3d(Params& ps, const std::string& name, int64_t in, int64_t out,
               int64_t kt_, int64_t kh_, int64_t kw_, int64_t stride_hw_,
               int64_t pad_hw_, bool bias)
    : kt(kt_), kh(kh_), kw(kw_), stride_hw(stride_hw_), pad_hw(pad_hw_) {
  Rng rng(ps.name_seed(name));
  int64_t fan_in = in * kt * kh * kw;
  w = ps.create(name + ".weight",
                fan_in_uniform(rng, {out, in * kt * kh * kw}, fan_in));
  if (bias) b = ps.create(name + ".bias", fan_in_uniform(rng, {out}, fan_in));
}

Var Conv3d::forward(const Var& x) const {
  return ag::conv3d(x, w, b, kt, kh, kw, stride_hw, pad_hw);
}

LayerNorm::LayerNorm(Params& ps, const std::string& name, int64_t channels) {
  gamma = ps.create(name + ".gamma", Tensor::full({channels}, 1));
  beta = ps.create(name + ".beta", Tensor::zeros({channels}));
}

Var LayerNorm::forward(const Var& x) const {
  return ag::layer_norm_rows(x, gamma, beta, 1e-5);
}

GroupNorm::GroupNorm(Params& ps, const std::string& name, int64_t channels,
                     int64_t groups_)
    : groups(groups_) {
  gamma = ps.create(name + ".gamma", Tensor::full({channels}, 1));
  beta = ps.create(name + ".beta", Tensor::zeros({channels}));
}

Var GroupNorm::forward(const Var& x) const {
  return ag::group_norm(x, groups, gamma, beta, 1e-5);
}

Embedding::Embedding(Params& ps, const std::string& name, int64_t vocab,
                     int64_t dim) {
  Rng rng(ps.name_seed(name));
  table = ps.create(name + ".table",
                    normal_init(rng, {vocab, dim}, std::pow(real(dim), -0.5)));
}

Var Embedding::forward(const std::vector<int64_t>& ids) const {
  return ag::embedding(table, ids);
}

}  // namespace nn
}  // namespace lts
