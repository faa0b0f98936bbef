// include/lts/core/autograd.h

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

#ifndef LTS_CORE_AUTOGRAD_H_
#define LTS_CORE_AUTOGRAD_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "lts/core/tensor.h"

namespace lts {
namespace ag {

struct Node;
using Var = std::shared_ptr<Node>;

// One value in the computation graph. Non-leaf nodes carry a backprop
// closure that scatters this node's grad into its inputs' grads.
struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  std::string name;
  std::vector<Var> inputs;
  std::function<void(Node&)> backprop;

  Tensor& ensure_grad() {
    if (!grad.defined()) grad = Tensor::zeros(value.shape());
    return grad;
  }
  void zero_grad() { grad = Tensor(); }
  real scalar() const {
    require(value.numel() == 1, "Node::scalar: not a scalar");
    return value[0];
  }
};

// Graph recording can be suspended for inference paths.
bool grad_enabled();
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool saved_;
};

Var leaf(Tensor value, bool requires_grad = false, std::string name = "");
inline Var constant(Tensor value) { return leaf(std::move(value), false); }

// Reverse pass from a scalar root (seeds d(root)/d(root) = 1).
void backward(const Var& root);

namespace detail {
// Builds an op node. Inputs and the backward closure are recorded only when
// grad mode is on and at least one input requires grad.
Var make_node(Tensor value, std::vector<Var> inputs,
              std::function<void(Node&)> backprop);
}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise and arithmetic
// ---------------------------------------------------------------------------
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var neg(const Var& a);
Var add_scalar(const Var& a, real s);
Var mul_scalar(const Var& a, real s);
Var add_rowvec(const Var& a, const Var& v);  // a: (m,n), v: (n)
Var mul_rowvec(const Var& a, const Var& v);
Var relu(const Var& a);
Var sigmoid(const Var& a);
Var tanh_(const Var& a);
Var swish(const Var& a);  // x * sigmoid(x)
Var exp_(const Var& a);
Var square(const Var& a);

// ---------------------------------------------------------------------------
// Linear algebra / shape
// ---------------------------------------------------------------------------
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var reshape(const Var& a, std::vector<int64_t> shape);
Var concat_cols(const std::vector<Var>& xs);
Var slice_cols(const Var& a, int64_t start, int64_t len);
std::pair<Var, Var> deinterleave_cols(const Var& a);
Var interleave_cols(const Var& a, const Var& b);
Var logabsdet(const Var& w);  // w: (C,C), returns scalar log|det w|

// ---------------------------------------------------------------------------
// Reductions, losses
// ---------------------------------------------------------------------------
Var sum_all(const Var& a);
Var mean_all(const Var& a);
Var softmax_rows(const Var& a);
Var log_softmax_rows(const Var& a);
// Sum over rows of CE between logits rows and integer targets.
Var cross_entropy_sum(const Var& logits, const std::vector<int64_t>& targets);
// Sum of elementwise absolute differences.
Var l1_sum(const Var& a, const Var& b);

// ---------------------------------------------------------------------------
// Neural-net structured ops
// ---------------------------------------------------------------------------
// x: (T, Cin), w: (Cout, Cin*k), b: (Cout) or null. Stride 1, zero 'same'
// padding; output (T, Cout).
Var conv1d_same(const Var& x, const Var& w, const Var& b, int64_t k);
// x: (T, C), w: (C, k), b: (C) or null; per-channel temporal convolution.
Var depthwise_conv1d_same(const Var& x, const Var& w, const Var& b, int64_t k);
// x: (N, Cin, H, W), w: (Cout, Cin*kh*kw), b: (Cout) or null.
Var conv2d(const Var& x, const Var& w, const Var& b, int64_t kh, int64_t kw,
           int64_t stride, int64_t pad);
// x: (Cin, T, H, W), w: (Cout, Cin*kt*kh*kw); temporal stride 1, temporal pad
// kt/2, spatial stride/pad as given. Output (Cout, T, H', W').
Var conv3d(const Var& x, const Var& w, const Var& b, int64_t kt, int64_t kh,
           int64_t kw, int64_t stride_hw, int64_t pad_hw);
// (A, B, H, W) -> (B, A, H, W)
Var transpose_01(const Var& x);
Var maxpool2d(const Var& x, int64_t k, int64_t stride, int64_t pad);
Var global_avgpool2d(const Var& x);  // (N,C,H,W) -> (N,C)
// x: (N, C, ...), gamma/beta: (C). Normalises each (sample, group) slice.
Var group_norm(const Var& x, int64_t groups, const Var& gamma, const Var& beta,
               real eps = 1e-5);
// x: (T, C), gamma/beta: (C). Normalises each row.
Var layer_norm_rows(const Var& x, const Var& gamma, const Var& beta,
                    real eps = 1e-5);
// table: (V, d), ids in [0, V). Output (len(ids), d).
Var embedding(const Var& table, const std::vector<int64_t>& ids);
// x: (m, 2n) -> (m, n): first half gated by sigmoid of second half.
Var glu_cols(const Var& a);
Var upsample_rows(const Var& x, int64_t factor);
Var dropout(const Var& x, real p, uint64_t seed, bool training);
// bias: (2*max_dist+1). Output (T, T) with out[i][j] = bias[clamp(j-i)+R].
Var relpos_bias_matrix(const Var& bias, int64_t t, int64_t max_dist);

// Numerical gradient checking helper: central finite differences of `f` with
// respect to `x`'s current value. Returns max relative error against x.grad.
real gradcheck_max_rel_err(const std::function<Var()>& f, const Var& x,
                           real h = 1e-5);

}  // namespace ag
}  // namespace lts

#endif  // LTS_CORE_AUTOGRAD_H_
