// include/lts/model/conformer.h

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

#ifndef LTS_MODEL_CONFORMER_H_
#define LTS_MODEL_CONFORMER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "lts/core/nn.h"
#include "lts/model/config.h"

namespace lts {

using ag::Var;

// Shared knobs for one conformer stack.
struct ConformerArgs {
  int64_t d_model = 384;
  int64_t n_heads = 6;
  int64_t conv_kernel = 15;
  int64_t ff_expansion = 4;
  int64_t relpos_max_dist = 64;
  real dropout = 0.1;
};

// Macaron feed-forward: LN -> expand -> swish -> dropout -> project.
struct FeedForward {
  nn::LayerNorm ln;
  nn::Linear w1, w2;
  real dropout = 0.0;

  FeedForward() = default;
  FeedForward(nn::Params& ps, const std::string& name,
              const ConformerArgs& args);
  Var forward(const Var& x, uint64_t seed, bool training) const;
};

// Multi-head self-attention with a learned, clamped relative-position bias.
struct SelfAttention {
  nn::LayerNorm ln;
  nn::Linear wq, wk, wv, wo;
  Var relpos;  // (2*max_dist+1, n_heads)
  int64_t n_heads = 1;
  int64_t max_dist = 64;
  real dropout = 0.0;

  SelfAttention() = default;
  SelfAttention(nn::Params& ps, const std::string& name,
                const ConformerArgs& args);
  Var forward(const Var& x, uint64_t seed, bool training) const;
};

// LN -> pointwise to 2C -> GLU -> depthwise conv -> LN -> swish -> pointwise.
struct ConvModule {
  nn::LayerNorm ln;
  nn::Conv1d pw1;
  nn::DepthwiseConv1d dw;
  nn::LayerNorm dw_norm;
  nn::Conv1d pw2;
  real dropout = 0.0;

  ConvModule() = default;
  ConvModule(nn::Params& ps, const std::string& name,
             const ConformerArgs& args);
  Var forward(const Var& x, uint64_t seed, bool training) const;
};

// One conformer block: half FFN, attention, convolution, half FFN, final LN.
struct ConformerBlock {
  FeedForward ff1, ff2;
  SelfAttention attn;
  ConvModule conv;
  nn::LayerNorm out_ln;

  ConformerBlock() = default;
  ConformerBlock(nn::Params& ps, const std::string& name,
                 const ConformerArgs& args);
  Var forward(const Var& x, uint64_t seed, bool training) const;
};

struct ConformerStack {
  std::vector<ConformerBlock> blocks;

  ConformerStack() = default;
  ConformerStack(nn::Params& ps, const std::string& name, int64_t layers,
                 const ConformerArgs& args);
  Var forward(const Var& x, uint64_t seed, bool training) const;
};

}  // namespace lts

#endif  // LTS_MODEL_CONFORMER_H_
