// src/model/conformer.cc

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

#include "lts/model/conformer.h"

#include <cmath>
#include <utility>

namespace lts {

using ag::Var;

FeedForward::FeedForward(nn::Params& ps, const std::string& name,
                         const ConformerArgs& args)
    : ln(ps, name + ".ln", args.d_model),
      w1(ps, name + ".w1", args.d_model, args.d_model * args.ff_expansion),
      w2(ps, name + ".w2", args.d_model * args.ff_expansion, args.d_model),
      dropout(args.dropout) {}

Var FeedForward::forward(const Var& x, uint64_t seed, bool training) const {
  Var h = ln.forward(x);
  h = ag::swish(w1.forward(h));
  h = ag::dropout(h, dropout, derive_seed(seed, "inner"), training);
  h = w2.forward(h);
  return ag::dropout(h, dropout, derive_seed(seed, "outer"), training);
}

SelfAttention::SelfAttention(nn::Params& ps, const std::string& name,
                             const ConformerArgs& args)
    : ln(ps, name + ".ln", args.d_model),
      wq(ps, name + ".wq", args.d_model, args.d_model),
      wk(ps, name + ".wk", args.d_model, args.d_model),
      wv(ps, name + ".wv", args.d_model, args.d_model),
      wo(ps, name + ".wo", args.d_model, args.d_model),
      relpos(ps.create(name + ".relpos",
                       Tensor::zeros({2 * args.relpos_max_dist + 1,
                                      args.n_heads}))),
      n_heads(args.n_heads),
      max_dist(args.relpos_max_dist),
      dropout(args.dropout) {}

Var SelfAttention::forward(const Var& x, uint64_t seed, bool training) const {
  int64_t d = x->value.dim(1);
  int64_t dh = d / n_heads;
  int64_t t = x->value.dim(0);
  real scale = 1.0 / std::sqrt(static_cast<real>(dh));

  Var y = ln.forward(x);
  Var q = wq.forward(y);
  Var k = wk.forward(y);
  Var v = wv.forward(y);

  std::vector<Var> heads;
  heads.reserve(n_heads);
  for (int64_t h = 0; h < n_heads; ++h) {
    Var qh = ag::slice_cols(q, h * dh, dh);
    Var kh = ag::slice_cols(k, h * dh, dh);
    Var vh = ag::slice_cols(v, h * dh, dh);
    Var bias_col = ag::reshape(ag::slice_cols(relpos, h, 1),
                               {2 * max_dist + 1});
    Var bias = ag::relpos_bias_matrix(bias_col, t, max_dist);
    Var scores = ag::add(
        ag::mul_scalar(ag::matmul(qh, ag::transpose(kh)), scale), bias);
    Var attn = ag::softmax_rows(scores);
    attn = ag::dropout(attn, dropout, derive_seed(seed, "attn", h), training);
    heads.push_back(ag::matmul(attn, vh));
  }
  Var merged = n_heads == 1 ? heads[0] : ag::concat_cols(heads);
  Var out = wo.forward(merged);
  return ag::dropout(out, dropout, derive_seed(seed, "proj"), training);
}

ConvModule::ConvModule(nn::Params& ps, const std::string& name,
                       const ConformerArgs& args)
    : ln(ps, name + ".ln", args.d_model),
      pw1(ps, name + ".pw1", args.d_model, 2 * args.d_model, 1),
      dw(ps, name + ".dw", args.d_model, args.conv_kernel),
      dw_norm(ps, name + ".dw_norm", args.d_model),
      pw2(ps, name + ".pw2", args.d_model, args.d_model, 1),
      dropout(args.dropout) {}

Var ConvModule::forward(const Var& x, uint64_t seed, bool training) const {
  Var h = ln.forward(x);
  h = ag::glu_cols(pw1.forward(h));
  h = dw.forward(h);
  h = ag::swish(dw_norm.forward(h));
  h = pw2.forward(h);
  return ag::dropout(h, dropout, derive_seed(seed, "out"), training);
}

ConformerBlock::ConformerBlock(nn::Params& ps, const std::string& name,
                               const ConformerArgs& args)
    : ff1(ps, name + ".ff1", args),
      ff2(ps, name + ".ff2", args),
      attn(ps, name + ".attn", args),
      conv(ps, name + ".conv", args),
      out_ln(ps, name + ".out_ln", args.d_model) {}

Var ConformerBlock::forward(const Var& x, uint64_t seed, bool training) const {
  Var h = ag::add(
      x, ag::mul_scalar(ff1.forward(x, derive_seed(seed, "ff1"), training),
                        0.5));
  h = ag::add(h, attn.forward(h, derive_seed(seed, "attn"), training));
  h = ag::add(h, conv.forward(h, derive_seed(seed, "conv"), training));
  h = ag::add(
      h, ag::mul_scalar(ff2.forward(h, derive_seed(seed, "ff2"), training),
                        0.5));
  return out_ln.forward(h);
}

ConformerStack::ConformerStack(nn::Params& ps, const std::string& name,
                               int64_t layers, const ConformerArgs& args) {
  blocks.reserve(layers);
  for (int64_t i = 0; i < layers; ++i)
    blocks.emplace_back(ps, name + ".block" + std::to_string(i), args);
}

Var ConformerStack::forward(const Var& x, uint64_t seed, bool training) const {
  Var h = x;
  for (size_t i = 0; i < blocks.size(); ++i)
    h = blocks[i].forward(h, derive_seed(seed, "layer", i), training);
  return h;
}

}  // namespace lts
