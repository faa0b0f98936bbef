// src/core/ops_norm.cc

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

#include <algorithm>
#include <cmath>
#include <memory>

#include "lts/core/autograd.h"
#include "lts/core/rng.h"

namespace lts {
namespace ag {

namespace {
using detail::make_node;
}  // namespace

Var group_norm(const Var& x, int64_t groups, const Var& gamma, const Var& beta,
               real eps) {
  require(x->value.ndim() >= 2, "group_norm: need at least 2 dims");
  int64_t n_b = x->value.dim(0), c_ch = x->value.dim(1);
  require(c_ch % groups == 0, "group_norm: channels not divisible by groups");
  require(gamma->value.numel() == c_ch && beta->value.numel() == c_ch,
          "group_norm: affine shape mismatch");
  int64_t spatial = x->value.numel() / (n_b * c_ch);
  int64_t cg = c_ch / groups;
  int64_t block = cg * spatial;
  Tensor out(x->value.shape());
  auto stats = std::make_shared<std::vector<real>>(n_b * groups * 2);
  const real* xd = x->value.data();
  real* od = out.data();
  for (int64_t n = 0; n < n_b; ++n)
    for (int64_t g = 0; g < groups; ++g) {
      int64_t off = (n * c_ch + g * cg) * spatial;
      ConstVecMap v(xd + off, block);
      real mean = v.sum() / real(block);
      real var = (v.array() - mean).square().sum() / real(block);
      real invstd = real(1) / std::sqrt(var + eps);
      (*stats)[(n * groups + g) * 2] = mean;
      (*stats)[(n * groups + g) * 2 + 1] = invstd;
      for (int64_t cc = 0; cc < cg; ++cc) {
        int64_t c = g * cg + cc;
        real ga = gamma->value[c], be = beta->value[c];
        const real* src = xd + off + cc * spatial;
        real* dst = od + off + cc * spatial;
        for (int64_t s = 0; s < spatial; ++s)
          dst[s] = ga * (src[s] - mean) * invstd + be;
      }
    }
  return make_node(std::move(out), {x, gamma, beta},
                   [groups, stats, spatial, cg, block](Node& nd) {
    auto& xv = nd.inputs[0];
    auto& gav = nd.inputs[1];
    auto& bev = nd.inputs[2];
    int64_t n_b = xv->value.dim(0), c_ch = xv->value.dim(1);
    const real* xd = xv->value.data();
    const real* gd = nd.grad.data();
    std::vector<real> xhat(block), dxhat(block);
    for (int64_t n = 0; n < n_b; ++n)
      for (int64_t g = 0; g < groups; ++g) {
        int64_t off = (n * c_ch + g * cg) * spatial;
        real mean = (*stats)[(n * groups + g) * 2];
        real invstd = (*stats)[(n * groups + g) * 2 + 1];
        real sum_dxhat = 0, sum_dxhat_xhat = 0;
        for (int64_t cc = 0; cc < cg; ++cc) {
          int64_t c = g * cg + cc;
          real ga = gav->value[c];
          for (int64_t s = 0; s < spatial; ++s) {
            int64_t i = cc * spatial + s;
            real xh = (xd[off + i] - mean) * invstd;
            real dgo = gd[off + i];
            xhat[i] = xh;
            dxhat[i] = dgo * ga;
            sum_dxhat += dxhat[i];
            sum_dxhat_xhat += dxhat[i] * xh;
            if (gav->requires_grad) gav->ensure_grad()[c] += dgo * xh;
            if (bev->requires_grad) bev->ensure_grad()[c] += dgo;
          }
        }
        if (!xv->requires_grad) continue;
        real* dx = xv->ensure_grad().data() + off;
        real m1 = sum_dxhat / real(block), m2 = sum_dxhat_xhat / real(block);
        for (int64_t i = 0; i < block; ++i)
          dx[i] += invstd * (dxhat[i] - m1 - xhat[i] * m2);
      }
  });
}

Var layer_norm_rows(const Var& x, const Var& gamma, const Var& beta, real eps) {
  require(x->value.ndim() == 2, "layer_norm_rows: not 2-d");
  int64_t t_len = x->value.dim(0), c_ch = x->value.dim(1);
  require(gamma->value.numel() == c_ch && beta->value.numel() == c_ch,
          "layer_norm_rows: affine shape mismatch");
  Tensor out({t_len, c_ch});
  auto stats = std::make_shared<std::vector<real>>(t_len * 2);
  for (int64_t t = 0; t < t_len; ++t) {
    auto row = x->value.mat().row(t);
    real mean = row.sum() / real(c_ch);
    real var = (row.array() - mean).square().sum() / real(c_ch);
    real invstd = real(1) / std::sqrt(var + eps);
    (*stats)[t * 2] = mean;
    (*stats)[t * 2 + 1] = invstd;
    out.mat().row(t) = ((row.array() - mean) * invstd) *
                           gamma->value.vec().transpose().array() +
                       beta->value.vec().transpose().array();
  }
  return make_node(std::move(out), {x, gamma, beta}, [stats](Node& nd) {
    auto& xv = nd.inputs[0];
    auto& gav = nd.inputs[1];
    auto& bev = nd.inputs[2];
    int64_t t_len = nd.value.dim(0), c_ch = nd.value.dim(1);
    auto g = nd.grad.as_mat(t_len, c_ch);
    EVec xhat(c_ch), dxhat(c_ch);
    for (int64_t t = 0; t < t_len; ++t) {
      real mean = (*stats)[t * 2], invstd = (*stats)[t * 2 + 1];
      xhat = (xv->value.mat().row(t).transpose().array() - mean) * invstd;
      dxhat = g.row(t).transpose().array() * gav->value.vec().array();
      if (gav->requires_grad)
        gav->ensure_grad().vec().array() +=
            g.row(t).transpose().array() * xhat.array();
      if (bev->requires_grad)
        bev->ensure_grad().vec() += g.row(t).transpose();
      if (xv->requires_grad) {
        real m1 = dxhat.sum() / real(c_ch);
        real m2 = dxhat.dot(xhat) / real(c_ch);
        xv->ensure_grad().mat().row(t).array() +=
            (invstd * (dxhat.array() - m1 - xhat.array() * m2)).transpose();
      }
    }
  });
}

Var embedding(const Var& table, const std::vector<int64_t>& ids) {
  require(table->value.ndim() == 2, "embedding: table not 2-d");
  int64_t v = table->value.dim(0), d = table->value.dim(1);
  Tensor out({static_cast<int64_t>(ids.size()), d});
  for (size_t i = 0; i < ids.size(); ++i) {
    require(ids[i] >= 0 && ids[i] < v, "embedding: id out of range");
    out.mat().row(static_cast<int64_t>(i)) = table->value.mat().row(ids[i]);
  }
  std::vector<int64_t> idv = ids;
  return make_node(std::move(out), {table}, [idv](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    auto g = n.grad.as_mat(n.value.dim(0), n.value.dim(1));
    auto dt = n.inputs[0]->ensure_grad().mat();
    for (size_t i = 0; i < idv.size(); ++i)
      dt.row(idv[i]) += g.row(static_cast<int64_t>(i));
  });
}

Var glu_cols(const Var& a) {
  require(a->value.ndim() == 2 && a->value.dim(1) % 2 == 0,
          "glu_cols: need even column count");
  int64_t rows = a->value.dim(0), half = a->value.dim(1) / 2;
  Tensor gate({rows, half});
  gate.mat() = a->value.mat().middleCols(half, half).unaryExpr(
      [](real x) { return real(1) / (real(1) + std::exp(-x)); });
  Tensor out({rows, half});
  out.mat() = a->value.mat().leftCols(half).cwiseProduct(gate.mat());
  return make_node(std::move(out), {a}, [gate](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    int64_t rows = n.value.dim(0), half = n.value.dim(1);
    auto g = n.grad.as_mat(rows, half);
    auto x = n.inputs[0]->value.mat();
    auto dx = n.inputs[0]->ensure_grad().mat();
    auto s = gate.mat();
    dx.leftCols(half).array() += g.array() * s.array();
    dx.middleCols(half, half).array() +=
        g.array() * x.leftCols(half).array() * s.array() * (1 - s.array());
  });
}

Var dropout(const Var& x, real p, uint64_t seed, bool training) {
  if (!training || p <= 0) return x;
  require(p < 1, "dropout: rate must be below 1");
  Rng rng(seed);
  real keep = 1 - p;
  Tensor mask(x->value.shape());
  for (int64_t i = 0; i < mask.numel(); ++i)
    mask[i] = rng.uniform() < keep ? real(1) / keep : real(0);
  Tensor out = x->value.clone();
  out.vec().array() *= mask.vec().array();
  return make_node(std::move(out), {x}, [mask](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    n.inputs[0]->ensure_grad().vec().array() +=
        n.grad.vec().array() * mask.vec().array();
  });
}

Var relpos_bias_matrix(const Var& bias, int64_t t, int64_t max_dist) {
  require(bias->value.numel() == 2 * max_dist + 1,
          "relpos_bias_matrix: bias length mismatch");
  Tensor out({t, t});
  for (int64_t i = 0; i < t; ++i)
    for (int64_t j = 0; j < t; ++j) {
      int64_t d = std::clamp(j - i, -max_dist, max_dist);
      out.at(i, j) = bias->value[d + max_dist];
    }
  return make_node(std::move(out), {bias}, [max_dist](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    int64_t t = n.value.dim(0);
    auto& db = n.inputs[0]->ensure_grad();
    for (int64_t i = 0; i < t; ++i)
      for (int64_t j = 0; j < t; ++j) {
        int64_t d = std::clamp(j - i, -max_dist, max_dist);
        db[d + max_dist] += n.grad.at(i, j);
      }
  });
}

}  // namespace ag
}  // namespace lts
