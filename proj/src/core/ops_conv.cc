// src/core/ops_conv.cc

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
#include <limits>
#include <memory>

#include "lts/core/autograd.h"

namespace lts {
namespace ag {

namespace {

using detail::make_node;

// Patch matrix for 1-d 'same' convolution: row t holds the k-frame window of
// every input channel, laid out as c*k + j.
EMat im2col_1d(const Tensor& x, int64_t k) {
  int64_t t_len = x.dim(0), cin = x.dim(1), half = k / 2;
  EMat cols = EMat::Zero(t_len, cin * k);
  for (int64_t t = 0; t < t_len; ++t)
    for (int64_t j = 0; j < k; ++j) {
      int64_t src = t + j - half;
      if (src < 0 || src >= t_len) continue;
      for (int64_t c = 0; c < cin; ++c) cols(t, c * k + j) = x.at(src, c);
    }
  return cols;
}

// Patch matrix for one 2-d sample: row (oh*OW+ow) holds the receptive field
// laid out as (c*kh + ih)*kw + iw.
EMat im2col_2d(const real* x, int64_t cin, int64_t h, int64_t w, int64_t kh,
               int64_t kw, int64_t stride, int64_t pad, int64_t oh, int64_t ow) {
  EMat cols = EMat::Zero(oh * ow, cin * kh * kw);
  for (int64_t y = 0; y < oh; ++y)
    for (int64_t xo = 0; xo < ow; ++xo) {
      int64_t row = y * ow + xo;
      for (int64_t c = 0; c < cin; ++c)
        for (int64_t ih = 0; ih < kh; ++ih) {
          int64_t sy = y * stride - pad + ih;
          if (sy < 0 || sy >= h) continue;
          for (int64_t iw = 0; iw < kw; ++iw) {
            int64_t sx = xo * stride - pad + iw;
            if (sx < 0 || sx >= w) continue;
            cols(row, (c * kh + ih) * kw + iw) = x[(c * h + sy) * w + sx];
          }
        }
    }
  return cols;
}

void col2im_2d(const EMat& dcols, real* dx, int64_t cin, int64_t h, int64_t w,
               int64_t kh, int64_t kw, int64_t stride, int64_t pad, int64_t oh,
               int64_t ow) {
  for (int64_t y = 0; y < oh; ++y)
    for (int64_t xo = 0; xo < ow; ++xo) {
      int64_t row = y * ow + xo;
      for (int64_t c = 0; c < cin; ++c)
        for (int64_t ih = 0; ih < kh; ++ih) {
          int64_t sy = y * stride - pad + ih;
          if (sy < 0 || sy >= h) continue;
          for (int64_t iw = 0; iw < kw; ++iw) {
            int64_t sx = xo * stride - pad + iw;
            if (sx < 0 || sx >= w) continue;
            dx[(c * h + sy) * w + sx] += dcols(row, (c * kh + ih) * kw + iw);
          }
        }
    }
}

// Patch matrix for one output frame of a 3-d convolution over (Cin,T,H,W)
// input, layout ((c*kt + jt)*kh + ih)*kw + iw. Temporal padding kt/2.
EMat im2col_3d_frame(const Tensor& x, int64_t t, int64_t kt, int64_t kh,
                     int64_t kw, int64_t stride, int64_t pad, int64_t oh,
                     int64_t ow) {
  int64_t cin = x.dim(0), t_len = x.dim(1), h = x.dim(2), w = x.dim(3);
  EMat cols = EMat::Zero(oh * ow, cin * kt * kh * kw);
  const real* xd = x.data();
  for (int64_t jt = 0; jt < kt; ++jt) {
    int64_t st = t + jt - kt / 2;
    if (st < 0 || st >= t_len) continue;
    for (int64_t y = 0; y < oh; ++y)
      for (int64_t xo = 0; xo < ow; ++xo) {
        int64_t row = y * ow + xo;
        for (int64_t c = 0; c < cin; ++c)
          for (int64_t ih = 0; ih < kh; ++ih) {
            int64_t sy = y * stride - pad + ih;
            if (sy < 0 || sy >= h) continue;
            for (int64_t iw = 0; iw < kw; ++iw) {
              int64_t sx = xo * stride - pad + iw;
              if (sx < 0 || sx >= w) continue;
              cols(row, ((c * kt + jt) * kh + ih) * kw + iw) =
                  xd[((c * t_len + st) * h + sy) * w + sx];
            }
          }
      }
  }
  return cols;
}

void col2im_3d_frame(const EMat& dcols, Tensor& dx, int64_t t, int64_t kt,
                     int64_t kh, int64_t kw, int64_t stride, int64_t pad,
                     int64_t oh, int64_t ow) {
  int64_t cin = dx.dim(0), t_len = dx.dim(1), h = dx.dim(2), w = dx.dim(3);
  real* xd = dx.data();
  for (int64_t jt = 0; jt < kt; ++jt) {
    int64_t st = t + jt - kt / 2;
    if (st < 0 || st >= t_len) continue;
    for (int64_t y = 0; y < oh; ++y)
      for (int64_t xo = 0; xo < ow; ++xo) {
        int64_t row = y * ow + xo;
        for (int64_t c = 0; c < cin; ++c)
          for (int64_t ih = 0; ih < kh; ++ih) {
            int64_t sy = y * stride - pad + ih;
            if (sy < 0 || sy >= h) continue;
            for (int64_t iw = 0; iw < kw; ++iw) {
              int64_t sx = xo * stride - pad + iw;
              if (sx < 0 || sx >= w) continue;
              xd[((c * t_len + st) * h + sy) * w + sx] +=
                  dcols(row, ((c * kt + jt) * kh + ih) * kw + iw);
            }
          }
      }
  }
}

int64_t out_extent(int64_t in, int64_t k, int64_t stride, int64_t pad) {
  return (in + 2 * pad - k) / stride + 1;
}

}  // namespace

Var conv1d_same(const Var& x, const Var& w, const Var& b, int64_t k) {
  require(x->value.ndim() == 2 && w->value.ndim() == 2, "conv1d_same: bad ranks");
  require(k % 2 == 1, "conv1d_same: kernel must be odd");
  int64_t t_len = x->value.dim(0), cin = x->value.dim(1), cout = w->value.dim(0);
  require(w->value.dim(1) == cin * k, "conv1d_same: weight shape mismatch");
  EMat cols = im2col_1d(x->value, k);
  Tensor out({t_len, cout});
  out.mat().noalias() = cols * w->value.mat().transpose();
  std::vector<Var> inputs = {x, w};
  if (b) {
    require(b->value.numel() == cout, "conv1d_same: bias shape mismatch");
    out.mat().rowwise() += b->value.vec().transpose();
    inputs.push_back(b);
  }
  return make_node(std::move(out), std::move(inputs), [k](Node& n) {
    auto& xv = n.inputs[0];
    auto& wv = n.inputs[1];
    int64_t t_len = n.value.dim(0), cout = n.value.dim(1);
    int64_t cin = xv->value.dim(1);
    auto g = n.grad.as_mat(t_len, cout);
    if (wv->requires_grad || xv->requires_grad) {
      EMat cols = im2col_1d(xv->value, k);
      if (wv->requires_grad)
        wv->ensure_grad().mat().noalias() += g.transpose() * cols;
      if (xv->requires_grad) {
        EMat dcols = g * wv->value.mat();
        auto dx = xv->ensure_grad().mat();
        int64_t half = k / 2;
        for (int64_t t = 0; t < t_len; ++t)
          for (int64_t j = 0; j < k; ++j) {
            int64_t src = t + j - half;
            if (src < 0 || src >= t_len) continue;
            for (int64_t c = 0; c < cin; ++c)
              dx(src, c) += dcols(t, c * k + j);
          }
      }
    }
    if (n.inputs.size() > 2 && n.inputs[2]->requires_grad)
      n.inputs[2]->ensure_grad().vec() += g.colwise().sum().transpose();
  });
}

Var depthwise_conv1d_same(const Var& x, const Var& w, const Var& b, int64_t k) {
  require(x->value.ndim() == 2 && w->value.ndim() == 2, "depthwise_conv1d: bad ranks");
  require(k % 2 == 1, "depthwise_conv1d: kernel must be odd");
  int64_t t_len = x->value.dim(0), c_ch = x->value.dim(1);
  require(w->value.dim(0) == c_ch && w->value.dim(1) == k,
          "depthwise_conv1d: weight shape mismatch");
  Tensor out = Tensor::zeros({t_len, c_ch});
  int64_t half = k / 2;
  for (int64_t t = 0; t < t_len; ++t)
    for (int64_t j = 0; j < k; ++j) {
      int64_t src = t + j - half;
      if (src < 0 || src >= t_len) continue;
      for (int64_t c = 0; c < c_ch; ++c)
        out.at(t, c) += w->value.at(c, j) * x->value.at(src, c);
    }
  std::vector<Var> inputs = {x, w};
  if (b) {
    require(b->value.numel() == c_ch, "depthwise_conv1d: bias shape mismatch");
    out.mat().rowwise() += b->value.vec().transpose();
    inputs.push_back(b);
  }
  return make_node(std::move(out), std::move(inputs), [k](Node& n) {
    auto& xv = n.inputs[0];
    auto& wv = n.inputs[1];
    int64_t t_len = n.value.dim(0), c_ch = n.value.dim(1), half = k / 2;
    auto g = n.grad.as_mat(t_len, c_ch);
    for (int64_t t = 0; t < t_len; ++t)
      for (int64_t j = 0; j < k; ++j) {
        int64_t src = t + j - half;
        if (src < 0 || src >= t_len) continue;
        for (int64_t c = 0; c < c_ch; ++c) {
          if (wv->requires_grad)
            wv->ensure_grad().at(c, j) += g(t, c) * xv->value.at(src, c);
          if (xv->requires_grad)
            xv->ensure_grad().at(src, c) += g(t, c) * wv->value.at(c, j);
        }
      }
    if (n.inputs.size() > 2 && n.inputs[2]->requires_grad)
      n.inputs[2]->ensure_grad().vec() += g.colwise().sum().transpose();
  });
}

Var conv2d(const Var& x, const Var& w, const Var& b, int64_t kh, int64_t kw,
           int64_t stride, int64_t pad) {
  require(x->value.ndim() == 4 && w->value.ndim() == 2, "conv2d: bad ranks");
  int64_t n_b = x->value.dim(0), cin = x->value.dim(1);
  int64_t h = x->value.dim(2), wd = x->value.dim(3);
  int64_t cout = w->value.dim(0);
  require(w->value.dim(1) == cin * kh * kw, "conv2d: weight shape mismatch");
  int64_t oh = out_extent(h, kh, stride, pad), ow = out_extent(wd, kw, stride, pad);
  require(oh > 0 && ow > 0, "conv2d: output would be empty");
  Tensor out({n_b, cout, oh, ow});
  for (int64_t n = 0; n < n_b; ++n) {
    EMat cols = im2col_2d(x->value.data() + n * cin * h * wd, cin, h, wd, kh,
                          kw, stride, pad, oh, ow);
    MatMap o(out.data() + n * cout * oh * ow, cout, oh * ow);
    o.noalias() = w->value.mat() * cols.transpose();
    if (b) o.colwise() += b->value.vec();
  }
  std::vector<Var> inputs = {x, w};
  if (b) {
    require(b->value.numel() == cout, "conv2d: bias shape mismatch");
    inputs.push_back(b);
  }
  return make_node(std::move(out), std::move(inputs),
                 [kh, kw, stride, pad](Node& nd) {
    auto& xv = nd.inputs[0];
    auto& wv = nd.inputs[1];
    int64_t n_b = xv->value.dim(0), cin = xv->value.dim(1);
    int64_t h = xv->value.dim(2), wd = xv->value.dim(3);
    int64_t cout = nd.value.dim(1), oh = nd.value.dim(2), ow = nd.value.dim(3);
    for (int64_t n = 0; n < n_b; ++n) {
      ConstMatMap g(nd.grad.data() + n * cout * oh * ow, cout, oh * ow);
      if (wv->requires_grad || xv->requires_grad) {
        EMat cols = im2col_2d(xv->value.data() + n * cin * h * wd, cin, h, wd,
                              kh, kw, stride, pad, oh, ow);
        if (wv->requires_grad)
          wv->ensure_grad().mat().noalias() += g * cols;
        if (xv->requires_grad) {
          EMat dcols = g.transpose() * wv->value.mat();
          col2im_2d(dcols, xv->ensure_grad().data() + n * cin * h * wd, cin, h,
                    wd, kh, kw, stride, pad, oh, ow);
        }
      }
      if (nd.inputs.size() > 2 && nd.inputs[2]->requires_grad)
        nd.inputs[2]->ensure_grad().vec() += g.rowwise().sum();
    }
  });
}

Var conv3d(const Var& x, const Var& w, const Var& b, int64_t kt, int64_t kh,
           int64_t kw, int64_t stride_hw, int64_t pad_hw) {
  require(x->value.ndim() == 4 && w->value.ndim() == 2, "conv3d: bad ranks");
  int64_t cin = x->value.dim(0), t_len = x->value.dim(1);
  int64_t h = x->value.dim(2), wd = x->value.dim(3);
  int64_t cout = w->value.dim(0);
  require(w->value.dim(1) == cin * kt * kh * kw, "conv3d: weight shape mismatch");
  int64_t oh = out_extent(h, kh, stride_hw, pad_hw);
  int64_t ow = out_extent(wd, kw, stride_hw, pad_hw);
  require(oh > 0 && ow > 0, "conv3d: output would be empty");
  Tensor out({cout, t_len, oh, ow});
  EMat frame(cout, oh * ow);
  for (int64_t t = 0; t < t_len; ++t) {
    EMat cols = im2col_3d_frame(x->value, t, kt, kh, kw, stride_hw, pad_hw, oh, ow);
    frame.noalias() = w->value.mat() * cols.transpose();
    if (b) frame.colwise() += b->value.vec();
    for (int64_t c = 0; c < cout; ++c)
      VecMap(out.data() + (c * t_len + t) * oh * ow, oh * ow) = frame.row(c);
  }
  std::vector<Var> inputs = {x, w};
  if (b) {
    require(b->value.numel() == cout, "conv3d: bias shape mismatch");
    inputs.push_back(b);
  }
  return make_node(std::move(out), std::move(inputs),
                 [kt, kh, kw, stride_hw, pad_hw](Node& nd) {
    auto& xv = nd.inputs[0];
    auto& wv = nd.inputs[1];
    int64_t t_len = xv->value.dim(1);
    int64_t cout = nd.value.dim(0), oh = nd.value.dim(2), ow = nd.value.dim(3);
    EMat g(cout, oh * ow);
    for (int64_t t = 0; t < t_len; ++t) {
      for (int64_t c = 0; c < cout; ++c)
        g.row(c) = ConstVecMap(nd.grad.data() + (c * t_len + t) * oh * ow, oh * ow);
      if (wv->requires_grad || xv->requires_grad) {
        EMat cols = im2col_3d_frame(xv->value, t, kt, kh, kw, stride_hw,
                                    pad_hw, oh, ow);
        if (wv->requires_grad)
          wv->ensure_grad().mat().noalias() += g * cols;
        if (xv->requires_grad) {
          EMat dcols = g.transpose() * wv->value.mat();
          col2im_3d_frame(dcols, xv->ensure_grad(), t, kt, kh, kw, stride_hw,
                          pad_hw, oh, ow);
        }
      }
      if (nd.inputs.size() > 2 && nd.inputs[2]->requires_grad)
        nd.inputs[2]->ensure_grad().vec() += g.rowwise().sum();
    }
  });
}

Var transpose_01(const Var& x) {
  require(x->value.ndim() == 4, "transpose_01: not 4-d");
  int64_t a = x->value.dim(0), b = x->value.dim(1);
  int64_t h = x->value.dim(2), w = x->value.dim(3);
  int64_t plane = h * w;
  Tensor out({b, a, h, w});
  for (int64_t i = 0; i < a; ++i)
    for (int64_t j = 0; j < b; ++j)
      VecMap(out.data() + (j * a + i) * plane, plane) =
          ConstVecMap(x->value.data() + (i * b + j) * plane, plane);
  return make_node(std::move(out), {x}, [](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    auto& xv = n.inputs[0];
    int64_t a = xv->value.dim(0), b = xv->value.dim(1);
    int64_t plane = xv->value.dim(2) * xv->value.dim(3);
    Tensor& dx = xv->ensure_grad();
    for (int64_t i = 0; i < a; ++i)
      for (int64_t j = 0; j < b; ++j)
        VecMap(dx.data() + (i * b + j) * plane, plane) +=
            ConstVecMap(n.grad.data() + (j * a + i) * plane, plane);
  });
}

Var maxpool2d(const Var& x, int64_t k, int64_t stride, int64_t pad) {
  require(x->value.ndim() == 4, "maxpool2d: not 4-d");
  int64_t n_b = x->value.dim(0), c_ch = x->value.dim(1);
  int64_t h = x->value.dim(2), w = x->value.dim(3);
  int64_t oh = out_extent(h, k, stride, pad), ow = out_extent(w, k, stride, pad);
  require(oh > 0 && ow > 0, "maxpool2d: output would be empty");
  Tensor out({n_b, c_ch, oh, ow});
  auto argmax = std::make_shared<std::vector<int64_t>>(n_b * c_ch * oh * ow);
  const real* xd = x->value.data();
  real* od = out.data();
  int64_t oi = 0;
  for (int64_t n = 0; n < n_b; ++n)
    for (int64_t c = 0; c < c_ch; ++c) {
      const real* plane = xd + (n * c_ch + c) * h * w;
      for (int64_t y = 0; y < oh; ++y)
        for (int64_t xo = 0; xo < ow; ++xo) {
          real best = -std::numeric_limits<real>::infinity();
          int64_t best_idx = -1;
          for (int64_t ih = 0; ih < k; ++ih) {
            int64_t sy = y * stride - pad + ih;
            if (sy < 0 || sy >= h) continue;
            for (int64_t iw = 0; iw < k; ++iw) {
              int64_t sx = xo * stride - pad + iw;
              if (sx < 0 || sx >= w) continue;
              real v = plane[sy * w + sx];
              if (v > best) { best = v; best_idx = sy * w + sx; }
            }
          }
          require(best_idx >= 0, "maxpool2d: empty window");
          od[oi] = best;
          (*argmax)[oi] = (n * c_ch + c) * h * w + best_idx;
          ++oi;
        }
    }
  return make_node(std::move(out), {x}, [argmax](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    real* dx = n.inputs[0]->ensure_grad().data();
    for (int64_t i = 0; i < n.value.numel(); ++i)
      dx[(*argmax)[i]] += n.grad[i];
  });
}

Var global_avgpool2d(const Var& x) {
  require(x->value.ndim() == 4, "global_avgpool2d: not 4-d");
  int64_t n_b = x->value.dim(0), c_ch = x->value.dim(1);
  int64_t plane = x->value.dim(2) * x->value.dim(3);
  Tensor out({n_b, c_ch});
  for (int64_t n = 0; n < n_b; ++n)
    for (int64_t c = 0; c < c_ch; ++c)
      out.at(n, c) =
          ConstVecMap(x->value.data() + (n * c_ch + c) * plane, plane).sum() /
          real(plane);
  return make_node(std::move(out), {x}, [plane](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    Tensor& dx = n.inputs[0]->ensure_grad();
    int64_t n_b = n.value.dim(0), c_ch = n.value.dim(1);
    for (int64_t nn = 0; nn < n_b; ++nn)
      for (int64_t c = 0; c < c_ch; ++c)
        VecMap(dx.data() + (nn * c_ch + c) * plane, plane).array() +=
            n.grad.at(nn, c) / real(plane);
  });
}

Var upsample_rows(const Var& x, int64_t factor) {
  require(x->value.ndim() == 2 && factor >= 1, "upsample_rows: bad arguments");
  int64_t t_len = x->value.dim(0), c_ch = x->value.dim(1);
  Tensor out({t_len * factor, c_ch});
  for (int64_t t = 0; t < t_len; ++t)
    for (int64_t i = 0; i < factor; ++i)
      out.mat().row(t * factor + i) = x->value.mat().row(t);
  return make_node(std::move(out), {x}, [factor](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    auto g = n.grad.as_mat(n.value.dim(0), n.value.dim(1));
    auto dx = n.inputs[0]->ensure_grad().mat();
    for (int64_t t = 0; t < dx.rows(); ++t)
      for (int64_t i = 0; i < factor; ++i)
        dx.row(t) += g.row(t * factor + i);
  });
}

}  // namespace ag
}  // namespace lts
