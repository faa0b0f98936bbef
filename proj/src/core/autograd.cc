// src/core/autograd.cc

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

#include "lts/core/autograd.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace lts {
namespace ag {

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

Var detail::make_node(Tensor value, std::vector<Var> inputs,
                      std::function<void(Node&)> fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  bool rg = false;
  if (g_grad_enabled) {
    for (const auto& i : inputs) rg = rg || i->requires_grad;
  }
  if (rg) {
    n->requires_grad = true;
    n->inputs = std::move(inputs);
    n->backprop = std::move(fn);
  }
  return n;
}

using detail::make_node;

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : saved_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = saved_; }

Var leaf(Tensor value, bool requires_grad, std::string name) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  n->name = std::move(name);
  return n;
}

void backward(const Var& root) {
  require(root->value.numel() == 1, "backward: root must be scalar");
  // Iterative topological sort over the DAG.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(root.get(), 0);
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->inputs.size()) {
      Node* child = node->inputs[idx].get();
      ++idx;
      if (child->requires_grad && !visited.count(child)) {
        visited.insert(child);
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  root->ensure_grad().fill(0);
  root->grad[0] = 1;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backprop && n->grad.defined()) n->backprop(*n);
  }
}

// ---------------------------------------------------------------------------
// Elementwise
// ---------------------------------------------------------------------------

Var add(const Var& a, const Var& b) {
  require(a->value.same_shape(b->value), "add: shape mismatch " +
          a->value.shape_str() + " vs " + b->value.shape_str());
  Tensor out = a->value.clone();
  out.vec() += b->value.vec();
  return make_node(std::move(out), {a, b}, [](Node& n) {
    for (int i = 0; i < 2; ++i)
      if (n.inputs[i]->requires_grad)
        n.inputs[i]->ensure_grad().vec() += n.grad.vec();
  });
}

Var sub(const Var& a, const Var& b) {
  require(a->value.same_shape(b->value), "sub: shape mismatch");
  Tensor out = a->value.clone();
  out.vec() -= b->value.vec();
  return make_node(std::move(out), {a, b}, [](Node& n) {
    if (n.inputs[0]->requires_grad) n.inputs[0]->ensure_grad().vec() += n.grad.vec();
    if (n.inputs[1]->requires_grad) n.inputs[1]->ensure_grad().vec() -= n.grad.vec();
  });
}

Var mul(const Var& a, const Var& b) {
  require(a->value.same_shape(b->value), "mul: shape mismatch");
  Tensor out = a->value.clone();
  out.vec().array() *= b->value.vec().array();
  return make_node(std::move(out), {a, b}, [](Node& n) {
    if (n.inputs[0]->requires_grad)
      n.inputs[0]->ensure_grad().vec().array() +=
          n.grad.vec().array() * n.inputs[1]->value.vec().array();
    if (n.inputs[1]->requires_grad)
      n.inputs[1]->ensure_grad().vec().array() +=
          n.grad.vec().array() * n.inputs[0]->value.vec().array();
  });
}

Var neg(const Var& a) { return mul_scalar(a, -1); }

Var add_scalar(const Var& a, real s) {
  Tensor out = a->value.clone();
  out.vec().array() += s;
  return make_node(std::move(out), {a}, [](Node& n) {
    if (n.inputs[0]->requires_grad) n.inputs[0]->ensure_grad().vec() += n.grad.vec();
  });
}

Var mul_scalar(const Var& a, real s) {
  Tensor out = a->value.clone();
  out.vec() *= s;
  return make_node(std::move(out), {a}, [s](Node& n) {
    if (n.inputs[0]->requires_grad)
      n.inputs[0]->ensure_grad().vec() += s * n.grad.vec();
  });
}

Var add_rowvec(const Var& a, const Var& v) {
  require(a->value.ndim() == 2 && v->value.numel() == a->value.dim(1),
          "add_rowvec: shape mismatch");
  Tensor out = a->value.clone();
  out.mat().rowwise() += v->value.vec().transpose();
  return make_node(std::move(out), {a, v}, [](Node& n) {
    int64_t rows = n.value.dim(0), cols = n.value.dim(1);
    if (n.inputs[0]->requires_grad) n.inputs[0]->ensure_grad().vec() += n.grad.vec();
    if (n.inputs[1]->requires_grad)
      n.inputs[1]->ensure_grad().vec() +=
          n.grad.as_mat(rows, cols).colwise().sum().transpose();
  });
}

Var mul_rowvec(const Var& a, const Var& v) {
  require(a->value.ndim() == 2 && v->value.numel() == a->value.dim(1),
          "mul_rowvec: shape mismatch");
  Tensor out = a->value.clone();
  out.mat().array().rowwise() *= v->value.vec().transpose().array();
  return make_node(std::move(out), {a, v}, [](Node& n) {
    int64_t rows = n.value.dim(0), cols = n.value.dim(1);
    auto g = n.grad.as_mat(rows, cols);
    if (n.inputs[0]->requires_grad)
      n.inputs[0]->ensure_grad().as_mat(rows, cols).array() +=
          g.array().rowwise() * n.inputs[1]->value.vec().transpose().array();
    if (n.inputs[1]->requires_grad)
      n.inputs[1]->ensure_grad().vec() +=
          (g.array() * n.inputs[0]->value.as_mat(rows, cols).array())
              .colwise().sum().matrix().transpose();
  });
}

Var relu(const Var& a) {
  Tensor out = a->value.clone();
  out.vec() = out.vec().cwiseMax(real(0));
  return make_node(std::move(out), {a}, [](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    auto& x = n.inputs[0]->value;
    auto& dx = n.inputs[0]->ensure_grad();
    for (int64_t i = 0; i < x.numel(); ++i)
      if (x[i] > 0) dx[i] += n.grad[i];
  });
}

Var sigmoid(const Var& a) {
  Tensor out = a->value.clone();
  out.vec() = out.vec().unaryExpr([](real x) { return real(1) / (real(1) + std::exp(-x)); });
  Tensor y = out;
  return make_node(std::move(out), {a}, [y](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    n.inputs[0]->ensure_grad().vec().array() +=
        n.grad.vec().array() * y.vec().array() * (1 - y.vec().array());
  });
}

Var tanh_(const Var& a) {
  Tensor out = a->value.clone();
  out.vec() = out.vec().array().tanh();
  Tensor y = out;
  return make_node(std::move(out), {a}, [y](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    n.inputs[0]->ensure_grad().vec().array() +=
        n.grad.vec().array() * (1 - y.vec().array().square());
  });
}

Var swish(const Var& a) {
  Tensor sig = a->value.clone();
  sig.vec() = sig.vec().unaryExpr([](real x) { return real(1) / (real(1) + std::exp(-x)); });
  Tensor out = a->value.clone();
  out.vec().array() *= sig.vec().array();
  return make_node(std::move(out), {a}, [sig](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    auto x = n.inputs[0]->value.vec().array();
    auto s = sig.vec().array();
    n.inputs[0]->ensure_grad().vec().array() +=
        n.grad.vec().array() * (s + x * s * (1 - s));
  });
}

Var exp_(const Var& a) {
  Tensor out = a->value.clone();
  out.vec() = out.vec().array().exp();
  Tensor y = out;
  return make_node(std::move(out), {a}, [y](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    n.inputs[0]->ensure_grad().vec().array() +=
        n.grad.vec().array() * y.vec().array();
  });
}

Var square(const Var& a) {
  Tensor out = a->value.clone();
  out.vec() = out.vec().array().square();
  return make_node(std::move(out), {a}, [](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    n.inputs[0]->ensure_grad().vec().array() +=
        2 * n.grad.vec().array() * n.inputs[0]->value.vec().array();
  });
}

// ---------------------------------------------------------------------------
// Linear algebra / shape
// ---------------------------------------------------------------------------

Var matmul(const Var& a, const Var& b) {
  require(a->value.ndim() == 2 && b->value.ndim() == 2 &&
              a->value.dim(1) == b->value.dim(0),
          "matmul: shape mismatch " + a->value.shape_str() + " x " +
              b->value.shape_str());
  Tensor out({a->value.dim(0), b->value.dim(1)});
  out.mat().noalias() = a->value.mat() * b->value.mat();
  return make_node(std::move(out), {a, b}, [](Node& n) {
    auto g = n.grad.as_mat(n.value.dim(0), n.value.dim(1));
    if (n.inputs[0]->requires_grad)
      n.inputs[0]->ensure_grad().mat().noalias() += g * n.inputs[1]->value.mat().transpose();
    if (n.inputs[1]->requires_grad)
      n.inputs[1]->ensure_grad().mat().noalias() += n.inputs[0]->value.mat().transpose() * g;
  });
}

Var transpose(const Var& a) {
  require(a->value.ndim() == 2, "transpose: not 2-d");
  Tensor out({a->value.dim(1), a->value.dim(0)});
  out.mat() = a->value.mat().transpose();
  return make_node(std::move(out), {a}, [](Node& n) {
    if (n.inputs[0]->requires_grad)
      n.inputs[0]->ensure_grad().mat() +=
          n.grad.as_mat(n.value.dim(0), n.value.dim(1)).transpose();
  });
}

Var reshape(const Var& a, std::vector<int64_t> shape) {
  Tensor out = a->value.reshaped(std::move(shape));
  return make_node(std::move(out), {a}, [](Node& n) {
    if (n.inputs[0]->requires_grad)
      n.inputs[0]->ensure_grad().vec() += n.grad.vec();
  });
}

Var concat_cols(const std::vector<Var>& xs) {
  require(!xs.empty(), "concat_cols: empty input");
  int64_t rows = xs[0]->value.dim(0);
  int64_t cols = 0;
  for (const auto& x : xs) {
    require(x->value.ndim() == 2 && x->value.dim(0) == rows, "concat_cols: shape mismatch");
    cols += x->value.dim(1);
  }
  Tensor out({rows, cols});
  int64_t off = 0;
  for (const auto& x : xs) {
    out.mat().middleCols(off, x->value.dim(1)) = x->value.mat();
    off += x->value.dim(1);
  }
  return make_node(std::move(out), xs, [](Node& n) {
    auto g = n.grad.as_mat(n.value.dim(0), n.value.dim(1));
    int64_t off = 0;
    for (auto& in : n.inputs) {
      int64_t w = in->value.dim(1);
      if (in->requires_grad) in->ensure_grad().mat() += g.middleCols(off, w);
      off += w;
    }
  });
}

Var slice_cols(const Var& a, int64_t start, int64_t len) {
  require(a->value.ndim() == 2 && start >= 0 && start + len <= a->value.dim(1),
          "slice_cols: out of range");
  Tensor out({a->value.dim(0), len});
  out.mat() = a->value.mat().middleCols(start, len);
  return make_node(std::move(out), {a}, [start, len](Node& n) {
    if (n.inputs[0]->requires_grad)
      n.inputs[0]->ensure_grad().mat().middleCols(start, len) +=
          n.grad.as_mat(n.value.dim(0), n.value.dim(1));
  });
}

namespace {
// Columns offset, offset+stride, offset+2*stride, ...
Var stride_cols(const Var& a, int64_t offset, int64_t stride) {
  int64_t rows = a->value.dim(0), cols = a->value.dim(1);
  int64_t n_out = (cols - offset + stride - 1) / stride;
  Tensor out({rows, n_out});
  for (int64_t j = 0; j < n_out; ++j)
    out.mat().col(j) = a->value.mat().col(offset + j * stride);
  return make_node(std::move(out), {a}, [offset, stride](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    auto g = n.grad.as_mat(n.value.dim(0), n.value.dim(1));
    auto dx = n.inputs[0]->ensure_grad().mat();
    for (int64_t j = 0; j < n.value.dim(1); ++j)
      dx.col(offset + j * stride) += g.col(j);
  });
}
}  // namespace

std::pair<Var, Var> deinterleave_cols(const Var& a) {
  require(a->value.ndim() == 2 && a->value.dim(1) % 2 == 0,
          "deinterleave_cols: need even column count");
  return {stride_cols(a, 0, 2), stride_cols(a, 1, 2)};
}

Var interleave_cols(const Var& a, const Var& b) {
  require(a->value.same_shape(b->value) && a->value.ndim() == 2,
          "interleave_cols: shape mismatch");
  int64_t rows = a->value.dim(0), cols = a->value.dim(1);
  Tensor out({rows, 2 * cols});
  for (int64_t j = 0; j < cols; ++j) {
    out.mat().col(2 * j) = a->value.mat().col(j);
    out.mat().col(2 * j + 1) = b->value.mat().col(j);
  }
  return make_node(std::move(out), {a, b}, [](Node& n) {
    auto g = n.grad.as_mat(n.value.dim(0), n.value.dim(1));
    int64_t cols = n.value.dim(1) / 2;
    for (int k = 0; k < 2; ++k) {
      if (!n.inputs[k]->requires_grad) continue;
      auto dx = n.inputs[k]->ensure_grad().mat();
      for (int64_t j = 0; j < cols; ++j) dx.col(j) += g.col(2 * j + k);
    }
  });
}

Var logabsdet(const Var& w) {
  require(w->value.ndim() == 2 && w->value.dim(0) == w->value.dim(1),
          "logabsdet: not square");
  int64_t c = w->value.dim(0);
  Eigen::MatrixXd m(c, c);
  for (int64_t i = 0; i < c; ++i)
    for (int64_t j = 0; j < c; ++j) m(i, j) = w->value.at(i, j);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  real ld = 0;
  for (int64_t i = 0; i < c; ++i) {
    real u = std::abs(lu.matrixLU()(i, i));
    if (u <= 0 || !std::isfinite(u))
      throw NumericalError("logabsdet: singular or non-finite matrix");
    ld += std::log(u);
  }
  // (W^-1)^T, captured for the backward pass.
  Eigen::MatrixXd winv_t = lu.inverse().transpose();
  Tensor grad_w({c, c});
  for (int64_t i = 0; i < c; ++i)
    for (int64_t j = 0; j < c; ++j) grad_w.at(i, j) = winv_t(i, j);
  return make_node(Tensor::scalar(ld), {w}, [grad_w](Node& n) {
    if (n.inputs[0]->requires_grad)
      n.inputs[0]->ensure_grad().vec() += n.grad[0] * grad_w.vec();
  });
}

// ---------------------------------------------------------------------------
// Reductions and losses
// ---------------------------------------------------------------------------

Var sum_all(const Var& a) {
  return make_node(Tensor::scalar(a->value.vec().sum()), {a}, [](Node& n) {
    if (n.inputs[0]->requires_grad)
      n.inputs[0]->ensure_grad().vec().array() += n.grad[0];
  });
}

Var mean_all(const Var& a) {
  int64_t m = a->value.numel();
  return make_node(Tensor::scalar(a->value.vec().sum() / real(m)), {a}, [m](Node& n) {
    if (n.inputs[0]->requires_grad)
      n.inputs[0]->ensure_grad().vec().array() += n.grad[0] / real(m);
  });
}

Var softmax_rows(const Var& a) {
  require(a->value.ndim() == 2, "softmax_rows: not 2-d");
  Tensor out = a->value.clone();
  auto y = out.mat();
  for (int64_t i = 0; i < y.rows(); ++i) {
    real m = y.row(i).maxCoeff();
    y.row(i) = (y.row(i).array() - m).exp();
    y.row(i) /= y.row(i).sum();
  }
  Tensor probs = out;
  return make_node(std::move(out), {a}, [probs](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    auto g = n.grad.as_mat(n.value.dim(0), n.value.dim(1));
    auto p = probs.mat();
    auto dx = n.inputs[0]->ensure_grad().mat();
    for (int64_t i = 0; i < p.rows(); ++i) {
      real s = g.row(i).dot(p.row(i));
      dx.row(i).array() += (g.row(i).array() - s) * p.row(i).array();
    }
  });
}

Var log_softmax_rows(const Var& a) {
  require(a->value.ndim() == 2, "log_softmax_rows: not 2-d");
  Tensor out = a->value.clone();
  auto y = out.mat();
  for (int64_t i = 0; i < y.rows(); ++i) {
    real m = y.row(i).maxCoeff();
    real lse = m + std::log((y.row(i).array() - m).exp().sum());
    y.row(i).array() -= lse;
  }
  Tensor logp = out;
  return make_node(std::move(out), {a}, [logp](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    auto g = n.grad.as_mat(n.value.dim(0), n.value.dim(1));
    auto dx = n.inputs[0]->ensure_grad().mat();
    for (int64_t i = 0; i < g.rows(); ++i) {
      real s = g.row(i).sum();
      dx.row(i).array() += g.row(i).array() - s * logp.mat().row(i).array().exp();
    }
  });
}

Var cross_entropy_sum(const Var& logits, const std::vector<int64_t>& targets) {
  require(logits->value.ndim() == 2, "cross_entropy_sum: logits not 2-d");
  int64_t t_len = logits->value.dim(0), k = logits->value.dim(1);
  require(static_cast<int64_t>(targets.size()) == t_len,
          "cross_entropy_sum: target length mismatch");
  auto x = logits->value.mat();
  real total = 0;
  for (int64_t i = 0; i < t_len; ++i) {
    int64_t tgt = targets[i];
    require(tgt >= 0 && tgt < k, "cross_entropy_sum: target out of range");
    real m = x.row(i).maxCoeff();
    real lse = m + std::log((x.row(i).array() - m).exp().sum());
    total += lse - x(i, tgt);
  }
  std::vector<int64_t> tg = targets;
  return make_node(Tensor::scalar(total), {logits}, [tg](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    auto x = n.inputs[0]->value.mat();
    auto dx = n.inputs[0]->ensure_grad().mat();
    real g0 = n.grad[0];
    for (int64_t i = 0; i < x.rows(); ++i) {
      real m = x.row(i).maxCoeff();
      EVec p = (x.row(i).array() - m).exp().matrix().transpose();
      p /= p.sum();
      dx.row(i) += g0 * p.transpose();
      dx(i, tg[static_cast<size_t>(i)]) -= g0;
    }
  });
}

Var l1_sum(const Var& a, const Var& b) {
  require(a->value.same_shape(b->value), "l1_sum: shape mismatch " +
          a->value.shape_str() + " vs " + b->value.shape_str());
  real total = (a->value.vec() - b->value.vec()).array().abs().sum();
  return make_node(Tensor::scalar(total), {a, b}, [](Node& n) {
    auto da = n.inputs[0];
    auto db = n.inputs[1];
    real g0 = n.grad[0];
    for (int64_t i = 0; i < da->value.numel(); ++i) {
      real d = da->value[i] - db->value[i];
      real s = d > 0 ? 1 : (d < 0 ? -1 : 0);
      if (da->requires_grad) da->ensure_grad()[i] += g0 * s;
      if (db->requires_grad) db->ensure_grad()[i] -= g0 * s;
    }
  });
}

// ---------------------------------------------------------------------------
// Gradient check helper
// ---------------------------------------------------------------------------

real gradcheck_max_rel_err(const std::function<Var()>& f, const Var& x, real h) {
  x->zero_grad();
  Var loss = f();
  backward(loss);
  Tensor analytic =
      x->grad.defined() ? x->grad.clone() : Tensor::zeros(x->value.shape());
  real max_err = 0;
  NoGradGuard ng;
  for (int64_t i = 0; i < x->value.numel(); ++i) {
    real saved = x->value[i];
    x->value[i] = saved + h;
    real fp = f()->scalar();
    x->value[i] = saved - h;
    real fm = f()->scalar();
    x->value[i] = saved;
    real numeric = (fp - fm) / (2 * h);
    real denom = std::max({std::abs(numeric), std::abs(analytic[i]), real(1e-6)});
    max_err = std::max(max_err, std::abs(numeric - analytic[i]) / denom);
  }
  return max_err;
}

}  // namespace ag
}  // namespace lts
