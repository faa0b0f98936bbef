// tests/test_autograd.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "lts/core/autograd.h"
#include "test_util.h"

using namespace lts;
namespace A = lts::ag;

namespace {

constexpr real kTol = 1e-4;

// Reduces an op output to a scalar with fixed random weights so the check
// exercises a non-uniform upstream gradient.
A::Var weighted_sum(const A::Var& y, uint64_t seed) {
  Rng rng(seed);
  Tensor w = rand_tensor(rng, y->value.shape());
  return A::sum_all(A::mul(y, A::leaf(w)));
}

}  // namespace

TEST_CASE("elementwise arithmetic gradients") {
  Rng rng(derive_seed(7, "arith"));
  auto a = A::leaf(rand_tensor(rng, {3, 4}), true);
  auto b = A::leaf(rand_tensor(rng, {3, 4}), true);
  auto f = [&] {
    auto y = A::add(A::mul(a, b), A::mul_scalar(A::sub(a, b), 0.5));
    y = A::add_scalar(A::neg(y), 2.0);
    return weighted_sum(y, 11);
  };
  CHECK(A::gradcheck_max_rel_err(f, a) < kTol);
  CHECK(A::gradcheck_max_rel_err(f, b) < kTol);
}

TEST_CASE("row-vector broadcast gradients") {
  Rng rng(derive_seed(7, "rowvec"));
  auto a = A::leaf(rand_tensor(rng, {4, 5}), true);
  auto v = A::leaf(rand_tensor(rng, {5}), true);
  auto f = [&] { return weighted_sum(A::mul_rowvec(A::add_rowvec(a, v), v), 13); };
  CHECK(A::gradcheck_max_rel_err(f, a) < kTol);
  CHECK(A::gradcheck_max_rel_err(f, v) < kTol);
}

TEST_CASE("activation gradients") {
  Rng rng(derive_seed(7, "act"));
  Tensor x0 = rand_tensor(rng, {3, 4}, 0.2, 1.5);
  for (int64_t i = 0; i < x0.numel(); ++i)
    if (i % 2 == 0) x0[i] = -x0[i];  // both signs, away from the relu kink
  auto x = A::leaf(x0, true);
  auto rel = [&] { return weighted_sum(A::relu(x), 17); };
  auto sig = [&] { return weighted_sum(A::sigmoid(x), 18); };
  auto tnh = [&] { return weighted_sum(A::tanh_(x), 19); };
  auto swi = [&] { return weighted_sum(A::swish(x), 20); };
  auto ex = [&] { return weighted_sum(A::exp_(x), 21); };
  auto sq = [&] { return weighted_sum(A::square(x), 22); };
  CHECK(A::gradcheck_max_rel_err(rel, x) < kTol);
  CHECK(A::gradcheck_max_rel_err(sig, x) < kTol);
  CHECK(A::gradcheck_max_rel_err(tnh, x) < kTol);
  CHECK(A::gradcheck_max_rel_err(swi, x) < kTol);
  CHECK(A::gradcheck_max_rel_err(ex, x) < kTol);
  CHECK(A::gradcheck_max_rel_err(sq, x) < kTol);
}

TEST_CASE("matmul and transpose gradients") {
  Rng rng(derive_seed(7, "mm"));
  auto a = A::leaf(rand_tensor(rng, {3, 4}), true);
  auto b = A::leaf(rand_tensor(rng, {4, 5}), true);
  auto f = [&] { return weighted_sum(A::matmul(a, b), 23); };
  CHECK(A::gradcheck_max_rel_err(f, a) < kTol);
  CHECK(A::gradcheck_max_rel_err(f, b) < kTol);
  auto ft = [&] {
    return weighted_sum(A::matmul(A::transpose(b), A::transpose(a)), 29);
  };
  CHECK(A::gradcheck_max_rel_err(ft, a) < kTol);
  CHECK(A::gradcheck_max_rel_err(ft, b) < kTol);
}

TEST_CASE("reshape keeps data and routes gradients") {
  Rng rng(derive_seed(7, "reshape"));
  auto a = A::leaf(rand_tensor(rng, {2, 6}), true);
  auto y = A::reshape(a, {3, 4});
  CHECK(y->value.dim(0) == 3);
  CHECK(y->value[5] == a->value[5]);
  auto f = [&] { return weighted_sum(A::reshape(a, {3, 4}), 31); };
  CHECK(A::gradcheck_max_rel_err(f, a) < kTol);
}

TEST_CASE("column concat, slice, interleave gradients") {
  Rng rng(derive_seed(7, "cols"));
  auto a = A::leaf(rand_tensor(rng, {3, 4}), true);
  auto b = A::leaf(rand_tensor(rng, {3, 2}), true);
  auto fc = [&] {
    return weighted_sum(A::concat_cols({a, b, a}), 37);
  };
  CHECK(A::gradcheck_max_rel_err(fc, a) < kTol);
  CHECK(A::gradcheck_max_rel_err(fc, b) < kTol);
  auto fs = [&] { return weighted_sum(A::slice_cols(a, 1, 2), 41); };
  CHECK(A::gradcheck_max_rel_err(fs, a) < kTol);

  auto fi = [&] {
    auto [even, odd] = A::deinterleave_cols(a);
    return weighted_sum(A::interleave_cols(odd, even), 43);
  };
  CHECK(A::gradcheck_max_rel_err(fi, a) < kTol);

  auto [even, odd] = A::deinterleave_cols(a);
  CHECK(even->value.at(1, 1) == a->value.at(1, 2));
  CHECK(odd->value.at(2, 0) == a->value.at(2, 1));
  auto back = A::interleave_cols(even, odd);
  for (int64_t i = 0; i < a->value.numel(); ++i)
    CHECK(back->value[i] == a->value[i]);
}

TEST_CASE("logabsdet value and gradient") {
  Rng rng(derive_seed(7, "lad"));
  Tensor w0 = rand_tensor(rng, {4, 4});
  for (int64_t i = 0; i < 4; ++i) w0.at(i, i) += 3.0;  // keep well conditioned
  auto w = A::leaf(w0, true);
  Eigen::MatrixXd m(4, 4);
  for (int64_t i = 0; i < 4; ++i)
    for (int64_t j = 0; j < 4; ++j) m(i, j) = w0.at(i, j);
  real expect = std::log(std::abs(m.determinant()));
  CHECK(A::logabsdet(w)->scalar() == doctest::Approx(expect).epsilon(1e-10));
  auto f = [&] { return A::logabsdet(w); };
  CHECK(A::gradcheck_max_rel_err(f, w) < kTol);
}

TEST_CASE("reductions and softmax family") {
  Rng rng(derive_seed(7, "red"));
  auto a = A::leaf(rand_tensor(rng, {4, 6}), true);
  auto fsum = [&] { return A::sum_all(A::square(a)); };
  CHECK(A::gradcheck_max_rel_err(fsum, a) < kTol);
  auto fmean = [&] { return A::mean_all(A::square(a)); };
  CHECK(A::gradcheck_max_rel_err(fmean, a) < kTol);

  auto sm = A::softmax_rows(a);
  for (int64_t i = 0; i < 4; ++i)
    CHECK(sm->value.mat().row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
  auto fsm = [&] { return weighted_sum(A::softmax_rows(a), 47); };
  CHECK(A::gradcheck_max_rel_err(fsm, a) < kTol);

  auto lsm = A::log_softmax_rows(a);
  for (int64_t i = 0; i < 4; ++i)
    CHECK(lsm->value.mat().row(i).array().exp().sum() ==
          doctest::Approx(1.0).epsilon(1e-12));
  auto flsm = [&] { return weighted_sum(A::log_softmax_rows(a), 53); };
  CHECK(A::gradcheck_max_rel_err(flsm, a) < kTol);
}

TEST_CASE("cross entropy sum against uniform closed form") {
  int64_t t_len = 5, k = 200;
  auto logits = A::leaf(Tensor::zeros({t_len, k}), true);
  std::vector<int64_t> targets = {0, 13, 72, 199, 4};
  auto loss = A::cross_entropy_sum(logits, targets);
  CHECK(loss->scalar() ==
        doctest::Approx(real(t_len) * std::log(real(k))).epsilon(1e-12));

  Rng rng(derive_seed(7, "ce"));
  auto lg = A::leaf(rand_tensor(rng, {4, 7}), true);
  std::vector<int64_t> tg = {2, 0, 6, 3};
  auto f = [&] { return A::cross_entropy_sum(lg, tg); };
  CHECK(A::gradcheck_max_rel_err(f, lg) < kTol);
}

TEST_CASE("l1 sum value and subgradient") {
  Rng rng(derive_seed(7, "l1"));
  auto a = A::leaf(rand_tensor(rng, {3, 5}), true);
  auto b = A::leaf(rand_tensor(rng, {3, 5}), true);
  real expect = 0;
  for (int64_t i = 0; i < a->value.numel(); ++i)
    expect += std::abs(a->value[i] - b->value[i]);
  CHECK(A::l1_sum(a, b)->scalar() == doctest::Approx(expect).epsilon(1e-12));
  auto f = [&] { return A::l1_sum(a, b); };
  CHECK(A::gradcheck_max_rel_err(f, a) < kTol);
  CHECK(A::gradcheck_max_rel_err(f, b) < kTol);
}

TEST_CASE("conv1d matches direct computation and gradchecks") {
  Rng rng(derive_seed(7, "c1"));
  int64_t t_len = 6, cin = 3, cout = 2, k = 3;
  auto x = A::leaf(rand_tensor(rng, {t_len, cin}), true);
  auto w = A::leaf(rand_tensor(rng, {cout, cin * k}), true);
  auto b = A::leaf(rand_tensor(rng, {cout}), true);
  auto y = A::conv1d_same(x, w, b, k);
  for (int64_t t = 0; t < t_len; ++t)
    for (int64_t co = 0; co < cout; ++co) {
      real acc = b->value[co];
      for (int64_t c = 0; c < cin; ++c)
        for (int64_t j = 0; j < k; ++j) {
          int64_t src = t + j - k / 2;
          if (src < 0 || src >= t_len) continue;
          acc += w->value.at(co, c * k + j) * x->value.at(src, c);
        }
      CHECK(y->value.at(t, co) == doctest::Approx(acc).epsilon(1e-10));
    }
  auto f = [&] { return weighted_sum(A::conv1d_same(x, w, b, k), 59); };
  CHECK(A::gradcheck_max_rel_err(f, x) < kTol);
  CHECK(A::gradcheck_max_rel_err(f, w) < kTol);
  CHECK(A::gradcheck_max_rel_err(f, b) < kTol);
}

TEST_CASE("depthwise conv1d matches direct computation and gradchecks") {
  Rng rng(derive_seed(7, "dw"));
  int64_t t_len = 7, c_ch = 3, k = 5;
  auto x = A::leaf(rand_tensor(rng, {t_len, c_ch}), true);
  auto w = A::leaf(rand_tensor(rng, {c_ch, k}), true);
  auto b = A::leaf(rand_tensor(rng, {c_ch}), true);
  auto y = A::depthwise_conv1d_same(x, w, b, k);
  for (int64_t t = 0; t < t_len; ++t)
    for (int64_t c = 0; c < c_ch; ++c) {
      real acc = b->value[c];
      for (int64_t j = 0; j < k; ++j) {
        int64_t src = t + j - k / 2;
        if (src < 0 || src >= t_len) continue;
        acc += w->value.at(c, j) * x->value.at(src, c);
      }
      CHECK(y->value.at(t, c) == doctest::Approx(acc).epsilon(1e-10));
    }
  auto f = [&] { return weighted_sum(A::depthwise_conv1d_same(x, w, b, k), 61); };
  CHECK(A::gradcheck_max_rel_err(f, x) < kTol);
  CHECK(A::gradcheck_max_rel_err(f, w) < kTol);
  CHECK(A::gradcheck_max_rel_err(f, b) < kTol);
}

TEST_CASE("conv2d matches direct computation and gradchecks") {
  Rng rng(derive_seed(7, "c2"));
  int64_t n_b = 2, cin = 2, cout = 3, h = 5, wd = 4, k = 3, stride = 2, pad = 1;
  auto x = A::leaf(rand_tensor(rng, {n_b, cin, h, wd}), true);
  auto w = A::leaf(rand_tensor(rng, {cout, cin * k * k}), true);
  auto b = A::leaf(rand_tensor(rng, {cout}), true);
  auto y = A::conv2d(x, w, b, k, k, stride, pad);
  int64_t oh = (h + 2 * pad - k) / stride + 1, ow = (wd + 2 * pad - k) / stride + 1;
  REQUIRE(y->value.dim(2) == oh);
  REQUIRE(y->value.dim(3) == ow);
  for (int64_t n = 0; n < n_b; ++n)
    for (int64_t co = 0; co < cout; ++co)
      for (int64_t yo = 0; yo < oh; ++yo)
        for (int64_t xo = 0; xo < ow; ++xo) {
          real acc = b->value[co];
          for (int64_t c = 0; c < cin; ++c)
            for (int64_t ih = 0; ih < k; ++ih)
              for (int64_t iw = 0; iw < k; ++iw) {
                int64_t sy = yo * stride - pad + ih;
                int64_t sx = xo * stride - pad + iw;
                if (sy < 0 || sy >= h || sx < 0 || sx >= wd) continue;
                acc += w->value.at(co, (c * k + ih) * k + iw) *
                       x->value[((n * cin + c) * h + sy) * wd + sx];
              }
          CHECK(y->value[((n * cout + co) * oh + yo) * ow + xo] ==
                doctest::Approx(acc).epsilon(1e-10));
        }
  auto f = [&] { return weighted_sum(A::conv2d(x, w, b, k, k, stride, pad), 67); };
  CHECK(A::gradcheck_max_rel_err(f, x) < kTol);
  CHECK(A::gradcheck_max_rel_err(f, w) < kTol);
  CHECK(A::gradcheck_max_rel_err(f, b) < kTol);
}

TEST_CASE("conv3d matches direct computation and gradchecks") {
  Rng rng(derive_seed(7, "c3"));
  int64_t cin = 2, t_len = 3, h = 5, wd = 4, cout = 2;
  int64_t kt = 3, k = 3, stride = 2, pad = 1;
  auto x = A::leaf(rand_tensor(rng, {cin, t_len, h, wd}), true);
  auto w = A::leaf(rand_tensor(rng, {cout, cin * kt * k * k}), true);
  auto b = A::leaf(rand_tensor(rng, {cout}), true);
  auto y = A::conv3d(x, w, b, kt, k, k, stride, pad);
  int64_t oh = (h + 2 * pad - k) / stride + 1, ow = (wd + 2 * pad - k) / stride + 1;
  REQUIRE(y->value.dim(0) == cout);
  REQUIRE(y->value.dim(1) == t_len);
  for (int64_t co = 0; co < cout; ++co)
    for (int64_t t = 0; t < t_len; ++t)
      for (int64_t yo = 0; yo < oh; ++yo)
        for (int64_t xo = 0; xo < ow; ++xo) {
          real acc = b->value[co];
          for (int64_t c = 0; c < cin; ++c)
            for (int64_t jt = 0; jt < kt; ++jt)
              for (int64_t ih = 0; ih < k; ++ih)
                for (int64_t iw = 0; iw < k; ++iw) {
                  int64_t st = t + jt - kt / 2;
                  int64_t sy = yo * stride - pad + ih;
                  int64_t sx = xo * stride - pad + iw;
                  if (st < 0 || st >= t_len || sy < 0 || sy >= h || sx < 0 ||
                      sx >= wd)
                    continue;
                  acc += w->value.at(co, ((c * kt + jt) * k + ih) * k + iw) *
                         x->value[((c * t_len + st) * h + sy) * wd + sx];
                }
          CHECK(y->value[((co * t_len + t) * oh + yo) * ow + xo] ==
                doctest::Approx(acc).epsilon(1e-10));
        }
  auto f = [&] {
    return weighted_sum(A::conv3d(x, w, b, kt, k, k, stride, pad), 71);
  };
  CHECK(A::gradcheck_max_rel_err(f, x) < kTol);
  CHECK(A::gradcheck_max_rel_err(f, w) < kTol);
  CHECK(A::gradcheck_max_rel_err(f, b) < kTol);
}

TEST_CASE("transpose_01 permutes leading axes") {
  Rng rng(derive_seed(7, "t01"));
  auto x = A::leaf(rand_tensor(rng, {2, 3, 2, 2}), true);
  auto y = A::transpose_01(x);
  REQUIRE(y->value.dim(0) == 3);
  REQUIRE(y->value.dim(1) == 2);
  for (int64_t i = 0; i < 2; ++i)
    for (int64_t j = 0; j < 3; ++j)
      for (int64_t p = 0; p < 4; ++p)
        CHECK(y->value[(j * 2 + i) * 4 + p] == x->value[(i * 3 + j) * 4 + p]);
  auto f = [&] { return weighted_sum(A::transpose_01(x), 73); };
  CHECK(A::gradcheck_max_rel_err(f, x) < kTol);
}

TEST_CASE("maxpool2d value and gradient") {
  Rng rng(derive_seed(7, "mp"));
  auto x = A::leaf(rand_tensor(rng, {2, 2, 6, 6}), true);
  auto y = A::maxpool2d(x, 3, 2, 1);
  REQUIRE(y->value.dim(2) == 3);
  REQUIRE(y->value.dim(3) == 3);
  // Window (0,0) with pad 1 covers input rows/cols [0,2).
  real m = -1e30;
  for (int64_t iy = 0; iy < 2; ++iy)
    for (int64_t ix = 0; ix < 2; ++ix) m = std::max(m, x->value[iy * 6 + ix]);
  CHECK(y->value[0] == doctest::Approx(m));
  auto f = [&] { return weighted_sum(A::maxpool2d(x, 3, 2, 1), 79); };
  CHECK(A::gradcheck_max_rel_err(f, x) < kTol);
}

TEST_CASE("global average pool value and gradient") {
  Rng rng(derive_seed(7, "gap"));
  auto x = A::leaf(rand_tensor(rng, {2, 3, 4, 5}), true);
  auto y = A::global_avgpool2d(x);
  REQUIRE(y->value.dim(0) == 2);
  REQUIRE(y->value.dim(1) == 3);
  real mean = ConstVecMap(x->value.data() + 20, 20).sum() / 20.0;
  CHECK(y->value.at(0, 1) == doctest::Approx(mean).epsilon(1e-12));
  auto f = [&] { return weighted_sum(A::global_avgpool2d(x), 83); };
  CHECK(A::gradcheck_max_rel_err(f, x) < kTol);
}

TEST_CASE("group norm normalises per sample and group") {
  Rng rng(derive_seed(7, "gn"));
  int64_t n_b = 2, c_ch = 4, sp = 6, groups = 2;
  auto x = A::leaf(rand_tensor(rng, {n_b, c_ch, sp, 1}), true);
  auto gamma = A::leaf(Tensor::full({c_ch}, 1), true);
  auto beta = A::leaf(Tensor::zeros({c_ch}), true);
  auto y = A::group_norm(x, groups, gamma, beta, 1e-5);
  int64_t block = (c_ch / groups) * sp;
  for (int64_t n = 0; n < n_b; ++n)
    for (int64_t g = 0; g < groups; ++g) {
      ConstVecMap v(y->value.data() + (n * c_ch + g * 2) * sp, block);
      CHECK(v.sum() / block == doctest::Approx(0.0).epsilon(1e-8));
      CHECK(v.array().square().sum() / block == doctest::Approx(1.0).epsilon(1e-3));
    }
  Rng rng2(derive_seed(7, "gn2"));
  auto gamma2 = A::leaf(rand_tensor(rng2, {c_ch}, 0.5, 1.5), true);
  auto beta2 = A::leaf(rand_tensor(rng2, {c_ch}), true);
  auto f = [&] {
    return weighted_sum(A::group_norm(x, groups, gamma2, beta2, 1e-5), 89);
  };
  CHECK(A::gradcheck_max_rel_err(f, x) < kTol);
  CHECK(A::gradcheck_max_rel_err(f, gamma2) < kTol);
  CHECK(A::gradcheck_max_rel_err(f, beta2) < kTol);
}

TEST_CASE("layer norm normalises rows") {
  Rng rng(derive_seed(7, "ln"));
  auto x = A::leaf(rand_tensor(rng, {3, 8}), true);
  auto gamma = A::leaf(rand_tensor(rng, {8}, 0.5, 1.5), true);
  auto beta = A::leaf(rand_tensor(rng, {8}), true);
  auto ones = A::leaf(Tensor::full({8}, 1));
  auto zeros = A::leaf(Tensor::zeros({8}));
  auto yn = A::layer_norm_rows(x, ones, zeros, 1e-5);
  for (int64_t t = 0; t < 3; ++t) {
    CHECK(yn->value.mat().row(t).sum() / 8 == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(yn->value.mat().row(t).array().square().sum() / 8 ==
          doctest::Approx(1.0).epsilon(1e-3));
  }
  auto f = [&] { return weighted_sum(A::layer_norm_rows(x, gamma, beta, 1e-5), 97); };
  CHECK(A::gradcheck_max_rel_err(f, x) < kTol);
  CHECK(A::gradcheck_max_rel_err(f, gamma) < kTol);
  CHECK(A::gradcheck_max_rel_err(f, beta) < kTol);
}

TEST_CASE("embedding gathers rows and scatters gradients") {
  Rng rng(derive_seed(7, "emb"));
  auto table = A::leaf(rand_tensor(rng, {5, 3}), true);
  std::vector<int64_t> ids = {4, 0, 4, 2};
  auto y = A::embedding(table, ids);
  REQUIRE(y->value.dim(0) == 4);
  CHECK(y->value.at(0, 1) == table->value.at(4, 1));
  CHECK(y->value.at(2, 2) == table->value.at(4, 2));
  auto f = [&] { return weighted_sum(A::embedding(table, ids), 101); };
  CHECK(A::gradcheck_max_rel_err(f, table) < kTol);
}

TEST_CASE("glu gates first half by sigmoid of second half") {
  Rng rng(derive_seed(7, "glu"));
  auto x = A::leaf(rand_tensor(rng, {3, 8}), true);
  auto y = A::glu_cols(x);
  REQUIRE(y->value.dim(1) == 4);
  real expect = x->value.at(1, 2) /
                (1 + std::exp(-x->value.at(1, 6)));
  CHECK(y->value.at(1, 2) == doctest::Approx(expect).epsilon(1e-12));
  auto f = [&] { return weighted_sum(A::glu_cols(x), 103); };
  CHECK(A::gradcheck_max_rel_err(f, x) < kTol);
}

TEST_CASE("upsample repeats rows and folds gradients") {
  Rng rng(derive_seed(7, "up"));
  auto x = A::leaf(rand_tensor(rng, {3, 2}), true);
  auto y = A::upsample_rows(x, 4);
  REQUIRE(y->value.dim(0) == 12);
  CHECK(y->value.at(5, 1) == x->value.at(1, 1));
  CHECK(y->value.at(11, 0) == x->value.at(2, 0));
  auto f = [&] { return weighted_sum(A::upsample_rows(x, 4), 107); };
  CHECK(A::gradcheck_max_rel_err(f, x) < kTol);
}

TEST_CASE("dropout is identity in eval mode and seeded in train mode") {
  Rng rng(derive_seed(7, "do"));
  auto x = A::leaf(rand_tensor(rng, {20, 10}), true);
  auto y_eval = A::dropout(x, 0.5, 1234, false);
  CHECK(y_eval.get() == x.get());
  auto y1 = A::dropout(x, 0.5, 1234, true);
  auto y2 = A::dropout(x, 0.5, 1234, true);
  int64_t zeros = 0;
  for (int64_t i = 0; i < y1->value.numel(); ++i) {
    CHECK(y1->value[i] == y2->value[i]);
    if (y1->value[i] == 0) {
      ++zeros;
    } else {
      CHECK(y1->value[i] == doctest::Approx(2 * x->value[i]).epsilon(1e-12));
    }
  }
  CHECK(zeros > 50);
  CHECK(zeros < 150);
  auto f = [&] { return weighted_sum(A::dropout(x, 0.5, 1234, true), 109); };
  CHECK(A::gradcheck_max_rel_err(f, x) < kTol);
}

TEST_CASE("relative position bias matrix clamps distances") {
  Rng rng(derive_seed(7, "rp"));
  int64_t r = 2;
  auto bias = A::leaf(rand_tensor(rng, {2 * r + 1}), true);
  auto y = A::relpos_bias_matrix(bias, 6, r);
  CHECK(y->value.at(0, 0) == bias->value[r]);
  CHECK(y->value.at(0, 1) == bias->value[r + 1]);
  CHECK(y->value.at(0, 5) == bias->value[2 * r]);  // clamped at +r
  CHECK(y->value.at(5, 0) == bias->value[0]);      // clamped at -r
  auto f = [&] { return weighted_sum(A::relpos_bias_matrix(bias, 6, r), 113); };
  CHECK(A::gradcheck_max_rel_err(f, bias) < kTol);
}

TEST_CASE("gradients accumulate through shared subgraphs") {
  auto x = A::leaf(Tensor::scalar(1.7), true);
  auto y = A::add(A::mul(x, x), x);  // d/dx (x^2 + x) = 2x + 1
  A::backward(y);
  CHECK(x->grad[0] == doctest::Approx(2 * 1.7 + 1).epsilon(1e-12));
}

TEST_CASE("no-grad guard suppresses graph recording") {
  auto x = A::leaf(Tensor::scalar(2.0), true);
  {
    A::NoGradGuard ng;
    auto y = A::mul(x, x);
    CHECK_FALSE(y->requires_grad);
    CHECK(y->inputs.empty());
  }
  auto y2 = A::mul(x, x);
  CHECK(y2->requires_grad);
}
