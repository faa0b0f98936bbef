// tests/test_flow.cc

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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "lts/flow/flow.h"
#include "lts/flow/kernel.h"
#include "test_util.h"

namespace lts {
namespace {

ModelConfig toy_config(int64_t bands, int64_t d_model, int64_t hidden,
                       int64_t steps) {
  ModelConfig cfg = smoke_preset();
  cfg.mel_bands = bands;
  cfg.d_model = d_model;
  cfg.n_heads = 1;
  cfg.flow_hidden = hidden;
  cfg.n_flow_steps = steps;
  return cfg;
}

FlowCondition make_cond(const ModelConfig& cfg, int64_t t_m, uint64_t seed) {
  Rng rng(seed);
  FlowCondition c;
  c.decoder_input = ag::constant(rand_tensor(rng, {t_m, cfg.d_model}));
  c.decoder_output = ag::constant(rand_tensor(rng, {t_m, cfg.mel_bands}));
  c.speaker = ag::constant(rand_tensor(rng, {1, cfg.d_model}));
  return c;
}

// Moves every flow parameter off its identity initialisation while keeping
// the channel mixing well conditioned.
void randomize_flow(nn::Params& ps, const ModelConfig& cfg, uint64_t seed,
                    real scale) {
  Rng rng(seed);
  real w_scale = 0.15 / std::sqrt(static_cast<real>(cfg.mel_bands));
  for (const auto& [name, v] : ps.all()) {
    if (name.rfind("postnet.", 0) != 0) continue;
    bool is_mixing = name.size() > 2 && name.substr(name.size() - 2) == ".w" &&
                     v->value.ndim() == 2 &&
                     v->value.dim(0) == v->value.dim(1);
    real s = is_mixing ? w_scale : scale;
    for (int64_t i = 0; i < v->value.numel(); ++i)
      v->value[i] += rng.uniform(-s, s);
  }
}

real max_abs(const Tensor& a, const Tensor& b) {
  REQUIRE(a.numel() == b.numel());
  real m = 0;
  for (int64_t i = 0; i < a.numel(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

TEST_CASE("identity-initialised flow is the identity map with zero log-det") {
  ModelConfig cfg = toy_config(4, 6, 8, 3);
  nn::Params ps(1);
  FlowPostnet flow(ps, cfg);
  Rng rng(2);
  Tensor x = rand_tensor(rng, {5, 4});
  FlowCondition cond = make_cond(cfg, 5, 3);

  ag::NoGradGuard ng;
  auto res = flow.forward(ag::constant(x.clone()), cond);
  CHECK(max_abs(res.z->value, x) == 0);
  CHECK(res.log_det->value[0] == 0);

  Tensor zeros = Tensor::zeros({5, 4});
  Tensor back = flow.inverse_values(zeros, cond);
  for (int64_t i = 0; i < back.numel(); ++i) CHECK(back[i] == 0);
}

TEST_CASE("data-dependent init standardises the first pass") {
  ModelConfig cfg = toy_config(4, 6, 8, 4);
  nn::Params ps(4);
  FlowPostnet flow(ps, cfg);
  CHECK_FALSE(flow.initialized());
  Rng rng(5);
  Tensor x = rand_tensor(rng, {64, 4}, -3.0, 5.0);
  FlowCondition cond = make_cond(cfg, 64, 6);
  flow.data_init(x, cond);
  CHECK(flow.initialized());

  ag::NoGradGuard ng;
  auto res = flow.forward(ag::constant(x.clone()), cond);
  for (int64_t c = 0; c < 4; ++c) {
    real mean = 0, sq = 0;
    for (int64_t t = 0; t < 64; ++t) {
      mean += res.z->value.at(t, c);
      sq += res.z->value.at(t, c) * res.z->value.at(t, c);
    }
    mean /= 64;
    real sd = std::sqrt(sq / 64 - mean * mean);
    CHECK(std::abs(mean) < 1e-9);
    CHECK(sd == doctest::Approx(1.0).epsilon(1e-6));
  }
  CHECK(res.log_det->value.all_finite());
}

TEST_CASE("graph forward and the value kernel agree") {
  ModelConfig cfg = toy_config(8, 6, 10, 4);
  nn::Params ps(7);
  FlowPostnet flow(ps, cfg);
  randomize_flow(ps, cfg, 8, 0.3);
  Rng rng(9);
  Tensor x = rand_tensor(rng, {6, 8}, -2.0, 2.0);
  FlowCondition cond = make_cond(cfg, 6, 10);

  ag::NoGradGuard ng;
  auto res = flow.forward(ag::constant(x.clone()), cond);

  FlowKernel<real> kernel(flow.weights());
  auto c = kernel.make_cond(cond.decoder_input->value,
                            cond.decoder_output->value, cond.speaker->value);
  auto [z, ld] = kernel.forward(FlowKernel<real>::to_mat(x), c);
  CHECK(max_abs(res.z->value, FlowKernel<real>::to_tensor(z)) < 1e-10);
  CHECK(res.log_det->value[0] == doctest::Approx(ld).epsilon(1e-10));

  real ld_steps = 0;
  auto cur = FlowKernel<real>::to_mat(x);
  for (int64_t i = 0; i < kernel.steps(); ++i) {
    real step_ld = 0;
    cur = kernel.forward_step(i, cur, c, &step_ld);
    ld_steps += step_ld;
  }
  CHECK(ld_steps == doctest::Approx(ld).epsilon(1e-12));
}

TEST_CASE("round trips hold at the contracted precision bounds") {
  ModelConfig cfg = toy_config(80, 16, 24, 8);
  nn::Params ps(11);
  FlowPostnet flow(ps, cfg);
  randomize_flow(ps, cfg, 12, 0.15);
  FlowWeights w = flow.weights();
  FlowKernel<double> k64(w);
  FlowKernel<float> k32(w);

  real worst64 = 0, worst32 = 0;
  for (uint64_t trial = 0; trial < 10; ++trial) {
    Rng rng(derive_seed(100, "trial", trial));
    Tensor x = rand_tensor(rng, {12, 80}, -8.0, 2.0);
    FlowCondition cond = make_cond(cfg, 12, derive_seed(100, "cond", trial));

    auto c64 = k64.make_cond(cond.decoder_input->value,
                             cond.decoder_output->value, cond.speaker->value);
    auto [z64, ld64] = k64.forward(FlowKernel<double>::to_mat(x), c64);
    Tensor back64 = FlowKernel<double>::to_tensor(k64.inverse(z64, c64));
    worst64 = std::max(worst64, max_abs(back64, x));

    auto c32 = k32.make_cond(cond.decoder_input->value,
                             cond.decoder_output->value, cond.speaker->value);
    auto [z32, ld32] = k32.forward(FlowKernel<float>::to_mat(x), c32);
    Tensor back32 = FlowKernel<float>::to_tensor(k32.inverse(z32, c32));
    worst32 = std::max(worst32, max_abs(back32, x));
    CHECK(static_cast<real>(ld32) ==
          doctest::Approx(static_cast<real>(ld64)).epsilon(1e-3));
  }
  CHECK(worst64 < 1e-8);
  CHECK(worst32 < 1e-4);
}

TEST_CASE("log-det matches a numerically assembled Jacobian") {
  ModelConfig cfg = toy_config(4, 6, 8, 3);
  const int64_t t_m = 2;
  for (uint64_t seed = 0; seed < 5; ++seed) {
    nn::Params ps(derive_seed(20, "params", seed));
    FlowPostnet flow(ps, cfg);
    randomize_flow(ps, cfg, derive_seed(20, "weights", seed), 0.4);
    FlowKernel<double> kernel(flow.weights());
    Rng rng(derive_seed(20, "data", seed));
    Tensor x = rand_tensor(rng, {t_m, 4}, -1.5, 1.5);
    FlowCondition cond = make_cond(cfg, t_m, derive_seed(20, "cond", seed));
    auto c = kernel.make_cond(cond.decoder_input->value,
                              cond.decoder_output->value,
                              cond.speaker->value);

    int64_t dim = t_m * 4;
    Eigen::MatrixXd jac(dim, dim);
    real h = 1e-5;
    for (int64_t j = 0; j < dim; ++j) {
      Tensor xp = x.clone();
      Tensor xm = x.clone();
      xp[j] += h;
      xm[j] -= h;
      auto [zp, lp] = kernel.forward(FlowKernel<double>::to_mat(xp), c);
      auto [zm, lm] = kernel.forward(FlowKernel<double>::to_mat(xm), c);
      for (int64_t i = 0; i < t_m; ++i)
        for (int64_t b = 0; b < 4; ++b)
          jac(i * 4 + b, j) = (zp(i, b) - zm(i, b)) / (2 * h);
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
    real num_ld = 0;
    for (int64_t i = 0; i < dim; ++i)
      num_ld += std::log(std::abs(lu.matrixLU()(i, i)));

    auto [z, analytic] = kernel.forward(FlowKernel<double>::to_mat(x), c);
    CHECK(std::abs(analytic - num_ld) / std::max<real>(1.0, std::abs(num_ld)) <
          1e-4);

    ag::NoGradGuard ng;
    auto res = flow.forward(ag::constant(x.clone()), cond);
    CHECK(res.log_det->value[0] == doctest::Approx(analytic).epsilon(1e-10));
  }
}

TEST_CASE("nll closed forms and finite-difference gradients") {
  ModelConfig cfg = toy_config(4, 6, 8, 3);
  nn::Params ps(31);
  FlowPostnet flow(ps, cfg);
  FlowCondition cond = make_cond(cfg, 5, 32);

  ag::NoGradGuard ng_scope;
  Tensor zeros = Tensor::zeros({5, 4});
  real per_el = flow.nll(ag::constant(zeros), cond)->scalar();
  CHECK(per_el == doctest::Approx(0.5 * std::log(2 * M_PI)).epsilon(1e-12));

  Rng rng(33);
  Tensor x = rand_tensor(rng, {5, 4});
  real sq = 0;
  for (int64_t i = 0; i < x.numel(); ++i) sq += x[i] * x[i];
  real expect_sum = 0.5 * sq + 0.5 * 20 * std::log(2 * M_PI);
  CHECK(flow.nll(ag::constant(x.clone()), cond, false)->scalar() ==
        doctest::Approx(expect_sum).epsilon(1e-12));
}

TEST_CASE("nll gradients match finite differences on a toy flow") {
  ModelConfig cfg = toy_config(4, 6, 8, 2);
  nn::Params ps(41);
  FlowPostnet flow(ps, cfg);
  randomize_flow(ps, cfg, 42, 0.3);
  Rng rng(43);
  ag::Var x = ag::leaf(rand_tensor(rng, {3, 4}), true);
  FlowCondition cond = make_cond(cfg, 3, 44);
  auto loss = [&]() { return flow.nll(x, cond, false); };
  CHECK(ag::gradcheck_max_rel_err(loss, x) < 1e-4);

  for (const char* pname :
       {"postnet.step0.in.weight", "postnet.step1.out.weight",
        "postnet.step0.log_s", "postnet.step1.w",
        "postnet.step0.cond_spk.weight"}) {
    ag::Var p = ps.get(pname);
    CHECK_MESSAGE(ag::gradcheck_max_rel_err(loss, p) < 1e-4, pname);
  }
}

TEST_CASE("frame permutation symmetry holds only with matching conditions") {
  ModelConfig cfg = toy_config(8, 6, 10, 3);
  nn::Params ps(51);
  FlowPostnet flow(ps, cfg);
  randomize_flow(ps, cfg, 52, 0.3);
  Rng rng(53);
  const int64_t t_m = 4;
  Tensor x = rand_tensor(rng, {t_m, 8});
  Tensor dec_in = rand_tensor(rng, {t_m, cfg.d_model});
  Tensor dec_out = rand_tensor(rng, {t_m, 8});
  Tensor spk = rand_tensor(rng, {1, cfg.d_model});
  std::vector<int64_t> perm = {2, 0, 3, 1};

  auto permute = [&](const Tensor& t) {
    Tensor out = t.clone();
    for (int64_t i = 0; i < t_m; ++i)
      for (int64_t j = 0; j < t.dim(1); ++j)
        out.at(i, j) = t.at(perm[i], j);
    return out;
  };

  FlowCondition cond;
  cond.decoder_input = ag::constant(dec_in.clone());
  cond.decoder_output = ag::constant(dec_out.clone());
  cond.speaker = ag::constant(spk.clone());
  FlowCondition cond_p;
  cond_p.decoder_input = ag::constant(permute(dec_in));
  cond_p.decoder_output = ag::constant(permute(dec_out));
  cond_p.speaker = ag::constant(spk.clone());

  ag::NoGradGuard ng;
  real base = flow.nll(ag::constant(x.clone()), cond, false)->scalar();
  real both = flow.nll(ag::constant(permute(x)), cond_p, false)->scalar();
  real x_only = flow.nll(ag::constant(permute(x)), cond, false)->scalar();
  CHECK(base == doctest::Approx(both).epsilon(1e-10));
  CHECK(std::abs(base - x_only) > 1e-6);
}

TEST_CASE("conditioning is non-degenerate for generic weights") {
  ModelConfig cfg = toy_config(8, 6, 10, 3);
  nn::Params ps(61);
  FlowPostnet flow(ps, cfg);
  randomize_flow(ps, cfg, 62, 0.3);
  Rng rng(63);
  Tensor x = rand_tensor(rng, {4, 8});
  FlowCondition cond = make_cond(cfg, 4, 64);
  FlowCondition cond2 = make_cond(cfg, 4, 65);
  cond2.decoder_input = cond.decoder_input;
  cond2.decoder_output = cond.decoder_output;

  ag::NoGradGuard ng;
  auto a = flow.forward(ag::constant(x.clone()), cond);
  auto b = flow.forward(ag::constant(x.clone()), cond2);
  CHECK(max_abs(a.z->value, b.z->value) > 1e-8);
}

TEST_CASE("sampling is seeded and temperature zero is the prior mean") {
  ModelConfig cfg = toy_config(8, 6, 10, 3);
  nn::Params ps(71);
  FlowPostnet flow(ps, cfg);
  randomize_flow(ps, cfg, 72, 0.3);
  FlowCondition cond = make_cond(cfg, 6, 73);

  Tensor zero_a = flow.sample(cond, 0.0, 1);
  Tensor zero_b = flow.sample(cond, 0.0, 2);
  CHECK(max_abs(zero_a, zero_b) == 0);
  Tensor mean = flow.inverse_values(Tensor::zeros({6, 8}), cond);
  CHECK(max_abs(zero_a, mean) == 0);

  Tensor s1 = flow.sample(cond, 1.0, 7);
  Tensor s2 = flow.sample(cond, 1.0, 7);
  CHECK(max_abs(s1, s2) == 0);
  Tensor s3 = flow.sample(cond, 1.0, 8);
  CHECK(max_abs(s1, s3) > 1e-8);
  CHECK(max_abs(s1, zero_a) > 1e-8);
}

TEST_CASE("non-finite inputs and mismatched conditions are rejected") {
  ModelConfig cfg = toy_config(4, 6, 8, 2);
  nn::Params ps(81);
  FlowPostnet flow(ps, cfg);
  FlowCondition cond = make_cond(cfg, 3, 82);

  Tensor bad = Tensor::zeros({3, 4});
  bad[5] = std::numeric_limits<real>::infinity();
  CHECK_THROWS_AS(flow.forward(ag::constant(bad), cond), NumericalError);

  Rng rng(83);
  Tensor ok = rand_tensor(rng, {4, 4});
  CHECK_THROWS_AS(flow.forward(ag::constant(ok), cond), DataError);
  CHECK_THROWS_AS(flow.sample(cond, -1.0, 0), DataError);
}

}  // namespace
}  // namespace lts
