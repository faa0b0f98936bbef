// src/flow/flow.cc

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

#include "lts/flow/flow.h"

#include <cmath>
#include <string>
#include <utility>

#include "lts/core/rng.h"
#include "lts/flow/kernel.h"

namespace lts {

namespace {

Tensor identity_matrix(int64_t n) {
  Tensor t = Tensor::zeros({n, n});
  for (int64_t i = 0; i < n; ++i) t.at(i, i) = 1;
  return t;
}

constexpr real kLog2Pi = 1.8378770664093454836;

}  // namespace

void FlowCondition::validate(int64_t t_m) const {
  require<DataError>(decoder_input && decoder_output && speaker,
                     "FlowCondition: missing component");
  require<DataError>(decoder_input->value.ndim() == 2 &&
                         decoder_input->value.dim(0) == t_m,
                     "FlowCondition: decoder_input length mismatch");
  require<DataError>(decoder_output->value.ndim() == 2 &&
                         decoder_output->value.dim(0) == t_m,
                     "FlowCondition: decoder_output length mismatch");
  require<NumericalError>(decoder_input->value.all_finite() &&
                              decoder_output->value.all_finite() &&
                              speaker->value.all_finite(),
                          "FlowCondition: non-finite conditioning");
}

FlowPostnet::FlowPostnet(nn::Params& ps, const ModelConfig& cfg)
    : bands_(cfg.mel_bands), hidden_(cfg.flow_hidden) {
  int64_t half = bands_ / 2;
  steps_.reserve(cfg.n_flow_steps);
  for (int64_t i = 0; i < cfg.n_flow_steps; ++i) {
    std::string base = "postnet.step" + std::to_string(i);
    Step st;
    st.log_s = ps.create(base + ".log_s", Tensor::zeros({bands_}));
    st.bias = ps.create(base + ".bias", Tensor::zeros({bands_}));
    st.w = ps.create(base + ".w", identity_matrix(bands_));
    st.in_lin = nn::Linear(ps, base + ".in", half, 2 * hidden_);
    st.cond_in = nn::Linear(ps, base + ".cond_in", cfg.d_model, 2 * hidden_,
                            false);
    st.cond_out = nn::Linear(ps, base + ".cond_out", bands_, 2 * hidden_,
                             false);
    st.cond_spk = nn::Linear(ps, base + ".cond_spk", cfg.d_model, 2 * hidden_,
                             false);
    st.out_lin = nn::Linear(ps, base + ".out", hidden_, bands_, true, true);
    st.swap = (i % 2) == 1;
    steps_.push_back(std::move(st));
  }
}

FlowPostnet::ForwardResult FlowPostnet::forward(
    const Var& x, const FlowCondition& cond) const {
  require<DataError>(x->value.ndim() == 2 && x->value.dim(1) == bands_,
                     "FlowPostnet: input must be (T_m, bands)");
  require<NumericalError>(x->value.all_finite(),
                          "FlowPostnet: non-finite input");
  int64_t t_m = x->value.dim(0);
  cond.validate(t_m);
  real rows = static_cast<real>(t_m);

  Var z = x;
  Var log_det = ag::constant(Tensor::zeros({1}));
  for (size_t i = 0; i < steps_.size(); ++i) {
    const Step& st = steps_[i];
    z = ag::mul_rowvec(ag::add_rowvec(z, st.bias), ag::exp_(st.log_s));
    log_det = ag::add(log_det, ag::mul_scalar(ag::sum_all(st.log_s), rows));
    z = ag::matmul(z, ag::transpose(st.w));
    log_det = ag::add(log_det, ag::mul_scalar(ag::logabsdet(st.w), rows));

    auto halves = ag::deinterleave_cols(z);
    Var src = st.swap ? halves.second : halves.first;
    Var tgt = st.swap ? halves.first : halves.second;
    Var pre = ag::add(st.in_lin.forward(src),
                      ag::add(st.cond_in.forward(cond.decoder_input),
                              st.cond_out.forward(cond.decoder_output)));
    Var spk_proj = ag::reshape(st.cond_spk.forward(cond.speaker),
                               {2 * hidden_});
    pre = ag::add_rowvec(pre, spk_proj);
    Var hidden = ag::glu_cols(pre);
    Var out = st.out_lin.forward(hidden);
    int64_t half = bands_ / 2;
    Var lsc = ag::mul_scalar(ag::tanh_(ag::slice_cols(out, 0, half)),
                             kFlowLogScaleCap);
    Var shift = ag::slice_cols(out, half, half);
    tgt = ag::add(ag::mul(tgt, ag::exp_(lsc)), shift);
    log_det = ag::add(log_det, ag::sum_all(lsc));
    z = st.swap ? ag::interleave_cols(tgt, src) : ag::interleave_cols(src, tgt);

    require<NumericalError>(
        z->value.all_finite(),
        strprintf("flow forward produced non-finite values at step %lld",
                  static_cast<long long>(i)));
  }
  return {z, log_det};
}

Var FlowPostnet::nll(const Var& x, const FlowCondition& cond,
                     bool per_element_mean) const {
  ForwardResult res = forward(x, cond);
  real d_total = static_cast<real>(x->value.numel());
  Var gauss = ag::add_scalar(
      ag::mul_scalar(ag::sum_all(ag::square(res.z)), 0.5),
      0.5 * d_total * kLog2Pi);
  Var nll_sum = ag::sub(gauss, res.log_det);
  return per_element_mean ? ag::mul_scalar(nll_sum, 1.0 / d_total) : nll_sum;
}

Tensor FlowPostnet::inverse_values(const Tensor& z,
                                   const FlowCondition& cond) const {
  require<DataError>(z.ndim() == 2 && z.dim(1) == bands_,
                     "FlowPostnet: z must be (T_m, bands)");
  cond.validate(z.dim(0));
  FlowKernel<real> kernel(weights());
  auto c = kernel.make_cond(cond.decoder_input->value,
                            cond.decoder_output->value,
                            cond.speaker->value);
  return FlowKernel<real>::to_tensor(
      kernel.inverse(FlowKernel<real>::to_mat(z), c));
}

Tensor FlowPostnet::sample(const FlowCondition& cond, real temperature,
                           uint64_t seed) const {
  require<DataError>(temperature >= 0,
                     "FlowPostnet: temperature must be non-negative");
  int64_t t_m = cond.decoder_output->value.dim(0);
  Tensor z = Tensor::zeros({t_m, bands_});
  if (temperature > 0) {
    Rng rng(derive_seed(seed, "flow_sample"));
    for (int64_t i = 0; i < z.numel(); ++i)
      z[i] = temperature * rng.normal();
  }
  return inverse_values(z, cond);
}

namespace {

// Floor on the per-channel deviation estimate. Channels that happen to be
// near-constant in the init windows would otherwise induce extreme scales
// on later data.
constexpr real kDataInitSdFloor = 1e-2;

}  // namespace

void FlowPostnet::data_init(const std::vector<Tensor>& xs,
                            const std::vector<FlowCondition>& conds) {
  require<DataError>(!xs.empty() && xs.size() == conds.size(),
                     "FlowPostnet: init needs matching windows and conditions");
  int64_t total = 0;
  for (size_t w = 0; w < xs.size(); ++w) {
    const Tensor& x = xs[w];
    require<DataError>(x.ndim() == 2 && x.dim(1) == bands_,
                       "FlowPostnet: init batch must be (T_m, bands)");
    conds[w].validate(x.dim(0));
    total += x.dim(0);
  }
  require<DataError>(total >= 2,
                     "FlowPostnet: init batch needs at least two frames");
  std::vector<FlowKernel<real>::Mat> cur;
  cur.reserve(xs.size());
  for (const Tensor& x : xs) cur.push_back(FlowKernel<real>::to_mat(x));
  const real n = static_cast<real>(total);
  for (size_t i = 0; i < steps_.size(); ++i) {
    Step& st = steps_[i];
    for (int64_t c = 0; c < bands_; ++c) {
      real sum = 0;
      for (const auto& m : cur) sum += m.col(c).sum();
      const real mean = sum / n;
      real sq = 0;
      for (const auto& m : cur) sq += (m.col(c).array() - mean).square().sum();
      const real sd = std::sqrt(sq / n);
      st.bias->value[c] = -mean;
      st.log_s->value[c] = -std::log(std::max(sd, kDataInitSdFloor));
    }
    FlowKernel<real> kernel(weights());
    for (size_t w = 0; w < xs.size(); ++w) {
      auto c = kernel.make_cond(conds[w].decoder_input->value,
                                conds[w].decoder_output->value,
                                conds[w].speaker->value);
      cur[w] = kernel.forward_step(static_cast<int64_t>(i), cur[w], c);
    }
  }
  initialized_ = true;
}

void FlowPostnet::data_init(const Tensor& x, const FlowCondition& cond) {
  data_init(std::vector<Tensor>{x}, std::vector<FlowCondition>{cond});
}

FlowWeights FlowPostnet::weights() const {
  FlowWeights w;
  w.bands = bands_;
  w.hidden = hidden_;
  for (const Step& st : steps_) {
    FlowStepWeights sw;
    sw.log_s = st.log_s->value;
    sw.bias = st.bias->value;
    sw.w = st.w->value;
    sw.in_w = st.in_lin.w->value;
    sw.in_b = st.in_lin.b->value;
    sw.cond_in_w = st.cond_in.w->value;
    sw.cond_out_w = st.cond_out.w->value;
    sw.cond_spk_w = st.cond_spk.w->value;
    sw.out_w = st.out_lin.w->value;
    sw.out_b = st.out_lin.b->value;
    sw.swap = st.swap;
    w.steps.push_back(std::move(sw));
  }
  return w;
}

}  // namespace lts
