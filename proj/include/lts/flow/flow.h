// include/lts/flow/flow.h

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

#ifndef LTS_FLOW_FLOW_H_
#define LTS_FLOW_FLOW_H_

#include <cstdint>
#include <vector>

#include "lts/core/nn.h"
#include "lts/model/config.h"

namespace lts {

using ag::Var;

// Cap on the coupling log-scale (|log s| <= cap via scaled tanh). Bounding
// the per-step amplification keeps single-precision round trips tight no
// matter how far training drives the coupling nets.
inline constexpr real kFlowLogScaleCap = 0.5;

// Conditioning for the post-net: the conformer decoder's input and output
// plus the speaker embedding, all time-aligned at mel rate.
struct FlowCondition {
  Var decoder_input;   // (T_m, d_model)
  Var decoder_output;  // (T_m, mel_bands)
  Var speaker;         // (1, d_model)

  void validate(int64_t t_m) const;
};

// Value snapshot of one flow step, shared storage with the live parameters.
struct FlowStepWeights {
  Tensor log_s, bias;  // channel-affine normalisation, both (C)
  Tensor w;            // invertible channel mixing, (C, C)
  Tensor in_w, in_b;   // coupling input projection, (C/2, 2H) and (2H)
  Tensor cond_in_w;    // (d_model, 2H)
  Tensor cond_out_w;   // (mel_bands, 2H)
  Tensor cond_spk_w;   // (d_model, 2H)
  Tensor out_w, out_b; // coupling output head, (H, C) and (C)
  bool swap = false;   // which interleaved half is rewritten
};

struct FlowWeights {
  std::vector<FlowStepWeights> steps;
  int64_t bands = 0;
  int64_t hidden = 0;
};

// Conditional normalizing flow over mel frames. Each of the N steps applies
// channel-affine normalisation, an invertible 1x1 channel mixing, and a
// gated affine coupling over the interleaved channel halves; every map is
// frame-local, so any sequence length flows through the same weights.
class FlowPostnet {
 public:
  FlowPostnet() = default;
  FlowPostnet(nn::Params& ps, const ModelConfig& cfg);

  struct ForwardResult {
    Var z;        // (T_m, mel_bands)
    Var log_det;  // scalar, exact accumulated log |det J|
  };

  // Training-path transform into the prior; exact log-determinant attached.
  ForwardResult forward(const Var& x, const FlowCondition& cond) const;

  // Negative log-likelihood under the isotropic Gaussian prior. The default
  // reduction is a per-element mean; pass false for the raw sum.
  Var nll(const Var& x, const FlowCondition& cond,
          bool per_element_mean = true) const;

  // Exact inverse in double precision, value-only.
  Tensor inverse_values(const Tensor& z, const FlowCondition& cond) const;

  // Draws z ~ N(0, temperature^2 I) and inverts; deterministic given seed.
  Tensor sample(const FlowCondition& cond, real temperature,
                uint64_t seed) const;

  // Sets each step's channel-affine parameters from the running batch
  // statistics, step by step, so the first pass is standardised.
  void data_init(const std::vector<Tensor>& xs,
                 const std::vector<FlowCondition>& conds);
  void data_init(const Tensor& x, const FlowCondition& cond);
  bool initialized() const { return initialized_; }
  void set_initialized(bool v) { initialized_ = v; }

  FlowWeights weights() const;
  int64_t steps() const { return static_cast<int64_t>(steps_.size()); }
  int64_t bands() const { return bands_; }

 private:
  struct Step {
    Var log_s, bias;  // (C)
    Var w;            // (C, C)
    nn::Linear in_lin;
    nn::Linear cond_in, cond_out, cond_spk;
    nn::Linear out_lin;
    bool swap = false;
  };

  std::vector<Step> steps_;
  int64_t bands_ = 0;
  int64_t hidden_ = 0;
  bool initialized_ = false;
};

}  // namespace lts

#endif  // LTS_FLOW_FLOW_H_
