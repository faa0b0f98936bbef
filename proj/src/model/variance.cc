// src/model/variance.cc

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

#include "lts/model/variance.h"

#include <utility>

namespace lts {

namespace {

Var values_to_column(const std::vector<real>& values, const char* what) {
  require<DataError>(!values.empty(), std::string(what) + ": empty sequence");
  Tensor t({static_cast<int64_t>(values.size()), 1});
  for (size_t i = 0; i < values.size(); ++i) t[i] = values[i];
  return ag::constant(std::move(t));
}

}  // namespace

std::vector<int64_t> VariancePrediction::unit_argmax() const {
  const Tensor& logits = linguistic_logits->value;
  std::vector<int64_t> ids(logits.dim(0));
  for (int64_t t = 0; t < logits.dim(0); ++t) {
    int64_t best = 0;
    for (int64_t k = 1; k < logits.dim(1); ++k)
      if (logits.at(t, k) > logits.at(t, best)) best = k;
    ids[t] = best;
  }
  return ids;
}

std::vector<real> VariancePrediction::pitch_values() const {
  const Tensor& v = pitch_hat->value;
  return std::vector<real>(v.data(), v.data() + v.numel());
}

std::vector<real> VariancePrediction::energy_values() const {
  const Tensor& v = energy_hat->value;
  return std::vector<real>(v.data(), v.data() + v.numel());
}

ConvLnLayer::ConvLnLayer(nn::Params& ps, const std::string& name, int64_t in,
                         int64_t out, int64_t k)
    : conv(ps, name + ".conv", in, out, k), ln(ps, name + ".ln", out) {}

Var ConvLnLayer::forward(const Var& x, real dropout, uint64_t seed,
                         bool training) const {
  Var h = ln.forward(ag::relu(conv.forward(x)));
  return ag::dropout(h, dropout, seed, training);
}

VariancePredictor::VariancePredictor(nn::Params& ps, const ModelConfig& cfg)
    : ling_out(ps, "variance.ling.out", cfg.d_model, cfg.k_units, true, true),
      pitch_out(ps, "variance.pitch.out", cfg.d_model, 1, true, true),
      energy_out(ps, "variance.energy.out", cfg.d_model, 1, true, true),
      dropout(cfg.dropout) {
  for (int i = 0; i < 4; ++i)
    ling_layers.emplace_back(ps, "variance.ling.layer" + std::to_string(i),
                             cfg.d_model, cfg.d_model, 3);
  for (int i = 0; i < 2; ++i) {
    pitch_layers.emplace_back(ps, "variance.pitch.layer" + std::to_string(i),
                              cfg.d_model, cfg.d_model, 3);
    energy_layers.emplace_back(ps, "variance.energy.layer" + std::to_string(i),
                               cfg.d_model, cfg.d_model, 3);
  }
}

VariancePrediction VariancePredictor::forward(const Var& h_v, uint64_t seed,
                                              bool training) const {
  VariancePrediction out;
  Var h = h_v;
  for (size_t i = 0; i < ling_layers.size(); ++i)
    h = ling_layers[i].forward(h, dropout, derive_seed(seed, "ling", i),
                               training);
  out.linguistic_logits = ling_out.forward(h);

  h = h_v;
  for (size_t i = 0; i < pitch_layers.size(); ++i)
    h = pitch_layers[i].forward(h, dropout, derive_seed(seed, "pitch", i),
                                training);
  out.pitch_hat = pitch_out.forward(h);

  h = h_v;
  for (size_t i = 0; i < energy_layers.size(); ++i)
    h = energy_layers[i].forward(h, dropout, derive_seed(seed, "energy", i),
                                 training);
  out.energy_hat = energy_out.forward(h);
  return out;
}

VarianceConditioner::VarianceConditioner(nn::Params& ps, const ModelConfig& cfg)
    : unit_emb(ps, "condition.units", cfg.k_units, cfg.d_model),
      pitch_conv(ps, "condition.pitch", 1, cfg.d_model, 3),
      energy_conv(ps, "condition.energy", 1, cfg.d_model, 3) {}

Var VarianceConditioner::forward(const Var& h_v,
                                 const std::vector<int64_t>& units,
                                 const Var& pitch, const Var& energy) const {
  int64_t t_v = h_v->value.dim(0);
  require<DataError>(static_cast<int64_t>(units.size()) == t_v &&
                         pitch->value.dim(0) == t_v &&
                         energy->value.dim(0) == t_v,
                     "VarianceConditioner: variance length mismatch");
  Var h = ag::add(h_v, unit_emb.forward(units));
  h = ag::add(h, pitch_conv.forward(pitch));
  return ag::add(h, energy_conv.forward(energy));
}

Var pitch_to_var(const std::vector<real>& values) {
  return values_to_column(values, "pitch_to_var");
}

Var energy_to_var(const std::vector<real>& values) {
  return values_to_column(values, "energy_to_var");
}

}  // namespace lts
