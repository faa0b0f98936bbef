// src/model/model.cc

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

#include "lts/model/model.h"

namespace lts {

namespace {

ConformerArgs decoder_args(const ModelConfig& cfg) {
  ConformerArgs args;
  args.d_model = cfg.d_model;
  args.n_heads = cfg.n_heads;
  args.conv_kernel = cfg.conv_kernel;
  args.ff_expansion = cfg.ff_expansion;
  args.relpos_max_dist = cfg.relpos_max_dist;
  args.dropout = cfg.dropout;
  return args;
}

}  // namespace

MelDecoder::MelDecoder(nn::Params& ps, const ModelConfig& cfg)
    : stack(ps, "decoder.conformer", cfg.dec_layers, decoder_args(cfg)),
      out(ps, "decoder.out", cfg.d_model, cfg.mel_bands) {}

MelDecoder::Result MelDecoder::forward(const Var& conditioned, uint64_t seed,
                                       bool training) const {
  Result res;
  res.decoder_input = ag::upsample_rows(conditioned, kMelPerVideoFrame);
  Var h = stack.forward(res.decoder_input, derive_seed(seed, "decoder"),
                        training);
  res.coarse_mel = out.forward(h);
  return res;
}

LipToSpeechModel::LipToSpeechModel(const ModelConfig& cfg, uint64_t seed)
    : cfg_(cfg), params_(seed) {
  cfg_.validate();
  encoder_ = VideoEncoder(params_, cfg_);
  variances_ = VariancePredictor(params_, cfg_);
  conditioner_ = VarianceConditioner(params_, cfg_);
  decoder_ = MelDecoder(params_, cfg_);
}

Var LipToSpeechModel::encode(const VideoClip& clip, int64_t speaker_id,
                             uint64_t seed, bool training) const {
  return encoder_.forward(clip, speaker_id, seed, training);
}

Var LipToSpeechModel::speaker_embedding(int64_t speaker_id) const {
  return encoder_.speaker_embedding(speaker_id);
}

LipToSpeechModel::ForwardOutput LipToSpeechModel::decode_with(
    const Var& h_v, const VariancePrediction& pred,
    const std::vector<int64_t>& units, const Var& pitch, const Var& energy,
    int64_t speaker_id, uint64_t seed, bool training) {
  ForwardOutput out;
  out.h_v = h_v;
  out.pred = pred;
  Var conditioned = conditioner_.forward(h_v, units, pitch, energy);
  if (cfg_.decoder_speaker) {
    Var e_spk = ag::reshape(speaker_embedding(speaker_id), {cfg_.d_model});
    conditioned = ag::add_rowvec(conditioned, e_spk);
  }
  MelDecoder::Result dec =
      decoder_.forward(conditioned, derive_seed(seed, "decode"), training);
  out.decoder_input = dec.decoder_input;
  out.coarse_mel = dec.coarse_mel;
  return out;
}

LipToSpeechModel::ForwardOutput LipToSpeechModel::forward_teacher(
    const VideoClip& clip, const VarianceTargets& targets, int64_t speaker_id,
    uint64_t seed, bool training) {
  targets.validate(clip.t_v(), cfg_.k_units);
  Var h_v = encode(clip, speaker_id, derive_seed(seed, "encode"), training);
  VariancePrediction pred =
      variances_.forward(h_v, derive_seed(seed, "variance"), training);
  return decode_with(h_v, pred, targets.linguistic,
                     pitch_to_var(targets.pitch),
                     energy_to_var(targets.energy), speaker_id, seed,
                     training);
}

LipToSpeechModel::ForwardOutput LipToSpeechModel::forward_predicted(
    const VideoClip& clip, int64_t speaker_id, uint64_t seed, bool training) {
  Var h_v = encode(clip, speaker_id, derive_seed(seed, "encode"), training);
  VariancePrediction pred =
      variances_.forward(h_v, derive_seed(seed, "variance"), training);
  return decode_with(h_v, pred, pred.unit_argmax(), pred.pitch_hat,
                     pred.energy_hat, speaker_id, seed, training);
}

}  // namespace lts
