// src/model/encoder.cc

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

#include "lts/model/encoder.h"

#include <algorithm>
#include <string>

namespace lts {

namespace {

int64_t gn_groups(int64_t channels) {
  for (int64_t g = std::min<int64_t>(32, channels); g > 1; --g)
    if (channels % g == 0) return g;
  return 1;
}

ConformerArgs encoder_args(const ModelConfig& cfg) {
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

BasicBlock2d::BasicBlock2d(nn::Params& ps, const std::string& name, int64_t in,
                           int64_t out, int64_t stride)
    : conv1(ps, name + ".conv1", in, out, 3, 3, stride, 1, false),
      conv2(ps, name + ".conv2", out, out, 3, 3, 1, 1, false),
      gn1(ps, name + ".gn1", out, gn_groups(out)),
      gn2(ps, name + ".gn2", out, gn_groups(out)),
      projected_skip(stride != 1 || in != out) {
  if (projected_skip) {
    down_conv = nn::Conv2d(ps, name + ".down", in, out, 1, 1, stride, 0, false);
    down_gn = nn::GroupNorm(ps, name + ".down_gn", out, gn_groups(out));
  }
}

Var BasicBlock2d::forward(const Var& x) const {
  Var h = ag::relu(gn1.forward(conv1.forward(x)));
  h = gn2.forward(conv2.forward(h));
  Var skip = projected_skip ? down_gn.forward(down_conv.forward(x)) : x;
  return ag::relu(ag::add(h, skip));
}

VideoEncoder::VideoEncoder(nn::Params& ps, const ModelConfig& cfg)
    : stem_(ps, "encoder.stem", 1, cfg.trunk_base, 5, 7, 7, 2, 3, false),
      stem_gn_(ps, "encoder.stem_gn", cfg.trunk_base, gn_groups(cfg.trunk_base)),
      proj_(ps, "encoder.proj", cfg.trunk_base * 8, cfg.d_model),
      spk_(ps, "encoder.speaker", cfg.n_speakers, cfg.d_model),
      stack_(ps, "encoder.conformer", cfg.enc_layers, encoder_args(cfg)),
      n_speakers_(cfg.n_speakers) {
  int64_t widths[4] = {cfg.trunk_base, cfg.trunk_base * 2, cfg.trunk_base * 4,
                       cfg.trunk_base * 8};
  int64_t in = cfg.trunk_base;
  for (int64_t stage = 0; stage < 4; ++stage) {
    int64_t stride = stage == 0 ? 1 : 2;
    std::string base = "encoder.stage" + std::to_string(stage);
    blocks_.emplace_back(ps, base + ".block0", in, widths[stage], stride);
    blocks_.emplace_back(ps, base + ".block1", widths[stage], widths[stage], 1);
    in = widths[stage];
  }
}

Var VideoEncoder::frame_features(const Var& frames) const {
  require<DataError>(frames->value.ndim() == 4 && frames->value.dim(1) == 1 &&
                         frames->value.dim(2) == kFrameSize &&
                         frames->value.dim(3) == kFrameSize,
                     "VideoEncoder: expected (T, 1, 112, 112) frames");
  Var h = ag::transpose_01(frames);       // (1, T, 112, 112)
  h = stem_.forward(h);                   // (B, T, 56, 56)
  h = ag::transpose_01(h);                // (T, B, 56, 56)
  h = ag::relu(stem_gn_.forward(h));
  h = ag::maxpool2d(h, 3, 2, 1);          // (T, B, 28, 28)
  for (const BasicBlock2d& block : blocks_) h = block.forward(h);
  h = ag::global_avgpool2d(h);            // (T, 8B)
  return proj_.forward(h);                // (T, d_model)
}

Var VideoEncoder::speaker_embedding(int64_t speaker_id) const {
  require<DataError>(
      speaker_id >= 0 && speaker_id < n_speakers_,
      strprintf("VideoEncoder: speaker id %lld outside closed set of %lld",
                static_cast<long long>(speaker_id),
                static_cast<long long>(n_speakers_)));
  return spk_.forward({speaker_id});
}

Var VideoEncoder::forward(const VideoClip& clip, int64_t speaker_id,
                          uint64_t seed, bool training) const {
  clip.validate();
  Var h = frame_features(ag::constant(clip.frames));
  Var e_spk = ag::reshape(speaker_embedding(speaker_id),
                          {h->value.dim(1)});
  h = ag::add_rowvec(h, e_spk);
  return stack_.forward(h, derive_seed(seed, "encoder"), training);
}

}  // namespace lts
