// src/data/window.cc

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

#include "lts/data/window.h"

#include <algorithm>

namespace lts {

AlignedPair slice_pair(const AlignedPair& pair, int64_t start, int64_t length) {
  int64_t t_v = pair.clip.t_v();
  require<DataError>(start >= 0 && length >= 1 && start + length <= t_v,
                     strprintf("window: slice [%lld, %lld) out of range for "
                               "%lld frames",
                               static_cast<long long>(start),
                               static_cast<long long>(start + length),
                               static_cast<long long>(t_v)));
  require<DataError>(pair.mel.t_m() == kMelPerVideoFrame * t_v,
                     "window: pair violates the 1:4 alignment invariant");

  AlignedPair out;
  out.id = pair.id;
  out.clip.frame_rate = pair.clip.frame_rate;
  out.clip.speaker_id = pair.clip.speaker_id;
  out.clip.frames = Tensor::zeros({length, 1, kFrameSize, kFrameSize});
  int64_t frame_px = kFrameSize * kFrameSize;
  std::copy_n(pair.clip.frames.data() + start * frame_px, length * frame_px,
              out.clip.frames.data());

  out.mel = pair.mel;
  int64_t mel_start = kMelPerVideoFrame * start;
  int64_t mel_len = kMelPerVideoFrame * length;
  out.mel.values = Tensor::zeros({mel_len, kMelBands});
  out.mel.values.mat() = pair.mel.values.mat().middleRows(mel_start, mel_len);

  auto slice = [&](const auto& v) {
    return std::decay_t<decltype(v)>(v.begin() + start,
                                     v.begin() + start + length);
  };
  if (!pair.targets.linguistic.empty())
    out.targets.linguistic = slice(pair.targets.linguistic);
  out.targets.pitch = slice(pair.targets.pitch);
  out.targets.energy = slice(pair.targets.energy);
  out.targets.all_unvoiced = pair.targets.all_unvoiced;
  return out;
}

AlignedPair pad_pair(const AlignedPair& pair, int64_t length) {
  int64_t t_v = pair.clip.t_v();
  if (t_v >= length) return pair;

  AlignedPair out;
  out.id = pair.id;
  out.clip.frame_rate = pair.clip.frame_rate;
  out.clip.speaker_id = pair.clip.speaker_id;
  out.clip.frames = Tensor::zeros({length, 1, kFrameSize, kFrameSize});
  int64_t frame_px = kFrameSize * kFrameSize;
  std::copy_n(pair.clip.frames.data(), t_v * frame_px, out.clip.frames.data());
  for (int64_t t = t_v; t < length; ++t)
    std::copy_n(pair.clip.frames.data() + (t_v - 1) * frame_px, frame_px,
                out.clip.frames.data() + t * frame_px);

  out.mel = pair.mel;
  out.mel.values = Tensor::zeros({kMelPerVideoFrame * length, kMelBands});
  out.mel.values.mat().topRows(pair.mel.t_m()) = pair.mel.values.mat();
  for (int64_t i = kMelPerVideoFrame * t_v; i < kMelPerVideoFrame * length; ++i)
    out.mel.values.mat().row(i) =
        pair.mel.values.mat().row(pair.mel.t_m() - kMelPerVideoFrame +
                                  i % kMelPerVideoFrame);

  auto pad = [&](const auto& v) {
    auto w = v;
    w.resize(length, v.back());
    return w;
  };
  if (!pair.targets.linguistic.empty())
    out.targets.linguistic = pad(pair.targets.linguistic);
  out.targets.pitch = pad(pair.targets.pitch);
  out.targets.energy = pad(pair.targets.energy);
  out.targets.all_unvoiced = pair.targets.all_unvoiced;
  return out;
}

AlignedPair sample_window(const AlignedPair& pair, int64_t length, Rng& rng,
                          bool pad_short) {
  int64_t t_v = pair.clip.t_v();
  if (t_v < length) {
    require<DataError>(pad_short,
                       strprintf("window: clip '%s' has %lld frames, shorter "
                                 "than the window length %lld",
                                 pair.id.c_str(), static_cast<long long>(t_v),
                                 static_cast<long long>(length)));
    return pad_pair(pair, length);
  }
  int64_t start = t_v == length ? 0 : rng.uniform_int(0, t_v - length);
  return slice_pair(pair, start, length);
}

}  // namespace lts
