// include/lts/data/video_io.h

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

#ifndef LTS_DATA_VIDEO_IO_H_
#define LTS_DATA_VIDEO_IO_H_

#include <cstdint>
#include <string>
#include <vector>

#include "lts/data/types.h"

namespace lts {

// Raw grayscale video container: little-endian "LVF1" magic, uint32 frame
// count / height / width, float32 frame rate, then frame-major uint8 pixels.
// Decoded video is expected in this form; codec handling is out of scope.
struct RawVideo {
  int64_t frames = 0;
  int64_t height = 0;
  int64_t width = 0;
  real frame_rate = kVideoFps;
  std::vector<uint8_t> pixels;  // frames*height*width, row-major per frame
};

RawVideo read_video_file(const std::string& path);
void write_video_file(const std::string& path, const RawVideo& video);

// Per-frame crop centres (x, y) in source pixel coordinates, e.g. produced
// by an external landmark detector. One row per frame.
std::vector<std::pair<real, real>> read_crop_centers(const std::string& path);

// Crops a 112x112 window around the given centre per frame (frame centre
// when centres are empty), clamped to the source bounds, and scales pixel
// values to [0,1]. Source must be at least 112x112.
VideoClip to_clip(const RawVideo& video, int64_t speaker_id,
                  const std::vector<std::pair<real, real>>& centers = {});

}  // namespace lts

#endif  // LTS_DATA_VIDEO_IO_H_
