// src/data/video_io.cc

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

#include "lts/data/video_io.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace lts {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'L', 'V', 'F', '1'};

template <class T>
T read_le(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

template <class T>
void write_le(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

}  // namespace

RawVideo read_video_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require<DataError>(in.good(),
                     strprintf("video: cannot open '%s'", path.c_str()));
  char magic[4];
  in.read(magic, 4);
  require<DataError>(in.good() && std::memcmp(magic, kMagic, 4) == 0,
                     strprintf("video: '%s' is not a raw video container",
                               path.c_str()));
  RawVideo v;
  v.frames = read_le<uint32_t>(in);
  v.height = read_le<uint32_t>(in);
  v.width = read_le<uint32_t>(in);
  v.frame_rate = read_le<float>(in);
  require<DataError>(in.good() && v.frames > 0 && v.height > 0 && v.width > 0,
                     strprintf("video: '%s' has a corrupt header",
                               path.c_str()));
  v.pixels.resize(static_cast<size_t>(v.frames * v.height * v.width));
  in.read(reinterpret_cast<char*>(v.pixels.data()),
          static_cast<std::streamsize>(v.pixels.size()));
  require<DataError>(in.gcount() == static_cast<std::streamsize>(v.pixels.size()),
                     strprintf("video: '%s' is truncated", path.c_str()));
  return v;
}

void write_video_file(const std::string& path, const RawVideo& video) {
  require<DataError>(video.frames > 0 && video.height > 0 && video.width > 0 &&
                         video.pixels.size() ==
                             static_cast<size_t>(video.frames * video.height *
                                                 video.width),
                     "video: inconsistent raw video dimensions");
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require<DataError>(out.good(),
                       strprintf("video: cannot write '%s'", path.c_str()));
    out.write(kMagic, 4);
    write_le<uint32_t>(out, static_cast<uint32_t>(video.frames));
    write_le<uint32_t>(out, static_cast<uint32_t>(video.height));
    write_le<uint32_t>(out, static_cast<uint32_t>(video.width));
    write_le<float>(out, static_cast<float>(video.frame_rate));
    out.write(reinterpret_cast<const char*>(video.pixels.data()),
              static_cast<std::streamsize>(video.pixels.size()));
    require<DataError>(out.good(),
                       strprintf("video: write to '%s' failed", path.c_str()));
  }
  fs::rename(tmp, p);
}

std::vector<std::pair<real, real>> read_crop_centers(const std::string& path) {
  std::ifstream in(path);
  require<DataError>(in.good(),
                     strprintf("crop centres: cannot open '%s'", path.c_str()));
  std::vector<std::pair<real, real>> centers;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    real x, y;
    require<DataError>(static_cast<bool>(ss >> x >> y),
                       strprintf("crop centres: malformed line in '%s'",
                                 path.c_str()));
    centers.emplace_back(x, y);
  }
  return centers;
}

VideoClip to_clip(const RawVideo& video, int64_t speaker_id,
                  const std::vector<std::pair<real, real>>& centers) {
  require<DataError>(video.height >= kFrameSize && video.width >= kFrameSize,
                     strprintf("video: source %lldx%lld smaller than crop %lld",
                               static_cast<long long>(video.height),
                               static_cast<long long>(video.width),
                               static_cast<long long>(kFrameSize)));
  require<DataError>(centers.empty() ||
                         static_cast<int64_t>(centers.size()) == video.frames,
                     "video: crop centre count does not match frame count");

  VideoClip clip;
  clip.frames = Tensor::zeros({video.frames, 1, kFrameSize, kFrameSize});
  clip.frame_rate = video.frame_rate;
  clip.speaker_id = speaker_id;

  for (int64_t t = 0; t < video.frames; ++t) {
    real cx = centers.empty() ? real(video.width) / 2 : centers[t].first;
    real cy = centers.empty() ? real(video.height) / 2 : centers[t].second;
    auto x0 = static_cast<int64_t>(std::llround(cx)) - kFrameSize / 2;
    auto y0 = static_cast<int64_t>(std::llround(cy)) - kFrameSize / 2;
    x0 = std::clamp<int64_t>(x0, 0, video.width - kFrameSize);
    y0 = std::clamp<int64_t>(y0, 0, video.height - kFrameSize);
    const uint8_t* src = video.pixels.data() + t * video.height * video.width;
    real* dst = clip.frames.data() + t * kFrameSize * kFrameSize;
    for (int64_t r = 0; r < kFrameSize; ++r)
      for (int64_t c = 0; c < kFrameSize; ++c)
        dst[r * kFrameSize + c] =
            real(src[(y0 + r) * video.width + (x0 + c)]) / 255.0;
  }
  clip.validate();
  return clip;
}

}  // namespace lts
