// src/audio/wav.cc

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

#include "lts/audio/wav.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace lts {

namespace {

uint32_t read_u32(std::istream& in) {
  uint8_t b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

uint16_t read_u16(std::istream& in) {
  uint8_t b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

void write_u32(std::ostream& out, uint32_t v) {
  uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                  static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
  out.write(reinterpret_cast<char*>(b), 4);
}

void write_u16(std::ostream& out, uint16_t v) {
  uint8_t b[2] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8)};
  out.write(reinterpret_cast<char*>(b), 2);
}

}  // namespace

WavData read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require<DataError>(in.good(), "read_wav: cannot open " + path);
  char tag[5] = {0};
  in.read(tag, 4);
  require<DataError>(std::strcmp(tag, "RIFF") == 0, "read_wav: not RIFF: " + path);
  read_u32(in);  // total size, unused
  in.read(tag, 4);
  require<DataError>(std::strcmp(tag, "WAVE") == 0, "read_wav: not WAVE: " + path);

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  bool have_fmt = false;
  WavData out;
  while (in.read(tag, 4)) {
    uint32_t chunk_size = read_u32(in);
    if (std::strcmp(tag, "fmt ") == 0) {
      format = read_u16(in);
      channels = read_u16(in);
      sample_rate = read_u32(in);
      read_u32(in);  // byte rate
      read_u16(in);  // block align
      bits = read_u16(in);
      if (chunk_size > 16) in.seekg(chunk_size - 16, std::ios::cur);
      have_fmt = true;
    } else if (std::strcmp(tag, "data") == 0) {
      require<DataError>(have_fmt, "read_wav: data before fmt in " + path);
      require<DataError>(format == 1, "read_wav: only PCM supported: " + path);
      require<DataError>(channels == 1, "read_wav: only mono supported: " + path);
      require<DataError>(bits == 16, "read_wav: only 16-bit supported: " + path);
      size_t n = chunk_size / 2;
      std::vector<int16_t> raw(n);
      in.read(reinterpret_cast<char*>(raw.data()),
              static_cast<std::streamsize>(chunk_size));
      require<DataError>(in.good(), "read_wav: truncated data in " + path);
      out.samples.resize(n);
      for (size_t i = 0; i < n; ++i) out.samples[i] = raw[i] / real(32768);
      out.sample_rate = sample_rate;
      return out;
    } else {
      in.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
    }
  }
  throw DataError("read_wav: no data chunk in " + path);
}

void write_wav(const std::string& path, const std::vector<real>& samples,
               int64_t sample_rate) {
  require<DataError>(!samples.empty(), "write_wav: empty signal");
  std::filesystem::path target(path);
  if (target.has_parent_path())
    std::filesystem::create_directories(target.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require<DataError>(out.good(), "write_wav: cannot open " + path);
  uint32_t data_bytes = static_cast<uint32_t>(samples.size() * 2);
  out.write("RIFF", 4);
  write_u32(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_u32(out, 16);
  write_u16(out, 1);  // PCM
  write_u16(out, 1);  // mono
  write_u32(out, static_cast<uint32_t>(sample_rate));
  write_u32(out, static_cast<uint32_t>(sample_rate * 2));
  write_u16(out, 2);
  write_u16(out, 16);
  out.write("data", 4);
  write_u32(out, data_bytes);
  for (real s : samples) {
    real c = std::clamp(s, real(-1), real(1));
    auto v = static_cast<int16_t>(std::lround(c * 32767));
    write_u16(out, static_cast<uint16_t>(v));
  }
  require<DataError>(out.good(), "write_wav: write failed for " + path);
}

}  // namespace lts
