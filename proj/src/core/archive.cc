// src/core/archive.cc

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

#include "lts/core/archive.h"

#include <cstring>
#include <filesystem>
#include <fstream>

namespace lts {

namespace {

int64_t shape_numel(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

}  // namespace

void Archive::put_tensor(const std::string& key, const Tensor& t) {
  require<DataError>(t.defined(), "Archive: undefined tensor for '" + key + "'");
  Blob b;
  b.kind = "f64";
  b.shape = t.shape();
  b.raw.resize(static_cast<size_t>(t.numel()) * sizeof(real));
  std::memcpy(b.raw.data(), t.data(), b.raw.size());
  blobs_[key] = std::move(b);
}

void Archive::put_i64(const std::string& key, const std::vector<int64_t>& v) {
  Blob b;
  b.kind = "i64";
  b.shape = {static_cast<int64_t>(v.size())};
  b.raw.resize(v.size() * sizeof(int64_t));
  std::memcpy(b.raw.data(), v.data(), b.raw.size());
  blobs_[key] = std::move(b);
}

void Archive::put_u8(const std::string& key, const std::vector<uint8_t>& v,
                     std::vector<int64_t> shape) {
  require<DataError>(shape_numel(shape) == static_cast<int64_t>(v.size()),
                     "Archive: shape does not match byte count for '" + key + "'");
  Blob b;
  b.kind = "u8";
  b.shape = std::move(shape);
  b.raw = v;
  blobs_[key] = std::move(b);
}

const Archive::Blob& Archive::blob_of_kind(const std::string& key,
                                           const std::string& kind) const {
  auto it = blobs_.find(key);
  require<DataError>(it != blobs_.end(), "Archive: missing blob '" + key + "'");
  require<DataError>(it->second.kind == kind,
                     "Archive: blob '" + key + "' has kind " + it->second.kind +
                         ", expected " + kind);
  return it->second;
}

Tensor Archive::tensor(const std::string& key) const {
  const Blob& b = blob_of_kind(key, "f64");
  Tensor t(b.shape);
  std::memcpy(t.data(), b.raw.data(), b.raw.size());
  return t;
}

std::vector<int64_t> Archive::i64(const std::string& key) const {
  const Blob& b = blob_of_kind(key, "i64");
  std::vector<int64_t> v(b.raw.size() / sizeof(int64_t));
  std::memcpy(v.data(), b.raw.data(), b.raw.size());
  return v;
}

const std::vector<uint8_t>& Archive::u8(const std::string& key) const {
  return blob_of_kind(key, "u8").raw;
}

std::vector<int64_t> Archive::shape(const std::string& key) const {
  auto it = blobs_.find(key);
  require<DataError>(it != blobs_.end(), "Archive: missing blob '" + key + "'");
  return it->second.shape;
}

std::vector<std::string> Archive::keys() const {
  std::vector<std::string> out;
  out.reserve(blobs_.size());
  for (const auto& [k, b] : blobs_) out.push_back(k);
  return out;
}

void Archive::save(const std::string& path) const {
  nlohmann::json dir = nlohmann::json::object();
  uint64_t offset = 0;
  for (const auto& [key, b] : blobs_) {
    dir[key] = {{"kind", b.kind},
                {"shape", b.shape},
                {"offset", offset},
                {"bytes", b.raw.size()}};
    offset += b.raw.size();
  }
  nlohmann::json header = {{"blobs", dir}, {"meta", meta_}, {"version", 1}};
  std::string hs = header.dump();

  std::filesystem::path target(path);
  if (target.has_parent_path())
    std::filesystem::create_directories(target.parent_path());
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require<DataError>(out.good(), "Archive: cannot open " + tmp.string());
    out.write(kMagic, 8);
    uint64_t hlen = hs.size();
    out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const auto& [key, b] : blobs_)
      out.write(reinterpret_cast<const char*>(b.raw.data()),
                static_cast<std::streamsize>(b.raw.size()));
    require<DataError>(out.good(), "Archive: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

Archive Archive::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require<DataError>(in.good(), "Archive: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  require<DataError>(in.good() && std::memcmp(magic, kMagic, 8) == 0,
                     "Archive: bad magic in " + path);
  uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  require<DataError>(in.good(), "Archive: truncated header in " + path);
  std::string hs(hlen, '\0');
  in.read(hs.data(), static_cast<std::streamsize>(hlen));
  require<DataError>(in.good(), "Archive: truncated header in " + path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(hs);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("Archive: invalid header in " + path + ": " + e.what());
  }
  require<DataError>(header.value("version", 0) == 1,
                     "Archive: unsupported version in " + path);
  Archive ar;
  ar.meta_ = header.at("meta");
  uint64_t data_start = 8 + sizeof(uint64_t) + hlen;
  for (const auto& [key, entry] : header.at("blobs").items()) {
    Blob b;
    b.kind = entry.at("kind").get<std::string>();
    b.shape = entry.at("shape").get<std::vector<int64_t>>();
    uint64_t nbytes = entry.at("bytes").get<uint64_t>();
    uint64_t off = entry.at("offset").get<uint64_t>();
    b.raw.resize(nbytes);
    in.seekg(static_cast<std::streamoff>(data_start + off));
    in.read(reinterpret_cast<char*>(b.raw.data()),
            static_cast<std::streamsize>(nbytes));
    require<DataError>(in.good(), "Archive: truncated blob '" + key + "' in " + path);
    ar.blobs_[key] = std::move(b);
  }
  return ar;
}

}  // namespace lts
