// include/lts/core/archive.h

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

#ifndef LTS_CORE_ARCHIVE_H_
#define LTS_CORE_ARCHIVE_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "lts/core/tensor.h"

namespace lts {

// Single-file container for tensors, integer sequences, byte planes, and a
// JSON metadata block. Layout: an 8-byte magic, a little-endian u64 header
// length, the JSON header (blob directory plus metadata), then the blob bytes
// in sorted key order. Saving a loaded archive reproduces it byte for byte.
class Archive {
 public:
  static constexpr const char* kMagic = "LTSAR001";

  void put_tensor(const std::string& key, const Tensor& t);
  void put_i64(const std::string& key, const std::vector<int64_t>& v);
  void put_u8(const std::string& key, const std::vector<uint8_t>& v,
              std::vector<int64_t> shape);

  bool has(const std::string& key) const { return blobs_.count(key) > 0; }
  Tensor tensor(const std::string& key) const;
  std::vector<int64_t> i64(const std::string& key) const;
  const std::vector<uint8_t>& u8(const std::string& key) const;
  std::vector<int64_t> shape(const std::string& key) const;
  std::vector<std::string> keys() const;

  nlohmann::json& meta() { return meta_; }
  const nlohmann::json& meta() const { return meta_; }

  // Atomic: writes to a temporary file in the same directory, then renames.
  void save(const std::string& path) const;
  static Archive load(const std::string& path);

 private:
  struct Blob {
    std::string kind;  // "f64", "i64", "u8"
    std::vector<int64_t> shape;
    std::vector<uint8_t> raw;
  };
  const Blob& blob_of_kind(const std::string& key, const std::string& kind) const;

  std::map<std::string, Blob> blobs_;
  nlohmann::json meta_ = nlohmann::json::object();
};

}  // namespace lts

#endif  // LTS_CORE_ARCHIVE_H_
