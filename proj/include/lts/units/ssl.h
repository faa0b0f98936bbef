// include/lts/units/ssl.h

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

#ifndef LTS_UNITS_SSL_H_
#define LTS_UNITS_SSL_H_

#include <memory>
#include <string>
#include <vector>

#include "lts/core/tensor.h"
#include "lts/data/types.h"

namespace lts {

// Continuous features from a self-supervised speech encoder layer.
struct SSLFeatures {
  Tensor features;  // (T_f, D)
  int64_t layer_index = 0;
  std::string backend_id;
};

// Pluggable feature extractor. The synthetic backend keeps the pipeline
// self-contained; the precomputed backend loads features exported by an
// external model.
class SslBackend {
 public:
  virtual ~SslBackend() = default;
  virtual std::string id() const = 0;
  virtual int64_t dim() const = 0;
  virtual SSLFeatures extract(const std::vector<real>& waveform,
                              int64_t sample_rate, int64_t layer_index) = 0;
};

// Deterministic stand-in encoder: log-mel filterbank energies at a 20 ms
// stride pushed through `layer_index` rounds of a seeded random projection
// with a tanh nonlinearity. Distinct layers give distinct feature spaces.
class SyntheticSslBackend : public SslBackend {
 public:
  static constexpr int64_t kDim = 64;
  static constexpr int64_t kStrideSamples = 320;  // 20 ms at 16 kHz

  std::string id() const override { return "synthetic"; }
  int64_t dim() const override { return kDim; }
  SSLFeatures extract(const std::vector<real>& waveform, int64_t sample_rate,
                      int64_t layer_index) override;
};

// Loads per-clip feature archives exported by an external encoder. Each file
// is named <clip_id>.ssl and holds a "features" blob plus layer metadata.
class PrecomputedSslBackend : public SslBackend {
 public:
  explicit PrecomputedSslBackend(std::string dir) : dir_(std::move(dir)) {}

  std::string id() const override { return "precomputed"; }
  int64_t dim() const override;
  SSLFeatures extract(const std::vector<real>& waveform, int64_t sample_rate,
                      int64_t layer_index) override;

  // The waveform-based interface cannot name the clip; callers set the id of
  // the clip whose features the next extract() call should load.
  void set_clip_id(const std::string& id) { clip_id_ = id; }

 private:
  std::string dir_;
  std::string clip_id_;
};

// Factory keyed by backend name ("synthetic" or "precomputed:<dir>").
// Unknown names raise a dependency error naming the backend.
std::unique_ptr<SslBackend> make_ssl_backend(const std::string& name);

}  // namespace lts

#endif  // LTS_UNITS_SSL_H_
