// include/lts/units/kmeans.h

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

#ifndef LTS_UNITS_KMEANS_H_
#define LTS_UNITS_KMEANS_H_

#include <string>
#include <vector>

#include "lts/core/tensor.h"

namespace lts {

// Nearest-neighbor time resampling: output row i is input row
// round(i * t_f / t_v), clamped to the valid range.
Tensor length_match(const Tensor& features, int64_t t_v);

struct Codebook {
  Tensor centroids;  // (K, D)
  std::string backend_id;
  int64_t layer_index = 0;
  uint64_t seed = 0;

  int64_t k() const { return centroids.defined() ? centroids.dim(0) : 0; }
  int64_t dim() const { return centroids.defined() ? centroids.dim(1) : 0; }

  // Stable content key used to tag unit sequences derived from this
  // codebook.
  std::string hash() const;

  void save(const std::string& path) const;
  static Codebook load(const std::string& path);
};

struct KMeansOptions {
  int64_t max_iterations = 100;
  real relative_tolerance = 1e-4;
};

// Lloyd's algorithm with k-means++ seeding; deterministic given the seed.
// Ties in assignment break toward the lowest centroid index. Requires at
// least k distinct points. When inertia_trace is given it receives the
// within-cluster sum of squares after each assignment step.
Codebook fit_codebook(const std::vector<Tensor>& features, int64_t k,
                      uint64_t seed, const KMeansOptions& options = {},
                      std::vector<real>* inertia_trace = nullptr);

// Index of the nearest centroid per row, lowest index on ties.
std::vector<int64_t> quantise(const Tensor& features, const Codebook& codebook);

}  // namespace lts

#endif  // LTS_UNITS_KMEANS_H_
