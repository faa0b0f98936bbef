// src/units/kmeans.cc

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

#include "lts/units/kmeans.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <utility>

#include "lts/core/archive.h"
#include "lts/core/rng.h"

namespace lts {

namespace {

// Squared Euclidean distances from every row of x to every centroid row.
EMat pairwise_sq_dist(ConstMatMap x, ConstMatMap c) {
  EVec xn = x.rowwise().squaredNorm();
  EVec cn = c.rowwise().squaredNorm();
  EMat d = (-2.0 * (x * c.transpose())).eval();
  d.colwise() += xn;
  d.rowwise() += cn.transpose();
  return d.cwiseMax(0.0);
}

int64_t nearest_row(const EMat& dist, int64_t row) {
  int64_t best = 0;
  real best_d = dist(row, 0);
  for (int64_t j = 1; j < dist.cols(); ++j)
    if (dist(row, j) < best_d) {
      best_d = dist(row, j);
      best = j;
    }
  return best;
}

}  // namespace

Tensor length_match(const Tensor& features, int64_t t_v) {
  require<DataError>(features.defined() && features.ndim() == 2 &&
                         features.dim(0) >= 1,
                     "length_match: features must be a non-empty (T, D) matrix");
  require<DataError>(t_v >= 1, "length_match: target length must be >= 1");
  int64_t t_f = features.dim(0);
  int64_t d = features.dim(1);
  Tensor out = Tensor::zeros({t_v, d});
  for (int64_t i = 0; i < t_v; ++i) {
    auto src = static_cast<int64_t>(
        std::llround(real(i) * real(t_f) / real(t_v)));
    src = std::clamp<int64_t>(src, 0, t_f - 1);
    out.mat().row(i) = features.mat().row(src);
  }
  return out;
}

std::string Codebook::hash() const {
  require(centroids.defined(), "codebook: empty");
  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](uint64_t v) {
    h ^= v;
    h *= 0x100000001b3ULL;
  };
  mix(static_cast<uint64_t>(k()));
  mix(static_cast<uint64_t>(dim()));
  mix(seed);
  mix(static_cast<uint64_t>(layer_index));
  for (char c : backend_id) mix(static_cast<uint64_t>(c));
  for (int64_t i = 0; i < centroids.numel(); ++i) {
    uint64_t bits;
    real v = centroids[i];
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    mix(bits);
  }
  return strprintf("%016llx", static_cast<unsigned long long>(h));
}

void Codebook::save(const std::string& path) const {
  Archive a;
  a.put_tensor("centroids", centroids);
  a.meta()["kind"] = "codebook";
  a.meta()["k"] = k();
  a.meta()["dim"] = dim();
  a.meta()["backend_id"] = backend_id;
  a.meta()["layer_index"] = layer_index;
  a.meta()["seed"] = seed;
  a.save(path);
}

Codebook Codebook::load(const std::string& path) {
  Archive a = Archive::load(path);
  require<DataError>(a.meta().value("kind", "") == "codebook",
                     strprintf("codebook: '%s' is not a codebook file",
                               path.c_str()));
  Codebook cb;
  cb.centroids = a.tensor("centroids");
  cb.backend_id = a.meta().value("backend_id", "");
  cb.layer_index = a.meta().value("layer_index", int64_t(0));
  cb.seed = a.meta().value("seed", uint64_t(0));
  return cb;
}

Codebook fit_codebook(const std::vector<Tensor>& features, int64_t k,
                      uint64_t seed, const KMeansOptions& options,
                      std::vector<real>* inertia_trace) {
  require<DataError>(k >= 1, "kmeans: k must be >= 1");
  int64_t total = 0;
  int64_t d = -1;
  for (const Tensor& f : features) {
    require<DataError>(f.defined() && f.ndim() == 2,
                       "kmeans: each feature block must be (T, D)");
    require<DataError>(d < 0 || f.dim(1) == d,
                       "kmeans: inconsistent feature widths");
    d = f.dim(1);
    total += f.dim(0);
  }
  require<DataError>(total >= k,
                     strprintf("kmeans: %lld frames but k=%lld",
                               static_cast<long long>(total),
                               static_cast<long long>(k)));

  Tensor points = Tensor::zeros({total, d});
  int64_t row = 0;
  for (const Tensor& f : features) {
    points.mat().middleRows(row, f.dim(0)) = f.mat();
    row += f.dim(0);
  }
  require<NumericalError>(points.all_finite(), "kmeans: non-finite features");

  std::set<std::vector<real>> distinct;
  for (int64_t i = 0; i < total && static_cast<int64_t>(distinct.size()) < k;
       ++i)
    distinct.insert(std::vector<real>(points.data() + i * d,
                                      points.data() + (i + 1) * d));
  require<DataError>(static_cast<int64_t>(distinct.size()) >= k,
                     strprintf("kmeans: fewer than k=%lld distinct points",
                               static_cast<long long>(k)));

  // k-means++ seeding.
  Rng rng(derive_seed(seed, "kmeans"));
  Tensor centroids = Tensor::zeros({k, d});
  auto first = rng.uniform_int(0, total - 1);
  centroids.mat().row(0) = points.mat().row(first);
  EVec min_d2 =
      (points.mat().rowwise() - centroids.mat().row(0)).rowwise().squaredNorm();
  for (int64_t c = 1; c < k; ++c) {
    real mass = min_d2.sum();
    int64_t pick = 0;
    if (mass > 0) {
      real target = rng.uniform(0.0, mass);
      real acc = 0;
      for (int64_t i = 0; i < total; ++i) {
        acc += min_d2[i];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.uniform_int(0, total - 1);
    }
    centroids.mat().row(c) = points.mat().row(pick);
    min_d2 = min_d2.cwiseMin(
        (points.mat().rowwise() - centroids.mat().row(c))
            .rowwise()
            .squaredNorm());
  }

  std::vector<int64_t> assign(total, 0);
  real prev_inertia = -1;
  for (int64_t it = 0; it < options.max_iterations; ++it) {
    EMat dist = pairwise_sq_dist(std::as_const(points).mat(),
                                 std::as_const(centroids).mat());
    real inertia = 0;
    for (int64_t i = 0; i < total; ++i) {
      assign[i] = nearest_row(dist, i);
      inertia += dist(i, assign[i]);
    }
    if (inertia_trace) inertia_trace->push_back(inertia);

    EMat sums = EMat::Zero(k, d);
    std::vector<int64_t> counts(k, 0);
    for (int64_t i = 0; i < total; ++i) {
      sums.row(assign[i]) += points.mat().row(i);
      ++counts[assign[i]];
    }
    for (int64_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centroids.mat().row(c) = sums.row(c) / real(counts[c]);
      } else {
        // Re-seed an empty cluster at the point farthest from its centroid.
        int64_t far_i = 0;
        real far_d = -1;
        for (int64_t i = 0; i < total; ++i)
          if (dist(i, assign[i]) > far_d) {
            far_d = dist(i, assign[i]);
            far_i = i;
          }
        centroids.mat().row(c) = points.mat().row(far_i);
      }
    }

    if (prev_inertia >= 0) {
      real denom = std::max(prev_inertia, real(1e-12));
      if (std::abs(prev_inertia - inertia) / denom <
          options.relative_tolerance)
        break;
    }
    prev_inertia = inertia;
  }

  Codebook cb;
  cb.centroids = centroids;
  cb.seed = seed;
  require<NumericalError>(cb.centroids.all_finite(),
                          "kmeans: non-finite centroids");
  return cb;
}

std::vector<int64_t> quantise(const Tensor& features, const Codebook& codebook) {
  require<DataError>(features.defined() && features.ndim() == 2,
                     "quantise: features must be (T, D)");
  require<DataError>(features.dim(1) == codebook.dim(),
                     strprintf("quantise: feature width %lld does not match "
                               "codebook width %lld",
                               static_cast<long long>(features.dim(1)),
                               static_cast<long long>(codebook.dim())));
  EMat dist = pairwise_sq_dist(std::as_const(features).mat(),
                               std::as_const(codebook.centroids).mat());
  std::vector<int64_t> out(features.dim(0));
  for (int64_t i = 0; i < features.dim(0); ++i) out[i] = nearest_row(dist, i);
  return out;
}

}  // namespace lts
