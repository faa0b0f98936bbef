// include/lts/core/tensor.h

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

#ifndef LTS_CORE_TENSOR_H_
#define LTS_CORE_TENSOR_H_

#include <Eigen/Core>
#include <cmath>
#include <initializer_list>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "lts/common.h"

namespace lts {

// Tensor storage is aligned to Eigen's packet boundary so that the memory
// layout, and therefore the exact floating-point result of vectorised
// kernels, does not depend on allocation history.
using AlignedVec = std::vector<real, Eigen::aligned_allocator<real>>;

using EMat = Eigen::Matrix<real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using EVec = Eigen::Matrix<real, Eigen::Dynamic, 1>;
using MatMap = Eigen::Map<EMat>;
using ConstMatMap = Eigen::Map<const EMat>;
using VecMap = Eigen::Map<EVec>;
using ConstVecMap = Eigen::Map<const EVec>;

// Dense row-major n-d array of `real`. Copies are shallow (shared storage);
// use clone() for a deep copy. Shapes are small (ndim <= 4 in practice).
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int64_t> shape)
      : shape_(std::move(shape)),
        data_(std::make_shared<AlignedVec>(count(shape_), real(0))) {}

  Tensor(std::vector<int64_t> shape, const std::vector<real>& values)
      : shape_(std::move(shape)),
        data_(std::make_shared<AlignedVec>(values.begin(), values.end())) {
    require(count(shape_) == static_cast<int64_t>(data_->size()),
            "Tensor: shape does not match value count");
  }

  static Tensor zeros(std::vector<int64_t> shape) { return Tensor(std::move(shape)); }

  static Tensor full(std::vector<int64_t> shape, real v) {
    Tensor t(std::move(shape));
    std::fill(t.data_->begin(), t.data_->end(), v);
    return t;
  }

  static Tensor scalar(real v) { return Tensor({1}, {v}); }

  bool defined() const { return data_ != nullptr; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  int64_t dim(int i) const { return shape_.at(static_cast<size_t>(i)); }
  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t numel() const { return data_ ? static_cast<int64_t>(data_->size()) : 0; }

  real* data() { return data_->data(); }
  const real* data() const { return data_->data(); }

  real& operator[](int64_t i) { return (*data_)[static_cast<size_t>(i)]; }
  real operator[](int64_t i) const { return (*data_)[static_cast<size_t>(i)]; }

  real& at(int64_t i, int64_t j) { return (*data_)[static_cast<size_t>(i * dim(1) + j)]; }
  real at(int64_t i, int64_t j) const { return (*data_)[static_cast<size_t>(i * dim(1) + j)]; }

  Tensor clone() const {
    Tensor t;
    t.shape_ = shape_;
    t.data_ = std::make_shared<AlignedVec>(*data_);
    return t;
  }

  // Same storage, new shape; element count must be preserved.
  Tensor reshaped(std::vector<int64_t> shape) const {
    require(count(shape) == numel(), "Tensor::reshaped: element count mismatch");
    Tensor t = *this;
    t.shape_ = std::move(shape);
    return t;
  }

  void fill(real v) { std::fill(data_->begin(), data_->end(), v); }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  bool all_finite() const {
    for (real v : *data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  // 2-d Eigen views. rows/cols default to the tensor's own 2-d shape.
  MatMap mat() {
    require(ndim() == 2, "Tensor::mat: not 2-d");
    return MatMap(data(), dim(0), dim(1));
  }
  ConstMatMap mat() const {
    require(ndim() == 2, "Tensor::mat: not 2-d");
    return ConstMatMap(data(), dim(0), dim(1));
  }
  MatMap as_mat(int64_t rows, int64_t cols) {
    require(rows * cols == numel(), "Tensor::as_mat: shape mismatch");
    return MatMap(data(), rows, cols);
  }
  ConstMatMap as_mat(int64_t rows, int64_t cols) const {
    require(rows * cols == numel(), "Tensor::as_mat: shape mismatch");
    return ConstMatMap(data(), rows, cols);
  }
  VecMap vec() { return VecMap(data(), numel()); }
  ConstVecMap vec() const { return ConstVecMap(data(), numel()); }

  std::string shape_str() const {
    std::string s = "(";
    for (size_t i = 0; i < shape_.size(); ++i)
      s += (i ? "," : "") + std::to_string(shape_[i]);
    return s + ")";
  }

  static int64_t count(const std::vector<int64_t>& shape) {
    int64_t n = 1;
    for (int64_t d : shape) {
      require(d >= 0, "Tensor: negative dimension");
      n *= d;
    }
    return n;
  }

 private:
  std::vector<int64_t> shape_;
  std::shared_ptr<AlignedVec> data_;
};

}  // namespace lts

#endif  // LTS_CORE_TENSOR_H_
