// include/lts/flow/kernel.h

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

#ifndef LTS_FLOW_KERNEL_H_
#define LTS_FLOW_KERNEL_H_

#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/LU>

#include "lts/common.h"
#include "lts/core/tensor.h"
#include "lts/flow/flow.h"

namespace lts {

// Value-only flow evaluation at a chosen floating-point width. The same
// weight snapshot drives single- and double-precision round trips, which is
// how the invertibility bounds are established per precision.
template <typename Scalar>
class FlowKernel {
 public:
  using Mat =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  struct Cond {
    Mat dec_in;   // (T_m, d_model)
    Mat dec_out;  // (T_m, bands)
    Vec spk;      // (d_model)
  };

  explicit FlowKernel(const FlowWeights& w) : bands_(w.bands) {
    require(w.bands % 2 == 0, "FlowKernel: band count must be even");
    steps_.reserve(w.steps.size());
    for (const FlowStepWeights& sw : w.steps) {
      Step st;
      int64_t c = sw.log_s.numel();
      st.s_fwd.resize(c);
      st.s_inv.resize(c);
      st.bias.resize(c);
      st.sum_log_s = 0;
      for (int64_t i = 0; i < c; ++i) {
        st.s_fwd[i] = static_cast<Scalar>(std::exp(sw.log_s[i]));
        st.s_inv[i] = static_cast<Scalar>(std::exp(-sw.log_s[i]));
        st.bias[i] = static_cast<Scalar>(sw.bias[i]);
        st.sum_log_s += static_cast<Scalar>(sw.log_s[i]);
      }
      Eigen::MatrixXd wd(c, c);
      for (int64_t i = 0; i < c; ++i)
        for (int64_t j = 0; j < c; ++j) wd(i, j) = sw.w.at(i, j);
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(wd);
      double lad = 0;
      for (int64_t i = 0; i < c; ++i) {
        double u = std::abs(lu.matrixLU()(i, i));
        require<NumericalError>(u > 0 && std::isfinite(u),
                                "FlowKernel: channel mixing is singular");
        lad += std::log(u);
      }
      st.logabsdet_w = static_cast<Scalar>(lad);
      Eigen::MatrixXd winv = lu.inverse();
      st.w_t = cast_dense(wd.transpose());
      st.w_inv_t = cast_dense(winv.transpose());
      st.in_w = to_mat(sw.in_w);
      st.in_b = to_vec(sw.in_b);
      st.cond_in_w = to_mat(sw.cond_in_w);
      st.cond_out_w = to_mat(sw.cond_out_w);
      st.cond_spk_w = to_mat(sw.cond_spk_w);
      st.out_w = to_mat(sw.out_w);
      st.out_b = to_vec(sw.out_b);
      st.swap = sw.swap;
      steps_.push_back(std::move(st));
    }
  }

  static Mat to_mat(const Tensor& t) {
    require(t.ndim() == 2, "FlowKernel: expected 2-d tensor");
    Mat m(t.dim(0), t.dim(1));
    for (int64_t i = 0; i < t.dim(0); ++i)
      for (int64_t j = 0; j < t.dim(1); ++j)
        m(i, j) = static_cast<Scalar>(t.at(i, j));
    return m;
  }

  static Vec to_vec(const Tensor& t) {
    Vec v(t.numel());
    for (int64_t i = 0; i < t.numel(); ++i)
      v[i] = static_cast<Scalar>(t[i]);
    return v;
  }

  static Tensor to_tensor(const Mat& m) {
    Tensor t({m.rows(), m.cols()});
    for (int64_t i = 0; i < m.rows(); ++i)
      for (int64_t j = 0; j < m.cols(); ++j)
        t.at(i, j) = static_cast<real>(m(i, j));
    return t;
  }

  Cond make_cond(const Tensor& dec_in, const Tensor& dec_out,
                 const Tensor& spk) const {
    Cond c;
    c.dec_in = to_mat(dec_in);
    c.dec_out = to_mat(dec_out);
    c.spk = to_vec(spk);
    return c;
  }

  int64_t bands() const { return bands_; }
  int64_t steps() const { return static_cast<int64_t>(steps_.size()); }

  Mat forward_step(int64_t i, const Mat& x, const Cond& c,
                   Scalar* log_det = nullptr) const {
    const Step& st = steps_[static_cast<size_t>(i)];
    Scalar t_rows = static_cast<Scalar>(x.rows());
    Mat y = x;
    y.rowwise() += st.bias.transpose();
    y = (y.array().rowwise() * st.s_fwd.transpose().array()).matrix();
    y = y * st.w_t;
    Mat a, b;
    deinterleave(y, a, b);
    Mat& src = st.swap ? b : a;
    Mat& tgt = st.swap ? a : b;
    Mat lsc, shift;
    coupling_net(st, src, c, lsc, shift);
    tgt = (tgt.array() * lsc.array().exp() + shift.array()).matrix();
    if (log_det)
      *log_det += t_rows * (st.sum_log_s + st.logabsdet_w) + lsc.sum();
    Mat out;
    interleave(a, b, out);
    require<NumericalError>(
        out.allFinite(),
        strprintf("flow forward produced non-finite values at step %lld",
                  static_cast<long long>(i)));
    return out;
  }

  Mat inverse_step(int64_t i, const Mat& z, const Cond& c) const {
    const Step& st = steps_[static_cast<size_t>(i)];
    Mat a, b;
    deinterleave(z, a, b);
    Mat& src = st.swap ? b : a;
    Mat& tgt = st.swap ? a : b;
    Mat lsc, shift;
    coupling_net(st, src, c, lsc, shift);
    tgt = ((tgt.array() - shift.array()) * (-lsc).array().exp()).matrix();
    Mat y;
    interleave(a, b, y);
    y = y * st.w_inv_t;
    y = (y.array().rowwise() * st.s_inv.transpose().array()).matrix();
    y.rowwise() -= st.bias.transpose();
    require<NumericalError>(
        y.allFinite(),
        strprintf("flow inverse produced non-finite values at step %lld",
                  static_cast<long long>(i)));
    return y;
  }

  std::pair<Mat, Scalar> forward(const Mat& x, const Cond& c) const {
    Mat z = x;
    Scalar log_det = 0;
    for (int64_t i = 0; i < steps(); ++i)
      z = forward_step(i, z, c, &log_det);
    return {std::move(z), log_det};
  }

  Mat inverse(const Mat& z, const Cond& c) const {
    Mat x = z;
    for (int64_t i = steps() - 1; i >= 0; --i) x = inverse_step(i, x, c);
    return x;
  }

 private:
  struct Step {
    Vec s_fwd, s_inv, bias;
    Scalar sum_log_s = 0;
    Mat w_t, w_inv_t;
    Scalar logabsdet_w = 0;
    Mat in_w;
    Vec in_b;
    Mat cond_in_w, cond_out_w, cond_spk_w;
    Mat out_w;
    Vec out_b;
    bool swap = false;
  };

  static Mat cast_dense(const Eigen::MatrixXd& m) {
    Mat out(m.rows(), m.cols());
    for (int64_t i = 0; i < m.rows(); ++i)
      for (int64_t j = 0; j < m.cols(); ++j)
        out(i, j) = static_cast<Scalar>(m(i, j));
    return out;
  }

  static void deinterleave(const Mat& x, Mat& a, Mat& b) {
    int64_t half = x.cols() / 2;
    a.resize(x.rows(), half);
    b.resize(x.rows(), half);
    for (int64_t j = 0; j < half; ++j) {
      a.col(j) = x.col(2 * j);
      b.col(j) = x.col(2 * j + 1);
    }
  }

  static void interleave(const Mat& a, const Mat& b, Mat& out) {
    out.resize(a.rows(), a.cols() * 2);
    for (int64_t j = 0; j < a.cols(); ++j) {
      out.col(2 * j) = a.col(j);
      out.col(2 * j + 1) = b.col(j);
    }
  }

  void coupling_net(const Step& st, const Mat& src, const Cond& c, Mat& lsc,
                    Mat& shift) const {
    Mat pre = src * st.in_w;
    pre.rowwise() += st.in_b.transpose();
    pre.noalias() += c.dec_in * st.cond_in_w;
    pre.noalias() += c.dec_out * st.cond_out_w;
    Vec spk_proj = st.cond_spk_w.transpose() * c.spk;
    pre.rowwise() += spk_proj.transpose();
    int64_t h = pre.cols() / 2;
    Mat gate = (Scalar(1) /
                (Scalar(1) + (-pre.rightCols(h)).array().exp()))
                   .matrix();
    Mat hidden = (pre.leftCols(h).array() * gate.array()).matrix();
    Mat out = hidden * st.out_w;
    out.rowwise() += st.out_b.transpose();
    int64_t ct = out.cols() / 2;
    lsc = (out.leftCols(ct).array().tanh() * Scalar(kFlowLogScaleCap))
              .matrix();
    shift = out.rightCols(ct);
  }

  std::vector<Step> steps_;
  int64_t bands_ = 0;
};

}  // namespace lts

#endif  // LTS_FLOW_KERNEL_H_
