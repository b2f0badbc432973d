#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "csikd/tensor.hpp"

namespace csikd {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRowMat = Eigen::Map<RowMat>;
using MapConstRowMat = Eigen::Map<const RowMat>;

namespace detail {

inline void check(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

inline std::vector<double>& scratch(int which, std::size_t n) {
  thread_local std::vector<double> bufs[4];
  auto& b = bufs[which];
  if (b.size() < n) b.resize(n);
  return b;
}

// Shifted-row image-to-columns fill for one chunk of samples. Layout is
// row-major (C_in*KH*KW) x (chunk*H*W); out-of-image taps are zero.
inline void im2col_chunk(const double* in, int b0, int chunk, int c_in, int h, int w,
                         int kh, int kw, double* cols) {
  const int hw = h * w;
  const int ckk = c_in * kh * kw;
  const int ph = kh / 2, pw = kw / 2;
  const std::size_t row_len = static_cast<std::size_t>(chunk) * hw;
  std::memset(cols, 0, sizeof(double) * ckk * row_len);
  for (int ci = 0; ci < c_in; ++ci) {
    for (int u = 0; u < kh; ++u) {
      for (int v = 0; v < kw; ++v) {
        const int r = (ci * kh + u) * kw + v;
        double* row = cols + static_cast<std::size_t>(r) * row_len;
        const int j_lo = std::max(0, pw - v);
        const int j_hi = std::min(w, w + pw - v);
        if (j_lo >= j_hi) continue;
        for (int s = 0; s < chunk; ++s) {
          const double* img = in + (static_cast<std::size_t>(b0 + s) * c_in + ci) * hw;
          for (int i = 0; i < h; ++i) {
            const int ii = i + u - ph;
            if (ii < 0 || ii >= h) continue;
            std::memcpy(row + static_cast<std::size_t>(s) * hw + i * w + j_lo,
                        img + static_cast<std::size_t>(ii) * w + (j_lo + v - pw),
                        sizeof(double) * static_cast<std::size_t>(j_hi - j_lo));
          }
        }
      }
    }
  }
}

// Transpose of im2col: scatter-adds column gradients back onto the image.
inline void col2im_chunk(const double* cols, int b0, int chunk, int c_in, int h, int w,
                         int kh, int kw, double* grad_in) {
  const int hw = h * w;
  const int ph = kh / 2, pw = kw / 2;
  const std::size_t row_len = static_cast<std::size_t>(chunk) * hw;
  for (int ci = 0; ci < c_in; ++ci) {
    for (int u = 0; u < kh; ++u) {
      for (int v = 0; v < kw; ++v) {
        const int r = (ci * kh + u) * kw + v;
        const double* row = cols + static_cast<std::size_t>(r) * row_len;
        const int j_lo = std::max(0, pw - v);
        const int j_hi = std::min(w, w + pw - v);
        if (j_lo >= j_hi) continue;
        for (int s = 0; s < chunk; ++s) {
          double* img = grad_in + (static_cast<std::size_t>(b0 + s) * c_in + ci) * hw;
          for (int i = 0; i < h; ++i) {
            const int ii = i + u - ph;
            if (ii < 0 || ii >= h) continue;
            const double* src = row + static_cast<std::size_t>(s) * hw + i * w + j_lo;
            double* dst = img + static_cast<std::size_t>(ii) * w + (j_lo + v - pw);
            for (int j = 0; j < j_hi - j_lo; ++j) dst[j] += src[j];
          }
        }
      }
    }
  }
}

inline int conv_chunk_samples(int hw) {
  const int target_positions = 16384;
  return std::max(1, target_positions / std::max(1, hw));
}

}  // namespace detail

// 2-D cross-correlation with zero same-padding (stride 1); even kernels pad
// one extra row/column at the top/left. kernel is (C_out, C_in, KH, KW),
// bias is (C_out).
inline Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias) {
  detail::check(input.shape().size() == 4, "conv2d: input must be BxCxHxW, got " +
                                               shape_str(input.shape()));
  detail::check(kernel.shape().size() == 4, "conv2d: kernel must be 4-d");
  detail::check(bias.shape().size() == 1, "conv2d: bias must be 1-d");
  const int b = input.shape()[0], c_in = input.shape()[1];
  const int h = input.shape()[2], w = input.shape()[3];
  const int c_out = kernel.shape()[0], kc = kernel.shape()[1];
  const int kh = kernel.shape()[2], kw = kernel.shape()[3];
  detail::check(kc == c_in, "conv2d: kernel expects " + std::to_string(kc) +
                                " input channels, input has " + std::to_string(c_in));
  detail::check(bias.shape()[0] == c_out, "conv2d: bias length != C_out");

  const int hw = h * w;
  const int ckk = c_in * kh * kw;
  const int chunk_n = detail::conv_chunk_samples(hw);

  std::vector<double> out(static_cast<std::size_t>(b) * c_out * hw);
  {
    MapConstRowMat wm(kernel.values().data(), c_out, ckk);
    for (int b0 = 0; b0 < b; b0 += chunk_n) {
      const int chunk = std::min(chunk_n, b - b0);
      const std::size_t ncols = static_cast<std::size_t>(chunk) * hw;
      auto& cols = detail::scratch(0, static_cast<std::size_t>(ckk) * ncols);
      auto& prod = detail::scratch(1, static_cast<std::size_t>(c_out) * ncols);
      detail::im2col_chunk(input.values().data(), b0, chunk, c_in, h, w, kh, kw, cols.data());
      MapRowMat pm(prod.data(), c_out, static_cast<Eigen::Index>(ncols));
      pm.noalias() = wm * MapConstRowMat(cols.data(), ckk, static_cast<Eigen::Index>(ncols));
      for (int s = 0; s < chunk; ++s) {
        for (int co = 0; co < c_out; ++co) {
          const double* src = prod.data() + static_cast<std::size_t>(co) * ncols + static_cast<std::size_t>(s) * hw;
          double* dst = out.data() + (static_cast<std::size_t>(b0 + s) * c_out + co) * hw;
          const double bv = bias.values()[co];
          for (int k = 0; k < hw; ++k) dst[k] = src[k] + bv;
        }
      }
    }
  }

  auto backward = [b, c_in, c_out, h, w, kh, kw](TensorNode& self) {
    const int hw = h * w;
    const int ckk = c_in * kh * kw;
    const int chunk_n = detail::conv_chunk_samples(hw);
    TensorNode& in = *self.parents[0];
    TensorNode& ker = *self.parents[1];
    TensorNode& bi = *self.parents[2];
    const bool need_in = in.requires_grad;
    const bool need_ker = ker.requires_grad;
    const bool need_bias = bi.requires_grad;
    if (need_in) in.ensure_grad();
    if (need_ker) ker.ensure_grad();
    if (need_bias) bi.ensure_grad();
    for (int b0 = 0; b0 < b; b0 += chunk_n) {
      const int chunk = std::min(chunk_n, b - b0);
      const std::size_t ncols = static_cast<std::size_t>(chunk) * hw;
      auto& gout = detail::scratch(1, static_cast<std::size_t>(c_out) * ncols);
      for (int s = 0; s < chunk; ++s)
        for (int co = 0; co < c_out; ++co)
          std::memcpy(gout.data() + static_cast<std::size_t>(co) * ncols + static_cast<std::size_t>(s) * hw,
                      self.grad.data() + (static_cast<std::size_t>(b0 + s) * c_out + co) * hw,
                      sizeof(double) * hw);
      MapRowMat gm(gout.data(), c_out, static_cast<Eigen::Index>(ncols));
      if (need_bias) {
        for (int co = 0; co < c_out; ++co) bi.grad[co] += gm.row(co).sum();
      }
      if (need_ker) {
        auto& cols = detail::scratch(0, static_cast<std::size_t>(ckk) * ncols);
        detail::im2col_chunk(in.values.data(), b0, chunk, c_in, h, w, kh, kw, cols.data());
        MapRowMat gk(ker.grad.data(), c_out, ckk);
        gk.noalias() += gm * MapConstRowMat(cols.data(), ckk, static_cast<Eigen::Index>(ncols)).transpose();
      }
      if (need_in) {
        auto& gcols = detail::scratch(2, static_cast<std::size_t>(ckk) * ncols);
        MapRowMat gc(gcols.data(), ckk, static_cast<Eigen::Index>(ncols));
        gc.noalias() = MapConstRowMat(ker.values.data(), c_out, ckk).transpose() * gm;
        detail::col2im_chunk(gcols.data(), b0, chunk, c_in, h, w, kh, kw, in.grad.data());
      }
    }
  };

  return detail::make_op({b, c_out, h, w}, std::move(out), {input, kernel, bias}, backward);
}

// Affine map y = x W^T + b; weight is (L_out, L_in), bias (L_out).
inline Tensor dense(const Tensor& input, const Tensor& weight, const Tensor& bias) {
  detail::check(input.shape().size() == 2, "dense: input must be BxL, got " +
                                               shape_str(input.shape()));
  const int b = input.shape()[0], l_in = input.shape()[1];
  detail::check(weight.shape().size() == 2 && weight.shape()[1] == l_in,
                "dense: weight expects input length " +
                    std::to_string(weight.shape().size() == 2 ? weight.shape()[1] : -1) +
                    ", input has " + std::to_string(l_in));
  const int l_out = weight.shape()[0];
  detail::check(bias.shape() == Shape{l_out}, "dense: bias length != L_out");

  std::vector<double> out(static_cast<std::size_t>(b) * l_out);
  {
    MapConstRowMat xm(input.values().data(), b, l_in);
    MapConstRowMat wm(weight.values().data(), l_out, l_in);
    MapRowMat om(out.data(), b, l_out);
    om.noalias() = xm * wm.transpose();
    for (int i = 0; i < b; ++i)
      for (int j = 0; j < l_out; ++j) out[static_cast<std::size_t>(i) * l_out + j] += bias.values()[j];
  }

  auto backward = [b, l_in, l_out](TensorNode& self) {
    TensorNode& in = *self.parents[0];
    TensorNode& wt = *self.parents[1];
    TensorNode& bi = *self.parents[2];
    MapConstRowMat gm(self.grad.data(), b, l_out);
    if (in.requires_grad) {
      in.ensure_grad();
      MapRowMat gi(in.grad.data(), b, l_in);
      gi.noalias() += gm * MapConstRowMat(wt.values.data(), l_out, l_in);
    }
    if (wt.requires_grad) {
      wt.ensure_grad();
      MapRowMat gw(wt.grad.data(), l_out, l_in);
      gw.noalias() += gm.transpose() * MapConstRowMat(in.values.data(), b, l_in);
    }
    if (bi.requires_grad) {
      bi.ensure_grad();
      for (int i = 0; i < b; ++i)
        for (int j = 0; j < l_out; ++j) bi.grad[j] += self.grad[static_cast<std::size_t>(i) * l_out + j];
    }
  };

  return detail::make_op({b, l_out}, std::move(out), {input, weight, bias}, backward);
}

enum class BnMode { train, eval };

// Per-channel running statistics owned by the model layer that uses them.
struct BatchNormState {
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double momentum = 0.9;
  double eps = 1e-5;

  explicit BatchNormState(int channels = 0)
      : running_mean(channels, 0.0), running_var(channels, 1.0) {}
};

// Train mode normalizes with batch statistics over (B,H,W) per channel and
// folds them into the running statistics; eval mode uses the running
// statistics unchanged. Train mode needs B >= 2.
inline Tensor batch_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                         BatchNormState& state, BnMode mode) {
  detail::check(input.shape().size() == 4, "batch_norm: input must be BxCxHxW");
  const int b = input.shape()[0], c = input.shape()[1];
  const int h = input.shape()[2], w = input.shape()[3];
  detail::check(gamma.shape() == Shape{c} && beta.shape() == Shape{c},
                "batch_norm: gamma/beta must have one entry per channel");
  detail::check(static_cast<int>(state.running_mean.size()) == c,
                "batch_norm: running stats channel mismatch");
  if (mode == BnMode::train && b < 2)
    throw std::invalid_argument("batch_norm: degenerate batch (B=" + std::to_string(b) +
                                ") in train mode");

  const int hw = h * w;
  const double m = static_cast<double>(b) * hw;
  std::vector<double> mean(c), inv_std(c);
  if (mode == BnMode::train) {
    for (int ci = 0; ci < c; ++ci) {
      double acc = 0.0;
      for (int s = 0; s < b; ++s) {
        const double* p = input.values().data() + (static_cast<std::size_t>(s) * c + ci) * hw;
        for (int k = 0; k < hw; ++k) acc += p[k];
      }
      const double mu = acc / m;
      double vacc = 0.0;
      for (int s = 0; s < b; ++s) {
        const double* p = input.values().data() + (static_cast<std::size_t>(s) * c + ci) * hw;
        for (int k = 0; k < hw; ++k) {
          const double d = p[k] - mu;
          vacc += d * d;
        }
      }
      const double var = vacc / m;
      mean[ci] = mu;
      inv_std[ci] = 1.0 / std::sqrt(var + state.eps);
      state.running_mean[ci] = state.momentum * state.running_mean[ci] + (1.0 - state.momentum) * mu;
      state.running_var[ci] = state.momentum * state.running_var[ci] + (1.0 - state.momentum) * var;
    }
  } else {
    for (int ci = 0; ci < c; ++ci) {
      mean[ci] = state.running_mean[ci];
      inv_std[ci] = 1.0 / std::sqrt(state.running_var[ci] + state.eps);
    }
  }

  std::vector<double> out(input.values().size());
  for (int s = 0; s < b; ++s) {
    for (int ci = 0; ci < c; ++ci) {
      const double* p = input.values().data() + (static_cast<std::size_t>(s) * c + ci) * hw;
      double* q = out.data() + (static_cast<std::size_t>(s) * c + ci) * hw;
      const double g = gamma.values()[ci], be = beta.values()[ci];
      const double mu = mean[ci], is = inv_std[ci];
      for (int k = 0; k < hw; ++k) q[k] = (p[k] - mu) * is * g + be;
    }
  }

  auto backward = [b, c, hw, m, mode, mean, inv_std](TensorNode& self) {
    TensorNode& in = *self.parents[0];
    TensorNode& ga = *self.parents[1];
    TensorNode& be = *self.parents[2];
    const bool need_in = in.requires_grad;
    if (need_in) in.ensure_grad();
    if (ga.requires_grad) ga.ensure_grad();
    if (be.requires_grad) be.ensure_grad();
    for (int ci = 0; ci < c; ++ci) {
      const double mu = mean[ci], is = inv_std[ci];
      const double g = ga.values[ci];
      double sum_gy = 0.0, sum_gy_xhat = 0.0;
      for (int s = 0; s < b; ++s) {
        const std::size_t off = (static_cast<std::size_t>(s) * c + ci) * hw;
        for (int k = 0; k < hw; ++k) {
          const double gy = self.grad[off + k];
          sum_gy += gy;
          sum_gy_xhat += gy * (in.values[off + k] - mu) * is;
        }
      }
      if (ga.requires_grad) ga.grad[ci] += sum_gy_xhat;
      if (be.requires_grad) be.grad[ci] += sum_gy;
      if (!need_in) continue;
      if (mode == BnMode::train) {
        const double scale = g * is / m;
        for (int s = 0; s < b; ++s) {
          const std::size_t off = (static_cast<std::size_t>(s) * c + ci) * hw;
          for (int k = 0; k < hw; ++k) {
            const double xhat = (in.values[off + k] - mu) * is;
            in.grad[off + k] += scale * (m * self.grad[off + k] - sum_gy - xhat * sum_gy_xhat);
          }
        }
      } else {
        const double scale = g * is;
        for (int s = 0; s < b; ++s) {
          const std::size_t off = (static_cast<std::size_t>(s) * c + ci) * hw;
          for (int k = 0; k < hw; ++k) in.grad[off + k] += scale * self.grad[off + k];
        }
      }
    }
  };

  return detail::make_op(input.shape(), std::move(out), {input, gamma, beta}, backward);
}

inline Tensor leaky_relu(const Tensor& input, double slope = 0.3) {
  std::vector<double> out(input.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = input.values()[i];
    out[i] = x >= 0.0 ? x : slope * x;
  }
  auto backward = [slope](TensorNode& self) {
    TensorNode& in = *self.parents[0];
    if (!in.requires_grad) return;
    in.ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      in.grad[i] += self.grad[i] * (in.values[i] >= 0.0 ? 1.0 : slope);
  };
  return detail::make_op(input.shape(), std::move(out), {input}, backward);
}

inline Tensor sigmoid(const Tensor& input) {
  std::vector<double> out(input.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = input.values()[i];
    if (x >= 0.0) {
      out[i] = 1.0 / (1.0 + std::exp(-x));
    } else {
      const double e = std::exp(x);
      out[i] = e / (1.0 + e);
    }
  }
  auto backward = [](TensorNode& self) {
    TensorNode& in = *self.parents[0];
    if (!in.requires_grad) return;
    in.ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const double y = self.values[i];
      in.grad[i] += self.grad[i] * y * (1.0 - y);
    }
  };
  return detail::make_op(input.shape(), std::move(out), {input}, backward);
}

// Temperature softmax over the per-sample axis of a BxL tensor, computed
// with max subtraction. t=1 is the ordinary softmax.
inline Tensor softmax_t(const Tensor& input, double temperature) {
  if (!(temperature > 0.0))
    throw std::invalid_argument("softmax_t: temperature must be > 0, got " +
                                std::to_string(temperature));
  detail::check(input.shape().size() == 2, "softmax_t: input must be BxL");
  const int b = input.shape()[0], l = input.shape()[1];
  std::vector<double> out(input.values().size());
  for (int s = 0; s < b; ++s) {
    const double* x = input.values().data() + static_cast<std::size_t>(s) * l;
    double* y = out.data() + static_cast<std::size_t>(s) * l;
    double mx = x[0];
    for (int i = 1; i < l; ++i) mx = std::max(mx, x[i]);
    double z = 0.0;
    for (int i = 0; i < l; ++i) {
      y[i] = std::exp((x[i] - mx) / temperature);
      z += y[i];
    }
    for (int i = 0; i < l; ++i) y[i] /= z;
  }
  auto backward = [b, l, temperature](TensorNode& self) {
    TensorNode& in = *self.parents[0];
    if (!in.requires_grad) return;
    in.ensure_grad();
    for (int s = 0; s < b; ++s) {
      const std::size_t off = static_cast<std::size_t>(s) * l;
      double dot = 0.0;
      for (int i = 0; i < l; ++i) dot += self.grad[off + i] * self.values[off + i];
      for (int i = 0; i < l; ++i)
        in.grad[off + i] += self.values[off + i] * (self.grad[off + i] - dot) / temperature;
    }
  };
  return detail::make_op(input.shape(), std::move(out), {input}, backward);
}

inline Tensor softmax(const Tensor& input) { return softmax_t(input, 1.0); }

// Mean of squared differences over every element, batch included.
inline Tensor mse_loss(const Tensor& pred, const Tensor& target) {
  detail::check(pred.shape() == target.shape(),
                "mse_loss: shape mismatch " + shape_str(pred.shape()) + " vs " +
                    shape_str(target.shape()));
  const double n = static_cast<double>(pred.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.values().size(); ++i) {
    const double d = pred.values()[i] - target.values()[i];
    acc += d * d;
  }
  auto backward = [n](TensorNode& self) {
    TensorNode& p = *self.parents[0];
    TensorNode& t = *self.parents[1];
    const double g = self.grad[0];
    if (p.requires_grad) {
      p.ensure_grad();
      for (std::size_t i = 0; i < p.values.size(); ++i)
        p.grad[i] += g * 2.0 * (p.values[i] - t.values[i]) / n;
    }
    if (t.requires_grad) {
      t.ensure_grad();
      for (std::size_t i = 0; i < t.values.size(); ++i)
        t.grad[i] -= g * 2.0 * (p.values[i] - t.values[i]) / n;
    }
  };
  return detail::make_op({1}, {acc / n}, {pred, target}, backward);
}

// Batch-mean soft-target cross entropy -sum_i p_t[i] log p_s[i]; the log is
// floored at 1e-12 and gradients vanish where the floor is active.
inline Tensor soft_cross_entropy(const Tensor& teacher_probs, const Tensor& student_probs) {
  detail::check(teacher_probs.shape() == student_probs.shape(),
                "soft_cross_entropy: shape mismatch");
  detail::check(teacher_probs.shape().size() == 2, "soft_cross_entropy: input must be BxL");
  static constexpr double kFloor = 1e-12;
  const int b = teacher_probs.shape()[0];
  double acc = 0.0;
  for (std::size_t i = 0; i < teacher_probs.values().size(); ++i)
    acc -= teacher_probs.values()[i] * std::log(std::max(student_probs.values()[i], kFloor));
  auto backward = [b](TensorNode& self) {
    TensorNode& tp = *self.parents[0];
    TensorNode& sp = *self.parents[1];
    const double g = self.grad[0] / static_cast<double>(b);
    if (sp.requires_grad) {
      sp.ensure_grad();
      for (std::size_t i = 0; i < sp.values.size(); ++i)
        if (sp.values[i] > kFloor) sp.grad[i] -= g * tp.values[i] / sp.values[i];
    }
    if (tp.requires_grad) {
      tp.ensure_grad();
      for (std::size_t i = 0; i < tp.values.size(); ++i)
        tp.grad[i] -= g * std::log(std::max(sp.values[i], kFloor));
    }
  };
  return detail::make_op({1}, {acc / b}, {teacher_probs, student_probs}, backward);
}

inline Tensor concat_channels(const Tensor& a, const Tensor& b) {
  detail::check(a.shape().size() == 4 && b.shape().size() == 4,
                "concat_channels: inputs must be BxCxHxW");
  detail::check(a.shape()[0] == b.shape()[0] && a.shape()[2] == b.shape()[2] &&
                    a.shape()[3] == b.shape()[3],
                "concat_channels: non-channel dims differ");
  const int bs = a.shape()[0], ca = a.shape()[1], cb = b.shape()[1];
  const int hw = a.shape()[2] * a.shape()[3];
  std::vector<double> out(static_cast<std::size_t>(bs) * (ca + cb) * hw);
  for (int s = 0; s < bs; ++s) {
    std::memcpy(out.data() + static_cast<std::size_t>(s) * (ca + cb) * hw,
                a.values().data() + static_cast<std::size_t>(s) * ca * hw, sizeof(double) * ca * hw);
    std::memcpy(out.data() + (static_cast<std::size_t>(s) * (ca + cb) + ca) * hw,
                b.values().data() + static_cast<std::size_t>(s) * cb * hw, sizeof(double) * cb * hw);
  }
  auto backward = [bs, ca, cb, hw](TensorNode& self) {
    TensorNode& pa = *self.parents[0];
    TensorNode& pb = *self.parents[1];
    if (pa.requires_grad) {
      pa.ensure_grad();
      for (int s = 0; s < bs; ++s)
        for (int k = 0; k < ca * hw; ++k)
          pa.grad[static_cast<std::size_t>(s) * ca * hw + k] +=
              self.grad[static_cast<std::size_t>(s) * (ca + cb) * hw + k];
    }
    if (pb.requires_grad) {
      pb.ensure_grad();
      for (int s = 0; s < bs; ++s)
        for (int k = 0; k < cb * hw; ++k)
          pb.grad[static_cast<std::size_t>(s) * cb * hw + k] +=
              self.grad[(static_cast<std::size_t>(s) * (ca + cb) + ca) * hw + k];
    }
  };
  Shape out_shape = a.shape();
  out_shape[1] = ca + cb;
  return detail::make_op(std::move(out_shape), std::move(out), {a, b}, backward);
}

inline Tensor add(const Tensor& a, const Tensor& b) {
  detail::check(a.shape() == b.shape(), "add: shape mismatch " + shape_str(a.shape()) +
                                            " vs " + shape_str(b.shape()));
  std::vector<double> out(a.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + b.values()[i];
  auto backward = [](TensorNode& self) {
    for (int p = 0; p < 2; ++p) {
      TensorNode& n = *self.parents[p];
      if (!n.requires_grad) continue;
      n.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) n.grad[i] += self.grad[i];
    }
  };
  return detail::make_op(a.shape(), std::move(out), {a, b}, backward);
}

// Elementwise multiply by a learned scalar (ReZero gate; initialized to 0
// by the model builders).
inline Tensor scale_gate(const Tensor& x, const Tensor& alpha) {
  detail::check(alpha.size() == 1, "scale_gate: alpha must be scalar");
  const double a = alpha.values()[0];
  std::vector<double> out(x.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x.values()[i];
  auto backward = [](TensorNode& self) {
    TensorNode& xn = *self.parents[0];
    TensorNode& an = *self.parents[1];
    if (xn.requires_grad) {
      xn.ensure_grad();
      const double a = an.values[0];
      for (std::size_t i = 0; i < self.grad.size(); ++i) xn.grad[i] += a * self.grad[i];
    }
    if (an.requires_grad) {
      an.ensure_grad();
      double acc = 0.0;
      for (std::size_t i = 0; i < self.grad.size(); ++i) acc += self.grad[i] * xn.values[i];
      an.grad[0] += acc;
    }
  };
  return detail::make_op(x.shape(), std::move(out), {x, alpha}, backward);
}

inline Tensor reshape(const Tensor& x, Shape new_shape) {
  detail::check(numel(new_shape) == x.size(),
                "reshape: element count mismatch " + shape_str(x.shape()) + " -> " +
                    shape_str(new_shape));
  auto backward = [](TensorNode& self) {
    TensorNode& in = *self.parents[0];
    if (!in.requires_grad) return;
    in.ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) in.grad[i] += self.grad[i];
  };
  return detail::make_op(std::move(new_shape), x.values(), {x}, backward);
}

inline Tensor flatten(const Tensor& x) {
  detail::check(!x.shape().empty(), "flatten: undefined tensor");
  const int b = x.shape()[0];
  return reshape(x, {b, static_cast<int>(x.size() / b)});
}

inline Tensor mul_scalar(const Tensor& x, double c) {
  std::vector<double> out(x.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * x.values()[i];
  auto backward = [c](TensorNode& self) {
    TensorNode& in = *self.parents[0];
    if (!in.requires_grad) return;
    in.ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) in.grad[i] += c * self.grad[i];
  };
  return detail::make_op(x.shape(), std::move(out), {x}, backward);
}

inline Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.values()) acc += v;
  auto backward = [](TensorNode& self) {
    TensorNode& in = *self.parents[0];
    if (!in.requires_grad) return;
    in.ensure_grad();
    for (std::size_t i = 0; i < in.grad.size(); ++i) in.grad[i] += self.grad[0];
  };
  return detail::make_op({1}, {acc}, {x}, backward);
}

}  // namespace csikd
