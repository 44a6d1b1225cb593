#include "pol/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "pol/parallel.hpp"

namespace pol {
namespace {

template <typename T>
struct Tile;
template <>
struct Tile<float> {
  static constexpr std::size_t mr = 6;
  static constexpr std::size_t nr = 32;
};
template <>
struct Tile<double> {
  static constexpr std::size_t mr = 6;
  static constexpr std::size_t nr = 16;
};

constexpr std::size_t kKc = 256;
constexpr std::size_t kNc = 2048;

template <typename T>
void micro_kernel(std::size_t kc, const T* __restrict ap, const T* __restrict bp, T* __restrict c,
                  std::size_t ldc, std::size_t rows, std::size_t cols, bool overwrite) {
  constexpr std::size_t mr = Tile<T>::mr;
  constexpr std::size_t nr = Tile<T>::nr;
  T acc[mr][nr] = {};
  for (std::size_t p = 0; p < kc; ++p) {
    const T* a = ap + p * mr;
    const T* b = bp + p * nr;
    for (std::size_t r = 0; r < mr; ++r) {
      const T av = a[r];
      for (std::size_t j = 0; j < nr; ++j) acc[r][j] += av * b[j];
    }
  }
  for (std::size_t r = 0; r < rows; ++r) {
    T* crow = c + r * ldc;
    if (overwrite) {
      for (std::size_t j = 0; j < cols; ++j) crow[j] = acc[r][j];
    } else {
      for (std::size_t j = 0; j < cols; ++j) crow[j] += acc[r][j];
    }
  }
}

void check_conv_operands(const char* op, const Shape& x, const Shape& w) {
  if (x.rank() != 4) throw DimensionError(op, "input rank", "expected NCHW, got " + x.to_string());
  if (w.rank() != 4) throw DimensionError(op, "weight rank", "expected (C_out,C_in,kH,kW), got " + w.to_string());
}

std::size_t conv_extent(const char* op, const char* axis, std::size_t in, std::size_t k, const ConvSpec& spec) {
  if (spec.stride == 0) throw DimensionError(op, "stride", "must be positive");
  const std::size_t padded = in + 2 * spec.padding;
  if (padded < k) {
    throw DimensionError(op, axis,
                         "kernel " + std::to_string(k) + " larger than padded extent " + std::to_string(padded));
  }
  if (spec.pad_mode == PadMode::reflect && spec.padding >= in) {
    throw DimensionError(op, axis, "reflect padding must be smaller than the extent");
  }
  return (padded - k) / spec.stride + 1;
}

inline std::ptrdiff_t reflect(std::ptrdiff_t i, std::ptrdiff_t n) {
  if (i < 0) return -i;
  if (i >= n) return 2 * (n - 1) - i;
  return i;
}

struct ConvGeometry {
  std::size_t cin, h, w, kh, kw, hout, wout;
  std::size_t k() const { return cin * kh * kw; }
  std::size_t p() const { return hout * wout; }
};

// col[(ci*kh + ki)*kw + kj][oh*wout + ow]
template <typename T>
void im2col(const T* x, const ConvGeometry& g, const ConvSpec& s, T* col) {
  const auto pad = static_cast<std::ptrdiff_t>(s.padding);
  const auto stride = static_cast<std::ptrdiff_t>(s.stride);
  const auto h = static_cast<std::ptrdiff_t>(g.h);
  const auto w = static_cast<std::ptrdiff_t>(g.w);
  for (std::size_t ci = 0; ci < g.cin; ++ci) {
    const T* plane = x + ci * g.h * g.w;
    for (std::size_t ki = 0; ki < g.kh; ++ki) {
      for (std::size_t kj = 0; kj < g.kw; ++kj) {
        T* row = col + ((ci * g.kh + ki) * g.kw + kj) * g.p();
        for (std::size_t oh = 0; oh < g.hout; ++oh) {
          std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh) * stride - pad + static_cast<std::ptrdiff_t>(ki);
          T* out = row + oh * g.wout;
          if (s.pad_mode == PadMode::reflect) {
            ih = reflect(ih, h);
          } else if (ih < 0 || ih >= h) {
            std::fill(out, out + g.wout, T(0));
            continue;
          }
          const T* src = plane + ih * w;
          for (std::size_t ow = 0; ow < g.wout; ++ow) {
            std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow) * stride - pad + static_cast<std::ptrdiff_t>(kj);
            if (s.pad_mode == PadMode::reflect) {
              out[ow] = src[reflect(iw, w)];
            } else {
              out[ow] = (iw < 0 || iw >= w) ? T(0) : src[iw];
            }
          }
        }
      }
    }
  }
}

// Scatter-add of col back into the image (adjoint of im2col).
template <typename T>
void col2im(const T* col, const ConvGeometry& g, const ConvSpec& s, T* x) {
  const auto pad = static_cast<std::ptrdiff_t>(s.padding);
  const auto stride = static_cast<std::ptrdiff_t>(s.stride);
  const auto h = static_cast<std::ptrdiff_t>(g.h);
  const auto w = static_cast<std::ptrdiff_t>(g.w);
  for (std::size_t ci = 0; ci < g.cin; ++ci) {
    T* plane = x + ci * g.h * g.w;
    for (std::size_t ki = 0; ki < g.kh; ++ki) {
      for (std::size_t kj = 0; kj < g.kw; ++kj) {
        const T* row = col + ((ci * g.kh + ki) * g.kw + kj) * g.p();
        for (std::size_t oh = 0; oh < g.hout; ++oh) {
          std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh) * stride - pad + static_cast<std::ptrdiff_t>(ki);
          if (s.pad_mode == PadMode::reflect) {
            ih = reflect(ih, h);
          } else if (ih < 0 || ih >= h) {
            continue;
          }
          const T* in = row + oh * g.wout;
          T* dst = plane + ih * w;
          for (std::size_t ow = 0; ow < g.wout; ++ow) {
            std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow) * stride - pad + static_cast<std::ptrdiff_t>(kj);
            if (s.pad_mode == PadMode::reflect) {
              dst[reflect(iw, w)] += in[ow];
            } else if (iw >= 0 && iw < w) {
              dst[iw] += in[ow];
            }
          }
        }
      }
    }
  }
}

template <typename T>
BasicTensor<T> transpose2d(const T* a, std::size_t rows, std::size_t cols) {
  BasicTensor<T> out(Shape{cols, rows});
  T* o = out.ptr();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) o[c * rows + r] = a[r * cols + c];
  }
  return out;
}

template <typename T>
void check_finite_debug([[maybe_unused]] const BasicTensor<T>& t, [[maybe_unused]] const char* op) {
#ifndef NDEBUG
  if (!t.all_finite()) throw NumericError(std::string(op) + ": non-finite output");
#endif
}

template <typename T>
BasicTensor<T> binary(const char* op, const BasicTensor<T>& a, const BasicTensor<T>& b, auto fn) {
  require_same_shape(op, a.shape(), b.shape());
  BasicTensor<T> out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = fn(a[i], b[i]);
  return out;
}

}  // namespace

Shape conv2d_output_shape(const Shape& x, const Shape& w, const ConvSpec& spec) {
  check_conv_operands("conv2d", x, w);
  if (x[1] != w[1]) {
    throw DimensionError("conv2d", "channels", "input has " + std::to_string(x[1]) + ", weight expects " +
                                                   std::to_string(w[1]));
  }
  const std::size_t hout = conv_extent("conv2d", "height", x[2], w[2], spec);
  const std::size_t wout = conv_extent("conv2d", "width", x[3], w[3], spec);
  return Shape{x[0], w[0], hout, wout};
}

Shape conv_transpose2d_output_shape(const Shape& x, const Shape& w, const ConvSpec& spec) {
  check_conv_operands("conv_transpose2d", x, w);
  if (x[1] != w[0]) {
    throw DimensionError("conv_transpose2d", "channels",
                         "input has " + std::to_string(x[1]) + ", weight expects " + std::to_string(w[0]));
  }
  if (spec.pad_mode != PadMode::zeros) {
    throw DimensionError("conv_transpose2d", "pad_mode", "only zero padding is supported");
  }
  if (spec.stride == 0) throw DimensionError("conv_transpose2d", "stride", "must be positive");
  if (spec.output_padding >= spec.stride) {
    throw DimensionError("conv_transpose2d", "output_padding", "must be smaller than stride");
  }
  auto extent = [&](const char* axis, std::size_t in, std::size_t k) {
    const long long out = static_cast<long long>(in - 1) * static_cast<long long>(spec.stride) -
                          2 * static_cast<long long>(spec.padding) + static_cast<long long>(k) +
                          static_cast<long long>(spec.output_padding);
    if (out < 1) {
      throw DimensionError("conv_transpose2d", axis, "output extent " + std::to_string(out) + " is not positive");
    }
    return static_cast<std::size_t>(out);
  };
  return Shape{x[0], w[1], extent("height", x[2], w[2]), extent("width", x[3], w[3])};
}

template <typename T>
void gemm(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate) {
  constexpr std::size_t mr = Tile<T>::mr;
  constexpr std::size_t nr = Tile<T>::nr;
  if (m == 0 || n == 0) return;
  if (k == 0) {
    if (!accumulate) std::fill(c, c + m * n, T(0));
    return;
  }
  std::vector<T> bpack;
  const std::size_t row_blocks = (m + mr - 1) / mr;
  for (std::size_t jc = 0; jc < n; jc += kNc) {
    const std::size_t nc = std::min(kNc, n - jc);
    const std::size_t panels = (nc + nr - 1) / nr;
    for (std::size_t pc = 0; pc < k; pc += kKc) {
      const std::size_t kc = std::min(kKc, k - pc);
      bpack.assign(panels * kc * nr, T(0));
      for (std::size_t pnl = 0; pnl < panels; ++pnl) {
        const std::size_t j0 = jc + pnl * nr;
        const std::size_t cols = std::min(nr, n - j0);
        T* dst = bpack.data() + pnl * kc * nr;
        for (std::size_t p = 0; p < kc; ++p) {
          const T* src = b + (pc + p) * n + j0;
          std::copy(src, src + cols, dst + p * nr);
        }
      }
      const bool overwrite = !accumulate && pc == 0;
      parallel_for(row_blocks, [&](std::size_t begin, std::size_t end) {
        std::vector<T> apack(kc * mr);
        for (std::size_t blk = begin; blk < end; ++blk) {
          const std::size_t i0 = blk * mr;
          const std::size_t rows = std::min(mr, m - i0);
          std::fill(apack.begin(), apack.end(), T(0));
          for (std::size_t r = 0; r < rows; ++r) {
            const T* src = a + (i0 + r) * k + pc;
            for (std::size_t p = 0; p < kc; ++p) apack[p * mr + r] = src[p];
          }
          for (std::size_t pnl = 0; pnl < panels; ++pnl) {
            const std::size_t j0 = jc + pnl * nr;
            micro_kernel<T>(kc, apack.data(), bpack.data() + pnl * kc * nr, c + i0 * n + j0, n, rows,
                            std::min(nr, n - j0), overwrite);
          }
        }
      });
    }
  }
}

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& x, const BasicTensor<T>& weight, const BasicTensor<T>& bias,
                      const ConvSpec& spec) {
  const Shape out_shape = conv2d_output_shape(x.shape(), weight.shape(), spec);
  if (!bias.empty() && (bias.rank() != 1 || bias.dim(0) != weight.dim(0))) {
    throw DimensionError("conv2d", "bias", "expected (" + std::to_string(weight.dim(0)) + "), got " +
                                               bias.shape().to_string());
  }
  const ConvGeometry g{x.dim(1), x.dim(2), x.dim(3), weight.dim(2), weight.dim(3), out_shape[2], out_shape[3]};
  const std::size_t cout = weight.dim(0);
  BasicTensor<T> out(out_shape);
  std::vector<T> col(g.k() * g.p());
  for (std::size_t n = 0; n < x.dim(0); ++n) {
    im2col(x.ptr() + n * g.cin * g.h * g.w, g, spec, col.data());
    T* dst = out.ptr() + n * cout * g.p();
    gemm<T>(cout, g.p(), g.k(), weight.ptr(), col.data(), dst, false);
    if (!bias.empty()) {
      for (std::size_t co = 0; co < cout; ++co) {
        const T bv = bias[co];
        T* row = dst + co * g.p();
        for (std::size_t i = 0; i < g.p(); ++i) row[i] += bv;
      }
    }
  }
  check_finite_debug(out, "conv2d");
  return out;
}

template <typename T>
BasicTensor<T> conv2d_grad_input(const BasicTensor<T>& grad_out, const BasicTensor<T>& weight,
                                 const Shape& input_shape, const ConvSpec& spec) {
  const Shape expect = conv2d_output_shape(input_shape, weight.shape(), spec);
  require_same_shape("conv2d_grad_input", grad_out.shape(), expect);
  const ConvGeometry g{input_shape[1], input_shape[2], input_shape[3], weight.dim(2), weight.dim(3), expect[2],
                       expect[3]};
  const std::size_t cout = weight.dim(0);
  const BasicTensor<T> wt = transpose2d(weight.ptr(), cout, g.k());
  BasicTensor<T> dx(input_shape);
  std::vector<T> col(g.k() * g.p());
  for (std::size_t n = 0; n < input_shape[0]; ++n) {
    gemm<T>(g.k(), g.p(), cout, wt.ptr(), grad_out.ptr() + n * cout * g.p(), col.data(), false);
    col2im(col.data(), g, spec, dx.ptr() + n * g.cin * g.h * g.w);
  }
  return dx;
}

template <typename T>
BasicTensor<T> conv2d_grad_weight(const BasicTensor<T>& grad_out, const BasicTensor<T>& x,
                                  const Shape& weight_shape, const ConvSpec& spec) {
  const Shape expect = conv2d_output_shape(x.shape(), weight_shape, spec);
  require_same_shape("conv2d_grad_weight", grad_out.shape(), expect);
  const ConvGeometry g{x.dim(1), x.dim(2), x.dim(3), weight_shape[2], weight_shape[3], expect[2], expect[3]};
  const std::size_t cout = weight_shape[0];
  // dW^T (K x C_out) = sum_n col_n (K x P) * g_n^T (P x C_out)
  BasicTensor<T> dwt(Shape{g.k(), cout});
  std::vector<T> col(g.k() * g.p());
  for (std::size_t n = 0; n < x.dim(0); ++n) {
    im2col(x.ptr() + n * g.cin * g.h * g.w, g, spec, col.data());
    const BasicTensor<T> gt = transpose2d(grad_out.ptr() + n * cout * g.p(), cout, g.p());
    gemm<T>(g.k(), cout, g.p(), col.data(), gt.ptr(), dwt.ptr(), n > 0);
  }
  return transpose2d(dwt.ptr(), g.k(), cout).reshaped(weight_shape);
}

template <typename T>
BasicTensor<T> channel_sum(const BasicTensor<T>& x) {
  if (x.rank() != 4) throw DimensionError("channel_sum", "rank", "expected NCHW, got " + x.shape().to_string());
  const std::size_t c = x.dim(1);
  const std::size_t hw = x.dim(2) * x.dim(3);
  std::vector<double> acc(c, 0.0);
  for (std::size_t n = 0; n < x.dim(0); ++n) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const T* p = x.ptr() + (n * c + ch) * hw;
      double s = 0;
      for (std::size_t i = 0; i < hw; ++i) s += p[i];
      acc[ch] += s;
    }
  }
  BasicTensor<T> out(Shape{c});
  for (std::size_t ch = 0; ch < c; ++ch) out[ch] = static_cast<T>(acc[ch]);
  return out;
}

template <typename T>
BasicTensor<T> conv_transpose2d(const BasicTensor<T>& x, const BasicTensor<T>& weight, const BasicTensor<T>& bias,
                                const ConvSpec& spec) {
  const Shape out_shape = conv_transpose2d_output_shape(x.shape(), weight.shape(), spec);
  if (!bias.empty() && (bias.rank() != 1 || bias.dim(0) != weight.dim(1))) {
    throw DimensionError("conv_transpose2d", "bias",
                         "expected (" + std::to_string(weight.dim(1)) + "), got " + bias.shape().to_string());
  }
  // The transposed conv is conv2d's input adjoint, with roles of the weight's
  // channel axes as stored: weight.dim(0) is the side x lives on.
  ConvSpec fwd = spec;
  fwd.output_padding = 0;
  const Shape check = conv2d_output_shape(
      Shape{out_shape[0], weight.dim(1), out_shape[2], out_shape[3]},
      Shape{weight.dim(0), weight.dim(1), weight.dim(2), weight.dim(3)}, fwd);
  if (check[2] != x.dim(2) || check[3] != x.dim(3)) {
    throw DimensionError("conv_transpose2d", "height/width", "inconsistent stride/padding for output " +
                                                                 out_shape.to_string());
  }
  BasicTensor<T> out = conv2d_grad_input(x, weight, out_shape, fwd);
  if (!bias.empty()) {
    const std::size_t hw = out_shape[2] * out_shape[3];
    for (std::size_t n = 0; n < out_shape[0]; ++n) {
      for (std::size_t c = 0; c < out_shape[1]; ++c) {
        T* p = out.ptr() + (n * out_shape[1] + c) * hw;
        const T bv = bias[c];
        for (std::size_t i = 0; i < hw; ++i) p[i] += bv;
      }
    }
  }
  check_finite_debug(out, "conv_transpose2d");
  return out;
}

template <typename T>
BasicTensor<T> conv_transpose2d_grad_input(const BasicTensor<T>& grad_out, const BasicTensor<T>& weight,
                                           const ConvSpec& spec) {
  ConvSpec fwd = spec;
  fwd.output_padding = 0;
  return conv2d(grad_out, weight, BasicTensor<T>(), fwd);
}

template <typename T>
BasicTensor<T> conv_transpose2d_grad_weight(const BasicTensor<T>& grad_out, const BasicTensor<T>& x,
                                            const Shape& weight_shape, const ConvSpec& spec) {
  ConvSpec fwd = spec;
  fwd.output_padding = 0;
  return conv2d_grad_weight(x, grad_out, weight_shape, fwd);
}

template <typename T>
InstanceNormResult<T> instance_norm(const BasicTensor<T>& x, const BasicTensor<T>& gamma, const BasicTensor<T>& beta,
                                    T eps) {
  if (x.rank() != 4) throw DimensionError("instance_norm", "rank", "expected NCHW, got " + x.shape().to_string());
  const std::size_t c = x.dim(1);
  if (gamma.size() != c || beta.size() != c) {
    throw DimensionError("instance_norm", "channels", "input has " + std::to_string(c) + ", gamma/beta have " +
                                                          std::to_string(gamma.size()) + "/" +
                                                          std::to_string(beta.size()));
  }
  if (!(eps > T(0))) throw NumericError("instance_norm: eps must be positive");
  const std::size_t hw = x.dim(2) * x.dim(3);
  InstanceNormResult<T> r{BasicTensor<T>(x.shape()), BasicTensor<T>(x.shape()), std::vector<T>(x.dim(0) * c)};
  for (std::size_t n = 0; n < x.dim(0); ++n) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const std::size_t off = (n * c + ch) * hw;
      const T* src = x.ptr() + off;
      double sum = 0;
      for (std::size_t i = 0; i < hw; ++i) sum += src[i];
      const double mu = sum / static_cast<double>(hw);
      double sq = 0;
      for (std::size_t i = 0; i < hw; ++i) {
        const double d = src[i] - mu;
        sq += d * d;
      }
      const double var = sq / static_cast<double>(hw);
      const double inv = 1.0 / std::sqrt(var + static_cast<double>(eps));
      r.inv_std[n * c + ch] = static_cast<T>(inv);
      T* xh = r.normalized.ptr() + off;
      T* y = r.output.ptr() + off;
      const T g = gamma[ch];
      const T b = beta[ch];
      for (std::size_t i = 0; i < hw; ++i) {
        xh[i] = static_cast<T>((src[i] - mu) * inv);
        y[i] = xh[i] * g + b;
      }
    }
  }
  check_finite_debug(r.output, "instance_norm");
  return r;
}

template <typename T>
InstanceNormGrads<T> instance_norm_backward(const BasicTensor<T>& grad_out, const InstanceNormResult<T>& fwd,
                                            const BasicTensor<T>& gamma) {
  require_same_shape("instance_norm_backward", grad_out.shape(), fwd.normalized.shape());
  const Shape& s = grad_out.shape();
  const std::size_t c = s[1];
  const std::size_t hw = s[2] * s[3];
  InstanceNormGrads<T> g{BasicTensor<T>(s), BasicTensor<T>(Shape{c}), BasicTensor<T>(Shape{c})};
  std::vector<double> dgamma(c, 0.0), dbeta(c, 0.0);
  for (std::size_t n = 0; n < s[0]; ++n) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const std::size_t off = (n * c + ch) * hw;
      const T* dy = grad_out.ptr() + off;
      const T* xh = fwd.normalized.ptr() + off;
      double sum_dy = 0, sum_dy_xh = 0;
      for (std::size_t i = 0; i < hw; ++i) {
        sum_dy += dy[i];
        sum_dy_xh += static_cast<double>(dy[i]) * xh[i];
      }
      dgamma[ch] += sum_dy_xh;
      dbeta[ch] += sum_dy;
      const double gm = gamma[ch];
      const double inv = fwd.inv_std[n * c + ch];
      const double m = static_cast<double>(hw);
      const double mean_dxh = gm * sum_dy / m;
      const double mean_dxh_xh = gm * sum_dy_xh / m;
      T* dx = g.input.ptr() + off;
      for (std::size_t i = 0; i < hw; ++i) {
        dx[i] = static_cast<T>(inv * (gm * dy[i] - mean_dxh - xh[i] * mean_dxh_xh));
      }
    }
  }
  for (std::size_t ch = 0; ch < c; ++ch) {
    g.gamma[ch] = static_cast<T>(dgamma[ch]);
    g.beta[ch] = static_cast<T>(dbeta[ch]);
  }
  return g;
}

template <typename T>
BasicTensor<T> activate(const BasicTensor<T>& x, Activation kind, T alpha) {
  BasicTensor<T> y(x.shape());
  const T* src = x.ptr();
  T* dst = y.ptr();
  const std::size_t n = x.size();
  switch (kind) {
    case Activation::identity:
      std::copy(src, src + n, dst);
      break;
    case Activation::relu:
      for (std::size_t i = 0; i < n; ++i) dst[i] = src[i] > T(0) ? src[i] : T(0);
      break;
    case Activation::leaky_relu:
      for (std::size_t i = 0; i < n; ++i) dst[i] = src[i] > T(0) ? src[i] : alpha * src[i];
      break;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < n; ++i) {
        const T v = src[i];
        if (v >= T(0)) {
          dst[i] = T(1) / (T(1) + std::exp(-v));
        } else {
          const T e = std::exp(v);
          dst[i] = e / (T(1) + e);
        }
      }
      break;
    case Activation::tanh:
      for (std::size_t i = 0; i < n; ++i) dst[i] = std::tanh(src[i]);
      break;
  }
  return y;
}

template <typename T>
BasicTensor<T> activate_backward(const BasicTensor<T>& grad_out, const BasicTensor<T>& x, const BasicTensor<T>& y,
                                 Activation kind, T alpha) {
  require_same_shape("activate_backward", grad_out.shape(), x.shape());
  BasicTensor<T> dx(x.shape());
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    T d = 1;
    switch (kind) {
      case Activation::identity:
        d = 1;
        break;
      case Activation::relu:
        d = x[i] > T(0) ? T(1) : T(0);
        break;
      case Activation::leaky_relu:
        d = x[i] > T(0) ? T(1) : alpha;
        break;
      case Activation::sigmoid:
        d = y[i] * (T(1) - y[i]);
        break;
      case Activation::tanh:
        d = T(1) - y[i] * y[i];
        break;
    }
    dx[i] = grad_out[i] * d;
  }
  return dx;
}

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  return binary("add", a, b, [](T u, T v) { return u + v; });
}
template <typename T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  return binary("sub", a, b, [](T u, T v) { return u - v; });
}
template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  return binary("mul", a, b, [](T u, T v) { return u * v; });
}
template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& a, T s) {
  BasicTensor<T> out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * s;
  return out;
}

template <typename T>
T mean(const BasicTensor<T>& a) {
  if (a.empty()) throw DimensionError("mean", "numel", "empty tensor");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i];
  return static_cast<T>(s / static_cast<double>(a.size()));
}

template <typename T>
T l1_mean(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape("l1_mean", a.shape(), b.shape());
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(static_cast<double>(a[i]) - b[i]);
  return static_cast<T>(s / static_cast<double>(a.size()));
}

template <typename T>
T l2_mean(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape("l2_mean", a.shape(), b.shape());
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    s += d * d;
  }
  return static_cast<T>(s / static_cast<double>(a.size()));
}

#define POL_INSTANTIATE_KERNELS(T)                                                                            \
  template void gemm<T>(std::size_t, std::size_t, std::size_t, const T*, const T*, T*, bool);                 \
  template BasicTensor<T> conv2d(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,          \
                                 const ConvSpec&);                                                            \
  template BasicTensor<T> conv2d_grad_input(const BasicTensor<T>&, const BasicTensor<T>&, const Shape&,        \
                                            const ConvSpec&);                                                 \
  template BasicTensor<T> conv2d_grad_weight(const BasicTensor<T>&, const BasicTensor<T>&, const Shape&,       \
                                             const ConvSpec&);                                                \
  template BasicTensor<T> channel_sum(const BasicTensor<T>&);                                                 \
  template BasicTensor<T> conv_transpose2d(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&, \
                                           const ConvSpec&);                                                  \
  template BasicTensor<T> conv_transpose2d_grad_input(const BasicTensor<T>&, const BasicTensor<T>&,            \
                                                      const ConvSpec&);                                       \
  template BasicTensor<T> conv_transpose2d_grad_weight(const BasicTensor<T>&, const BasicTensor<T>&,           \
                                                       const Shape&, const ConvSpec&);                        \
  template InstanceNormResult<T> instance_norm(const BasicTensor<T>&, const BasicTensor<T>&,                   \
                                               const BasicTensor<T>&, T);                                     \
  template InstanceNormGrads<T> instance_norm_backward(const BasicTensor<T>&, const InstanceNormResult<T>&,    \
                                                       const BasicTensor<T>&);                                \
  template BasicTensor<T> activate(const BasicTensor<T>&, Activation, T);                                     \
  template BasicTensor<T> activate_backward(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&, \
                                            Activation, T);                                                   \
  template BasicTensor<T> add(const BasicTensor<T>&, const BasicTensor<T>&);                                  \
  template BasicTensor<T> sub(const BasicTensor<T>&, const BasicTensor<T>&);                                  \
  template BasicTensor<T> mul(const BasicTensor<T>&, const BasicTensor<T>&);                                  \
  template BasicTensor<T> scale(const BasicTensor<T>&, T);                                                    \
  template T mean(const BasicTensor<T>&);                                                                     \
  template T l1_mean(const BasicTensor<T>&, const BasicTensor<T>&);                                           \
  template T l2_mean(const BasicTensor<T>&, const BasicTensor<T>&);

POL_INSTANTIATE_KERNELS(float)
POL_INSTANTIATE_KERNELS(double)

#undef POL_INSTANTIATE_KERNELS

}  // namespace pol
