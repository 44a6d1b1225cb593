#pragma once

// Forward and adjoint numerical kernels over NCHW tensors. Every kernel is
// instantiated for float (training) and double (oracle precision). Kernels
// never modify their inputs.

#include <cstddef>

#include "pol/tensor.hpp"

namespace pol {

enum class PadMode { zeros, reflect };

struct ConvSpec {
  std::size_t stride = 1;
  std::size_t padding = 0;
  // Extra rows/columns appended to the output of a transposed convolution,
  // used to make a stride-2 transposed conv exactly double its input.
  std::size_t output_padding = 0;
  PadMode pad_mode = PadMode::zeros;
};

// weight is (C_out, C_in, kH, kW) and bias is (C_out) or empty.
template <typename T>
struct ConvParams {
  BasicTensor<T> weight;
  BasicTensor<T> bias;
  ConvSpec spec;
};

enum class Activation { identity, relu, leaky_relu, sigmoid, tanh };

// Shape algebra. H_out = (H + 2 pad - kH) / stride + 1, must divide exactly.
Shape conv2d_output_shape(const Shape& x, const Shape& weight, const ConvSpec& spec);
// H_out = (H - 1) stride - 2 pad + kH + output_padding. x carries weight.dim(0) channels.
Shape conv_transpose2d_output_shape(const Shape& x, const Shape& weight, const ConvSpec& spec);

// Cross-correlation (no kernel flip) with per-output-channel bias.
template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& x, const BasicTensor<T>& weight, const BasicTensor<T>& bias,
                      const ConvSpec& spec);

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& x, const ConvParams<T>& p) {
  return conv2d(x, p.weight, p.bias, p.spec);
}

// Adjoint of conv2d with respect to its input; input_shape fixes the extent
// when several input sizes map to the same output size.
template <typename T>
BasicTensor<T> conv2d_grad_input(const BasicTensor<T>& grad_out, const BasicTensor<T>& weight,
                                 const Shape& input_shape, const ConvSpec& spec);

template <typename T>
BasicTensor<T> conv2d_grad_weight(const BasicTensor<T>& grad_out, const BasicTensor<T>& x,
                                  const Shape& weight_shape, const ConvSpec& spec);

// Sum over (N, H, W) per channel.
template <typename T>
BasicTensor<T> channel_sum(const BasicTensor<T>& x);

// Adjoint of conv2d with the same weight: maps weight.dim(0) channels to
// weight.dim(1) channels. bias has weight.dim(1) entries or is empty. Only
// zero padding is meaningful.
template <typename T>
BasicTensor<T> conv_transpose2d(const BasicTensor<T>& x, const BasicTensor<T>& weight,
                                const BasicTensor<T>& bias, const ConvSpec& spec);

template <typename T>
BasicTensor<T> conv_transpose2d(const BasicTensor<T>& x, const ConvParams<T>& p) {
  return conv_transpose2d(x, p.weight, p.bias, p.spec);
}

template <typename T>
BasicTensor<T> conv_transpose2d_grad_input(const BasicTensor<T>& grad_out, const BasicTensor<T>& weight,
                                           const ConvSpec& spec);

template <typename T>
BasicTensor<T> conv_transpose2d_grad_weight(const BasicTensor<T>& grad_out, const BasicTensor<T>& x,
                                            const Shape& weight_shape, const ConvSpec& spec);

// Per-(sample, channel) normalization over the spatial axes.
template <typename T>
struct InstanceNormResult {
  BasicTensor<T> output;
  BasicTensor<T> normalized;  // pre-affine values
  std::vector<T> inv_std;     // one per (n, c)
};

template <typename T>
InstanceNormResult<T> instance_norm(const BasicTensor<T>& x, const BasicTensor<T>& gamma,
                                    const BasicTensor<T>& beta, T eps = T(1e-5));

template <typename T>
struct InstanceNormGrads {
  BasicTensor<T> input;
  BasicTensor<T> gamma;
  BasicTensor<T> beta;
};

template <typename T>
InstanceNormGrads<T> instance_norm_backward(const BasicTensor<T>& grad_out, const InstanceNormResult<T>& fwd,
                                            const BasicTensor<T>& gamma);

template <typename T>
BasicTensor<T> activate(const BasicTensor<T>& x, Activation kind, T alpha = T(0.2));

// Gradient given the forward input x and output y.
template <typename T>
BasicTensor<T> activate_backward(const BasicTensor<T>& grad_out, const BasicTensor<T>& x,
                                 const BasicTensor<T>& y, Activation kind, T alpha = T(0.2));

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& a, T s);

// Reductions accumulate in double.
template <typename T>
T mean(const BasicTensor<T>& a);
template <typename T>
T l1_mean(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
T l2_mean(const BasicTensor<T>& a, const BasicTensor<T>& b);

// C[M x N] (+)= A[M x K] * B[K x N], all row-major and contiguous.
template <typename T>
void gemm(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate);

}  // namespace pol
