#pragma once

// Stability of the iterated block. For a linear residual f(x) = x + Lx the
// Jacobian product along the iteration is M_n = (I + L)^(n-1), whose
// eigenvalues are (lambda_i + 1)^(n-1). The full derivative of f^n is
// (I + L)^n; both index conventions are reported.

#include <cstdint>
#include <optional>
#include <vector>

#include "pol/eigen.hpp"
#include "pol/training.hpp"

namespace pol {

struct SpectrumSide {
  int power = 0;
  std::vector<double> direct;     // |eig((I+L)^power)|, descending
  std::vector<double> predicted;  // |lambda_i(L) + 1|^power, descending
  double max_rel_error = 0;
  bool overflow = false;  // the matrix power left the double range
};

struct SpectrumReport {
  int n = 0;
  std::size_t d = 0;
  SpectrumSide mn;    // (I+L)^(n-1)
  SpectrumSide full;  // (I+L)^n
};

SpectrumReport mn_spectrum(const Matrix& L, int n);

struct GradCurveOptions {
  ModelConfig block;  // embed_channels, expansion, norm, linear_blocks, image_size
  double init_scale = 1.0;
  std::vector<int> n_list{1, 2, 4, 8, 16};
  std::uint64_t seed = 0;
  // Replace the random linear block by L = (rho - 1) I (needs linear_blocks).
  std::optional<double> linear_rho;
};

struct GradCurveRow {
  int n = 0;
  // |d loss / d w| for the shared block (sum over all n applications).
  double grad_norm = 0;
  // Contribution of the first application only: the term that is
  // multiplied by M_n.
  double first_copy_norm = 0;
  double grad_norm_f64 = 0;
  double first_copy_norm_f64 = 0;
  // |f32 - f64| / |f64| on grad_norm.
  double f32_f64_rel_diff = 0;
  bool finite = true;
};

// Backpropagates loss = <f^n(x), u> with a fixed unit direction u through a
// single residual block, in f32 and in f64 with identical weights.
std::vector<GradCurveRow> gradient_norm_curve(const GradCurveOptions& options);

// Writes L = (rho - 1) I into a linear block: conv1 copies channels into the
// first C hidden channels, conv2 scales them back.
template <typename T>
void set_scaled_identity(ResidualBlock<T>& block, double rho);

struct InitSweepRow {
  double scale = 0;
  bool progressive = true;
  int epoch = 0;
  double psnr = 0;  // NaN once a run diverged
  bool diverged = false;
};

struct InitSweepSetup {
  const Autoencoder<float>* pretrained = nullptr;
  ModelConfig model;
  TrainConfig train;
  const ImageSet* domain_a = nullptr;
  const ImageSet* domain_b = nullptr;
  EvalPair eval;
  int epochs = 3;
};

// Short runs over {scales} x {progressive, fixed}; eval PSNR after each epoch.
std::vector<InitSweepRow> init_scale_sweep(const InitSweepSetup& setup, const std::vector<double>& scales);

}  // namespace pol
