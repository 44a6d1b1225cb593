#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pol/autograd.hpp"

namespace pol {

struct GradCheckEntry {
  std::string name;
  std::size_t coords_checked = 0;
  // max |analytic - numeric| over the sampled coordinates, less abs_floor,
  // divided by the larger of max |analytic| and max |numeric| over the same
  // coordinates.
  double max_rel_error = 0;
  double max_abs_error = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error() const;
};

struct GradCheckOptions {
  double eps = 1e-3;
  std::size_t max_coords = 64;
  std::uint64_t seed = 0;
  // Differences this small count as zero. Set it to the resolution of the
  // central difference so tensors whose true gradient is zero (a bias in
  // front of a normalization) do not fail on rounding noise.
  double abs_floor = 0;
};

// Builds a scalar loss on a fresh tape.
template <typename T>
using LossBuilder = std::function<Var<T>(Tape<T>&)>;

// Compares backward() against central differences (f(p+eps) - f(p-eps)) / 2eps
// on a random subsample of at most max_coords coordinates per parameter.
// Throws NumericError when two evaluations at the same point disagree.
template <typename T>
GradCheckReport finite_diff_check(const LossBuilder<T>& loss, const ParameterRefs<T>& params,
                                  const GradCheckOptions& options = {});

// Analytic float gradients against central differences of the same graph
// evaluated in double. ref_params must mirror params one to one; their values
// are overwritten with the float weights first. f32 differences cannot resolve
// 1e-3 on deep graphs, this can. abs_floor is raised to the f32 rounding
// level of the largest analytic gradient.
GradCheckReport finite_diff_check_f64_reference(const LossBuilder<float>& loss, const ParameterRefs<float>& params,
                                                const LossBuilder<double>& ref_loss,
                                                const ParameterRefs<double>& ref_params,
                                                const GradCheckOptions& options = {});

// Resolution of a central difference with step eps on a loss of this size.
template <typename T>
double central_difference_noise(double loss, double eps);

}  // namespace pol
