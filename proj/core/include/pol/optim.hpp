#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "pol/autograd.hpp"

namespace pol {

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Moments are keyed by parameter name.
template <typename T>
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  const AdamConfig& config() const noexcept { return config_; }
  std::uint64_t step_count() const noexcept { return t_; }

  // Updates every non-frozen parameter, then zeroes all grads. A NaN/Inf
  // gradient aborts the step before any parameter changes.
  void step(const ParameterRefs<T>& params);

  const BasicTensor<T>* first_moment(const std::string& name) const;
  const BasicTensor<T>* second_moment(const std::string& name) const;

 private:
  struct Moments {
    BasicTensor<T> m;
    BasicTensor<T> v;
  };

  AdamConfig config_;
  std::uint64_t t_ = 0;
  std::map<std::string, Moments> state_;
};

}  // namespace pol
