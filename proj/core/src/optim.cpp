#include "pol/optim.hpp"

#include <cmath>

namespace pol {

template <typename T>
void Adam<T>::step(const ParameterRefs<T>& params) {
  for (const auto* p : params) {
    if (p->frozen) continue;
    if (!p->grad.all_finite()) throw NumericError("adam: non-finite gradient in " + p->name);
  }
  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (auto* p : params) {
    if (!p->frozen) {
      auto [it, inserted] = state_.try_emplace(p->name);
      Moments& s = it->second;
      if (inserted || s.m.shape() != p->value.shape()) {
        s.m = BasicTensor<T>(p->value.shape());
        s.v = BasicTensor<T>(p->value.shape());
      }
      if (p->grad.shape() != p->value.shape()) p->zero_grad();
      for (std::size_t i = 0; i < p->value.size(); ++i) {
        const double g = p->grad[i];
        const double m = b1 * s.m[i] + (1.0 - b1) * g;
        const double v = b2 * s.v[i] + (1.0 - b2) * g * g;
        s.m[i] = static_cast<T>(m);
        s.v[i] = static_cast<T>(v);
        const double mhat = m / c1;
        const double vhat = v / c2;
        p->value[i] = static_cast<T>(p->value[i] - config_.lr * mhat / (std::sqrt(vhat) + config_.eps));
      }
    }
    p->zero_grad();
  }
}

template <typename T>
const BasicTensor<T>* Adam<T>::first_moment(const std::string& name) const {
  auto it = state_.find(name);
  return it == state_.end() ? nullptr : &it->second.m;
}

template <typename T>
const BasicTensor<T>* Adam<T>::second_moment(const std::string& name) const {
  auto it = state_.find(name);
  return it == state_.end() ? nullptr : &it->second.v;
}

template class Adam<float>;
template class Adam<double>;

}  // namespace pol
