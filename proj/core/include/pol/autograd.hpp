#pragma once

// Reverse-mode differentiation. A Tape records primitive applications in
// topological order; backward() walks them once in reverse. A Parameter that
// enters a tape is materialized as a single leaf, so every use of it (for
// instance the n applications of an iterated block) accumulates into the same
// gradient buffer before being added to Parameter::grad.

#include <cstddef>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pol/kernels.hpp"
#include "pol/tensor.hpp"

namespace pol {

template <typename T>
struct Parameter {
  std::string name;
  BasicTensor<T> value;
  BasicTensor<T> grad;
  bool frozen = false;

  Parameter() = default;
  Parameter(std::string n, BasicTensor<T> v, bool is_frozen = false)
      : name(std::move(n)), value(std::move(v)), grad(value.shape()), frozen(is_frozen) {}

  void zero_grad() { grad = BasicTensor<T>(value.shape()); }
};

template <typename T>
using ParameterRefs = std::vector<Parameter<T>*>;

template <typename T>
class Tape;

template <typename T>
class Var {
 public:
  Var() = default;
  Var(Tape<T>* tape, std::size_t id) : tape_(tape), id_(id) {}

  bool valid() const noexcept { return tape_ != nullptr; }
  Tape<T>& tape() const { return *tape_; }
  std::size_t id() const noexcept { return id_; }
  const BasicTensor<T>& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;

 private:
  Tape<T>* tape_ = nullptr;
  std::size_t id_ = 0;
};

template <typename T>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const BasicTensor<T>& grad_out)>;

  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool grad_enabled() const noexcept { return grad_enabled_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  Var<T> constant(BasicTensor<T> value);
  // Leaf for a parameter; tracked unless the parameter is frozen.
  Var<T> param(Parameter<T>& p);
  // Leaf with explicit tracking, e.g. a discriminator read during a
  // generator step must not collect gradients.
  Var<T> param(Parameter<T>& p, bool track);

  // Records a primitive. `backward` is dropped when no input needs a gradient.
  Var<T> record(BasicTensor<T> value, bool requires_grad, BackwardFn backward);

  const BasicTensor<T>& value(std::size_t id) const;
  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }

  // Adds g into the gradient buffer of node id (no-op for untracked nodes).
  void accumulate(std::size_t id, const BasicTensor<T>& g);
  void accumulate(std::size_t id, BasicTensor<T>&& g);

  // Seeds d(loss)/d(loss) = 1 and propagates. A tape can be consumed once.
  void backward(Var<T> loss);

 private:
  struct Node {
    BasicTensor<T> value;
    const BasicTensor<T>* external = nullptr;
    BasicTensor<T> grad;
    bool requires_grad = false;
    BackwardFn backward;
    Parameter<T>* param = nullptr;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter<T>*, std::size_t> param_nodes_;
  bool grad_enabled_ = true;
  bool consumed_ = false;
};

template <typename T>
const BasicTensor<T>& Var<T>::value() const {
  return tape_->value(id_);
}

template <typename T>
bool Var<T>::requires_grad() const {
  return tape_->requires_grad(id_);
}

// Differentiable primitives. Scalar results have shape (1).
namespace ag {

template <typename T>
Var<T> conv2d(Var<T> x, Var<T> weight, Var<T> bias, const ConvSpec& spec);
template <typename T>
Var<T> conv_transpose2d(Var<T> x, Var<T> weight, Var<T> bias, const ConvSpec& spec);
template <typename T>
Var<T> instance_norm(Var<T> x, Var<T> gamma, Var<T> beta, T eps = T(1e-5));
template <typename T>
Var<T> activation(Var<T> x, Activation kind, T alpha = T(0.2));

template <typename T>
Var<T> add(Var<T> a, Var<T> b);
template <typename T>
Var<T> sub(Var<T> a, Var<T> b);
template <typename T>
Var<T> mul(Var<T> a, Var<T> b);
template <typename T>
Var<T> scale(Var<T> a, T s);
// Same-shape weighted sum: sum_i w_i * v_i.
template <typename T>
Var<T> weighted_sum(const std::vector<Var<T>>& vars, const std::vector<T>& weights);

template <typename T>
Var<T> sum(Var<T> a);
template <typename T>
Var<T> mean(Var<T> a);
template <typename T>
Var<T> l1_mean(Var<T> a, Var<T> b);
template <typename T>
Var<T> l2_mean(Var<T> a, Var<T> b);
// mean(log(1 + exp(sign * a))), evaluated without overflow.
template <typename T>
Var<T> softplus_mean(Var<T> a, T sign);
// mean((a - target)^2) against a constant target value.
template <typename T>
Var<T> square_error_mean(Var<T> a, T target);
// sum(a * direction) for a constant direction.
template <typename T>
Var<T> project(Var<T> a, const BasicTensor<T>& direction);

template <typename T>
Var<T> detach(Var<T> a) {
  return a.tape().constant(a.value());
}

}  // namespace ag

// Sum of squared gradient entries over the given parameters, square-rooted.
template <typename T>
double grad_norm(const ParameterRefs<T>& params);

template <typename T>
void zero_grads(const ParameterRefs<T>& params) {
  for (auto* p : params) p->zero_grad();
}

}  // namespace pol
