#include "pol/autograd.hpp"

#include <cmath>
#include <string>

namespace pol {

template <typename T>
Var<T> Tape<T>::constant(BasicTensor<T> value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var<T>(this, nodes_.size() - 1);
}

template <typename T>
Var<T> Tape<T>::param(Parameter<T>& p) {
  return param(p, !p.frozen);
}

template <typename T>
Var<T> Tape<T>::param(Parameter<T>& p, bool track) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) {
    const Node& existing = nodes_[it->second];
    if (existing.requires_grad == (track && grad_enabled_)) return Var<T>(this, it->second);
  }
  Node n;
  n.external = &p.value;
  n.requires_grad = track && grad_enabled_;
  n.param = n.requires_grad ? &p : nullptr;
  nodes_.push_back(std::move(n));
  const std::size_t id = nodes_.size() - 1;
  param_nodes_[&p] = id;
  return Var<T>(this, id);
}

template <typename T>
Var<T> Tape<T>::record(BasicTensor<T> value, bool requires_grad, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad && grad_enabled_;
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var<T>(this, nodes_.size() - 1);
}

template <typename T>
const BasicTensor<T>& Tape<T>::value(std::size_t id) const {
  const Node& n = nodes_.at(id);
  return n.external ? *n.external : n.value;
}

template <typename T>
void Tape<T>::accumulate(std::size_t id, const BasicTensor<T>& g) {
  Node& n = nodes_.at(id);
  if (!n.requires_grad) return;
  if (n.grad.empty()) {
    require_same_shape("backward", g.shape(), value(id).shape());
    n.grad = g;
    return;
  }
  require_same_shape("backward", g.shape(), n.grad.shape());
  T* dst = n.grad.ptr();
  const T* src = g.ptr();
  for (std::size_t i = 0; i < g.size(); ++i) dst[i] += src[i];
}

template <typename T>
void Tape<T>::accumulate(std::size_t id, BasicTensor<T>&& g) {
  Node& n = nodes_.at(id);
  if (!n.requires_grad) return;
  if (n.grad.empty()) {
    require_same_shape("backward", g.shape(), value(id).shape());
    n.grad = std::move(g);
    return;
  }
  accumulate(id, static_cast<const BasicTensor<T>&>(g));
}

template <typename T>
void Tape<T>::backward(Var<T> loss) {
  if (consumed_) throw Error("backward: tape already consumed");
  if (loss.valid() && &loss.tape() != this) throw Error("backward: loss belongs to another tape");
  if (value(loss.id()).size() != 1) {
    throw DimensionError("backward", "loss", "expected a scalar, got " + value(loss.id()).shape().to_string());
  }
  consumed_ = true;
  if (!nodes_[loss.id()].requires_grad) return;
  accumulate(loss.id(), BasicTensor<T>(value(loss.id()).shape(), T(1)));
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad.empty()) continue;
    if (n.backward) {
      BasicTensor<T> g = std::move(n.grad);
      n.backward(*this, g);
      n.grad = BasicTensor<T>();
    } else if (n.param != nullptr) {
      Parameter<T>& p = *n.param;
      if (p.grad.shape() != p.value.shape()) p.zero_grad();
      T* dst = p.grad.ptr();
      const T* src = n.grad.ptr();
      for (std::size_t k = 0; k < n.grad.size(); ++k) dst[k] += src[k];
      n.grad = BasicTensor<T>();
    }
  }
}

namespace ag {
namespace {

template <typename T>
Tape<T>& tape_of(Var<T> a) {
  if (!a.valid()) throw Error("autograd: operation on an empty Var");
  return a.tape();
}

template <typename T>
void same_tape(Var<T> a, Var<T> b) {
  if (&tape_of(a) != &tape_of(b)) throw Error("autograd: operands recorded on different tapes");
}

template <typename T>
BasicTensor<T> scalar(T v) {
  return BasicTensor<T>(Shape{1}, v);
}

}  // namespace

template <typename T>
Var<T> conv2d(Var<T> x, Var<T> weight, Var<T> bias, const ConvSpec& spec) {
  same_tape(x, weight);
  Tape<T>& t = x.tape();
  const bool has_bias = bias.valid();
  BasicTensor<T> out = pol::conv2d(x.value(), weight.value(), has_bias ? bias.value() : BasicTensor<T>(), spec);
  const bool rg = x.requires_grad() || weight.requires_grad() || (has_bias && bias.requires_grad());
  const std::size_t xi = x.id(), wi = weight.id(), bi = has_bias ? bias.id() : 0;
  return t.record(std::move(out), rg, [xi, wi, bi, has_bias, spec](Tape<T>& tp, const BasicTensor<T>& g) {
    const BasicTensor<T>& xv = tp.value(xi);
    const BasicTensor<T>& wv = tp.value(wi);
    if (tp.requires_grad(xi)) tp.accumulate(xi, conv2d_grad_input(g, wv, xv.shape(), spec));
    if (tp.requires_grad(wi)) tp.accumulate(wi, conv2d_grad_weight(g, xv, wv.shape(), spec));
    if (has_bias && tp.requires_grad(bi)) tp.accumulate(bi, channel_sum(g));
  });
}

template <typename T>
Var<T> conv_transpose2d(Var<T> x, Var<T> weight, Var<T> bias, const ConvSpec& spec) {
  same_tape(x, weight);
  Tape<T>& t = x.tape();
  const bool has_bias = bias.valid();
  BasicTensor<T> out =
      pol::conv_transpose2d(x.value(), weight.value(), has_bias ? bias.value() : BasicTensor<T>(), spec);
  const bool rg = x.requires_grad() || weight.requires_grad() || (has_bias && bias.requires_grad());
  const std::size_t xi = x.id(), wi = weight.id(), bi = has_bias ? bias.id() : 0;
  return t.record(std::move(out), rg, [xi, wi, bi, has_bias, spec](Tape<T>& tp, const BasicTensor<T>& g) {
    const BasicTensor<T>& xv = tp.value(xi);
    const BasicTensor<T>& wv = tp.value(wi);
    if (tp.requires_grad(xi)) tp.accumulate(xi, conv_transpose2d_grad_input(g, wv, spec));
    if (tp.requires_grad(wi)) tp.accumulate(wi, conv_transpose2d_grad_weight(g, xv, wv.shape(), spec));
    if (has_bias && tp.requires_grad(bi)) tp.accumulate(bi, channel_sum(g));
  });
}

template <typename T>
Var<T> instance_norm(Var<T> x, Var<T> gamma, Var<T> beta, T eps) {
  same_tape(x, gamma);
  same_tape(x, beta);
  Tape<T>& t = x.tape();
  auto fwd = pol::instance_norm(x.value(), gamma.value(), beta.value(), eps);
  BasicTensor<T> out = fwd.output;
  const bool rg = x.requires_grad() || gamma.requires_grad() || beta.requires_grad();
  if (!rg || !t.grad_enabled()) return t.record(std::move(out), false, nullptr);
  fwd.output = BasicTensor<T>();
  const std::size_t xi = x.id(), gi = gamma.id(), bi = beta.id();
  return t.record(std::move(out), true,
                  [xi, gi, bi, saved = std::move(fwd)](Tape<T>& tp, const BasicTensor<T>& g) {
                    auto grads = instance_norm_backward(g, saved, tp.value(gi));
                    tp.accumulate(xi, std::move(grads.input));
                    tp.accumulate(gi, std::move(grads.gamma));
                    tp.accumulate(bi, std::move(grads.beta));
                  });
}

template <typename T>
Var<T> activation(Var<T> x, Activation kind, T alpha) {
  Tape<T>& t = tape_of(x);
  BasicTensor<T> y = activate(x.value(), kind, alpha);
  const std::size_t xi = x.id();
  const std::size_t yi = t.size();
  return t.record(std::move(y), x.requires_grad(), [xi, yi, kind, alpha](Tape<T>& tp, const BasicTensor<T>& g) {
    tp.accumulate(xi, activate_backward(g, tp.value(xi), tp.value(yi), kind, alpha));
  });
}

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  same_tape(a, b);
  const std::size_t ai = a.id(), bi = b.id();
  return a.tape().record(pol::add(a.value(), b.value()), a.requires_grad() || b.requires_grad(),
                         [ai, bi](Tape<T>& tp, const BasicTensor<T>& g) {
                           tp.accumulate(ai, g);
                           tp.accumulate(bi, g);
                         });
}

template <typename T>
Var<T> sub(Var<T> a, Var<T> b) {
  same_tape(a, b);
  const std::size_t ai = a.id(), bi = b.id();
  return a.tape().record(pol::sub(a.value(), b.value()), a.requires_grad() || b.requires_grad(),
                         [ai, bi](Tape<T>& tp, const BasicTensor<T>& g) {
                           tp.accumulate(ai, g);
                           if (tp.requires_grad(bi)) tp.accumulate(bi, pol::scale(g, T(-1)));
                         });
}

template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
  same_tape(a, b);
  const std::size_t ai = a.id(), bi = b.id();
  return a.tape().record(pol::mul(a.value(), b.value()), a.requires_grad() || b.requires_grad(),
                         [ai, bi](Tape<T>& tp, const BasicTensor<T>& g) {
                           if (tp.requires_grad(ai)) tp.accumulate(ai, pol::mul(g, tp.value(bi)));
                           if (tp.requires_grad(bi)) tp.accumulate(bi, pol::mul(g, tp.value(ai)));
                         });
}

template <typename T>
Var<T> scale(Var<T> a, T s) {
  Tape<T>& t = tape_of(a);
  const std::size_t ai = a.id();
  return t.record(pol::scale(a.value(), s), a.requires_grad(),
                  [ai, s](Tape<T>& tp, const BasicTensor<T>& g) { tp.accumulate(ai, pol::scale(g, s)); });
}

template <typename T>
Var<T> weighted_sum(const std::vector<Var<T>>& vars, const std::vector<T>& weights) {
  if (vars.empty() || vars.size() != weights.size()) {
    throw DimensionError("weighted_sum", "terms", "need matching non-empty var/weight lists");
  }
  Tape<T>& t = tape_of(vars[0]);
  BasicTensor<T> out(vars[0].shape());
  bool rg = false;
  std::vector<std::size_t> ids;
  for (std::size_t k = 0; k < vars.size(); ++k) {
    same_tape(vars[0], vars[k]);
    require_same_shape("weighted_sum", out.shape(), vars[k].shape());
    const BasicTensor<T>& v = vars[k].value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += weights[k] * v[i];
    rg = rg || vars[k].requires_grad();
    ids.push_back(vars[k].id());
  }
  return t.record(std::move(out), rg, [ids, weights](Tape<T>& tp, const BasicTensor<T>& g) {
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (tp.requires_grad(ids[k])) tp.accumulate(ids[k], pol::scale(g, weights[k]));
    }
  });
}

template <typename T>
Var<T> sum(Var<T> a) {
  Tape<T>& t = tape_of(a);
  const BasicTensor<T>& v = a.value();
  double s = 0;
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i];
  const std::size_t ai = a.id();
  return t.record(scalar(static_cast<T>(s)), a.requires_grad(), [ai](Tape<T>& tp, const BasicTensor<T>& g) {
    tp.accumulate(ai, BasicTensor<T>(tp.value(ai).shape(), g[0]));
  });
}

template <typename T>
Var<T> mean(Var<T> a) {
  Tape<T>& t = tape_of(a);
  const std::size_t ai = a.id();
  return t.record(scalar(pol::mean(a.value())), a.requires_grad(), [ai](Tape<T>& tp, const BasicTensor<T>& g) {
    const auto& v = tp.value(ai);
    tp.accumulate(ai, BasicTensor<T>(v.shape(), static_cast<T>(g[0] / static_cast<double>(v.size()))));
  });
}

template <typename T>
Var<T> l1_mean(Var<T> a, Var<T> b) {
  same_tape(a, b);
  const std::size_t ai = a.id(), bi = b.id();
  return a.tape().record(scalar(pol::l1_mean(a.value(), b.value())), a.requires_grad() || b.requires_grad(),
                         [ai, bi](Tape<T>& tp, const BasicTensor<T>& g) {
                           const auto& av = tp.value(ai);
                           const auto& bv = tp.value(bi);
                           const T k = static_cast<T>(g[0] / static_cast<double>(av.size()));
                           BasicTensor<T> da(av.shape());
                           for (std::size_t i = 0; i < av.size(); ++i) {
                             const T d = av[i] - bv[i];
                             da[i] = d > T(0) ? k : (d < T(0) ? -k : T(0));
                           }
                           if (tp.requires_grad(bi)) tp.accumulate(bi, pol::scale(da, T(-1)));
                           tp.accumulate(ai, std::move(da));
                         });
}

template <typename T>
Var<T> l2_mean(Var<T> a, Var<T> b) {
  same_tape(a, b);
  const std::size_t ai = a.id(), bi = b.id();
  return a.tape().record(scalar(pol::l2_mean(a.value(), b.value())), a.requires_grad() || b.requires_grad(),
                         [ai, bi](Tape<T>& tp, const BasicTensor<T>& g) {
                           const auto& av = tp.value(ai);
                           const auto& bv = tp.value(bi);
                           const T k = static_cast<T>(2.0 * g[0] / static_cast<double>(av.size()));
                           BasicTensor<T> da(av.shape());
                           for (std::size_t i = 0; i < av.size(); ++i) da[i] = k * (av[i] - bv[i]);
                           if (tp.requires_grad(bi)) tp.accumulate(bi, pol::scale(da, T(-1)));
                           tp.accumulate(ai, std::move(da));
                         });
}

template <typename T>
Var<T> softplus_mean(Var<T> a, T sign) {
  Tape<T>& t = tape_of(a);
  const BasicTensor<T>& v = a.value();
  double s = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double z = static_cast<double>(sign) * v[i];
    s += z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  }
  const std::size_t ai = a.id();
  return t.record(scalar(static_cast<T>(s / static_cast<double>(v.size()))), a.requires_grad(),
                  [ai, sign](Tape<T>& tp, const BasicTensor<T>& g) {
                    const auto& av = tp.value(ai);
                    const double k = g[0] / static_cast<double>(av.size());
                    BasicTensor<T> da(av.shape());
                    for (std::size_t i = 0; i < av.size(); ++i) {
                      const double z = static_cast<double>(sign) * av[i];
                      const double sig = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
                      da[i] = static_cast<T>(k * sign * sig);
                    }
                    tp.accumulate(ai, std::move(da));
                  });
}

template <typename T>
Var<T> square_error_mean(Var<T> a, T target) {
  Tape<T>& t = tape_of(a);
  const BasicTensor<T>& v = a.value();
  double s = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = static_cast<double>(v[i]) - target;
    s += d * d;
  }
  const std::size_t ai = a.id();
  return t.record(scalar(static_cast<T>(s / static_cast<double>(v.size()))), a.requires_grad(),
                  [ai, target](Tape<T>& tp, const BasicTensor<T>& g) {
                    const auto& av = tp.value(ai);
                    const T k = static_cast<T>(2.0 * g[0] / static_cast<double>(av.size()));
                    BasicTensor<T> da(av.shape());
                    for (std::size_t i = 0; i < av.size(); ++i) da[i] = k * (av[i] - target);
                    tp.accumulate(ai, std::move(da));
                  });
}

template <typename T>
Var<T> project(Var<T> a, const BasicTensor<T>& direction) {
  Tape<T>& t = tape_of(a);
  require_same_shape("project", a.shape(), direction.shape());
  const std::size_t ai = a.id();
  return t.record(scalar(pol::dot(a.value(), direction)), a.requires_grad(),
                  [ai, direction](Tape<T>& tp, const BasicTensor<T>& g) {
                    tp.accumulate(ai, pol::scale(direction, g[0]));
                  });
}

}  // namespace ag

template <typename T>
double grad_norm(const ParameterRefs<T>& params) {
  double s = 0;
  for (const auto* p : params) {
    for (std::size_t i = 0; i < p->grad.size(); ++i) {
      const double g = p->grad[i];
      s += g * g;
    }
  }
  return std::sqrt(s);
}

#define POL_INSTANTIATE_AG(T)                                                        \
  template class Tape<T>;                                                            \
  template Var<T> ag::conv2d(Var<T>, Var<T>, Var<T>, const ConvSpec&);               \
  template Var<T> ag::conv_transpose2d(Var<T>, Var<T>, Var<T>, const ConvSpec&);     \
  template Var<T> ag::instance_norm(Var<T>, Var<T>, Var<T>, T);                      \
  template Var<T> ag::activation(Var<T>, Activation, T);                             \
  template Var<T> ag::add(Var<T>, Var<T>);                                           \
  template Var<T> ag::sub(Var<T>, Var<T>);                                           \
  template Var<T> ag::mul(Var<T>, Var<T>);                                           \
  template Var<T> ag::scale(Var<T>, T);                                              \
  template Var<T> ag::weighted_sum(const std::vector<Var<T>>&, const std::vector<T>&); \
  template Var<T> ag::sum(Var<T>);                                                   \
  template Var<T> ag::mean(Var<T>);                                                  \
  template Var<T> ag::l1_mean(Var<T>, Var<T>);                                       \
  template Var<T> ag::l2_mean(Var<T>, Var<T>);                                       \
  template Var<T> ag::softplus_mean(Var<T>, T);                                      \
  template Var<T> ag::square_error_mean(Var<T>, T);                                  \
  template Var<T> ag::project(Var<T>, const BasicTensor<T>&);                        \
  template double grad_norm(const ParameterRefs<T>&);

POL_INSTANTIATE_AG(float)
POL_INSTANTIATE_AG(double)

#undef POL_INSTANTIATE_AG

}  // namespace pol
