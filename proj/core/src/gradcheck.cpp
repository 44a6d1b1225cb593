#include "pol/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace pol {
namespace {

template <typename T>
double evaluate(const LossBuilder<T>& loss) {
  Tape<T> tape(false);
  return static_cast<double>(loss(tape).value().item());
}

// Compares stored analytic gradients with central differences taken on
// ref_params under ref_loss.
template <typename R>
GradCheckReport compare(const std::vector<std::string>& names, const std::vector<std::vector<double>>& analytic,
                        const LossBuilder<R>& ref_loss, const ParameterRefs<R>& ref_params,
                        const GradCheckOptions& options) {
  std::mt19937_64 rng(options.seed);
  GradCheckReport report;
  for (std::size_t pi = 0; pi < ref_params.size(); ++pi) {
    Parameter<R>& p = *ref_params[pi];
    std::vector<std::size_t> idx(p.value.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (idx.size() > options.max_coords) {
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(options.max_coords);
      std::sort(idx.begin(), idx.end());
    }
    GradCheckEntry e;
    e.name = names[pi];
    e.coords_checked = idx.size();
    double scale = 0, worst = 0;
    for (std::size_t i : idx) {
      const R orig = p.value[i];
      const R up = static_cast<R>(orig + options.eps);
      const R down = static_cast<R>(orig - options.eps);
      p.value[i] = up;
      const double plus = evaluate(ref_loss);
      p.value[i] = down;
      const double minus = evaluate(ref_loss);
      p.value[i] = orig;
      // Divide by the step actually taken after rounding.
      const double numeric = (plus - minus) / (static_cast<double>(up) - static_cast<double>(down));
      const double a = analytic[pi][i];
      e.max_abs_error = std::max(e.max_abs_error, std::abs(a - numeric));
      worst = std::max(worst, std::abs(a - numeric) - options.abs_floor);
      scale = std::max({scale, std::abs(a), std::abs(numeric)});
    }
    e.max_rel_error = scale > 0 && worst > 0 ? worst / scale : 0.0;
    report.entries.push_back(e);
  }
  return report;
}

void check_deterministic(double base, double again) {
  if (base != again) {
    throw NumericError("finite_diff_check: loss is not deterministic (" + std::to_string(base) + " vs " +
                       std::to_string(again) + ")");
  }
}

// Runs backward once and returns the gradients, leaving p->grad as it was.
template <typename T>
std::vector<std::vector<double>> analytic_gradients(const LossBuilder<T>& loss, const ParameterRefs<T>& params) {
  std::vector<BasicTensor<T>> saved;
  for (auto* p : params) {
    saved.push_back(p->grad);
    p->zero_grad();
  }
  {
    Tape<T> tape(true);
    Var<T> l = loss(tape);
    tape.backward(l);
  }
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& g = params[i]->grad;
    out.emplace_back(g.data().begin(), g.data().end());
    params[i]->grad = std::move(saved[i]);
  }
  return out;
}

template <typename T>
std::vector<std::string> names_of(const ParameterRefs<T>& params) {
  std::vector<std::string> out;
  for (auto* p : params) out.push_back(p->name);
  return out;
}

}  // namespace

double GradCheckReport::max_rel_error() const {
  double m = 0;
  for (const auto& e : entries) m = std::max(m, e.max_rel_error);
  return m;
}

template <typename T>
double central_difference_noise(double loss, double eps) {
  // A few ulps of the loss on each side, over a 2 eps step.
  return 4.0 * std::numeric_limits<T>::epsilon() * std::max(1.0, std::abs(loss)) / eps;
}

template <typename T>
GradCheckReport finite_diff_check(const LossBuilder<T>& loss, const ParameterRefs<T>& params,
                                  const GradCheckOptions& options) {
  if (!(options.eps > 0)) throw NumericError("finite_diff_check: eps must be positive");
  check_deterministic(evaluate(loss), evaluate(loss));
  const auto analytic = analytic_gradients(loss, params);
  return compare<T>(names_of(params), analytic, loss, params, options);
}

GradCheckReport finite_diff_check_f64_reference(const LossBuilder<float>& loss, const ParameterRefs<float>& params,
                                                const LossBuilder<double>& ref_loss,
                                                const ParameterRefs<double>& ref_params,
                                                const GradCheckOptions& options) {
  if (!(options.eps > 0)) throw NumericError("finite_diff_check: eps must be positive");
  if (params.size() != ref_params.size()) throw ConfigError("finite_diff_check: parameter lists differ in length");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->value.shape() != ref_params[i]->value.shape()) {
      throw ConfigError("finite_diff_check: reference shape differs for " + params[i]->name);
    }
    for (std::size_t k = 0; k < params[i]->value.size(); ++k) ref_params[i]->value[k] = params[i]->value[k];
  }
  check_deterministic(evaluate(loss), evaluate(loss));
  check_deterministic(evaluate(ref_loss), evaluate(ref_loss));
  const auto analytic = analytic_gradients(loss, params);
  // The f32 backward itself rounds at about eps_f32 of the largest gradient;
  // a zero gradient shows up as that much noise.
  double largest = 0;
  for (const auto& g : analytic)
    for (double v : g) largest = std::max(largest, std::abs(v));
  GradCheckOptions o = options;
  o.abs_floor = std::max(o.abs_floor, 8.0 * std::numeric_limits<float>::epsilon() * largest);
  return compare<double>(names_of(params), analytic, ref_loss, ref_params, o);
}

template double central_difference_noise<float>(double, double);
template double central_difference_noise<double>(double, double);

template GradCheckReport finite_diff_check(const LossBuilder<float>&, const ParameterRefs<float>&,
                                           const GradCheckOptions&);
template GradCheckReport finite_diff_check(const LossBuilder<double>&, const ParameterRefs<double>&,
                                           const GradCheckOptions&);

}  // namespace pol
