#include "pol/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pol {
namespace {

SpectrumSide spectrum_side(const Matrix& shifted, const std::vector<std::complex<double>>& lambda_plus_one,
                           int power) {
  SpectrumSide s;
  s.power = power;
  for (const auto& l : lambda_plus_one) s.predicted.push_back(std::pow(std::abs(l), power));
  std::sort(s.predicted.rbegin(), s.predicted.rend());

  const Matrix m = matrix_power(shifted, power);
  if (!m.all_finite()) {
    s.overflow = true;
    s.direct.assign(s.predicted.size(), std::numeric_limits<double>::infinity());
    s.max_rel_error = std::numeric_limits<double>::infinity();
    return s;
  }
  for (const auto& e : eigenvalues(m)) s.direct.push_back(std::abs(e));
  std::sort(s.direct.rbegin(), s.direct.rend());
  for (std::size_t i = 0; i < s.direct.size(); ++i) {
    const double denom = std::max(std::fabs(s.predicted[i]), std::numeric_limits<double>::min());
    s.max_rel_error = std::max(s.max_rel_error, std::fabs(s.direct[i] - s.predicted[i]) / denom);
  }
  return s;
}

template <typename T>
double norm_of(const ParameterRefs<T>& a, const ParameterRefs<T>* b) {
  double acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& g = a[i]->grad;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double v = static_cast<double>(g[k]) + (b ? static_cast<double>((*b)[i]->grad[k]) : 0.0);
      acc += v * v;
    }
  }
  return std::sqrt(acc);
}

struct CurvePoint {
  double total = 0;
  double first = 0;
};

// Gradient norms of <f^n(x), u> where the first application uses a separate
// copy of the weights.
template <typename T>
CurvePoint curve_point(ResidualBlock<T>& block, const BasicTensor<T>& x, const BasicTensor<T>& u, int n) {
  ResidualBlock<T> first = block;
  auto shared = block.parameters();
  auto copy = first.parameters();
  zero_grads(shared);
  zero_grads(copy);
  Tape<T> tape;
  Var<T> h = first.forward(tape, tape.constant(x));
  for (int i = 1; i < n; ++i) h = block.forward(tape, h);
  tape.backward(ag::project(h, u));
  return {norm_of<T>(shared, &copy), norm_of<T>(copy, nullptr)};
}

template <typename Dst, typename Src>
void copy_values(ResidualBlock<Dst>& dst, ResidualBlock<Src>& src) {
  auto d = dst.parameters();
  auto s = src.parameters();
  for (std::size_t i = 0; i < d.size(); ++i) d[i]->value = s[i]->value.template cast<Dst>();
}

}  // namespace

SpectrumReport mn_spectrum(const Matrix& L, int n) {
  if (n < 1) throw ConfigError("mn_spectrum: n must be >= 1");
  if (L.n == 0 || L.n > 512) throw ConfigError("mn_spectrum: dimension must be in [1, 512]");
  const Matrix shifted = add(Matrix::identity(L.n), L);
  auto lambda = eigenvalues(L);
  for (auto& l : lambda) l += 1.0;
  SpectrumReport r;
  r.n = n;
  r.d = L.n;
  r.mn = spectrum_side(shifted, lambda, n - 1);
  r.full = spectrum_side(shifted, lambda, n);
  return r;
}

template <typename T>
void set_scaled_identity(ResidualBlock<T>& block, double rho) {
  if (block.use_norm || block.activation != Activation::identity) {
    throw ConfigError("scaled identity needs a linear block (no norm, identity activation)");
  }
  auto& w1 = block.conv1.weight.value;
  auto& w2 = block.conv2.weight.value;
  const std::size_t c = w2.dim(0);
  const std::size_t k = w1.dim(2);
  w1.fill(T(0));
  w2.fill(T(0));
  block.conv1.bias.value.fill(T(0));
  block.conv2.bias.value.fill(T(0));
  for (std::size_t ch = 0; ch < c; ++ch) {
    w1.at(ch, ch, k / 2, k / 2) = T(1);
    w2.at(ch, ch, k / 2, k / 2) = static_cast<T>(rho - 1.0);
  }
}

std::vector<GradCurveRow> gradient_norm_curve(const GradCurveOptions& options) {
  ModelConfig cfg = options.block;
  cfg.init_scale = options.init_scale;
  cfg.validate();
  if (options.linear_rho && !cfg.linear_blocks) throw ConfigError("linear_rho requires linear_blocks");
  std::mt19937_64 rng(options.seed);
  ResidualBlock<double> block64 = make_residual_block<double>(cfg, cfg.expansion, "curve.res", cfg.init_scale, rng);
  if (options.linear_rho) set_scaled_identity(block64, *options.linear_rho);
  std::mt19937_64 fake_rng(0);
  ResidualBlock<float> block32 = make_residual_block<float>(cfg, cfg.expansion, "curve.res", 1.0, fake_rng);
  copy_values(block32, block64);

  const Shape shape{1, cfg.embed_channels, cfg.embed_size(), cfg.embed_size()};
  const TensorD x = TensorD::uniform(shape, -1.0, 1.0, rng);
  TensorD u = TensorD::normal(shape, 0.0, 1.0, rng);
  const double unorm = std::sqrt(dot(u, u));
  for (auto& v : u.data()) v /= unorm;
  const Tensor x32 = x.cast<float>();
  const Tensor u32 = u.cast<float>();

  std::vector<GradCurveRow> rows;
  for (int n : options.n_list) {
    if (n < 1) throw ConfigError("gradient_norm_curve: n must be >= 1");
    GradCurveRow row;
    row.n = n;
    const CurvePoint p32 = curve_point(block32, x32, u32, n);
    const CurvePoint p64 = curve_point(block64, x, u, n);
    row.grad_norm = p32.total;
    row.first_copy_norm = p32.first;
    row.grad_norm_f64 = p64.total;
    row.first_copy_norm_f64 = p64.first;
    row.finite = std::isfinite(p32.total) && std::isfinite(p64.total);
    if (!row.finite) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      if (!std::isfinite(row.grad_norm)) row.grad_norm = row.first_copy_norm = nan;
      if (!std::isfinite(row.grad_norm_f64)) row.grad_norm_f64 = row.first_copy_norm_f64 = nan;
      row.f32_f64_rel_diff = nan;
    } else {
      row.f32_f64_rel_diff = p64.total > 0 ? std::fabs(p32.total - p64.total) / p64.total : 0.0;
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<InitSweepRow> init_scale_sweep(const InitSweepSetup& setup, const std::vector<double>& scales) {
  if (!setup.pretrained || !setup.domain_a || !setup.domain_b) throw ConfigError("init sweep: incomplete setup");
  if (setup.epochs < 1) throw ConfigError("init sweep: epochs must be >= 1");
  std::vector<InitSweepRow> rows;
  for (double scale : scales) {
    for (bool progressive : {true, false}) {
      ModelConfig mc = setup.model;
      mc.init_scale = scale;
      PolModel<float> model = build_model<float>(mc, setup.train.seed, setup.train.share_weights,
                                                 static_cast<std::size_t>(setup.train.schedule.n_tr));
      model.ae = *setup.pretrained;
      TrainConfig tc = setup.train;
      tc.schedule.progressive = progressive;
      tc.epochs = std::max(setup.epochs, tc.schedule.n_tr * tc.schedule.warmup_step);
      std::vector<InitSweepRow> run;
      try {
        train_unpaired(model, *setup.domain_a, *setup.domain_b, tc, setup.eval, [&](const EpochStats& st) {
          run.push_back({scale, progressive, st.epoch, st.psnr, false});
          return static_cast<int>(run.size()) < setup.epochs;
        });
      } catch (const NumericError&) {
        // Divergence is a result here, not a failure.
      }
      while (static_cast<int>(run.size()) < setup.epochs) {
        run.push_back({scale, progressive, static_cast<int>(run.size()), std::numeric_limits<double>::quiet_NaN(),
                       true});
      }
      rows.insert(rows.end(), run.begin(), run.end());
    }
  }
  return rows;
}

template void set_scaled_identity(ResidualBlock<float>&, double);
template void set_scaled_identity(ResidualBlock<double>&, double);

}  // namespace pol
