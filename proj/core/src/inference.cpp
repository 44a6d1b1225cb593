#include "pol/inference.hpp"

#include <algorithm>
#include <iostream>

namespace pol {
namespace {

// Embedding trace f^0 .. f^horizon for one image.
std::vector<Tensor> embedding_trace(Autoencoder<float>& ae, Translator<float>& gen, const ImageU8& input,
                                    int horizon) {
  Tape<float> tape(false);
  std::vector<Var<float>> trace;
  gen.iterate(tape, ae.encode(tape, tape.constant(to_tensor<float>(input))), horizon, &trace);
  std::vector<Tensor> out;
  out.reserve(trace.size());
  for (auto& v : trace) out.push_back(v.value());
  return out;
}

}  // namespace

void StoppingPolicy::validate() const {
  if (n < 0 || n_max < 0) throw ConfigError("composition counts must be >= 0");
}

std::string StoppingPolicy::name() const {
  switch (kind) {
    case PolicyKind::fixed:
      return "fixed";
    case PolicyKind::adaptive:
      return "adaptive";
    case PolicyKind::oracle:
      return "oracle";
  }
  return "unknown";
}

PolicyKind StoppingPolicy::parse_kind(const std::string& name) {
  if (name == "fixed") return PolicyKind::fixed;
  if (name == "adaptive") return PolicyKind::adaptive;
  if (name == "oracle") return PolicyKind::oracle;
  throw ConfigError("unknown policy '" + name + "' (fixed|adaptive|oracle)");
}

std::size_t argmax_first(const std::vector<double>& values) {
  if (values.empty()) throw Error("argmax of an empty sequence");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

InferResult infer(Autoencoder<float>& ae, Translator<float>& gen, Discriminator<float>& d_target,
                  const ImageU8& input, const StoppingPolicy& policy, const ImageU8* reference) {
  policy.validate();
  if (policy.kind == PolicyKind::oracle && reference == nullptr) {
    throw ConfigError("oracle stopping needs a reference image");
  }
  if (policy.kind == PolicyKind::adaptive && policy.n_max == 0) {
    std::cerr << "warning: adaptive stopping with n_max=0 always returns n=0\n";
  }
  const auto trace = embedding_trace(ae, gen, input, policy.horizon());
  InferResult r;
  std::vector<ImageU8> images;
  images.reserve(trace.size());
  for (const auto& e : trace) {
    const Tensor img = decode(ae, e);
    r.score_trace.push_back(discriminate(d_target, img).mean_score);
    images.push_back(to_image(img));
    if (reference) r.psnr_trace.push_back(psnr(images.back(), *reference));
  }
  switch (policy.kind) {
    case PolicyKind::fixed:
      r.n_star = policy.n;
      break;
    case PolicyKind::adaptive:
      r.n_star = static_cast<int>(argmax_first(r.score_trace));
      break;
    case PolicyKind::oracle:
      r.n_star = static_cast<int>(argmax_first(r.psnr_trace));
      break;
  }
  r.image = std::move(images[static_cast<std::size_t>(r.n_star)]);
  return r;
}

std::vector<ImageU8> modulation_sweep(Autoencoder<float>& ae, Translator<float>& gen, const ImageU8& input,
                                      const std::vector<int>& n_list) {
  if (n_list.empty()) return {};
  if (!std::is_sorted(n_list.begin(), n_list.end())) throw ConfigError("sweep n list must be ascending");
  if (n_list.front() < 0) throw ConfigError("sweep n values must be >= 0");
  const auto trace = embedding_trace(ae, gen, input, n_list.back());
  std::vector<ImageU8> out;
  for (int n : n_list) out.push_back(to_image(decode(ae, trace[static_cast<std::size_t>(n)])));
  return out;
}

ImageU8 compose_transforms(Autoencoder<float>& ae, Translator<float>& first, Translator<float>& second,
                           const ImageU8& input, ComposeMode mode, int n1, int n2) {
  Tape<float> tape(false);
  Var<float> e = ae.encode(tape, tape.constant(to_tensor<float>(input)));
  e = first.iterate(tape, e, n1);
  if (mode == ComposeMode::image) {
    // Round-trip through 8-bit pixels, as an image written to disk would.
    const ImageU8 mid = to_image(ae.decode(tape, e).value());
    e = ae.encode(tape, tape.constant(to_tensor<float>(mid)));
  }
  return to_image(ae.decode(tape, second.iterate(tape, e, n2)).value());
}

EvalReport evaluate(Autoencoder<float>& ae, Translator<float>& gen, Discriminator<float>& d_target,
                    const ImageSet& clean, const ImageSet& degraded, const StoppingPolicy& policy) {
  if (clean.empty()) throw DataError("empty evaluation set");
  if (clean.size() != degraded.size()) throw DataError("clean and degraded sets differ in size");
  EvalReport rep;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const InferResult r = infer(ae, gen, d_target, degraded.images[i], policy, &clean.images[i]);
    EvalRow row;
    row.name = degraded.names[i];
    row.n_star = r.n_star;
    row.psnr = r.psnr_trace[static_cast<std::size_t>(r.n_star)];
    row.input_psnr = psnr(degraded.images[i], clean.images[i]);
    row.score_trace = r.score_trace;
    rep.mean_psnr += row.psnr;
    rep.mean_input_psnr += row.input_psnr;
    rep.mean_n_star += row.n_star;
    rep.rows.push_back(std::move(row));
  }
  const auto count = static_cast<double>(rep.rows.size());
  rep.mean_psnr /= count;
  rep.mean_input_psnr /= count;
  rep.mean_n_star /= count;
  return rep;
}

OracleCurve oracle_curve(Autoencoder<float>& ae, Translator<float>& gen, const ImageSet& degraded,
                         const ImageSet& references, int n_max) {
  if (degraded.size() != references.size()) throw DataError("degraded and reference sets differ in size");
  if (n_max < 0) throw ConfigError("n_max must be >= 0");
  OracleCurve c;
  for (std::size_t i = 0; i < degraded.size(); ++i) {
    const auto trace = embedding_trace(ae, gen, degraded.images[i], n_max);
    std::vector<double> p;
    for (const auto& e : trace) p.push_back(psnr(to_image(decode(ae, e)), references.images[i]));
    const std::size_t best = argmax_first(p);
    c.best_n.push_back(static_cast<int>(best));
    c.best_psnr.push_back(p[best]);
    c.mean_best_n += static_cast<double>(best);
    c.mean_best_psnr += p[best];
  }
  if (!c.best_n.empty()) {
    c.mean_best_n /= static_cast<double>(c.best_n.size());
    c.mean_best_psnr /= static_cast<double>(c.best_n.size());
  }
  return c;
}

}  // namespace pol
