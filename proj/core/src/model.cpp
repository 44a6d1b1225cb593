#include "pol/model.hpp"

#include <cmath>

namespace pol {

void ModelConfig::validate() const {
  if (image_size < 24 || image_size % 4 != 0) {
    throw ConfigError("image_size must be a multiple of 4 and at least 24 (discriminator depth), got " + std::to_string(image_size));
  }
  if (in_channels == 0) throw ConfigError("in_channels must be positive");
  if (embed_channels < 2 || embed_channels % 2 != 0) {
    throw ConfigError("embed_channels must be even and >= 2, got " + std::to_string(embed_channels));
  }
  if (expansion == 0 || ae_expansion == 0) throw ConfigError("expansion factors must be positive");
  if (disc_base == 0) throw ConfigError("disc_base must be positive");
  if (!(init_scale >= 0) || !std::isfinite(init_scale)) throw ConfigError("init_scale must be finite and >= 0");
  if (!(residual_gain >= 0) || !std::isfinite(residual_gain)) {
    throw ConfigError("residual_gain must be finite and >= 0");
  }
}

ModelConfig ModelConfig::paper() {
  ModelConfig c;
  c.image_size = 256;
  c.embed_channels = 256;
  c.expansion = 4;
  c.disc_base = 64;
  return c;
}

ModelConfig ModelConfig::desk() { return ModelConfig{}; }

namespace {

template <typename T>
ConvLayer<T> make_conv(const std::string& name, std::size_t cin, std::size_t cout, std::size_t k, ConvSpec spec,
                       bool transposed, double scale, std::mt19937_64& rng) {
  // Stored as (C_out, C_in, k, k) for conv2d and (C_in, C_out, k, k) for the
  // transposed conv, whose fan-in is the output-side channel count.
  const Shape wshape = transposed ? Shape{cin, cout, k, k} : Shape{cout, cin, k, k};
  const double fan_in = static_cast<double>((transposed ? cout : cin) * k * k);
  const T bound = static_cast<T>(scale / std::sqrt(fan_in));
  ConvLayer<T> layer;
  layer.weight = Parameter<T>(name + ".weight", BasicTensor<T>::uniform(wshape, -bound, bound, rng));
  layer.bias = Parameter<T>(name + ".bias", BasicTensor<T>::uniform(Shape{cout}, -bound, bound, rng));
  layer.spec = spec;
  layer.transposed = transposed;
  return layer;
}

template <typename T>
NormLayer<T> make_norm(const std::string& name, std::size_t channels) {
  NormLayer<T> n;
  n.gamma = Parameter<T>(name + ".gamma", BasicTensor<T>::ones(Shape{channels}));
  n.beta = Parameter<T>(name + ".beta", BasicTensor<T>::zeros(Shape{channels}));
  return n;
}

template <typename T>
void append(ParameterRefs<T>& out, ParameterRefs<T> more) {
  out.insert(out.end(), more.begin(), more.end());
}

}  // namespace

template <typename T>
Var<T> ConvLayer<T>::forward(Tape<T>& tape, Var<T> x, bool track) {
  Var<T> w = tape.param(weight, track && !weight.frozen);
  Var<T> b = tape.param(bias, track && !bias.frozen);
  return transposed ? ag::conv_transpose2d(x, w, b, spec) : ag::conv2d(x, w, b, spec);
}

template <typename T>
ParameterRefs<T> ConvLayer<T>::parameters() {
  return {&weight, &bias};
}

template <typename T>
Var<T> NormLayer<T>::forward(Tape<T>& tape, Var<T> x, bool track) {
  return ag::instance_norm(x, tape.param(gamma, track && !gamma.frozen), tape.param(beta, track && !beta.frozen));
}

template <typename T>
ParameterRefs<T> NormLayer<T>::parameters() {
  return {&gamma, &beta};
}

template <typename T>
Var<T> ResidualBlock<T>::residual(Tape<T>& tape, Var<T> x, bool track) {
  Var<T> h = conv1.forward(tape, x, track);
  if (use_norm) h = norm1.forward(tape, h, track);
  h = ag::activation(h, activation);
  h = conv2.forward(tape, h, track);
  if (use_norm) h = norm2.forward(tape, h, track);
  return h;
}

template <typename T>
Var<T> ResidualBlock<T>::forward(Tape<T>& tape, Var<T> x, bool track) {
  return ag::add(x, residual(tape, x, track));
}

template <typename T>
ParameterRefs<T> ResidualBlock<T>::parameters() {
  ParameterRefs<T> out;
  append(out, conv1.parameters());
  if (use_norm) append(out, norm1.parameters());
  append(out, conv2.parameters());
  if (use_norm) append(out, norm2.parameters());
  return out;
}

template <typename T>
void ResidualBlock<T>::zero() {
  // With the last conv at zero, res(x) = norm2(0) = beta2 = 0 for any input.
  conv2.weight.value.fill(T(0));
  conv2.bias.value.fill(T(0));
  norm2.beta.value.fill(T(0));
}

template <typename T>
void ResidualBlock<T>::copy_weights_from(const ResidualBlock& other) {
  auto copy = [](Parameter<T>& dst, const Parameter<T>& src) {
    require_same_shape("copy_weights_from", dst.value.shape(), src.value.shape());
    dst.value = src.value;
  };
  copy(conv1.weight, other.conv1.weight);
  copy(conv1.bias, other.conv1.bias);
  copy(conv2.weight, other.conv2.weight);
  copy(conv2.bias, other.conv2.bias);
  copy(norm1.gamma, other.norm1.gamma);
  copy(norm1.beta, other.norm1.beta);
  copy(norm2.gamma, other.norm2.gamma);
  copy(norm2.beta, other.norm2.beta);
}

template <typename T>
Var<T> Encoder<T>::forward(Tape<T>& tape, Var<T> image, bool track) {
  Var<T> h = stem.forward(tape, image, track);
  if (use_norm) h = norm1.forward(tape, h, track);
  h = ag::activation(h, Activation::relu);
  h = down.forward(tape, h, track);
  if (use_norm) h = norm2.forward(tape, h, track);
  return ag::activation(h, Activation::relu);
}

template <typename T>
ParameterRefs<T> Encoder<T>::parameters() {
  ParameterRefs<T> out;
  append(out, stem.parameters());
  if (use_norm) append(out, norm1.parameters());
  append(out, down.parameters());
  if (use_norm) append(out, norm2.parameters());
  return out;
}

template <typename T>
Var<T> Decoder<T>::forward(Tape<T>& tape, Var<T> embedding, bool track) {
  Var<T> h = embedding;
  if (frozen_block) h = frozen_block->forward(tape, h, track);
  h = up1.forward(tape, h, track);
  if (use_norm) h = norm1.forward(tape, h, track);
  h = ag::activation(h, Activation::relu);
  h = up2.forward(tape, h, track);
  return ag::activation(h, Activation::tanh);
}

template <typename T>
ParameterRefs<T> Decoder<T>::parameters() {
  ParameterRefs<T> out;
  if (frozen_block) append(out, frozen_block->parameters());
  append(out, up1.parameters());
  if (use_norm) append(out, norm1.parameters());
  append(out, up2.parameters());
  return out;
}

template <typename T>
Var<T> Autoencoder<T>::encode(Tape<T>& tape, Var<T> image, bool track) {
  const Shape& s = image.shape();
  if (s.rank() != 4 || s[1] != config.in_channels) {
    throw DimensionError("encode", "channels", "expected (N," + std::to_string(config.in_channels) + ",H,W), got " +
                                                   s.to_string());
  }
  if (s[2] % 4 != 0 || s[3] % 4 != 0) {
    throw DimensionError("encode", "height/width", "extents must be divisible by 4, got " + s.to_string());
  }
  return enc.forward(tape, image, track);
}

template <typename T>
Var<T> Autoencoder<T>::decode(Tape<T>& tape, Var<T> embedding, bool track) {
  const Shape& s = embedding.shape();
  if (s.rank() != 4 || s[1] != config.embed_channels) {
    throw DimensionError("decode", "channels", "expected (N," + std::to_string(config.embed_channels) +
                                                   ",h,w), got " + s.to_string());
  }
  return dec.forward(tape, embedding, track);
}

template <typename T>
ParameterRefs<T> Autoencoder<T>::parameters() {
  ParameterRefs<T> out = enc.parameters();
  append(out, dec.parameters());
  return out;
}

template <typename T>
void Autoencoder<T>::set_frozen(bool frozen) {
  for (auto* p : parameters()) p->frozen = frozen;
}

template <typename T>
Var<T> Translator<T>::iterate(Tape<T>& tape, Var<T> embedding, int n, std::vector<Var<T>>* trace, bool track) {
  if (n < 0) throw Error("iterate_block: negative composition count " + std::to_string(n));
  if (blocks.empty()) throw Error("iterate_block: translator has no blocks");
  if (!shared && static_cast<std::size_t>(n) > blocks.size()) {
    throw Error("iterate_block: " + std::to_string(n) + " compositions requested but only " +
                std::to_string(blocks.size()) + " independent blocks exist");
  }
  Var<T> h = embedding;
  if (trace) trace->push_back(h);
  for (int i = 0; i < n; ++i) {
    ResidualBlock<T>& b = shared ? blocks.front() : blocks[static_cast<std::size_t>(i)];
    h = b.forward(tape, h, track);
    if (trace) trace->push_back(h);
  }
  return h;
}

template <typename T>
ParameterRefs<T> Translator<T>::parameters() {
  ParameterRefs<T> out;
  for (auto& b : blocks) append(out, b.parameters());
  return out;
}

template <typename T>
std::size_t Translator<T>::max_compositions() const {
  return shared ? static_cast<std::size_t>(-1) : blocks.size();
}

template <typename T>
Var<T> Discriminator<T>::forward(Tape<T>& tape, Var<T> image, bool track) {
  Var<T> h = image;
  for (std::size_t i = 0; i < convs.size(); ++i) {
    h = convs[i].forward(tape, h, track);
    if (i + 1 == convs.size()) break;
    if (norms[i]) h = norms[i]->forward(tape, h, track);
    h = ag::activation(h, Activation::leaky_relu, T(0.2));
  }
  return h;
}

template <typename T>
ParameterRefs<T> Discriminator<T>::parameters() {
  ParameterRefs<T> out;
  for (std::size_t i = 0; i < convs.size(); ++i) {
    append(out, convs[i].parameters());
    if (i < norms.size() && norms[i]) append(out, norms[i]->parameters());
  }
  return out;
}

template <typename T>
ParameterRefs<T> PolModel<T>::parameters() {
  ParameterRefs<T> out = ae.parameters();
  append(out, generator_parameters());
  append(out, discriminator_parameters());
  return out;
}

template <typename T>
ParameterRefs<T> PolModel<T>::generator_parameters() {
  ParameterRefs<T> out = gen_ab.parameters();
  append(out, gen_ba.parameters());
  return out;
}

template <typename T>
ParameterRefs<T> PolModel<T>::discriminator_parameters() {
  ParameterRefs<T> out = disc_a.parameters();
  append(out, disc_b.parameters());
  return out;
}

template <typename T>
Autoencoder<T> make_autoencoder(const ModelConfig& config, std::mt19937_64& rng) {
  config.validate();
  const std::size_t c = config.embed_channels;
  const std::size_t half = c / 2;
  Autoencoder<T> ae;
  ae.config = config;
  ae.enc.use_norm = config.norm;
  ae.enc.stem = make_conv<T>("ae.enc.stem", config.in_channels, half, 7, ConvSpec{2, 3, 0, PadMode::reflect}, false,
                             1.0, rng);
  ae.enc.norm1 = make_norm<T>("ae.enc.norm1", half);
  ae.enc.down = make_conv<T>("ae.enc.down", half, c, 3, ConvSpec{2, 1, 0, PadMode::zeros}, false, 1.0, rng);
  ae.enc.norm2 = make_norm<T>("ae.enc.norm2", c);
  ae.dec.use_norm = config.norm;
  if (config.fold_frozen_block) {
    ModelConfig block_config = config;
    block_config.linear_blocks = false;
    ae.dec.frozen_block = make_residual_block<T>(block_config, config.ae_expansion, "ae.dec.res0", 1.0, rng);
  }
  ae.dec.up1 = make_conv<T>("ae.dec.up1", c, half, 3, ConvSpec{2, 1, 1, PadMode::zeros}, true, 1.0, rng);
  ae.dec.norm1 = make_norm<T>("ae.dec.norm1", half);
  ae.dec.up2 = make_conv<T>("ae.dec.up2", half, config.in_channels, 7, ConvSpec{2, 3, 1, PadMode::zeros}, true, 1.0,
                            rng);
  return ae;
}

template <typename T>
ResidualBlock<T> make_residual_block(const ModelConfig& config, std::size_t expansion, const std::string& prefix,
                                     double scale, std::mt19937_64& rng) {
  const std::size_t c = config.embed_channels;
  const std::size_t wide = c * expansion;
  ResidualBlock<T> b;
  b.conv1 = make_conv<T>(prefix + ".conv1", c, wide, 3, ConvSpec{1, 1, 0, PadMode::zeros}, false, scale, rng);
  b.norm1 = make_norm<T>(prefix + ".norm1", wide);
  b.conv2 = make_conv<T>(prefix + ".conv2", wide, c, 3, ConvSpec{1, 1, 0, PadMode::zeros}, false, scale, rng);
  b.norm2 = make_norm<T>(prefix + ".norm2", c);
  b.use_norm = config.norm && !config.linear_blocks;
  b.activation = config.linear_blocks ? Activation::identity : Activation::relu;
  return b;
}

template <typename T>
Translator<T> make_translator(const ModelConfig& config, const std::string& prefix, bool shared,
                              std::size_t independent_blocks, std::mt19937_64& rng) {
  config.validate();
  Translator<T> tr;
  tr.shared = shared;
  if (shared) {
    tr.blocks.push_back(make_residual_block<T>(config, config.expansion, prefix + ".res", config.init_scale, rng));
  } else {
    if (independent_blocks == 0) throw ConfigError("independent mode needs at least one block");
    for (std::size_t i = 0; i < independent_blocks; ++i) {
      tr.blocks.push_back(make_residual_block<T>(config, config.expansion, prefix + ".res" + std::to_string(i),
                                                 config.init_scale, rng));
    }
  }
  for (auto& b : tr.blocks) b.norm2.gamma.value.fill(static_cast<T>(config.residual_gain));
  return tr;
}

template <typename T>
Discriminator<T> make_discriminator(const ModelConfig& config, const std::string& prefix, std::mt19937_64& rng) {
  config.validate();
  // 70x70-style patch CNN: three stride-2 4x4 convs, one stride-1 4x4 conv,
  // and a 1-channel stride-1 4x4 logit conv.
  const std::size_t c0 = config.disc_base;
  Discriminator<T> d;
  const std::size_t chans[] = {config.in_channels, c0, 2 * c0, 4 * c0, 8 * c0, 1};
  const std::size_t strides[] = {2, 2, 2, 1, 1};
  for (std::size_t i = 0; i < 5; ++i) {
    d.convs.push_back(make_conv<T>(prefix + ".conv" + std::to_string(i + 1), chans[i], chans[i + 1], 4,
                                   ConvSpec{strides[i], 1, 0, PadMode::zeros}, false, 1.0, rng));
    if (i < 4) {
      if (i > 0) {
        d.norms.push_back(make_norm<T>(prefix + ".norm" + std::to_string(i + 1), chans[i + 1]));
      } else {
        d.norms.push_back(std::nullopt);
      }
    }
  }
  return d;
}

template <typename T>
PolModel<T> build_model(const ModelConfig& config, std::uint64_t seed, bool share_weights,
                        std::size_t independent_blocks) {
  config.validate();
  std::mt19937_64 rng(seed);
  PolModel<T> m;
  m.config = config;
  m.ae = make_autoencoder<T>(config, rng);
  m.gen_ab = make_translator<T>(config, "gen_ab", share_weights, independent_blocks, rng);
  m.gen_ba = make_translator<T>(config, "gen_ba", share_weights, independent_blocks, rng);
  m.disc_a = make_discriminator<T>(config, "disc_a", rng);
  m.disc_b = make_discriminator<T>(config, "disc_b", rng);
  return m;
}

template <typename T>
BasicTensor<T> encode(Autoencoder<T>& ae, const BasicTensor<T>& image) {
  Tape<T> tape(false);
  return ae.encode(tape, tape.constant(image)).value();
}

template <typename T>
BasicTensor<T> decode(Autoencoder<T>& ae, const BasicTensor<T>& embedding) {
  Tape<T> tape(false);
  return ae.decode(tape, tape.constant(embedding)).value();
}

template <typename T>
BasicTensor<T> iterate_block(Translator<T>& tr, const BasicTensor<T>& embedding, int n) {
  Tape<T> tape(false);
  return tr.iterate(tape, tape.constant(embedding), n).value();
}

template <typename T>
BasicTensor<T> generator_forward(Autoencoder<T>& ae, Translator<T>& tr, const BasicTensor<T>& image, int n) {
  Tape<T> tape(false);
  Var<T> e = ae.encode(tape, tape.constant(image));
  return ae.decode(tape, tr.iterate(tape, e, n)).value();
}

template <typename T>
std::vector<double> mean_scores(const BasicTensor<T>& logits) {
  const std::size_t n = logits.dim(0);
  const std::size_t per = logits.size() / n;
  std::vector<double> out(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    double acc = 0;
    for (std::size_t i = 0; i < per; ++i) {
      const double z = logits[s * per + i];
      acc += z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    }
    out[s] = acc / static_cast<double>(per);
  }
  return out;
}

template <typename T>
Discrimination<T> discriminate(Discriminator<T>& d, const BasicTensor<T>& image) {
  Tape<T> tape(false);
  Discrimination<T> r;
  r.logits = d.forward(tape, tape.constant(image)).value();
  const auto per_sample = mean_scores(r.logits);
  double acc = 0;
  for (double s : per_sample) acc += s;
  r.mean_score = acc / static_cast<double>(per_sample.size());
  return r;
}

const PartCount* ParamCount::find(const std::string& part) const {
  for (const auto& p : parts) {
    if (p.part == part) return &p;
  }
  return nullptr;
}

template <typename T>
PartCount count_part(const std::string& part, const ParameterRefs<T>& params) {
  PartCount c;
  c.part = part;
  for (const auto* p : params) {
    ++c.tensors;
    c.params += p->value.size();
    (p->frozen ? c.frozen : c.trainable) += p->value.size();
  }
  return c;
}

template <typename T>
ParamCount count_params(PolModel<T>& model) {
  ParamCount pc;
  pc.parts.push_back(count_part<T>("ae.enc", model.ae.enc.parameters()));
  pc.parts.push_back(count_part<T>("ae.dec", model.ae.dec.parameters()));
  pc.parts.push_back(count_part<T>("gen_ab", model.gen_ab.parameters()));
  pc.parts.push_back(count_part<T>("gen_ba", model.gen_ba.parameters()));
  pc.parts.push_back(count_part<T>("disc_a", model.disc_a.parameters()));
  pc.parts.push_back(count_part<T>("disc_b", model.disc_b.parameters()));
  pc.total.part = "total";
  for (const auto& p : pc.parts) {
    pc.total.tensors += p.tensors;
    pc.total.params += p.params;
    pc.total.frozen += p.frozen;
    pc.total.trainable += p.trainable;
  }
  return pc;
}

#define POL_INSTANTIATE_MODEL(T)                                                                              \
  template struct ConvLayer<T>;                                                                               \
  template struct NormLayer<T>;                                                                               \
  template struct ResidualBlock<T>;                                                                           \
  template struct Encoder<T>;                                                                                 \
  template struct Decoder<T>;                                                                                 \
  template struct Autoencoder<T>;                                                                             \
  template struct Translator<T>;                                                                              \
  template struct Discriminator<T>;                                                                           \
  template struct PolModel<T>;                                                                                \
  template Autoencoder<T> make_autoencoder<T>(const ModelConfig&, std::mt19937_64&);                          \
  template ResidualBlock<T> make_residual_block<T>(const ModelConfig&, std::size_t, const std::string&, double, \
                                                   std::mt19937_64&);                                         \
  template Translator<T> make_translator<T>(const ModelConfig&, const std::string&, bool, std::size_t,        \
                                            std::mt19937_64&);                                                \
  template Discriminator<T> make_discriminator<T>(const ModelConfig&, const std::string&, std::mt19937_64&);  \
  template PolModel<T> build_model<T>(const ModelConfig&, std::uint64_t, bool, std::size_t);                  \
  template BasicTensor<T> encode(Autoencoder<T>&, const BasicTensor<T>&);                                     \
  template BasicTensor<T> decode(Autoencoder<T>&, const BasicTensor<T>&);                                     \
  template BasicTensor<T> iterate_block(Translator<T>&, const BasicTensor<T>&, int);                          \
  template BasicTensor<T> generator_forward(Autoencoder<T>&, Translator<T>&, const BasicTensor<T>&, int);     \
  template std::vector<double> mean_scores(const BasicTensor<T>&);                                            \
  template Discrimination<T> discriminate(Discriminator<T>&, const BasicTensor<T>&);                          \
  template PartCount count_part<T>(const std::string&, const ParameterRefs<T>&);                              \
  template ParamCount count_params(PolModel<T>&);

POL_INSTANTIATE_MODEL(float)
POL_INSTANTIATE_MODEL(double)

#undef POL_INSTANTIATE_MODEL

}  // namespace pol
