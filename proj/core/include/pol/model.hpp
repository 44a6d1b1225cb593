#pragma once

// Frozen encoder/decoder, the iterated residual block and the patch
// discriminator.
//
//   G(x) = Dec(f^n(Enc(x))),   f(e) = e + res(e)
//
// res is conv3x3 C->KC, norm, relu, conv3x3 KC->C, norm. The autoencoder's
// own residual block (expansion ae_expansion) is folded into the decoder, so
// the trainable f sees the raw encoder embedding.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pol/autograd.hpp"

namespace pol {

struct ModelConfig {
  std::size_t image_size = 64;
  std::size_t in_channels = 3;
  std::size_t embed_channels = 64;
  std::size_t expansion = 4;
  std::size_t ae_expansion = 1;
  std::size_t disc_base = 64;
  bool fold_frozen_block = true;
  bool norm = true;
  // Test mode: blocks without normalization and with identity activation, so
  // f is affine in its input.
  bool linear_blocks = false;
  double init_scale = 1.0;
  // Initial gamma of the translation block's last norm. Values below 1 start
  // f close to the identity.
  double residual_gain = 1.0;

  std::size_t embed_size() const { return image_size / 4; }
  void validate() const;

  static ModelConfig paper();
  static ModelConfig desk();
};

template <typename T>
struct ConvLayer {
  Parameter<T> weight;
  Parameter<T> bias;
  ConvSpec spec;
  bool transposed = false;

  Var<T> forward(Tape<T>& tape, Var<T> x, bool track = true);
  ParameterRefs<T> parameters();
};

template <typename T>
struct NormLayer {
  Parameter<T> gamma;
  Parameter<T> beta;

  Var<T> forward(Tape<T>& tape, Var<T> x, bool track = true);
  ParameterRefs<T> parameters();
};

template <typename T>
struct ResidualBlock {
  ConvLayer<T> conv1;
  NormLayer<T> norm1;
  ConvLayer<T> conv2;
  NormLayer<T> norm2;
  bool use_norm = true;
  Activation activation = Activation::relu;

  Var<T> residual(Tape<T>& tape, Var<T> x, bool track = true);
  // x + res(x)
  Var<T> forward(Tape<T>& tape, Var<T> x, bool track = true);
  ParameterRefs<T> parameters();
  void zero();
  void copy_weights_from(const ResidualBlock& other);
};

template <typename T>
struct Encoder {
  ConvLayer<T> stem;
  NormLayer<T> norm1;
  ConvLayer<T> down;
  NormLayer<T> norm2;
  bool use_norm = true;

  Var<T> forward(Tape<T>& tape, Var<T> image, bool track = true);
  ParameterRefs<T> parameters();
};

template <typename T>
struct Decoder {
  std::optional<ResidualBlock<T>> frozen_block;
  ConvLayer<T> up1;
  NormLayer<T> norm1;
  ConvLayer<T> up2;
  bool use_norm = true;

  Var<T> forward(Tape<T>& tape, Var<T> embedding, bool track = true);
  ParameterRefs<T> parameters();
};

template <typename T>
struct Autoencoder {
  ModelConfig config;
  Encoder<T> enc;
  Decoder<T> dec;

  Var<T> encode(Tape<T>& tape, Var<T> image, bool track = true);
  Var<T> decode(Tape<T>& tape, Var<T> embedding, bool track = true);
  ParameterRefs<T> parameters();
  void set_frozen(bool frozen);
};

// One shared block applied n times, or (ablation) a list of independent
// blocks applied in sequence.
template <typename T>
struct Translator {
  std::vector<ResidualBlock<T>> blocks;
  bool shared = true;

  // f^n(e). When trace is given it receives f^0(e) .. f^n(e).
  Var<T> iterate(Tape<T>& tape, Var<T> embedding, int n, std::vector<Var<T>>* trace = nullptr, bool track = true);
  ParameterRefs<T> parameters();
  std::size_t max_compositions() const;
};

template <typename T>
struct Discriminator {
  std::vector<ConvLayer<T>> convs;
  std::vector<std::optional<NormLayer<T>>> norms;  // one per conv except the last

  // Logit map (N, 1, h, w).
  Var<T> forward(Tape<T>& tape, Var<T> image, bool track = true);
  ParameterRefs<T> parameters();
};

template <typename T>
struct PolModel {
  ModelConfig config;
  Autoencoder<T> ae;
  Translator<T> gen_ab;
  Translator<T> gen_ba;
  Discriminator<T> disc_a;
  Discriminator<T> disc_b;

  ParameterRefs<T> parameters();
  ParameterRefs<T> generator_parameters();
  ParameterRefs<T> discriminator_parameters();
};

// Uniform init in [-s, s], s = scale / sqrt(fan_in). init_scale applies to
// the translation blocks; other parts use scale 1.
template <typename T>
Autoencoder<T> make_autoencoder(const ModelConfig& config, std::mt19937_64& rng);
template <typename T>
ResidualBlock<T> make_residual_block(const ModelConfig& config, std::size_t expansion, const std::string& prefix,
                                     double scale, std::mt19937_64& rng);
template <typename T>
Translator<T> make_translator(const ModelConfig& config, const std::string& prefix, bool shared,
                              std::size_t independent_blocks, std::mt19937_64& rng);
template <typename T>
Discriminator<T> make_discriminator(const ModelConfig& config, const std::string& prefix, std::mt19937_64& rng);

// share_weights=false builds independent_blocks blocks per direction.
template <typename T>
PolModel<T> build_model(const ModelConfig& config, std::uint64_t seed, bool share_weights = true,
                        std::size_t independent_blocks = 1);

// Convenience wrappers over a throwaway no-grad tape.
template <typename T>
BasicTensor<T> encode(Autoencoder<T>& ae, const BasicTensor<T>& image);
template <typename T>
BasicTensor<T> decode(Autoencoder<T>& ae, const BasicTensor<T>& embedding);
template <typename T>
BasicTensor<T> iterate_block(Translator<T>& tr, const BasicTensor<T>& embedding, int n);
template <typename T>
BasicTensor<T> generator_forward(Autoencoder<T>& ae, Translator<T>& tr, const BasicTensor<T>& image, int n);

template <typename T>
struct Discrimination {
  BasicTensor<T> logits;
  double mean_score = 0;  // mean sigmoid over the logit map
};
template <typename T>
Discrimination<T> discriminate(Discriminator<T>& d, const BasicTensor<T>& image);

// Mean of sigmoid(logits) per sample.
template <typename T>
std::vector<double> mean_scores(const BasicTensor<T>& logits);

struct PartCount {
  std::string part;
  std::size_t tensors = 0;
  std::size_t params = 0;
  std::size_t frozen = 0;
  std::size_t trainable = 0;
};

struct ParamCount {
  std::vector<PartCount> parts;
  PartCount total;
  const PartCount* find(const std::string& part) const;
};

template <typename T>
PartCount count_part(const std::string& part, const ParameterRefs<T>& params);
template <typename T>
ParamCount count_params(PolModel<T>& model);

}  // namespace pol
