#pragma once

// Autoencoder pretraining and the unpaired translation loop.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pol/dataset.hpp"
#include "pol/losses.hpp"
#include "pol/optim.hpp"
#include "pol/schedule.hpp"

namespace pol {

struct PretrainConfig {
  int epochs = 20;
  std::size_t batch_size = 8;
  AdamConfig adam{16e-4, 0.9, 0.999, 1e-8};
  Augment augment{true, true};
};

struct TrainConfig {
  int epochs = 30;
  std::size_t batch_size = 4;
  std::uint64_t seed = 0;
  AdamConfig gen_adam{};
  AdamConfig disc_adam{};
  LossWeights weights{};
  AdversarialMode adv_mode = AdversarialMode::log;
  CompositionSchedule schedule{};
  bool share_weights = true;
  Augment augment{false, true};

  void validate() const;
};

struct PretrainEpoch {
  int epoch = 0;
  double loss = 0;  // mean pixel MSE over the epoch
  double seconds = 0;
};

struct EpochStats {
  int epoch = 0;
  std::vector<std::size_t> n_hist;  // n_hist[n] = batches that used n compositions
  int n_min = 0;
  int n_max = 0;
  double loss_g = 0;
  double loss_d_a = 0;
  double loss_d_b = 0;
  double grad_norm_g = 0;  // mean generator gradient 2-norm over the epoch's batches
  double psnr = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0;
  std::string rng_state;  // composition sampler state after the epoch
};

// Clean/degraded pair used for per-epoch monitoring.
struct EvalPair {
  const ImageSet* clean = nullptr;
  const ImageSet* degraded = nullptr;
};

// Return false to stop after the reported epoch.
using PretrainCallback = std::function<bool(const PretrainEpoch&)>;
using EpochCallback = std::function<bool(const EpochStats&)>;

// Trains encoder, folded frozen block and decoder on pixel MSE. The returned
// parameters are not frozen.
std::vector<PretrainEpoch> pretrain_autoencoder(Autoencoder<float>& ae, const ImageSet& corpus,
                                                const PretrainConfig& config, std::uint64_t seed,
                                                const PretrainCallback& on_epoch = {});

template <typename T>
struct GeneratorObjective {
  Var<T> total;
  Var<T> adv;
  Var<T> cyc;
  Var<T> id;
  Var<T> fake_a;  // G_BA(b)
  Var<T> fake_b;  // G_AB(a)
};

// All generator terms for one step with a single n, sharing encoder passes
// between the translation, cycle and identity paths.
template <typename T>
GeneratorObjective<T> generator_objective(Tape<T>& tape, PolModel<T>& model, Var<T> a, Var<T> b, int n,
                                          const LossWeights& weights, AdversarialMode mode);

// Freezes the autoencoder and trains both translators and discriminators.
// An epoch is one pass over the smaller domain; the larger one is sampled
// cyclically in a shuffled order.
std::vector<EpochStats> train_unpaired(PolModel<float>& model, const ImageSet& domain_a, const ImageSet& domain_b,
                                       const TrainConfig& config, std::optional<EvalPair> eval = std::nullopt,
                                       const EpochCallback& on_epoch = {});

// Frozen-parameter fingerprint (FNV-1a over names and raw bytes).
std::uint64_t parameter_hash(const ParameterRefs<float>& params);

}  // namespace pol
