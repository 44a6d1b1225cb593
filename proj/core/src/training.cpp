#include "pol/training.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <numeric>

#include "pol/inference.hpp"

namespace pol {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Endless shuffled pass over [0, count); each pass draws a new permutation.
class CyclicSampler {
 public:
  CyclicSampler(std::size_t count, std::uint64_t seed) : count_(count), seed_(seed) { reshuffle(); }

  std::size_t next() {
    if (pos_ == order_.size()) {
      ++pass_;
      reshuffle();
    }
    return order_[pos_++];
  }

 private:
  void reshuffle() {
    order_.resize(count_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::mt19937_64 rng(derive_seed(seed_, pass_));
    for (std::size_t i = count_ - 1; i > 0; --i) std::swap(order_[i], order_[rng() % (i + 1)]);
    pos_ = 0;
  }

  std::size_t count_;
  std::uint64_t seed_;
  std::uint64_t pass_ = 0;
  std::size_t pos_ = 0;
  std::vector<std::size_t> order_;
};

Tensor make_batch(const ImageSet& set, const std::vector<std::size_t>& idx, const Augment& aug,
                  std::mt19937_64& rng) {
  std::vector<ImageU8> imgs;
  imgs.reserve(idx.size());
  for (std::size_t i : idx) imgs.push_back(augment(set.images[i], aug, rng));
  return to_batch<float>(imgs);
}

template <typename T>
Var<T> translate(Tape<T>& tape, Autoencoder<T>& ae, Translator<T>& g, Var<T> embedding, int n) {
  return ae.decode(tape, g.iterate(tape, embedding, n));
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  schedule.validate();
  weights.validate();
  if (schedule.progressive && epochs < schedule.n_tr * schedule.warmup_step) {
    throw ConfigError("epochs (" + std::to_string(epochs) + ") must cover the warm-up (n_tr * warmup_step = " +
                      std::to_string(schedule.n_tr * schedule.warmup_step) + ")");
  }
}

std::uint64_t parameter_hash(const ParameterRefs<float>& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto* p : params) {
    mix(p->name.data(), p->name.size());
    mix(p->value.ptr(), p->value.size() * sizeof(float));
  }
  return h;
}

std::vector<PretrainEpoch> pretrain_autoencoder(Autoencoder<float>& ae, const ImageSet& corpus,
                                                const PretrainConfig& config, std::uint64_t seed,
                                                const PretrainCallback& on_epoch) {
  if (corpus.empty()) throw DataError("pretraining corpus is empty");
  if (config.epochs < 1) throw ConfigError("pretrain epochs must be >= 1");
  ae.set_frozen(false);
  Adam<float> opt(config.adam);
  BatchIterator batches(corpus.size(), config.batch_size, derive_seed(seed, 11));
  std::mt19937_64 aug_rng(derive_seed(seed, 12));
  const auto params = ae.parameters();
  std::vector<PretrainEpoch> history;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto start = Clock::now();
    double total = 0;
    std::size_t seen = 0;
    for (const auto& idx : batches.epoch_batches(epoch)) {
      const Tensor x = make_batch(corpus, idx, config.augment, aug_rng);
      Tape<float> tape;
      Var<float> in = tape.constant(x);
      Var<float> loss = ag::l2_mean(ae.decode(tape, ae.encode(tape, in)), in);
      const double value = loss.value().item();
      if (!std::isfinite(value)) {
        throw NumericError("pretrain epoch " + std::to_string(epoch) + ": non-finite reconstruction loss");
      }
      tape.backward(loss);
      opt.step(params);
      total += value * static_cast<double>(idx.size());
      seen += idx.size();
    }
    history.push_back({epoch, total / static_cast<double>(seen), seconds_since(start)});
    if (on_epoch && !on_epoch(history.back())) break;
  }
  return history;
}

template <typename T>
GeneratorObjective<T> generator_objective(Tape<T>& tape, PolModel<T>& model, Var<T> a, Var<T> b, int n,
                                          const LossWeights& weights, AdversarialMode mode) {
  auto& ae = model.ae;
  GeneratorObjective<T> o;
  Var<T> ea = ae.encode(tape, a);
  Var<T> eb = ae.encode(tape, b);
  o.fake_b = translate(tape, ae, model.gen_ab, ea, n);
  o.fake_a = translate(tape, ae, model.gen_ba, eb, n);
  Var<T> rec_a = translate(tape, ae, model.gen_ba, ae.encode(tape, o.fake_b), n);
  Var<T> rec_b = translate(tape, ae, model.gen_ab, ae.encode(tape, o.fake_a), n);
  Var<T> id_b = translate(tape, ae, model.gen_ab, eb, n);
  Var<T> id_a = translate(tape, ae, model.gen_ba, ea, n);

  o.adv = ag::add(adv_loss_generator(tape, model.disc_b, o.fake_b, mode),
                  adv_loss_generator(tape, model.disc_a, o.fake_a, mode));
  o.cyc = ag::add(ag::l1_mean(rec_b, b), ag::l1_mean(rec_a, a));
  o.id = ag::add(ag::l2_mean(id_b, b), ag::l2_mean(id_a, a));
  o.total = total_generator_loss(o.adv, o.cyc, o.id, weights);
  return o;
}

std::vector<EpochStats> train_unpaired(PolModel<float>& model, const ImageSet& domain_a, const ImageSet& domain_b,
                                       const TrainConfig& config, std::optional<EvalPair> eval,
                                       const EpochCallback& on_epoch) {
  config.validate();
  if (domain_a.empty() || domain_b.empty()) throw DataError("training domains must not be empty");
  const std::size_t size = model.config.image_size;
  for (const ImageSet* set : {&domain_a, &domain_b}) {
    for (const auto& img : set->images) {
      if (img.width != size || img.height != size) {
        throw DimensionError("train_unpaired", "width/height",
                             "training images must be " + std::to_string(size) + "x" + std::to_string(size));
      }
    }
  }
  if (config.share_weights != model.gen_ab.shared) {
    throw ConfigError(std::string("share_weights=") + (config.share_weights ? "true" : "false") +
                      " does not match the model's translator");
  }
  if (!config.share_weights &&
      model.gen_ab.max_compositions() < static_cast<std::size_t>(config.schedule.n_tr)) {
    throw ConfigError("independent mode needs at least n_tr blocks per direction");
  }

  model.ae.set_frozen(true);
  const auto frozen = model.ae.parameters();
  const std::uint64_t frozen_hash = parameter_hash(frozen);
  const auto gen_params = model.generator_parameters();
  const auto disc_params = model.discriminator_parameters();

  Adam<float> opt_g(config.gen_adam);
  Adam<float> opt_d(config.disc_adam);
  CompositionSampler sampler(config.schedule, derive_seed(config.seed, 1));
  CyclicSampler pick_a(domain_a.size(), derive_seed(config.seed, 2));
  CyclicSampler pick_b(domain_b.size(), derive_seed(config.seed, 3));
  std::mt19937_64 aug_rng(derive_seed(config.seed, 4));

  const std::size_t per_epoch = std::min(domain_a.size(), domain_b.size());
  std::vector<EpochStats> history;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto start = Clock::now();
    EpochStats st;
    st.epoch = epoch;
    st.n_hist.assign(static_cast<std::size_t>(config.schedule.n_tr) + 1, 0);
    st.n_min = config.schedule.n_tr;
    st.n_max = 0;
    std::size_t batches = 0;
    for (std::size_t done = 0; done < per_epoch; done += config.batch_size) {
      const std::size_t bs = std::min(config.batch_size, per_epoch - done);
      std::vector<std::size_t> ia(bs), ib(bs);
      for (std::size_t i = 0; i < bs; ++i) {
        ia[i] = pick_a.next();
        ib[i] = pick_b.next();
      }
      const Tensor a = make_batch(domain_a, ia, config.augment, aug_rng);
      const Tensor b = make_batch(domain_b, ib, config.augment, aug_rng);
      const int n = sampler.compositions_for(epoch, static_cast<int>(batches));
      ++st.n_hist[static_cast<std::size_t>(n)];
      st.n_min = std::min(st.n_min, n);
      st.n_max = std::max(st.n_max, n);

      const std::string where = "epoch " + std::to_string(epoch) + " batch " + std::to_string(batches) + ": ";
      try {
        Tape<float> gtape;
        auto obj = generator_objective(gtape, model, gtape.constant(a), gtape.constant(b), n, config.weights,
                                       config.adv_mode);
        const Tensor fake_a = obj.fake_a.value();
        const Tensor fake_b = obj.fake_b.value();
        st.loss_g += obj.total.value().item();
        gtape.backward(obj.total);
        st.grad_norm_g += grad_norm(gen_params);
        opt_g.step(gen_params);
        // The generator tape never tracks discriminator weights.
        zero_grads(disc_params);

        Tape<float> dtape;
        Var<float> ld_a = adv_loss_discriminator(dtape, model.disc_a, dtape.constant(a), dtape.constant(fake_a),
                                                 config.adv_mode);
        Var<float> ld_b = adv_loss_discriminator(dtape, model.disc_b, dtape.constant(b), dtape.constant(fake_b),
                                                 config.adv_mode);
        st.loss_d_a += ld_a.value().item();
        st.loss_d_b += ld_b.value().item();
        dtape.backward(ag::add(ld_a, ld_b));
        opt_d.step(disc_params);
      } catch (const NumericError& e) {
        throw NumericError(where + e.what());
      }
      ++batches;
    }
    const auto nb = static_cast<double>(batches);
    st.loss_g /= nb;
    st.loss_d_a /= nb;
    st.loss_d_b /= nb;
    st.grad_norm_g /= nb;
    if (eval && eval->clean && eval->degraded) {
      st.psnr = evaluate(model.ae, model.gen_ab, model.disc_b, *eval->clean, *eval->degraded,
                         StoppingPolicy::fixed_n(config.schedule.n_tr))
                    .mean_psnr;
    }
    st.seconds = seconds_since(start);
    st.rng_state = sampler.rng_state();
    history.push_back(st);
    if (parameter_hash(frozen) != frozen_hash) throw Error("frozen autoencoder parameters changed during training");
    if (on_epoch && !on_epoch(history.back())) break;
  }
  return history;
}

template GeneratorObjective<float> generator_objective(Tape<float>&, PolModel<float>&, Var<float>, Var<float>, int,
                                                       const LossWeights&, AdversarialMode);
template GeneratorObjective<double> generator_objective(Tape<double>&, PolModel<double>&, Var<double>, Var<double>,
                                                        int, const LossWeights&, AdversarialMode);

}  // namespace pol
