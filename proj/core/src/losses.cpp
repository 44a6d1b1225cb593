#include "pol/losses.hpp"

#include <cmath>

namespace pol {

void LossWeights::validate() const {
  if (!(lambda_adv >= 0 && lambda_cyc >= 0 && lambda_id >= 0)) {
    throw ConfigError("loss weights must be non-negative");
  }
}

namespace {

template <typename T>
Var<T> check_finite(Var<T> loss, const char* what) {
  if (!std::isfinite(static_cast<double>(loss.value().item()))) {
    throw NumericError(std::string(what) + ": non-finite loss");
  }
  return loss;
}

template <typename T>
Var<T> generate(Tape<T>& tape, Autoencoder<T>& ae, Translator<T>& g, Var<T> x, int n) {
  return ae.decode(tape, g.iterate(tape, ae.encode(tape, x), n));
}

}  // namespace

template <typename T>
Var<T> discriminator_loss_from_logits(Var<T> real_logits, Var<T> fake_logits, AdversarialMode mode) {
  if (mode == AdversarialMode::lsgan) {
    return check_finite(ag::add(ag::square_error_mean(real_logits, T(1)), ag::square_error_mean(fake_logits, T(0))),
                        "adv_loss_discriminator");
  }
  // -log sigmoid(z) = softplus(-z); -log(1 - sigmoid(z)) = softplus(z)
  return check_finite(ag::add(ag::softplus_mean(real_logits, T(-1)), ag::softplus_mean(fake_logits, T(1))),
                      "adv_loss_discriminator");
}

template <typename T>
Var<T> generator_adv_loss_from_logits(Var<T> fake_logits, AdversarialMode mode) {
  if (mode == AdversarialMode::lsgan) {
    return check_finite(ag::square_error_mean(fake_logits, T(1)), "adv_loss_generator");
  }
  return check_finite(ag::softplus_mean(fake_logits, T(-1)), "adv_loss_generator");
}

template <typename T>
Var<T> adv_loss_discriminator(Tape<T>& tape, Discriminator<T>& d, Var<T> real, Var<T> fake, AdversarialMode mode) {
  return discriminator_loss_from_logits(d.forward(tape, real), d.forward(tape, fake), mode);
}

template <typename T>
Var<T> adv_loss_generator(Tape<T>& tape, Discriminator<T>& d, Var<T> fake, AdversarialMode mode) {
  return generator_adv_loss_from_logits(d.forward(tape, fake, false), mode);
}

template <typename T>
Var<T> cycle_loss(Tape<T>& tape, Autoencoder<T>& ae, Translator<T>& g_ab, Translator<T>& g_ba, Var<T> a, Var<T> b,
                  int n) {
  Var<T> rec_a = generate(tape, ae, g_ba, generate(tape, ae, g_ab, a, n), n);
  Var<T> rec_b = generate(tape, ae, g_ab, generate(tape, ae, g_ba, b, n), n);
  return ag::add(ag::l1_mean(rec_b, b), ag::l1_mean(rec_a, a));
}

template <typename T>
Var<T> identity_loss(Tape<T>& tape, Autoencoder<T>& ae, Translator<T>& g_ab, Translator<T>& g_ba, Var<T> a,
                     Var<T> b, int n) {
  return ag::add(ag::l2_mean(generate(tape, ae, g_ab, b, n), b), ag::l2_mean(generate(tape, ae, g_ba, a, n), a));
}

template <typename T>
Var<T> total_generator_loss(Var<T> adv, Var<T> cyc, Var<T> id, const LossWeights& w) {
  w.validate();
  return ag::weighted_sum<T>({adv, cyc, id},
                             {static_cast<T>(w.lambda_adv), static_cast<T>(w.lambda_cyc), static_cast<T>(w.lambda_id)});
}

double total_generator_loss(double adv, double cyc, double id, const LossWeights& w) {
  w.validate();
  return w.lambda_adv * adv + w.lambda_cyc * cyc + w.lambda_id * id;
}

#define POL_INSTANTIATE_LOSSES(T)                                                                                  \
  template Var<T> discriminator_loss_from_logits(Var<T>, Var<T>, AdversarialMode);                                 \
  template Var<T> generator_adv_loss_from_logits(Var<T>, AdversarialMode);                                         \
  template Var<T> adv_loss_discriminator(Tape<T>&, Discriminator<T>&, Var<T>, Var<T>, AdversarialMode);            \
  template Var<T> adv_loss_generator(Tape<T>&, Discriminator<T>&, Var<T>, AdversarialMode);                        \
  template Var<T> cycle_loss(Tape<T>&, Autoencoder<T>&, Translator<T>&, Translator<T>&, Var<T>, Var<T>, int);      \
  template Var<T> identity_loss(Tape<T>&, Autoencoder<T>&, Translator<T>&, Translator<T>&, Var<T>, Var<T>, int);   \
  template Var<T> total_generator_loss(Var<T>, Var<T>, Var<T>, const LossWeights&);

POL_INSTANTIATE_LOSSES(float)
POL_INSTANTIATE_LOSSES(double)

#undef POL_INSTANTIATE_LOSSES

}  // namespace pol
