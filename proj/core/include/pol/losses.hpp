#pragma once

// Training objective: adversarial + cycle-consistency + identity terms.
// Norms are realized as per-element means so the weights do not depend on
// resolution.

#include "pol/model.hpp"

namespace pol {

struct LossWeights {
  double lambda_adv = 1.0;
  double lambda_cyc = 10.0;
  double lambda_id = 5.0;

  void validate() const;
};

// log: the log-likelihood GAN objective (stable softplus form).
// lsgan: least squares towards 1 (real) / 0 (fake).
enum class AdversarialMode { log, lsgan };

// -mean(log sigmoid(D(real))) - mean(log(1 - sigmoid(D(fake)))) on logit maps.
template <typename T>
Var<T> discriminator_loss_from_logits(Var<T> real_logits, Var<T> fake_logits,
                                      AdversarialMode mode = AdversarialMode::log);
// -mean(log sigmoid(D(fake))), the non-saturating generator form.
template <typename T>
Var<T> generator_adv_loss_from_logits(Var<T> fake_logits, AdversarialMode mode = AdversarialMode::log);

// `fake` must already be detached from any generator graph.
template <typename T>
Var<T> adv_loss_discriminator(Tape<T>& tape, Discriminator<T>& d, Var<T> real, Var<T> fake,
                              AdversarialMode mode = AdversarialMode::log);
// Discriminator weights are read without tracking.
template <typename T>
Var<T> adv_loss_generator(Tape<T>& tape, Discriminator<T>& d, Var<T> fake,
                          AdversarialMode mode = AdversarialMode::log);

// |G_AB(G_BA(b)) - b|_1 + |G_BA(G_AB(a)) - a|_1 with the same n everywhere.
template <typename T>
Var<T> cycle_loss(Tape<T>& tape, Autoencoder<T>& ae, Translator<T>& g_ab, Translator<T>& g_ba, Var<T> a, Var<T> b,
                  int n);
// |G_AB(b) - b|_2^2 + |G_BA(a) - a|_2^2 (mean square).
template <typename T>
Var<T> identity_loss(Tape<T>& tape, Autoencoder<T>& ae, Translator<T>& g_ab, Translator<T>& g_ba, Var<T> a,
                     Var<T> b, int n);

template <typename T>
Var<T> total_generator_loss(Var<T> adv, Var<T> cyc, Var<T> id, const LossWeights& w);
double total_generator_loss(double adv, double cyc, double id, const LossWeights& w);

}  // namespace pol
