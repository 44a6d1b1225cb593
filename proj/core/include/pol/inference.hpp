#pragma once

// Test-time control of the composition count.

#include <string>
#include <vector>

#include "pol/dataset.hpp"
#include "pol/model.hpp"

namespace pol {

enum class PolicyKind { fixed, adaptive, oracle };

struct StoppingPolicy {
  PolicyKind kind = PolicyKind::fixed;
  int n = 0;      // fixed
  int n_max = 0;  // adaptive / oracle

  static StoppingPolicy fixed_n(int n) { return {PolicyKind::fixed, n, n}; }
  static StoppingPolicy adaptive(int n_max) { return {PolicyKind::adaptive, 0, n_max}; }
  static StoppingPolicy oracle(int n_max) { return {PolicyKind::oracle, 0, n_max}; }

  int horizon() const { return kind == PolicyKind::fixed ? n : n_max; }
  void validate() const;
  std::string name() const;
  static PolicyKind parse_kind(const std::string& name);
};

struct InferResult {
  ImageU8 image;
  int n_star = 0;
  // Target discriminator mean realness for n = 0 .. horizon.
  std::vector<double> score_trace;
  // PSNR against the reference for n = 0 .. horizon (only with a reference).
  std::vector<double> psnr_trace;
};

// Index of the largest value; the smallest index wins ties.
std::size_t argmax_first(const std::vector<double>& values);

// Decodes every f^0 .. f^horizon from one embedding trace and picks n_star by
// policy. Oracle requires `reference`; psnr_trace is filled whenever a
// reference is given.
InferResult infer(Autoencoder<float>& ae, Translator<float>& gen, Discriminator<float>& d_target,
                  const ImageU8& input, const StoppingPolicy& policy, const ImageU8* reference = nullptr);

// One decoded image per n (ascending), from a single embedding trace.
std::vector<ImageU8> modulation_sweep(Autoencoder<float>& ae, Translator<float>& gen, const ImageU8& input,
                                      const std::vector<int>& n_list);

enum class ComposeMode { embedding, image };

// embedding: Dec(f2^n2(f1^n1(Enc(x)))). image: G2(G1(x)) with a decode and
// re-encode in between.
ImageU8 compose_transforms(Autoencoder<float>& ae, Translator<float>& first, Translator<float>& second,
                           const ImageU8& input, ComposeMode mode, int n1, int n2);

struct EvalRow {
  std::string name;
  int n_star = 0;
  double psnr = 0;
  double input_psnr = 0;
  std::vector<double> score_trace;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  double mean_psnr = 0;
  double mean_input_psnr = 0;
  double mean_n_star = 0;
};

// Runs `policy` on every degraded image and scores against the clean one.
EvalReport evaluate(Autoencoder<float>& ae, Translator<float>& gen, Discriminator<float>& d_target,
                    const ImageSet& clean, const ImageSet& degraded, const StoppingPolicy& policy);

struct OracleCurve {
  std::vector<int> best_n;
  std::vector<double> best_psnr;
  double mean_best_n = 0;
  double mean_best_psnr = 0;
};

OracleCurve oracle_curve(Autoencoder<float>& ae, Translator<float>& gen, const ImageSet& degraded,
                         const ImageSet& references, int n_max);

}  // namespace pol
