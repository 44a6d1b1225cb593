#pragma once

// Number of block compositions per (epoch, batch).
//
// Warm-up (epoch < n_tr * warmup_step): n = min(floor(epoch / warmup_step) + 1, n_tr).
// Afterwards: n_tr when the random range is empty, otherwise a uniform draw
// in [lo, hi] once per batch or once per epoch. Non-progressive schedules use
// n_tr from the first epoch.

#include <cstdint>
#include <optional>
#include <random>
#include <string>

namespace pol {

enum class RandomizePer { batch, epoch };

struct CompositionSchedule {
  int n_tr = 4;
  int warmup_step = 1;
  int range_lo = 0;  // 0 together with range_hi = 0 means an empty range
  int range_hi = 0;
  RandomizePer randomize_per = RandomizePer::batch;
  bool progressive = true;

  bool has_range() const noexcept { return range_hi > 0; }
  int warmup_epochs() const noexcept { return progressive ? n_tr * warmup_step : 0; }
  void validate() const;
};

// The deterministic warm-up law.
int warmup_compositions(int epoch, int warmup_step, int n_tr);

// Uniform integer in [lo, hi] from a raw 64-bit engine, independent of the
// standard library's distribution implementation.
int uniform_int(std::mt19937_64& rng, int lo, int hi);

class CompositionSampler {
 public:
  CompositionSampler(CompositionSchedule schedule, std::uint64_t seed);

  const CompositionSchedule& schedule() const noexcept { return schedule_; }

  // Calls must be made in (epoch, batch) order for reproducible draws.
  int compositions_for(int epoch, int batch_idx);

  std::string rng_state() const;
  void set_rng_state(const std::string& state);

 private:
  CompositionSchedule schedule_;
  std::mt19937_64 rng_;
  std::optional<std::pair<int, int>> epoch_draw_;  // (epoch, n)
};

}  // namespace pol
