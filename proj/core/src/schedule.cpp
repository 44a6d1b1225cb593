#include "pol/schedule.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "pol/error.hpp"

namespace pol {

void CompositionSchedule::validate() const {
  if (n_tr < 1) throw ConfigError("n_tr must be >= 1");
  if (warmup_step < 1) throw ConfigError("warmup_step must be >= 1");
  if (range_lo == 0 && range_hi == 0) return;
  if (!(1 <= range_lo && range_lo <= range_hi && range_hi == n_tr)) {
    throw ConfigError("random range must satisfy 1 <= lo <= hi == n_tr, got [" + std::to_string(range_lo) + "," +
                      std::to_string(range_hi) + "] with n_tr=" + std::to_string(n_tr));
  }
}

int warmup_compositions(int epoch, int warmup_step, int n_tr) {
  if (epoch < 0) throw ConfigError("epoch must be >= 0");
  return std::min(epoch / warmup_step + 1, n_tr);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  if (lo > hi) throw ConfigError("uniform_int: empty range");
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return lo + static_cast<int>(r % span);
}

CompositionSampler::CompositionSampler(CompositionSchedule schedule, std::uint64_t seed)
    : schedule_(schedule), rng_(seed) {
  schedule_.validate();
}

int CompositionSampler::compositions_for(int epoch, int batch_idx) {
  const auto& s = schedule_;
  if (!s.progressive) return s.n_tr;
  if (epoch < s.n_tr * s.warmup_step) return warmup_compositions(epoch, s.warmup_step, s.n_tr);
  if (!s.has_range()) return s.n_tr;
  if (s.randomize_per == RandomizePer::batch) return uniform_int(rng_, s.range_lo, s.range_hi);
  (void)batch_idx;
  if (!epoch_draw_ || epoch_draw_->first != epoch) epoch_draw_ = {epoch, uniform_int(rng_, s.range_lo, s.range_hi)};
  return epoch_draw_->second;
}

std::string CompositionSampler::rng_state() const {
  std::ostringstream os;
  os << rng_;
  return os.str();
}

void CompositionSampler::set_rng_state(const std::string& state) {
  std::istringstream is(state);
  is >> rng_;
  if (!is) throw DataError("invalid composition sampler rng state");
}

}  // namespace pol
