#include "pol/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace pol {
namespace {

std::mutex g_config_mutex;
std::optional<std::size_t> g_override;

std::optional<std::size_t> env_threads() {
  const char* raw = std::getenv("POL_THREADS");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  try {
    return static_cast<std::size_t>(std::stoul(raw));
  } catch (...) {
    return std::nullopt;
  }
}

}  // namespace

std::size_t configured_threads() {
  std::lock_guard lock(g_config_mutex);
  if (g_override) return *g_override;
  if (auto t = env_threads()) return *t;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void set_thread_count(std::size_t threads) {
  std::lock_guard lock(g_config_mutex);
  g_override = threads;
}

bool strict_single_thread() { return configured_threads() == 0; }

void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_grain) {
  if (count == 0) return;
  std::size_t workers = std::max<std::size_t>(1, configured_threads());
  workers = std::min(workers, std::max<std::size_t>(1, count / std::max<std::size_t>(1, min_grain)));
  if (workers <= 1) {
    body(0, count);
    return;
  }
  const std::size_t chunk = (count + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  body(0, std::min(count, chunk));
  for (auto& t : pool) t.join();
}

}  // namespace pol
