#include "pol/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pol {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined key
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

ImageSet load_folder(const std::filesystem::path& dir, std::size_t size) {
  if (!std::filesystem::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ppm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no .ppm images in " + dir.string());
  ImageSet set;
  for (const auto& f : files) {
    set.names.push_back(f.filename().string());
    set.images.push_back(center_crop(read_ppm(f), size));
  }
  return set;
}

ImageSet from_images(std::vector<ImageU8> images, const std::string& prefix) {
  ImageSet set;
  for (std::size_t i = 0; i < images.size(); ++i) set.names.push_back(prefix + "_" + std::to_string(i));
  set.images = std::move(images);
  return set;
}

ImageSet degrade_set(const ImageSet& clean, DegradationSpec spec) {
  ImageSet out;
  out.names = clean.names;
  const std::uint64_t base = spec.seed;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    spec.seed = derive_seed(base, i);
    out.images.push_back(degrade(clean.images[i], spec));
  }
  return out;
}

ImageU8 augment(const ImageU8& img, const Augment& aug, std::mt19937_64& rng) {
  ImageU8 out = img;
  if (aug.resize_crop) {
    const auto big_w = static_cast<std::size_t>(std::ceil(img.width / 0.875));
    const auto big_h = static_cast<std::size_t>(std::ceil(img.height / 0.875));
    const ImageU8 big = resize_bilinear(img, big_w, big_h);
    const auto x0 = static_cast<std::size_t>(rng() % (big_w - img.width + 1));
    const auto y0 = static_cast<std::size_t>(rng() % (big_h - img.height + 1));
    out = crop(big, x0, y0, img.width, img.height);
  }
  if (aug.flip && (rng() & 1u)) out = flip_horizontal(out);
  return out;
}

BatchIterator::BatchIterator(std::size_t count, std::size_t batch_size, std::uint64_t seed, bool shuffle)
    : count_(count), batch_size_(batch_size), seed_(seed), shuffle_(shuffle) {
  if (count == 0) throw DataError("empty dataset");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
}

std::size_t BatchIterator::batches_per_epoch() const { return (count_ + batch_size_ - 1) / batch_size_; }

std::vector<std::vector<std::size_t>> BatchIterator::epoch_batches(int epoch) const {
  std::vector<std::size_t> order(count_);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle_) {
    // Fisher-Yates with raw engine output so the order does not depend on the
    // standard library's distributions.
    std::mt19937_64 rng(derive_seed(seed_, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = count_ - 1; i > 0; --i) std::swap(order[i], order[rng() % (i + 1)]);
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < count_; i += batch_size_) {
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(count_, i + batch_size_)));
  }
  return batches;
}

}  // namespace pol
