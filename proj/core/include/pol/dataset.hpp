#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "pol/imaging.hpp"

namespace pol {

struct ImageSet {
  std::vector<std::string> names;
  std::vector<ImageU8> images;

  std::size_t size() const noexcept { return images.size(); }
  bool empty() const noexcept { return images.empty(); }
};

// Sorted *.ppm files of a folder, each center-cropped (after an aspect
// preserving resize when smaller) to size x size.
ImageSet load_folder(const std::filesystem::path& dir, std::size_t size);
ImageSet from_images(std::vector<ImageU8> images, const std::string& prefix = "img");

ImageSet degrade_set(const ImageSet& clean, DegradationSpec spec);

struct Augment {
  bool resize_crop = false;  // upscale by 1/0.875 and crop a random window
  bool flip = false;
};

ImageU8 augment(const ImageU8& img, const Augment& aug, std::mt19937_64& rng);

// Fixed-order batching: a seeded permutation per epoch, drop-last disabled.
class BatchIterator {
 public:
  BatchIterator(std::size_t count, std::size_t batch_size, std::uint64_t seed, bool shuffle = true);

  // Index batches for one epoch. The same (seed, epoch) always gives the
  // same order.
  std::vector<std::vector<std::size_t>> epoch_batches(int epoch) const;
  std::size_t batches_per_epoch() const;

 private:
  std::size_t count_;
  std::size_t batch_size_;
  std::uint64_t seed_;
  bool shuffle_;
};

// Stable 64-bit stream key derived from a base seed and a label.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace pol
