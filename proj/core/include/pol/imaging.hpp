#pragma once

// 8-bit RGB images, synthetic degradations, PSNR and PPM (P6) I/O.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "pol/tensor.hpp"

namespace pol {

struct ImageU8 {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // interleaved RGB, row-major

  static constexpr std::size_t kChannels = 3;

  ImageU8() = default;
  ImageU8(std::size_t w, std::size_t h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(w * h * kChannels, fill) {}

  std::uint8_t& at(std::size_t x, std::size_t y, std::size_t c) { return pixels[(y * width + x) * kChannels + c]; }
  std::uint8_t at(std::size_t x, std::size_t y, std::size_t c) const {
    return pixels[(y * width + x) * kChannels + c];
  }
  bool operator==(const ImageU8&) const = default;
};

enum class DegradationKind { gaussian_noise, gaussian_blur, dct_quantize };

struct DegradationSpec {
  DegradationKind kind = DegradationKind::gaussian_noise;
  double param = 30.0;  // noise std (8-bit units), blur sigma (px) or quality
  std::uint64_t seed = 0;

  void validate() const;
  std::string kind_name() const;
  static DegradationKind parse_kind(const std::string& name);
};

// Adds i.i.d. N(0, std^2) per channel value, then rounds and clips.
ImageU8 add_gaussian_noise(const ImageU8& img, double std, std::mt19937_64& rng);

// Separable Gaussian, radius ceil(3 sigma), mirrored edges; sigma 0 is identity.
ImageU8 gaussian_blur(const ImageU8& img, double sigma);
// Normalized 1-D kernel taps for offsets -radius..radius.
std::vector<double> gaussian_kernel(double sigma);

// Blockwise 8x8 DCT-II per channel, quantized with the JPEG luminance table
// scaled by the libjpeg quality rule. Partial edge blocks replicate the last
// row/column.
ImageU8 dct_quantize(const ImageU8& img, int quality);
// The 64-entry quantization table for a given quality (row-major).
std::vector<int> quantization_table(int quality);

// Applies spec with a generator seeded from spec.seed.
ImageU8 degrade(const ImageU8& img, const DegradationSpec& spec);

inline constexpr double kPsnrIdentical = 99.0;

// 10 log10(255^2 / MSE) over all channels; identical images give 99.
double psnr(const ImageU8& a, const ImageU8& b);
double mse(const ImageU8& a, const ImageU8& b);

ImageU8 read_ppm(const std::filesystem::path& path);
ImageU8 parse_ppm(const std::vector<std::uint8_t>& bytes);
void write_ppm(const std::filesystem::path& path, const ImageU8& img);
std::vector<std::uint8_t> encode_ppm(const ImageU8& img);

// v -> v / 127.5 - 1 as a (1, 3, H, W) tensor, and back with round/clip.
template <typename T>
BasicTensor<T> to_tensor(const ImageU8& img);
template <typename T>
ImageU8 to_image(const BasicTensor<T>& t, std::size_t index = 0);
// Stacks same-sized images into one (N, 3, H, W) batch.
template <typename T>
BasicTensor<T> to_batch(const std::vector<ImageU8>& images);

ImageU8 resize_bilinear(const ImageU8& img, std::size_t width, std::size_t height);
ImageU8 crop(const ImageU8& img, std::size_t x0, std::size_t y0, std::size_t width, std::size_t height);
ImageU8 center_crop(const ImageU8& img, std::size_t size);
ImageU8 flip_horizontal(const ImageU8& img);

}  // namespace pol
