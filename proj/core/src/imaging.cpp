#include "pol/imaging.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>

namespace pol {
namespace {

std::uint8_t clip_round(double v) {
  const double r = std::nearbyint(v);
  return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

// Mirror index into [0, n) for arbitrarily large offsets (period 2n - 2).
std::size_t mirror(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * n - 2);
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  if (m >= static_cast<std::ptrdiff_t>(n)) m = period - m;
  return static_cast<std::size_t>(m);
}

constexpr std::array<int, 64> kLuminanceTable = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,  14, 13, 16, 24, 40, 57,
    69, 56, 14, 17, 22,  29,  51,  87,  80, 62, 18, 22, 37,  56,  68,  109, 103, 77, 24, 35, 55, 64,
    81, 104, 113, 92, 49, 64, 78,  87,  103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

// c(u) cos((2x + 1) u pi / 16) with the orthonormal scale folded in.
const std::array<double, 64>& dct_basis() {
  static const std::array<double, 64> basis = [] {
    std::array<double, 64> b{};
    for (int u = 0; u < 8; ++u) {
      const double cu = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int x = 0; x < 8; ++x) b[u * 8 + x] = cu * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
    }
    return b;
  }();
  return basis;
}

void skip_ws_and_comments(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(bytes[pos])) {
      ++pos;
    } else {
      break;
    }
  }
}

std::size_t read_header_int(const std::vector<std::uint8_t>& bytes, std::size_t& pos, const char* field) {
  skip_ws_and_comments(bytes, pos);
  if (pos >= bytes.size()) throw ParseError(std::string("ppm: truncated header before ") + field, pos);
  if (!std::isdigit(bytes[pos])) throw ParseError(std::string("ppm: expected digits for ") + field, pos);
  std::size_t v = 0;
  while (pos < bytes.size() && std::isdigit(bytes[pos])) {
    v = v * 10 + (bytes[pos] - '0');
    if (v > (1u << 24)) throw ParseError(std::string("ppm: ") + field + " too large", pos);
    ++pos;
  }
  return v;
}

}  // namespace

void DegradationSpec::validate() const {
  switch (kind) {
    case DegradationKind::gaussian_noise:
      if (!(param >= 0)) throw ConfigError("noise std must be >= 0");
      break;
    case DegradationKind::gaussian_blur:
      if (!(param >= 0)) throw ConfigError("blur sigma must be >= 0");
      break;
    case DegradationKind::dct_quantize:
      if (!(param >= 1 && param <= 100) || param != std::floor(param)) {
        throw ConfigError("quality must be an integer in [1,100]");
      }
      break;
  }
}

std::string DegradationSpec::kind_name() const {
  switch (kind) {
    case DegradationKind::gaussian_noise:
      return "noise";
    case DegradationKind::gaussian_blur:
      return "blur";
    case DegradationKind::dct_quantize:
      return "jpeg";
  }
  return "unknown";
}

DegradationKind DegradationSpec::parse_kind(const std::string& name) {
  if (name == "noise" || name == "gaussian_noise") return DegradationKind::gaussian_noise;
  if (name == "blur" || name == "gaussian_blur") return DegradationKind::gaussian_blur;
  if (name == "jpeg" || name == "dct_quantize") return DegradationKind::dct_quantize;
  throw ConfigError("unknown degradation kind '" + name + "' (noise|blur|jpeg)");
}

ImageU8 add_gaussian_noise(const ImageU8& img, double std, std::mt19937_64& rng) {
  if (!(std >= 0)) throw ConfigError("noise std must be >= 0");
  if (std == 0) return img;
  std::normal_distribution<double> dist(0.0, std);
  ImageU8 out = img;
  for (auto& p : out.pixels) p = clip_round(static_cast<double>(p) + dist(rng));
  return out;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0)) return {1.0};
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double total = 0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    total += k[i + radius];
  }
  for (auto& v : k) v /= total;
  return k;
}

ImageU8 gaussian_blur(const ImageU8& img, double sigma) {
  if (!(sigma >= 0)) throw ConfigError("blur sigma must be >= 0");
  if (sigma == 0) return img;
  const auto k = gaussian_kernel(sigma);
  const auto radius = static_cast<std::ptrdiff_t>(k.size() / 2);
  const std::size_t w = img.width, h = img.height, ch = ImageU8::kChannels;
  std::vector<double> tmp(w * h * ch);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < ch; ++c) {
        double s = 0;
        for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
          s += k[i + radius] * img.at(mirror(static_cast<std::ptrdiff_t>(x) + i, w), y, c);
        }
        tmp[(y * w + x) * ch + c] = s;
      }
    }
  }
  ImageU8 out(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < ch; ++c) {
        double s = 0;
        for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
          s += k[i + radius] * tmp[(mirror(static_cast<std::ptrdiff_t>(y) + i, h) * w + x) * ch + c];
        }
        out.at(x, y, c) = clip_round(s);
      }
    }
  }
  return out;
}

std::vector<int> quantization_table(int quality) {
  if (quality < 1 || quality > 100) throw ConfigError("quality must be in [1,100]");
  const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  std::vector<int> q(64);
  for (std::size_t i = 0; i < 64; ++i) q[i] = std::clamp((kLuminanceTable[i] * scale + 50) / 100, 1, 255);
  return q;
}

ImageU8 dct_quantize(const ImageU8& img, int quality) {
  const auto q = quantization_table(quality);
  const auto& basis = dct_basis();
  ImageU8 out(img.width, img.height);
  std::array<double, 64> block{}, tmp{}, coef{};
  for (std::size_t by = 0; by < img.height; by += 8) {
    for (std::size_t bx = 0; bx < img.width; bx += 8) {
      for (std::size_t c = 0; c < ImageU8::kChannels; ++c) {
        for (std::size_t y = 0; y < 8; ++y) {
          for (std::size_t x = 0; x < 8; ++x) {
            const std::size_t sx = std::min(bx + x, img.width - 1);
            const std::size_t sy = std::min(by + y, img.height - 1);
            block[y * 8 + x] = static_cast<double>(img.at(sx, sy, c)) - 128.0;
          }
        }
        // Rows then columns: coef[v][u] = sum_y B[v][y] sum_x B[u][x] block[y][x]
        for (int y = 0; y < 8; ++y) {
          for (int u = 0; u < 8; ++u) {
            double s = 0;
            for (int x = 0; x < 8; ++x) s += basis[u * 8 + x] * block[y * 8 + x];
            tmp[y * 8 + u] = s;
          }
        }
        for (int v = 0; v < 8; ++v) {
          for (int u = 0; u < 8; ++u) {
            double s = 0;
            for (int y = 0; y < 8; ++y) s += basis[v * 8 + y] * tmp[y * 8 + u];
            coef[v * 8 + u] = std::nearbyint(s / q[v * 8 + u]) * q[v * 8 + u];
          }
        }
        for (int v = 0; v < 8; ++v) {
          for (int x = 0; x < 8; ++x) {
            double s = 0;
            for (int u = 0; u < 8; ++u) s += basis[u * 8 + x] * coef[v * 8 + u];
            tmp[v * 8 + x] = s;
          }
        }
        for (std::size_t y = 0; y < 8; ++y) {
          for (std::size_t x = 0; x < 8; ++x) {
            double s = 0;
            for (std::size_t v = 0; v < 8; ++v) s += basis[v * 8 + y] * tmp[v * 8 + x];
            if (bx + x < img.width && by + y < img.height) out.at(bx + x, by + y, c) = clip_round(s + 128.0);
          }
        }
      }
    }
  }
  return out;
}

ImageU8 degrade(const ImageU8& img, const DegradationSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case DegradationKind::gaussian_noise: {
      std::mt19937_64 rng(spec.seed);
      return add_gaussian_noise(img, spec.param, rng);
    }
    case DegradationKind::gaussian_blur:
      return gaussian_blur(img, spec.param);
    case DegradationKind::dct_quantize:
      return dct_quantize(img, static_cast<int>(spec.param));
  }
  return img;
}

double mse(const ImageU8& a, const ImageU8& b) {
  if (a.width != b.width || a.height != b.height) {
    throw DimensionError("psnr", "width/height",
                         std::to_string(a.width) + "x" + std::to_string(a.height) + " vs " + std::to_string(b.width) +
                             "x" + std::to_string(b.height));
  }
  if (a.pixels.empty()) throw DimensionError("psnr", "numel", "empty image");
  double s = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = static_cast<double>(a.pixels[i]) - b.pixels[i];
    s += d * d;
  }
  return s / static_cast<double>(a.pixels.size());
}

double psnr(const ImageU8& a, const ImageU8& b) {
  const double m = mse(a, b);
  if (m == 0) return kPsnrIdentical;
  return 10.0 * std::log10(255.0 * 255.0 / m);
}

ImageU8 parse_ppm(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') throw ParseError("ppm: missing P6 magic", 0);
  pos = 2;
  const std::size_t w = read_header_int(bytes, pos, "width");
  const std::size_t h = read_header_int(bytes, pos, "height");
  const std::size_t maxval = read_header_int(bytes, pos, "maxval");
  if (w == 0 || h == 0) throw ParseError("ppm: zero extent", pos);
  if (maxval != 255) throw ParseError("ppm: only maxval 255 is supported, got " + std::to_string(maxval), pos);
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw ParseError("ppm: expected whitespace after maxval", pos);
  ++pos;
  const std::size_t need = w * h * 3;
  if (bytes.size() - pos < need) {
    throw ParseError("ppm: truncated payload, need " + std::to_string(need) + " bytes, have " +
                         std::to_string(bytes.size() - pos),
                     bytes.size());
  }
  ImageU8 img(w, h);
  std::copy(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.begin() + static_cast<std::ptrdiff_t>(pos + need),
            img.pixels.begin());
  return img;
}

ImageU8 read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_ppm(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

std::vector<std::uint8_t> encode_ppm(const ImageU8& img) {
  const std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

void write_ppm(const std::filesystem::path& path, const ImageU8& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  const auto bytes = encode_ppm(img);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

template <typename T>
BasicTensor<T> to_tensor(const ImageU8& img) {
  return to_batch<T>({img});
}

template <typename T>
BasicTensor<T> to_batch(const std::vector<ImageU8>& images) {
  if (images.empty()) throw DimensionError("to_batch", "batch", "no images");
  const std::size_t w = images[0].width, h = images[0].height;
  BasicTensor<T> t(Shape{images.size(), ImageU8::kChannels, h, w});
  for (std::size_t n = 0; n < images.size(); ++n) {
    const ImageU8& img = images[n];
    if (img.width != w || img.height != h) {
      throw DimensionError("to_batch", "width/height", "images in a batch must share a size");
    }
    for (std::size_t c = 0; c < ImageU8::kChannels; ++c) {
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
          t.at(n, c, y, x) = static_cast<T>(static_cast<double>(img.at(x, y, c)) / 127.5 - 1.0);
        }
      }
    }
  }
  return t;
}

template <typename T>
ImageU8 to_image(const BasicTensor<T>& t, std::size_t index) {
  if (t.rank() != 4 || t.dim(1) != ImageU8::kChannels) {
    throw DimensionError("to_image", "channels", "expected (N,3,H,W), got " + t.shape().to_string());
  }
  if (index >= t.dim(0)) throw DimensionError("to_image", "batch", "index out of range");
  ImageU8 img(t.dim(3), t.dim(2));
  for (std::size_t c = 0; c < ImageU8::kChannels; ++c) {
    for (std::size_t y = 0; y < img.height; ++y) {
      for (std::size_t x = 0; x < img.width; ++x) {
        img.at(x, y, c) = clip_round((static_cast<double>(t.at(index, c, y, x)) + 1.0) * 127.5);
      }
    }
  }
  return img;
}

ImageU8 resize_bilinear(const ImageU8& img, std::size_t width, std::size_t height) {
  if (width == img.width && height == img.height) return img;
  ImageU8 out(width, height);
  const double sx = static_cast<double>(img.width) / static_cast<double>(width);
  const double sy = static_cast<double>(img.height) / static_cast<double>(height);
  for (std::size_t y = 0; y < height; ++y) {
    const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0, static_cast<double>(img.height - 1));
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, img.height - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < width; ++x) {
      const double fx =
          std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0, static_cast<double>(img.width - 1));
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, img.width - 1);
      const double wx = fx - static_cast<double>(x0);
      for (std::size_t c = 0; c < ImageU8::kChannels; ++c) {
        const double top = img.at(x0, y0, c) * (1 - wx) + img.at(x1, y0, c) * wx;
        const double bot = img.at(x0, y1, c) * (1 - wx) + img.at(x1, y1, c) * wx;
        out.at(x, y, c) = clip_round(top * (1 - wy) + bot * wy);
      }
    }
  }
  return out;
}

ImageU8 crop(const ImageU8& img, std::size_t x0, std::size_t y0, std::size_t width, std::size_t height) {
  if (x0 + width > img.width || y0 + height > img.height) {
    throw DimensionError("crop", "width/height", "crop window exceeds image");
  }
  ImageU8 out(width, height);
  for (std::size_t y = 0; y < height; ++y) {
    const auto* src = &img.pixels[((y0 + y) * img.width + x0) * ImageU8::kChannels];
    std::copy(src, src + width * ImageU8::kChannels, &out.pixels[y * width * ImageU8::kChannels]);
  }
  return out;
}

ImageU8 center_crop(const ImageU8& img, std::size_t size) {
  ImageU8 src = img;
  if (img.width < size || img.height < size) {
    const double s = static_cast<double>(size) / static_cast<double>(std::min(img.width, img.height));
    src = resize_bilinear(img, std::max(size, static_cast<std::size_t>(std::ceil(img.width * s))),
                          std::max(size, static_cast<std::size_t>(std::ceil(img.height * s))));
  }
  return crop(src, (src.width - size) / 2, (src.height - size) / 2, size, size);
}

ImageU8 flip_horizontal(const ImageU8& img) {
  ImageU8 out(img.width, img.height);
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      for (std::size_t c = 0; c < ImageU8::kChannels; ++c) out.at(x, y, c) = img.at(img.width - 1 - x, y, c);
    }
  }
  return out;
}

template BasicTensor<float> to_tensor<float>(const ImageU8&);
template BasicTensor<double> to_tensor<double>(const ImageU8&);
template BasicTensor<float> to_batch<float>(const std::vector<ImageU8>&);
template BasicTensor<double> to_batch<double>(const std::vector<ImageU8>&);
template ImageU8 to_image(const BasicTensor<float>&, std::size_t);
template ImageU8 to_image(const BasicTensor<double>&, std::size_t);

}  // namespace pol
