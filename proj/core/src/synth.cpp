#include "pol/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>

namespace pol {
namespace {

using Rgb = std::array<double, 3>;

class Canvas {
 public:
  explicit Canvas(std::size_t n) : n_(n), px_(n * n) {}

  std::size_t size() const { return n_; }
  Rgb& at(std::size_t x, std::size_t y) { return px_[y * n_ + x]; }

  void fill_rect(double x0, double y0, double x1, double y1, const Rgb& c) {
    const auto lo_x = static_cast<std::size_t>(std::clamp(std::floor(x0), 0.0, double(n_)));
    const auto hi_x = static_cast<std::size_t>(std::clamp(std::ceil(x1), 0.0, double(n_)));
    const auto lo_y = static_cast<std::size_t>(std::clamp(std::floor(y0), 0.0, double(n_)));
    const auto hi_y = static_cast<std::size_t>(std::clamp(std::ceil(y1), 0.0, double(n_)));
    for (std::size_t y = lo_y; y < hi_y; ++y) {
      for (std::size_t x = lo_x; x < hi_x; ++x) at(x, y) = c;
    }
  }

  ImageU8 downsample(std::size_t factor) const {
    const std::size_t out_n = n_ / factor;
    ImageU8 img(out_n, out_n);
    const double inv = 1.0 / static_cast<double>(factor * factor);
    for (std::size_t y = 0; y < out_n; ++y) {
      for (std::size_t x = 0; x < out_n; ++x) {
        Rgb s{0, 0, 0};
        for (std::size_t dy = 0; dy < factor; ++dy) {
          for (std::size_t dx = 0; dx < factor; ++dx) {
            const Rgb& p = px_[(y * factor + dy) * n_ + x * factor + dx];
            for (int c = 0; c < 3; ++c) s[c] += std::clamp(p[c], 0.0, 255.0);
          }
        }
        for (std::size_t c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<std::uint8_t>(std::nearbyint(s[c] * inv));
      }
    }
    return img;
  }

 private:
  std::size_t n_;
  std::vector<Rgb> px_;
};

double uni(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
bool chance(std::mt19937_64& rng, double p) { return uni(rng, 0, 1) < p; }

Rgb tint(const Rgb& c, double k) { return {c[0] * k, c[1] * k, c[2] * k}; }

Rgb facade_color(std::mt19937_64& rng) {
  switch (std::uniform_int_distribution<int>(0, 4)(rng)) {
    case 0:  // concrete
    {
      const double g = uni(rng, 120, 210);
      return {g, g * uni(rng, 0.97, 1.02), g * uni(rng, 0.95, 1.03)};
    }
    case 1:  // brick
      return {uni(rng, 130, 190), uni(rng, 60, 100), uni(rng, 45, 80)};
    case 2:  // painted render
      return {uni(rng, 190, 250), uni(rng, 170, 235), uni(rng, 130, 200)};
    case 3:  // dark cladding
    {
      const double g = uni(rng, 35, 80);
      return {g, g * uni(rng, 0.95, 1.1), g * uni(rng, 1.0, 1.2)};
    }
    default:  // white stucco, often blown out in daylight
    {
      const double g = uni(rng, 235, 280);
      return {g, g, g * uni(rng, 0.96, 1.0)};
    }
  }
}

void draw_building(Canvas& cv, std::mt19937_64& rng, double x0, double x1, double top, double base) {
  const double n = static_cast<double>(cv.size());
  const Rgb wall = facade_color(rng);
  // Sunlit and shaded halves give a vertical edge through the facade.
  const double split = chance(rng, 0.4) ? uni(rng, x0, x1) : x1;
  const double shade = uni(rng, 0.55, 0.8);
  cv.fill_rect(x0, top, split, base, wall);
  cv.fill_rect(split, top, x1, base, tint(wall, shade));

  const double cell_w = n * uni(rng, 0.05, 0.11);
  const double cell_h = n * uni(rng, 0.06, 0.12);
  const double win_fx = uni(rng, 0.45, 0.75);
  const double win_fy = uni(rng, 0.45, 0.7);
  const bool reflective = chance(rng, 0.35);
  const double lit_p = uni(rng, 0.0, 0.3);
  for (double cy = top + cell_h * 0.4; cy + cell_h * win_fy < base - cell_h * 0.3; cy += cell_h) {
    for (double cx = x0 + cell_w * 0.3; cx + cell_w * win_fx < x1 - cell_w * 0.2; cx += cell_w) {
      Rgb glass;
      if (reflective) {
        const double g = uni(rng, 200, 300);
        glass = {g * 0.92, g * 0.97, g};
      } else if (chance(rng, lit_p)) {
        glass = {uni(rng, 240, 300), uni(rng, 220, 270), uni(rng, 150, 200)};
      } else {
        const double g = uni(rng, -30, 25);
        glass = {g, g, g + 6};
      }
      if (cx >= split) glass = tint(glass, reflective ? 0.85 : 1.0);
      cv.fill_rect(cx, cy, cx + cell_w * win_fx, cy + cell_h * win_fy, glass);
    }
  }
  // Cornice line at the roof.
  if (chance(rng, 0.6)) cv.fill_rect(x0, top, x1, top + n * 0.015, tint(wall, 0.6));
}

}  // namespace

ImageU8 render_scene(std::uint64_t seed, const SceneOptions& options) {
  if (options.size < 8 || options.supersample < 1) throw ConfigError("scene size must be >= 8");
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 0x5EED);
  const std::size_t big = options.size * options.supersample;
  const double n = static_cast<double>(big);
  Canvas cv(big);

  // Sky: overcast skies are close to white and clip; clear skies are a
  // blue gradient.
  const bool overcast = chance(rng, 0.55);
  const Rgb zenith = overcast ? Rgb{uni(rng, 225, 260), uni(rng, 230, 265), uni(rng, 240, 275)}
                              : Rgb{uni(rng, 60, 120), uni(rng, 120, 170), uni(rng, 200, 250)};
  const Rgb horizon = overcast ? Rgb{275, 275, 275} : Rgb{uni(rng, 190, 230), uni(rng, 210, 240), uni(rng, 240, 270)};
  const double horizon_y = n * uni(rng, 0.55, 0.8);
  for (std::size_t y = 0; y < big; ++y) {
    const double t = std::min(1.0, static_cast<double>(y) / horizon_y);
    Rgb c;
    for (int k = 0; k < 3; ++k) c[k] = zenith[k] * (1 - t) + horizon[k] * t;
    for (std::size_t x = 0; x < big; ++x) cv.at(x, y) = c;
  }

  // Two rows of buildings, far row lighter and shorter.
  for (int row = 0; row < 2; ++row) {
    double x = -n * uni(rng, 0.0, 0.2);
    while (x < n) {
      const double w = n * uni(rng, 0.18, 0.5);
      const double top = row == 0 ? n * uni(rng, 0.15, 0.5) : n * uni(rng, -0.1, 0.35);
      if (row == 0 || chance(rng, 0.8)) draw_building(cv, rng, x, x + w, top, horizon_y);
      x += w + (row == 0 ? n * uni(rng, 0.0, 0.1) : 0.0);
    }
  }

  // Road and pavement below the horizon.
  const double asphalt = uni(rng, 20, 75);
  cv.fill_rect(0, horizon_y, n, n, {asphalt, asphalt, asphalt * 1.05});
  const double kerb = horizon_y + (n - horizon_y) * uni(rng, 0.1, 0.3);
  const double paving = uni(rng, 110, 170);
  cv.fill_rect(0, horizon_y, n, kerb, {paving, paving * 0.98, paving * 0.95});
  const double lane_y = kerb + (n - kerb) * uni(rng, 0.35, 0.6);
  for (double lx = uni(rng, 0, n * 0.1); lx < n; lx += n * 0.22) {
    cv.fill_rect(lx, lane_y, lx + n * 0.1, lane_y + n * 0.02, {290, 290, 280});
  }

  // Poles and a sign.
  const int poles = std::uniform_int_distribution<int>(0, 3)(rng);
  for (int i = 0; i < poles; ++i) {
    const double px = uni(rng, 0, n);
    const double ptop = n * uni(rng, 0.2, 0.5);
    cv.fill_rect(px, ptop, px + n * 0.02, kerb, {-20, -20, -20});
    if (chance(rng, 0.5)) {
      const Rgb sign = chance(rng, 0.5) ? Rgb{270, 40, 30} : Rgb{30, 90, 220};
      cv.fill_rect(px - n * 0.04, ptop, px + n * 0.06, ptop + n * 0.08, sign);
    }
  }

  // Fine sensor texture so flat regions are not perfectly constant.
  std::normal_distribution<double> grain(0.0, 2.0);
  for (std::size_t y = 0; y < big; ++y) {
    for (std::size_t x = 0; x < big; ++x) {
      const double g = grain(rng);
      for (int k = 0; k < 3; ++k) cv.at(x, y)[k] += g;
    }
  }
  return cv.downsample(options.supersample);
}

std::vector<ImageU8> render_scenes(std::size_t count, std::uint64_t seed, const SceneOptions& options) {
  std::vector<ImageU8> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(render_scene(seed + i, options));
  return out;
}

std::vector<std::filesystem::path> write_scenes(const std::filesystem::path& dir, std::size_t count,
                                                std::uint64_t seed, const SceneOptions& options) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  for (std::size_t i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "scene_%04zu.ppm", i);
    paths.push_back(dir / name);
    write_ppm(paths.back(), render_scene(seed + i, options));
  }
  return paths;
}

}  // namespace pol
