#pragma once

// Procedural street scenes used as a clean image source when no photo corpus
// is available: sky, facades with window grids, road, poles and signage.
// Bright sky and dark glazing give a share of near-saturated pixels similar
// to outdoor urban photographs, which matters for clipped-noise PSNR.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pol/imaging.hpp"

namespace pol {

struct SceneOptions {
  std::size_t size = 64;
  // Scenes are rendered at size * supersample and box-filtered down, which
  // gives anti-aliased edges.
  std::size_t supersample = 2;
};

ImageU8 render_scene(std::uint64_t seed, const SceneOptions& options = {});

// count scenes with seeds seed, seed + 1, ...
std::vector<ImageU8> render_scenes(std::size_t count, std::uint64_t seed, const SceneOptions& options = {});

// Writes scene_XXXX.ppm files; returns the written paths.
std::vector<std::filesystem::path> write_scenes(const std::filesystem::path& dir, std::size_t count,
                                                std::uint64_t seed, const SceneOptions& options = {});

}  // namespace pol
