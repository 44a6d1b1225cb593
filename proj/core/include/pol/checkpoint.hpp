#pragma once

// POL1 checkpoint container.
//
//   "POL1" | u32 version (LE) | u64 manifest length (LE) | manifest JSON |
//   f32 payloads (LE) in manifest order
//
// The manifest holds a config echo, one record per tensor (name, dtype,
// shape, byte offset into the payload section, frozen flag), an rng state
// string and the epoch counter.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pol/autograd.hpp"

namespace pol {

inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class CheckpointErrorCode { bad_magic, version_mismatch, truncated, shape_conflict, malformed_manifest, io };

class CheckpointError : public DataError {
 public:
  CheckpointError(CheckpointErrorCode code, const std::string& what);
  CheckpointErrorCode code() const noexcept { return code_; }
  static const char* code_name(CheckpointErrorCode code);

 private:
  CheckpointErrorCode code_;
};

struct CheckpointTensor {
  std::string name;
  Tensor value;
  bool frozen = false;
};

struct Checkpoint {
  std::map<std::string, std::string> config;
  std::vector<CheckpointTensor> tensors;
  std::string rng_state;
  int epoch = 0;

  const CheckpointTensor* find(const std::string& name) const;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Manifest as pretty JSON text (for inspection).
std::string checkpoint_manifest(const std::vector<std::uint8_t>& bytes);

void add_parameters(Checkpoint& ckpt, const ParameterRefs<float>& params);

// Copies every named tensor into `params`. All shapes are verified before
// any value is written; a missing tensor or a shape difference throws
// shape_conflict. The frozen flag is restored when `restore_frozen` is set.
void apply_parameters(const Checkpoint& ckpt, const ParameterRefs<float>& params, bool restore_frozen = true);

// True if every parameter name is present in the checkpoint.
bool has_parameters(const Checkpoint& ckpt, const ParameterRefs<float>& params);

}  // namespace pol
