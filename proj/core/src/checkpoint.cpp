#include "pol/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <json.hpp>

namespace pol {
namespace {

using json = nlohmann::ordered_json;

constexpr char kMagic[4] = {'P', 'O', 'L', '1'};
constexpr std::size_t kHeaderBytes = 4 + 4 + 8;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <typename U>
void put_le(std::vector<std::uint8_t>& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename U>
U get_le(const std::uint8_t* p) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(p[i]) << (8 * i);
  return v;
}

struct Parsed {
  json manifest;
  std::size_t payload_begin = 0;
};

Parsed parse_header(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw CheckpointError(CheckpointErrorCode::bad_magic, "not a POL1 checkpoint (bad magic)");
  }
  if (bytes.size() < kHeaderBytes) throw CheckpointError(CheckpointErrorCode::truncated, "truncated header");
  const auto version = get_le<std::uint32_t>(bytes.data() + 4);
  if (version != kCheckpointVersion) {
    throw CheckpointError(CheckpointErrorCode::version_mismatch,
                          "checkpoint version " + std::to_string(version) + ", expected " +
                              std::to_string(kCheckpointVersion));
  }
  const auto len = get_le<std::uint64_t>(bytes.data() + 8);
  if (len > bytes.size() - kHeaderBytes) {
    throw CheckpointError(CheckpointErrorCode::truncated, "truncated manifest");
  }
  Parsed p;
  try {
    p.manifest = json::parse(bytes.begin() + kHeaderBytes, bytes.begin() + static_cast<std::ptrdiff_t>(kHeaderBytes + len));
  } catch (const json::exception& e) {
    throw CheckpointError(CheckpointErrorCode::malformed_manifest, std::string("manifest: ") + e.what());
  }
  p.payload_begin = kHeaderBytes + len;
  return p;
}

}  // namespace

CheckpointError::CheckpointError(CheckpointErrorCode code, const std::string& what)
    : DataError(std::string(code_name(code)) + ": " + what), code_(code) {}

const char* CheckpointError::code_name(CheckpointErrorCode code) {
  switch (code) {
    case CheckpointErrorCode::bad_magic:
      return "bad magic";
    case CheckpointErrorCode::version_mismatch:
      return "version mismatch";
    case CheckpointErrorCode::truncated:
      return "truncated";
    case CheckpointErrorCode::shape_conflict:
      return "shape conflict";
    case CheckpointErrorCode::malformed_manifest:
      return "malformed manifest";
    case CheckpointErrorCode::io:
      return "io";
  }
  return "unknown";
}

const CheckpointTensor* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  json manifest;
  manifest["config"] = json::object();
  for (const auto& [k, v] : ckpt.config) manifest["config"][k] = v;
  manifest["epoch"] = ckpt.epoch;
  manifest["rng_state"] = ckpt.rng_state;
  json records = json::array();
  std::uint64_t offset = 0;
  for (const auto& t : ckpt.tensors) {
    const std::uint64_t bytes = t.value.size() * sizeof(float);
    records.push_back({{"name", t.name},
                       {"dtype", "f32"},
                       {"shape", t.value.shape().to_vector()},
                       {"offset", offset},
                       {"bytes", bytes},
                       {"frozen", t.frozen}});
    offset += bytes;
  }
  manifest["tensors"] = std::move(records);
  const std::string text = manifest.dump();

  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  out.reserve(out.size() + offset);
  for (const auto& t : ckpt.tensors) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(t.value.ptr());
    out.insert(out.end(), p, p + t.value.size() * sizeof(float));
  }
  return out;
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  const Parsed parsed = parse_header(bytes);
  const json& m = parsed.manifest;
  Checkpoint ckpt;
  try {
    for (const auto& [k, v] : m.at("config").items()) ckpt.config[k] = v.get<std::string>();
    ckpt.epoch = m.at("epoch").get<int>();
    ckpt.rng_state = m.at("rng_state").get<std::string>();
    const std::size_t payload = bytes.size() - parsed.payload_begin;
    std::uint64_t expected = 0;
    for (const auto& r : m.at("tensors")) {
      if (r.at("dtype").get<std::string>() != "f32") {
        throw CheckpointError(CheckpointErrorCode::malformed_manifest, "unsupported dtype");
      }
      const Shape shape = Shape::from_vector(r.at("shape").get<std::vector<std::size_t>>());
      const auto offset = r.at("offset").get<std::uint64_t>();
      const auto nbytes = r.at("bytes").get<std::uint64_t>();
      if (nbytes != shape.numel() * sizeof(float) || offset != expected) {
        throw CheckpointError(CheckpointErrorCode::malformed_manifest,
                              "inconsistent record for " + r.at("name").get<std::string>());
      }
      expected += nbytes;
      if (expected > payload) {
        throw CheckpointError(CheckpointErrorCode::truncated,
                              "payload ends before tensor " + r.at("name").get<std::string>());
      }
      std::vector<float> data(shape.numel());
      std::memcpy(data.data(), bytes.data() + parsed.payload_begin + offset, nbytes);
      ckpt.tensors.push_back({r.at("name").get<std::string>(), Tensor(shape, std::move(data)), r.at("frozen").get<bool>()});
    }
    if (expected != payload) {
      throw CheckpointError(CheckpointErrorCode::malformed_manifest, "trailing bytes after the last tensor");
    }
  } catch (const json::exception& e) {
    throw CheckpointError(CheckpointErrorCode::malformed_manifest, e.what());
  } catch (const DimensionError& e) {
    throw CheckpointError(CheckpointErrorCode::malformed_manifest, e.what());
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto bytes = encode_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError(CheckpointErrorCode::io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError(CheckpointErrorCode::io, "write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointErrorCode::io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

std::string checkpoint_manifest(const std::vector<std::uint8_t>& bytes) { return parse_header(bytes).manifest.dump(2); }

void add_parameters(Checkpoint& ckpt, const ParameterRefs<float>& params) {
  for (const auto* p : params) ckpt.tensors.push_back({p->name, p->value, p->frozen});
}

bool has_parameters(const Checkpoint& ckpt, const ParameterRefs<float>& params) {
  for (const auto* p : params) {
    if (!ckpt.find(p->name)) return false;
  }
  return true;
}

void apply_parameters(const Checkpoint& ckpt, const ParameterRefs<float>& params, bool restore_frozen) {
  std::vector<const CheckpointTensor*> sources;
  for (const auto* p : params) {
    const CheckpointTensor* t = ckpt.find(p->name);
    if (!t) throw CheckpointError(CheckpointErrorCode::shape_conflict, "missing tensor " + p->name);
    if (t->value.shape() != p->value.shape()) {
      throw CheckpointError(CheckpointErrorCode::shape_conflict, p->name + " has shape " +
                                                                     t->value.shape().to_string() + ", model expects " +
                                                                     p->value.shape().to_string());
    }
    sources.push_back(t);
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i]->value = sources[i]->value;
    params[i]->zero_grad();
    if (restore_frozen) params[i]->frozen = sources[i]->frozen;
  }
}

}  // namespace pol
