#include "pol/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace pol {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const ConfigKey* find_key(const std::string& key) {
  for (const auto& k : config_schema()) {
    if (k.key == key) return &k;
  }
  return nullptr;
}

bool parse_bool(const std::string& v, bool& out) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") {
    out = true;
    return true;
  }
  if (v == "false" || v == "0" || v == "no" || v == "off") {
    out = false;
    return true;
  }
  return false;
}

bool parse_int(const std::string& v, long long& out) {
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_double(const std::string& v, double& out) {
  if (v.empty()) return false;
  std::size_t used = 0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == v.size();
}

void check_value(const ConfigKey& k, const std::string& v) {
  bool ok = true;
  if (k.type == "int") {
    long long i;
    ok = parse_int(v, i);
  } else if (k.type == "double") {
    double d;
    ok = parse_double(v, d);
  } else if (k.type == "bool") {
    bool b;
    ok = parse_bool(v, b);
  } else if (k.type != "string") {
    std::stringstream alts(k.type);
    std::string alt;
    ok = false;
    while (std::getline(alts, alt, '|')) ok = ok || alt == v;
  }
  if (!ok) throw ConfigError("invalid value '" + v + "' for " + k.key + " (expected " + k.type + ")");
}

}  // namespace

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema = {
      {"task", "denoise|deblur|deblock", "denoise", "degradation applied to domain A"},
      {"degrade_param", "string", "auto", "noise std, blur sigma or quality; auto = 30, 4, 30"},
      {"degrade_seed", "int", "7", "seed of the degradation noise"},
      {"image_size", "int", "64", "square training/eval image size, multiple of 4, at least 24"},
      {"embed_channels", "int", "64", "embedding channels C"},
      {"expansion", "int", "4", "residual block expansion K"},
      {"ae_expansion", "int", "1", "expansion of the autoencoder's own residual block"},
      {"disc_base", "int", "64", "discriminator base width"},
      {"norm", "bool", "true", "instance normalization in all networks"},
      {"fold_frozen_block", "bool", "true", "fold the autoencoder residual block into the decoder"},
      {"init_scale", "double", "1.0", "translation block init bound multiplier"},
      {"residual_gain", "double", "1.0", "initial gain of the translation block's last norm"},
      {"n_tr", "int", "4", "maximum compositions at training"},
      {"warmup_step", "int", "1", "epochs per warm-up increment"},
      {"range_lo", "int", "0", "random range low end after warm-up (0 with range_hi 0 = none)"},
      {"range_hi", "int", "0", "random range high end, must equal n_tr when set"},
      {"randomize_per", "batch|epoch", "batch", "granularity of the random draw"},
      {"progressive", "bool", "true", "warm-up schedule; false = n_tr from the first epoch"},
      {"share_weights", "bool", "true", "one shared block; false = n_tr independent blocks"},
      {"lambda_adv", "double", "1", "adversarial weight"},
      {"lambda_cyc", "double", "10", "cycle weight"},
      {"lambda_id", "double", "5", "identity weight"},
      {"adv_mode", "log|lsgan", "log", "adversarial objective"},
      {"lr", "double", "2e-4", "generator Adam learning rate"},
      {"disc_lr", "double", "2e-4", "discriminator Adam learning rate"},
      {"beta1", "double", "0.5", "translation Adam beta1"},
      {"beta2", "double", "0.999", "translation Adam beta2"},
      {"epochs", "int", "30", "translation epochs"},
      {"batch_size", "int", "4", "translation batch size"},
      {"augment_flip", "bool", "true", "random horizontal flips during translation"},
      {"pretrain_lr", "double", "16e-4", "autoencoder Adam learning rate"},
      {"pretrain_epochs", "int", "20", "autoencoder epochs"},
      {"pretrain_batch", "int", "8", "autoencoder batch size"},
      {"seed", "int", "0", "master seed"},
      {"corpus", "string", "", "folder of clean images for pretraining"},
      {"data_a", "string", "", "domain A folder (degraded inputs)"},
      {"data_b", "string", "", "domain B folder (clean targets)"},
      {"eval_dir", "string", "", "folder of clean evaluation images"},
      {"out", "string", "runs/pol", "output directory"},
      {"checkpoint_every", "int", "0", "extra checkpoint every k epochs (0 = final only)"},
  };
  return schema;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RunConfig::RunConfig() {
  for (const auto& k : config_schema()) values_[k.key] = k.default_value;
}

RunConfig RunConfig::parse(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value");
    }
    try {
      cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const ConfigKey* k = find_key(key);
  if (!k) throw ConfigError("unknown config key '" + key + "'");
  check_value(*k, value);
  values_[key] = value;
  explicit_[key] = true;
}

const std::string& RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

long long RunConfig::get_int(const std::string& key) const {
  long long v;
  if (!parse_int(get(key), v)) throw ConfigError(key + " is not an integer");
  return v;
}

double RunConfig::get_double(const std::string& key) const {
  double v;
  if (!parse_double(get(key), v)) throw ConfigError(key + " is not a number");
  return v;
}

bool RunConfig::get_bool(const std::string& key) const {
  bool v;
  if (!parse_bool(get(key), v)) throw ConfigError(key + " is not a boolean");
  return v;
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& k : config_schema()) out += k.key + "=" + values_.at(k.key) + "\n";
  return out;
}

std::uint64_t RunConfig::hash() const { return fnv1a64(to_text()); }

std::string RunConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

std::uint64_t RunConfig::seed() const {
  const long long s = get_int("seed");
  if (s < 0) throw ConfigError("seed must be >= 0");
  return static_cast<std::uint64_t>(s);
}

namespace {

std::size_t positive(const RunConfig& c, const std::string& key) {
  const long long v = c.get_int(key);
  if (v < 1) throw ConfigError(key + " must be >= 1");
  return static_cast<std::size_t>(v);
}

}  // namespace

ModelConfig RunConfig::model() const {
  ModelConfig m;
  m.image_size = positive(*this, "image_size");
  m.embed_channels = positive(*this, "embed_channels");
  m.expansion = positive(*this, "expansion");
  m.ae_expansion = positive(*this, "ae_expansion");
  m.disc_base = positive(*this, "disc_base");
  m.norm = get_bool("norm");
  m.fold_frozen_block = get_bool("fold_frozen_block");
  m.init_scale = get_double("init_scale");
  m.residual_gain = get_double("residual_gain");
  m.validate();
  return m;
}

TrainConfig RunConfig::train() const {
  TrainConfig t;
  t.epochs = static_cast<int>(get_int("epochs"));
  t.batch_size = positive(*this, "batch_size");
  t.seed = seed();
  t.gen_adam = AdamConfig{get_double("lr"), get_double("beta1"), get_double("beta2"), 1e-8};
  t.disc_adam = AdamConfig{get_double("disc_lr"), get_double("beta1"), get_double("beta2"), 1e-8};
  t.weights = LossWeights{get_double("lambda_adv"), get_double("lambda_cyc"), get_double("lambda_id")};
  t.adv_mode = get("adv_mode") == "lsgan" ? AdversarialMode::lsgan : AdversarialMode::log;
  t.schedule.n_tr = static_cast<int>(get_int("n_tr"));
  t.schedule.warmup_step = static_cast<int>(get_int("warmup_step"));
  t.schedule.range_lo = static_cast<int>(get_int("range_lo"));
  t.schedule.range_hi = static_cast<int>(get_int("range_hi"));
  t.schedule.randomize_per = get("randomize_per") == "epoch" ? RandomizePer::epoch : RandomizePer::batch;
  t.schedule.progressive = get_bool("progressive");
  t.share_weights = get_bool("share_weights");
  t.augment = Augment{false, get_bool("augment_flip")};
  t.validate();
  return t;
}

PretrainConfig RunConfig::pretrain() const {
  PretrainConfig p;
  p.epochs = static_cast<int>(get_int("pretrain_epochs"));
  p.batch_size = positive(*this, "pretrain_batch");
  p.adam.lr = get_double("pretrain_lr");
  return p;
}

DegradationSpec RunConfig::degradation() const {
  DegradationSpec d;
  const std::string& task = get("task");
  d.kind = task == "deblur"    ? DegradationKind::gaussian_blur
           : task == "deblock" ? DegradationKind::dct_quantize
                               : DegradationKind::gaussian_noise;
  const std::string& p = get("degrade_param");
  if (p == "auto") {
    d.param = d.kind == DegradationKind::gaussian_blur ? 4.0 : 30.0;
  } else if (!parse_double(p, d.param)) {
    throw ConfigError("degrade_param must be a number or auto");
  }
  d.seed = static_cast<std::uint64_t>(get_int("degrade_seed"));
  d.validate();
  return d;
}

}  // namespace pol
