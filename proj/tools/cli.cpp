#include "cli.hpp"

#include <CLI11.hpp>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <random>
#include <sstream>

#include "pol/analysis.hpp"
#include "pol/checkpoint.hpp"
#include "pol/config.hpp"
#include "pol/csv.hpp"
#include "pol/inference.hpp"
#include "pol/parallel.hpp"
#include "pol/synth.hpp"
#include "pol/training.hpp"

namespace pol::cli {
namespace {

namespace fs = std::filesystem;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
  return buf;
}

// Wall-clock columns would break bitwise-reproducible CSVs, so strict mode
// records them as 0.
double reported_seconds(double s) { return strict_single_thread() ? 0.0 : s; }

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("not an integer list: '" + text + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty integer list");
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("not a number list: '" + text + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty number list");
  return out;
}

// --key=value or --key value pairs left over after the subcommand's own
// options; each must name a config key.
void apply_overrides(RunConfig& cfg, const std::vector<std::string>& extras) {
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& tok = extras[i];
    if (tok.rfind("--", 0) != 0) throw ConfigError("unexpected argument '" + tok + "'");
    const auto eq = tok.find('=');
    if (eq != std::string::npos) {
      cfg.set(tok.substr(2, eq - 2), tok.substr(eq + 1));
    } else {
      if (i + 1 >= extras.size()) throw ConfigError("missing value for " + tok);
      cfg.set(tok.substr(2), extras[++i]);
    }
  }
}

RunConfig base_config(const std::string& config_path, const std::vector<std::string>& extras) {
  RunConfig cfg = config_path.empty() ? RunConfig() : RunConfig::load(config_path);
  apply_overrides(cfg, extras);
  return cfg;
}

RunConfig config_from_checkpoint(const Checkpoint& ckpt) {
  RunConfig cfg;
  for (const auto& [k, v] : ckpt.config) cfg.set(k, v);
  return cfg;
}

CsvHeader header_for(const RunConfig& cfg) { return {cfg.hash_hex(), cfg.seed()}; }

// Analysis commands have no RunConfig; hash their canonical argument text.
CsvHeader header_for(const std::string& canonical, std::uint64_t seed) { return {hex64(fnv1a64(canonical)), seed}; }

ImageSet load_required(const RunConfig& cfg, const std::string& key) {
  const std::string& dir = cfg.get(key);
  if (dir.empty()) throw ConfigError(key + " is not set");
  return load_folder(dir, cfg.model().image_size);
}

Checkpoint make_checkpoint(const RunConfig& cfg, const ParameterRefs<float>& params, int epoch,
                           const std::string& rng_state) {
  Checkpoint ckpt;
  ckpt.config = cfg.values();
  ckpt.epoch = epoch;
  ckpt.rng_state = rng_state;
  add_parameters(ckpt, params);
  return ckpt;
}

PolModel<float> model_for(const RunConfig& cfg) {
  const bool shared = cfg.get_bool("share_weights");
  const auto blocks = shared ? std::size_t{1} : static_cast<std::size_t>(cfg.get_int("n_tr"));
  return build_model<float>(cfg.model(), cfg.seed(), shared, blocks);
}

struct LoadedModel {
  RunConfig cfg;
  PolModel<float> model;
};

LoadedModel load_trained(const std::string& path, const std::vector<std::string>& extras) {
  const Checkpoint ckpt = load_checkpoint(path);
  RunConfig cfg = config_from_checkpoint(ckpt);
  apply_overrides(cfg, extras);
  PolModel<float> model = model_for(cfg);
  if (!has_parameters(ckpt, model.gen_ab.parameters())) {
    throw DataError(path + " holds no translation blocks (is it an autoencoder checkpoint?)");
  }
  apply_parameters(ckpt, model.parameters(), true);
  return {std::move(cfg), std::move(model)};
}

ImageU8 read_input(const std::string& path) {
  ImageU8 img = read_ppm(path);
  if (img.width % 4 != 0 || img.height % 4 != 0) {
    throw DataError(path + ": width and height must be multiples of 4");
  }
  return img;
}

StoppingPolicy make_policy(const std::string& kind, int n, int n_max) {
  StoppingPolicy p;
  switch (StoppingPolicy::parse_kind(kind)) {
    case PolicyKind::fixed:
      p = StoppingPolicy::fixed_n(n);
      break;
    case PolicyKind::adaptive:
      p = StoppingPolicy::adaptive(n_max);
      break;
    case PolicyKind::oracle:
      p = StoppingPolicy::oracle(n_max);
      break;
  }
  p.validate();
  return p;
}

std::vector<fs::path> ppm_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".ppm") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no .ppm images in " + dir.string());
  return files;
}

// ---- subcommands ----

int cmd_pretrain(const std::string& config_path, std::uint64_t seed, const std::vector<std::string>& extras) {
  RunConfig cfg = base_config(config_path, extras);
  cfg.set("seed", std::to_string(seed));
  const ImageSet corpus = load_required(cfg, "corpus");
  const fs::path out = cfg.get("out");
  fs::create_directories(out);

  PolModel<float> model = model_for(cfg);
  CsvWriter csv(out / "pretrain.csv", header_for(cfg), {"epoch", "loss", "seconds"});
  const auto history = pretrain_autoencoder(model.ae, corpus, cfg.pretrain(), cfg.seed(), [&](const PretrainEpoch& e) {
    csv.cell(e.epoch).cell(e.loss).cell(reported_seconds(e.seconds)).end_row();
    std::printf("pretrain epoch %d  loss %.6f\n", e.epoch, e.loss);
    return true;
  });

  if (!cfg.get("eval_dir").empty()) {
    const ImageSet held = load_required(cfg, "eval_dir");
    double l2 = 0;
    for (const auto& img : held.images) {
      const Tensor x = to_tensor<float>(img);
      l2 += l2_mean(decode(model.ae, encode(model.ae, x)), x);
    }
    std::printf("held-out reconstruction l2_mean %.6f over %zu images\n", l2 / static_cast<double>(held.size()),
                held.size());
  }
  const fs::path ckpt_path = out / "ae.pol";
  save_checkpoint(ckpt_path, make_checkpoint(cfg, model.ae.parameters(), static_cast<int>(history.size()), ""));
  std::printf("wrote %s\n", ckpt_path.string().c_str());
  return ok;
}

int cmd_train(const std::string& config_path, std::uint64_t seed, const std::string& ae_path,
              const std::vector<std::string>& extras) {
  RunConfig cfg = base_config(config_path, extras);
  cfg.set("seed", std::to_string(seed));
  const TrainConfig tc = cfg.train();
  PolModel<float> model = model_for(cfg);
  // Shape check against the pretrained autoencoder before any data work.
  apply_parameters(load_checkpoint(ae_path), model.ae.parameters(), false);

  const ImageSet domain_a = load_required(cfg, "data_a");
  const ImageSet domain_b = load_required(cfg, "data_b");
  std::optional<ImageSet> eval_clean, eval_degraded;
  std::optional<EvalPair> eval;
  if (!cfg.get("eval_dir").empty()) {
    eval_clean = load_required(cfg, "eval_dir");
    eval_degraded = degrade_set(*eval_clean, cfg.degradation());
    eval = EvalPair{&*eval_clean, &*eval_degraded};
  }

  const fs::path out = cfg.get("out");
  fs::create_directories(out);
  const long long every = cfg.get_int("checkpoint_every");
  CsvWriter csv(out / "train.csv", header_for(cfg),
                {"epoch", "n_min", "n_max", "loss_g", "loss_d_a", "loss_d_b", "grad_norm_g", "psnr", "seconds"});
  std::string rng_state;
  const auto history = train_unpaired(model, domain_a, domain_b, tc, eval, [&](const EpochStats& s) {
    csv.cell(s.epoch).cell(s.n_min).cell(s.n_max).cell(s.loss_g).cell(s.loss_d_a).cell(s.loss_d_b);
    csv.cell(s.grad_norm_g).cell(s.psnr).cell(reported_seconds(s.seconds)).end_row();
    std::printf("epoch %d  n=[%d,%d]  loss_g %.4f  loss_d %.4f/%.4f  psnr %.2f\n", s.epoch, s.n_min, s.n_max,
                s.loss_g, s.loss_d_a, s.loss_d_b, s.psnr);
    rng_state = s.rng_state;
    if (every > 0 && (s.epoch + 1) % every == 0) {
      save_checkpoint(out / ("model_epoch" + std::to_string(s.epoch + 1) + ".pol"),
                      make_checkpoint(cfg, model.parameters(), s.epoch + 1, rng_state));
    }
    return true;
  });
  const fs::path ckpt_path = out / "model.pol";
  save_checkpoint(ckpt_path, make_checkpoint(cfg, model.parameters(), static_cast<int>(history.size()), rng_state));
  std::printf("wrote %s\n", ckpt_path.string().c_str());
  return ok;
}

struct InferArgs {
  std::string ckpt, input, output, policy = "fixed", reference, trace;
  int n = -1;
  int n_max = 30;
};

int cmd_infer(const InferArgs& a, const std::vector<std::string>& extras) {
  auto [cfg, model] = load_trained(a.ckpt, extras);
  const int n = a.n >= 0 ? a.n : static_cast<int>(cfg.get_int("n_tr"));
  const StoppingPolicy policy = make_policy(a.policy, n, a.n_max);
  const ImageU8 input = read_input(a.input);
  std::optional<ImageU8> reference;
  if (!a.reference.empty()) reference = read_ppm(a.reference);
  const InferResult r = infer(model.ae, model.gen_ab, model.disc_b, input, policy, reference ? &*reference : nullptr);
  write_ppm(a.output, r.image);
  std::printf("policy %s  n* = %d\n", policy.name().c_str(), r.n_star);
  if (reference) std::printf("psnr %.3f dB (input %.3f dB)\n", psnr(r.image, *reference), psnr(input, *reference));
  if (!a.trace.empty()) {
    CsvWriter csv(a.trace, header_for(cfg), {"n", "score", "psnr"});
    for (std::size_t i = 0; i < r.score_trace.size(); ++i) {
      csv.cell(i).cell(r.score_trace[i]);
      csv.cell(i < r.psnr_trace.size() ? r.psnr_trace[i] : std::numeric_limits<double>::quiet_NaN()).end_row();
    }
  }
  return ok;
}

struct SweepArgs {
  std::string ckpt, input, out, n_list = "0,1,2,4,8", reference;
};

int cmd_sweep(const SweepArgs& a, const std::vector<std::string>& extras) {
  auto [cfg, model] = load_trained(a.ckpt, extras);
  const std::vector<int> ns = parse_int_list(a.n_list);
  const ImageU8 input = read_input(a.input);
  const ImageU8 reference = a.reference.empty() ? input : read_ppm(a.reference);
  const auto images = modulation_sweep(model.ae, model.gen_ab, input, ns);
  fs::create_directories(a.out);
  CsvWriter csv(fs::path(a.out) / "sweep.csv", header_for(cfg), {"n", "file", "psnr"});
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const std::string name = "sweep_n" + std::to_string(ns[i]) + ".ppm";
    write_ppm(fs::path(a.out) / name, images[i]);
    csv.cell(ns[i]).cell(name).cell(psnr(images[i], reference)).end_row();
  }
  return ok;
}

struct DegradeArgs {
  std::string input, output, task = "denoise";
  double param = -1;
  std::uint64_t seed = 7;
};

int cmd_degrade(const DegradeArgs& a) {
  RunConfig cfg;
  cfg.set("task", a.task);
  if (a.param >= 0) cfg.set("degrade_param", format_number(a.param));
  cfg.set("degrade_seed", std::to_string(a.seed));
  const DegradationSpec base = cfg.degradation();
  const auto files = ppm_files(a.input);
  fs::create_directories(a.output);
  CsvWriter csv(fs::path(a.output) / "manifest.csv", {cfg.hash_hex(), a.seed}, {"src", "dst", "kind", "param", "seed"});
  for (std::size_t i = 0; i < files.size(); ++i) {
    DegradationSpec spec = base;
    spec.seed = derive_seed(base.seed, i);
    const fs::path dst = fs::path(a.output) / files[i].filename();
    write_ppm(dst, degrade(read_ppm(files[i]), spec));
    csv.cell(files[i].string()).cell(dst.string()).cell(spec.kind_name()).cell(spec.param);
    csv.cell(std::to_string(spec.seed)).end_row();
  }
  std::printf("degraded %zu images (%s %g)\n", files.size(), base.kind_name().c_str(), base.param);
  return ok;
}

struct EvalArgs {
  std::string ckpt, eval_dir, policy = "fixed", csv;
  int n = -1;
  int n_max = 30;
};

int cmd_eval(const EvalArgs& a, const std::vector<std::string>& extras) {
  auto [cfg, model] = load_trained(a.ckpt, extras);
  const std::string dir = a.eval_dir.empty() ? cfg.get("eval_dir") : a.eval_dir;
  if (dir.empty()) throw ConfigError("no evaluation folder (--eval-dir or eval_dir)");
  const ImageSet clean = load_folder(dir, cfg.model().image_size);
  const ImageSet degraded = degrade_set(clean, cfg.degradation());
  const int n = a.n >= 0 ? a.n : static_cast<int>(cfg.get_int("n_tr"));
  const StoppingPolicy policy = make_policy(a.policy, n, a.n_max);
  const EvalReport rep = evaluate(model.ae, model.gen_ab, model.disc_b, clean, degraded, policy);
  if (!a.csv.empty()) {
    CsvWriter csv(a.csv, header_for(cfg), {"name", "n_star", "psnr", "input_psnr"});
    for (const auto& r : rep.rows) csv.cell(r.name).cell(r.n_star).cell(r.psnr).cell(r.input_psnr).end_row();
  }
  std::printf("%s: mean psnr %.3f dB  input %.3f dB  mean n* %.2f  (%zu images)\n", policy.name().c_str(),
              rep.mean_psnr, rep.mean_input_psnr, rep.mean_n_star, rep.rows.size());
  return ok;
}

struct ComposeArgs {
  std::string first, second, input, output, mode = "embedding";
  int n1 = 1;
  int n2 = 1;
};

int cmd_compose(const ComposeArgs& a) {
  auto one = load_trained(a.first, {});
  auto two = load_trained(a.second, {});
  if (parameter_hash(one.model.ae.parameters()) != parameter_hash(two.model.ae.parameters())) {
    throw DataError("compose needs two checkpoints trained on the same autoencoder");
  }
  if (a.mode != "embedding" && a.mode != "image") throw ConfigError("mode must be embedding or image");
  const ComposeMode mode = a.mode == "image" ? ComposeMode::image : ComposeMode::embedding;
  const ImageU8 out =
      compose_transforms(one.model.ae, one.model.gen_ab, two.model.gen_ab, read_input(a.input), mode, a.n1, a.n2);
  write_ppm(a.output, out);
  return ok;
}

int cmd_inspect(const std::string& path, bool counts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointErrorCode::io, "cannot open " + path);
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (!counts) {
    std::printf("%s\n", checkpoint_manifest(bytes).c_str());
    return ok;
  }
  const Checkpoint ckpt = decode_checkpoint(bytes);
  std::size_t total = 0, frozen = 0;
  for (const auto& t : ckpt.tensors) {
    total += t.value.size();
    if (t.frozen) frozen += t.value.size();
    std::printf("%-28s %-16s %s\n", t.name.c_str(), t.value.shape().to_string().c_str(),
                t.frozen ? "frozen" : "trainable");
  }
  std::printf("%zu tensors, %zu parameters (%zu frozen)\n", ckpt.tensors.size(), total, frozen);
  return ok;
}

int cmd_synth(const std::string& out, std::size_t count, std::uint64_t seed, std::size_t size) {
  SceneOptions opts;
  opts.size = size;
  const auto files = write_scenes(out, count, seed, opts);
  std::printf("wrote %zu scenes to %s\n", files.size(), out.c_str());
  return ok;
}

struct SpectrumArgs {
  std::size_t d = 32;
  int n = 16;
  double range = 0.1;
  std::uint64_t seed = 0;
  std::string csv = "spectrum.csv";
};

int cmd_spectrum(const SpectrumArgs& a) {
  if (a.d == 0) throw ConfigError("d must be >= 1");
  std::mt19937_64 rng(a.seed);
  const Matrix L = Matrix::uniform(a.d, -a.range, a.range, rng);
  const SpectrumReport rep = mn_spectrum(L, a.n);
  const std::string canonical = "spectrum d=" + std::to_string(a.d) + " n=" + std::to_string(a.n) +
                                " range=" + format_number(a.range);
  CsvWriter csv(a.csv, header_for(canonical, a.seed), {"i", "mn_direct", "mn_predicted", "full_direct", "full_predicted"});
  for (std::size_t i = 0; i < a.d; ++i) {
    csv.cell(i).cell(rep.mn.direct[i]).cell(rep.mn.predicted[i]).cell(rep.full.direct[i]).cell(rep.full.predicted[i]);
    csv.end_row();
  }
  std::printf("M_n = (I+L)^%d: max rel error %.3e%s\n", rep.mn.power, rep.mn.max_rel_error,
              rep.mn.overflow ? " (overflow)" : "");
  std::printf("(I+L)^%d: max rel error %.3e%s\n", rep.full.power, rep.full.max_rel_error,
              rep.full.overflow ? " (overflow)" : "");
  return ok;
}

struct GradCurveArgs {
  std::size_t channels = 8, expansion = 1, size = 8;
  double init_scale = 1.0;
  std::string n_list = "1,2,4,8,16", csv = "gradcurve.csv";
  std::uint64_t seed = 0;
  bool linear = false, no_norm = false;
  std::optional<double> rho;
};

int cmd_gradcurve(const GradCurveArgs& a) {
  GradCurveOptions o;
  o.block.embed_channels = a.channels;
  o.block.expansion = a.expansion;
  o.block.image_size = a.size * 4;
  o.block.linear_blocks = a.linear;
  o.block.norm = !a.no_norm;
  o.init_scale = a.init_scale;
  o.n_list = parse_int_list(a.n_list);
  o.seed = a.seed;
  o.linear_rho = a.rho;
  const auto rows = gradient_norm_curve(o);
  std::string canonical = "gradcurve c=" + std::to_string(a.channels) + " k=" + std::to_string(a.expansion) +
                          " size=" + std::to_string(a.size) + " init=" + format_number(a.init_scale) +
                          " n=" + a.n_list + " linear=" + std::to_string(a.linear) +
                          " norm=" + std::to_string(!a.no_norm);
  if (a.rho) canonical += " rho=" + format_number(*a.rho);
  CsvWriter csv(a.csv, header_for(canonical, a.seed),
                {"n", "grad_norm", "first_copy_norm", "grad_norm_f64", "first_copy_norm_f64", "f32_f64_rel_diff",
                 "finite"});
  for (const auto& r : rows) {
    csv.cell(r.n).cell(r.grad_norm).cell(r.first_copy_norm).cell(r.grad_norm_f64).cell(r.first_copy_norm_f64);
    csv.cell(r.f32_f64_rel_diff).cell(r.finite ? 1 : 0).end_row();
    std::printf("n=%-3d grad %.4e  first copy %.4e  f32/f64 diff %.2e\n", r.n, r.grad_norm, r.first_copy_norm,
                r.f32_f64_rel_diff);
  }
  return ok;
}

int cmd_initsweep(const std::string& config_path, const std::string& ae_path, const std::string& scales,
                  int epochs, const std::string& csv_path, const std::vector<std::string>& extras) {
  RunConfig cfg = base_config(config_path, extras);
  PolModel<float> holder = model_for(cfg);
  apply_parameters(load_checkpoint(ae_path), holder.ae.parameters(), false);
  const ImageSet domain_a = load_required(cfg, "data_a");
  const ImageSet domain_b = load_required(cfg, "data_b");
  const ImageSet clean = load_required(cfg, "eval_dir");
  const ImageSet degraded = degrade_set(clean, cfg.degradation());

  InitSweepSetup setup;
  setup.pretrained = &holder.ae;
  setup.model = cfg.model();
  setup.train = cfg.train();
  setup.domain_a = &domain_a;
  setup.domain_b = &domain_b;
  setup.eval = EvalPair{&clean, &degraded};
  setup.epochs = epochs;
  const auto rows = init_scale_sweep(setup, parse_double_list(scales));
  CsvWriter csv(csv_path, header_for(cfg), {"scale", "progressive", "epoch", "psnr", "diverged"});
  for (const auto& r : rows) {
    csv.cell(r.scale).cell(r.progressive ? 1 : 0).cell(r.epoch).cell(r.psnr).cell(r.diverged ? 1 : 0).end_row();
    std::printf("scale %-8g %-11s epoch %d  psnr %.3f%s\n", r.scale, r.progressive ? "progressive" : "fixed",
                r.epoch, r.psnr, r.diverged ? "  diverged" : "");
  }
  return ok;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"pol: iterated residual translation in a frozen autoencoder embedding"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::string config_path;
  std::uint64_t seed = 0;

  auto* pretrain = app.add_subcommand("pretrain", "Train the autoencoder on a clean corpus");
  pretrain->add_option("--config", config_path, "Run config file");
  pretrain->add_option("--seed", seed, "Master seed")->required();
  pretrain->allow_extras();

  std::string ae_path;
  auto* train = app.add_subcommand("train", "Train the translation blocks and discriminators");
  train->add_option("--config", config_path, "Run config file");
  train->add_option("--seed", seed, "Master seed")->required();
  train->add_option("--ae", ae_path, "Pretrained autoencoder checkpoint")->required();
  train->allow_extras();

  InferArgs ia;
  auto* inf = app.add_subcommand("infer", "Translate one image");
  inf->add_option("--ckpt", ia.ckpt, "Trained checkpoint")->required();
  inf->add_option("--input", ia.input, "Input PPM")->required();
  inf->add_option("--output", ia.output, "Output PPM")->required();
  inf->add_option("--policy", ia.policy, "fixed | adaptive | oracle");
  inf->add_option("--n", ia.n, "Compositions for the fixed policy (default n_tr)");
  inf->add_option("--nmax", ia.n_max, "Horizon for adaptive and oracle");
  inf->add_option("--reference", ia.reference, "Clean reference PPM (needed by oracle)");
  inf->add_option("--trace", ia.trace, "CSV of score and PSNR per n");
  inf->allow_extras();

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "Decode one image at several composition counts");
  sweep->add_option("--ckpt", sa.ckpt, "Trained checkpoint")->required();
  sweep->add_option("--input", sa.input, "Input PPM")->required();
  sweep->add_option("--out", sa.out, "Output folder")->required();
  sweep->add_option("--n-list", sa.n_list, "Comma separated counts");
  sweep->add_option("--reference", sa.reference, "PSNR reference (default: the input)");
  sweep->allow_extras();

  DegradeArgs da;
  auto* deg = app.add_subcommand("degrade", "Apply a synthetic degradation to a folder of PPMs");
  deg->add_option("--input", da.input, "Clean PPM folder")->required();
  deg->add_option("--output", da.output, "Output folder")->required();
  deg->add_option("--task", da.task, "denoise | deblur | deblock");
  deg->add_option("--param", da.param, "Noise std, blur sigma or quality (default per task)");
  deg->add_option("--seed", da.seed, "Degradation seed");

  EvalArgs ea;
  auto* ev = app.add_subcommand("eval", "Degrade clean images and score a stopping policy");
  ev->add_option("--ckpt", ea.ckpt, "Trained checkpoint")->required();
  ev->add_option("--eval-dir", ea.eval_dir, "Clean PPM folder (default eval_dir)");
  ev->add_option("--policy", ea.policy, "fixed | adaptive | oracle");
  ev->add_option("--n", ea.n, "Compositions for the fixed policy (default n_tr)");
  ev->add_option("--nmax", ea.n_max, "Horizon for adaptive and oracle");
  ev->add_option("--csv", ea.csv, "Per-image CSV");
  ev->allow_extras();

  auto* analyze = app.add_subcommand("analyze", "Stability analysis of the iterated block");
  analyze->require_subcommand(1);
  SpectrumArgs spa;
  auto* spec = analyze->add_subcommand("spectrum", "Spectrum of (I+L)^(n-1) against the eigenvalue law");
  spec->add_option("--d", spa.d, "Matrix size");
  spec->add_option("--n", spa.n, "Composition count");
  spec->add_option("--range", spa.range, "Entries of L uniform in [-range, range]");
  spec->add_option("--seed", spa.seed, "Seed");
  spec->add_option("--csv", spa.csv, "Output CSV");
  GradCurveArgs ga;
  double rho = 0;
  auto* gc = analyze->add_subcommand("gradcurve", "Gradient norm of f^n versus n");
  gc->add_option("--channels", ga.channels, "Embedding channels");
  gc->add_option("--expansion", ga.expansion, "Block expansion");
  gc->add_option("--size", ga.size, "Embedding side");
  gc->add_option("--init-scale", ga.init_scale, "Init bound multiplier");
  gc->add_option("--n-list", ga.n_list, "Comma separated counts");
  gc->add_option("--seed", ga.seed, "Seed");
  gc->add_flag("--linear", ga.linear, "Linear block (no norm, identity activation)");
  gc->add_flag("--no-norm", ga.no_norm, "Drop instance normalization");
  auto* rho_opt = gc->add_option("--rho", rho, "Linear block L = (rho - 1) I");
  gc->add_option("--csv", ga.csv, "Output CSV");
  std::string scales = "0.1,1", sweep_csv = "initsweep.csv";
  int sweep_epochs = 3;
  auto* is = analyze->add_subcommand("initsweep", "Init scale x {progressive, fixed} short runs");
  is->add_option("--config", config_path, "Run config file");
  is->add_option("--ae", ae_path, "Pretrained autoencoder checkpoint")->required();
  is->add_option("--scales", scales, "Comma separated init scales");
  is->add_option("--epochs", sweep_epochs, "Epochs per run");
  is->add_option("--csv", sweep_csv, "Output CSV");
  is->allow_extras();

  ComposeArgs ca;
  auto* comp = app.add_subcommand("compose", "Apply two trained transforms in sequence");
  comp->add_option("--first", ca.first, "First checkpoint")->required();
  comp->add_option("--second", ca.second, "Second checkpoint")->required();
  comp->add_option("--input", ca.input, "Input PPM")->required();
  comp->add_option("--output", ca.output, "Output PPM")->required();
  comp->add_option("--mode", ca.mode, "embedding | image");
  comp->add_option("--n1", ca.n1, "Compositions of the first transform");
  comp->add_option("--n2", ca.n2, "Compositions of the second transform");

  std::string inspect_path;
  bool counts = false;
  auto* insp = app.add_subcommand("inspect", "Print a checkpoint manifest");
  insp->add_option("checkpoint", inspect_path, "Checkpoint file")->required();
  insp->add_flag("--tensors", counts, "List tensors and parameter totals instead");

  std::string synth_out;
  std::size_t synth_count = 200, synth_size = 64;
  std::uint64_t synth_seed = 1;
  auto* syn = app.add_subcommand("synth", "Render procedural street scenes as clean PPMs");
  syn->add_option("--out", synth_out, "Output folder")->required();
  syn->add_option("--count", synth_count, "Number of scenes");
  syn->add_option("--seed", synth_seed, "First scene seed");
  syn->add_option("--size", synth_size, "Image side");

  std::vector<std::string> argv_store{"pol"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage;
  }

  try {
    if (*pretrain) return cmd_pretrain(config_path, seed, pretrain->remaining());
    if (*train) return cmd_train(config_path, seed, ae_path, train->remaining());
    if (*inf) return cmd_infer(ia, inf->remaining());
    if (*sweep) return cmd_sweep(sa, sweep->remaining());
    if (*deg) return cmd_degrade(da);
    if (*ev) return cmd_eval(ea, ev->remaining());
    if (*spec) return cmd_spectrum(spa);
    if (*gc) {
      if (*rho_opt) ga.rho = rho;
      return cmd_gradcurve(ga);
    }
    if (*is) return cmd_initsweep(config_path, ae_path, scales, sweep_epochs, sweep_csv, is->remaining());
    if (*comp) return cmd_compose(ca);
    if (*insp) return cmd_inspect(inspect_path, counts);
    if (*syn) return cmd_synth(synth_out, synth_count, synth_seed, synth_size);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help() << "\n";
    return usage;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return numeric_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return data_error;
  }
  return usage;
}

}  // namespace pol::cli
