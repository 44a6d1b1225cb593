#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "cli.hpp"
#include "pol/checkpoint.hpp"
#include "pol/config.hpp"
#include "pol/csv.hpp"
#include "pol/model.hpp"
#include "pol/parallel.hpp"

namespace {

using namespace pol;
namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pol_store_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ModelConfig tiny() {
  ModelConfig c;
  c.image_size = 24;
  c.embed_channels = 4;
  c.expansion = 2;
  c.disc_base = 4;
  return c;
}

Checkpoint sample_checkpoint() {
  PolModel<float> m = build_model<float>(tiny(), 3);
  m.ae.set_frozen(true);
  Checkpoint c;
  c.config = {{"seed", "3"}, {"task", "denoise"}};
  c.epoch = 7;
  c.rng_state = "1 2 3";
  add_parameters(c, m.parameters());
  return c;
}

CheckpointErrorCode code_of(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_checkpoint(bytes);
  } catch (const CheckpointError& e) {
    return e.code();
  }
  ADD_FAILURE() << "decode accepted corrupt bytes";
  return CheckpointErrorCode::io;
}

TEST(Checkpoint, SaveLoadSaveIsBitwiseIdentical) {
  const auto bytes = encode_checkpoint(sample_checkpoint());
  const Checkpoint back = decode_checkpoint(bytes);
  EXPECT_EQ(encode_checkpoint(back), bytes);
  EXPECT_EQ(back.epoch, 7);
  EXPECT_EQ(back.rng_state, "1 2 3");
  EXPECT_EQ(back.config.at("task"), "denoise");
  const auto dir = scratch("ckpt");
  save_checkpoint(dir / "a.pol", back);
  EXPECT_EQ(encode_checkpoint(load_checkpoint(dir / "a.pol")), bytes);
}

TEST(Checkpoint, LayoutHeader) {
  const auto bytes = encode_checkpoint(sample_checkpoint());
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "POL1");
  EXPECT_EQ(bytes[4], kCheckpointVersion);
  EXPECT_EQ(bytes[5] | bytes[6] | bytes[7], 0);
}

TEST(Checkpoint, TensorCountMatchesParameterCount) {
  PolModel<float> m = build_model<float>(tiny(), 3);
  const Checkpoint c = sample_checkpoint();
  const ParamCount pc = count_params(m);
  EXPECT_EQ(c.tensors.size(), pc.total.tensors);
  std::size_t n = 0;
  for (const auto& t : c.tensors) n += t.value.size();
  EXPECT_EQ(n, pc.total.params);
}

TEST(Checkpoint, FrozenFlagsPersist) {
  const Checkpoint c = decode_checkpoint(encode_checkpoint(sample_checkpoint()));
  EXPECT_TRUE(c.find("ae.enc.stem.weight") == nullptr || c.find("ae.enc.stem.weight")->frozen);
  std::size_t frozen = 0;
  for (const auto& t : c.tensors) frozen += t.frozen;
  PolModel<float> m = build_model<float>(tiny(), 3);
  EXPECT_EQ(frozen, m.ae.parameters().size());
}

TEST(Checkpoint, DistinctErrorCodes) {
  const auto good = encode_checkpoint(sample_checkpoint());
  auto bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_EQ(code_of(bad_magic), CheckpointErrorCode::bad_magic);
  auto bad_version = good;
  bad_version[4] = 9;
  EXPECT_EQ(code_of(bad_version), CheckpointErrorCode::version_mismatch);
  auto truncated = good;
  truncated.resize(truncated.size() - 5);
  EXPECT_EQ(code_of(truncated), CheckpointErrorCode::truncated);
  auto short_header = good;
  short_header.resize(10);
  EXPECT_EQ(code_of(short_header), CheckpointErrorCode::truncated);
  auto garbage = good;
  garbage[16] = '}';
  EXPECT_EQ(code_of(garbage), CheckpointErrorCode::malformed_manifest);
  auto trailing = good;
  trailing.push_back(0);
  EXPECT_EQ(code_of(trailing), CheckpointErrorCode::malformed_manifest);
}

TEST(Checkpoint, ShapeConflictLeavesModelUntouched) {
  Checkpoint c = sample_checkpoint();
  ModelConfig wide = tiny();
  wide.embed_channels = 6;
  PolModel<float> m = build_model<float>(wide, 9);
  const auto before = m.parameters()[0]->value;
  try {
    apply_parameters(c, m.parameters(), true);
    FAIL() << "shape conflict accepted";
  } catch (const CheckpointError& e) {
    EXPECT_EQ(e.code(), CheckpointErrorCode::shape_conflict);
  }
  EXPECT_TRUE(m.parameters()[0]->value == before);
}

TEST(Checkpoint, ApplyRestoresValues) {
  const Checkpoint c = sample_checkpoint();
  PolModel<float> m = build_model<float>(tiny(), 99);
  apply_parameters(c, m.parameters(), true);
  PolModel<float> ref = build_model<float>(tiny(), 3);
  const auto a = m.parameters(), b = ref.parameters();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(a[i]->value == b[i]->value);
  EXPECT_TRUE(m.ae.parameters()[0]->frozen);
}

TEST(Config, DefaultsAndTypedViews) {
  const RunConfig c;
  EXPECT_EQ(c.get("task"), "denoise");
  EXPECT_EQ(c.model().embed_channels, 64u);
  const TrainConfig t = c.train();
  EXPECT_EQ(t.schedule.n_tr, 4);
  EXPECT_DOUBLE_EQ(t.gen_adam.lr, 2e-4);
  EXPECT_DOUBLE_EQ(t.gen_adam.beta1, 0.5);
  EXPECT_DOUBLE_EQ(t.weights.lambda_cyc, 10.0);
  EXPECT_DOUBLE_EQ(c.pretrain().adam.lr, 16e-4);
  EXPECT_DOUBLE_EQ(c.degradation().param, 30.0);
  for (const auto& k : config_schema()) EXPECT_FALSE(k.doc.empty()) << k.key;
}

TEST(Config, ParseCommentsAndOverrides) {
  const RunConfig c = RunConfig::parse("# desk run\ntask = deblur  # blur\nn_tr=8\nepochs=40\n");
  EXPECT_EQ(c.get("task"), "deblur");
  EXPECT_DOUBLE_EQ(c.degradation().param, 4.0);
  EXPECT_EQ(c.train().schedule.n_tr, 8);
  EXPECT_TRUE(c.is_set_explicitly("n_tr"));
  EXPECT_FALSE(c.is_set_explicitly("lr"));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(RunConfig::parse("colour=blue\n"), ConfigError);
  EXPECT_THROW(RunConfig::parse("n_tr=four\n"), ConfigError);
  EXPECT_THROW(RunConfig::parse("task=sharpen\n"), ConfigError);
  EXPECT_THROW(RunConfig::parse("just text\n"), ConfigError);
  try {
    RunConfig::parse("seed=1\n\nlr=fast\n", "run.cfg");
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("run.cfg:3"), std::string::npos) << e.what();
  }
}

TEST(Config, HashTracksEffectiveValues) {
  RunConfig a, b;
  EXPECT_EQ(a.hash(), b.hash());
  b.set("seed", "1");
  EXPECT_NE(a.hash(), b.hash());
  // Text round trip keeps the hash.
  EXPECT_EQ(RunConfig::parse(b.to_text()).hash(), b.hash());
  EXPECT_EQ(a.hash_hex().size(), 16u);
}

TEST(Config, Fnv1aKnownVector) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Csv, HeaderAndRows) {
  const auto dir = scratch("csv");
  {
    CsvWriter w(dir / "x.csv", {"00ff", 42}, {"n", "name", "value"});
    w.cell(1).cell("a,b").cell(0.1).end_row();
    w.cell(2).cell("c").cell(std::nan("")).end_row();
    EXPECT_THROW(w.cell(1).end_row(), Error);
  }
  const std::string text = slurp(dir / "x.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "# pol 0.1.0 config_hash=00ff seed=42");
  EXPECT_NE(text.find("1,\"a,b\",0.1\n"), std::string::npos) << text;
  EXPECT_NE(text.find("2,c,nan\n"), std::string::npos);
}

int run_cli(std::initializer_list<std::string> args) { return cli::run(std::vector<std::string>(args)); }

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli({}), cli::usage);
  EXPECT_EQ(run_cli({"frobnicate"}), cli::usage);
  EXPECT_EQ(run_cli({"train", "--ae", "x.pol"}), cli::usage);  // --seed missing
  EXPECT_EQ(run_cli({"pretrain", "--seed", "1", "--colour=blue"}), cli::usage);
  EXPECT_EQ(run_cli({"inspect", "/nonexistent/file.pol"}), cli::data_error);
  EXPECT_EQ(run_cli({"pretrain", "--seed", "1", "--corpus=/nonexistent/dir"}), cli::data_error);
}

TEST(Cli, DegradeWritesManifest) {
  const auto dir = scratch("degrade");
  ASSERT_EQ(run_cli({"synth", "--out", (dir / "clean").string(), "--count", "3", "--size", "24"}), cli::ok);
  ASSERT_EQ(run_cli({"degrade", "--input", (dir / "clean").string(), "--output", (dir / "noisy").string(), "--task",
                     "deblock", "--param", "20", "--seed", "4"}),
            cli::ok);
  const std::string m = slurp(dir / "noisy" / "manifest.csv");
  EXPECT_EQ(m.rfind("# pol 0.1.0 config_hash=", 0), 0u);
  EXPECT_NE(m.find("src,dst,kind,param,seed\n"), std::string::npos);
  EXPECT_NE(m.find(",jpeg,20,"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "noisy" / "scene_0002.ppm"));
}

TEST(Cli, AnalyzeSpectrumCsv) {
  const auto dir = scratch("spectrum");
  const auto csv = (dir / "s.csv").string();
  ASSERT_EQ(run_cli({"analyze", "spectrum", "--d", "8", "--n", "4", "--csv", csv}), cli::ok);
  std::istringstream in(slurp(csv));
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 2 + 8);
}

// pretrain -> inspect (trainable) -> train -> inspect (frozen) -> infer/eval,
// twice, in strict single-thread mode: every output byte must repeat.
TEST(Cli, EndToEndRunIsReproducible) {
  set_thread_count(0);
  const auto dir = scratch("e2e");
  ASSERT_EQ(run_cli({"synth", "--out", (dir / "clean").string(), "--count", "6", "--size", "24", "--seed", "10"}), 0);
  ASSERT_EQ(run_cli({"synth", "--out", (dir / "b").string(), "--count", "4", "--size", "24", "--seed", "50"}), 0);
  ASSERT_EQ(run_cli({"degrade", "--input", (dir / "clean").string(), "--output", (dir / "a").string()}), 0);
  const std::string cfg_path = (dir / "run.cfg").string();
  {
    std::ofstream cfg(cfg_path);
    cfg << "image_size=24\nembed_channels=4\nexpansion=2\ndisc_base=4\nn_tr=2\nepochs=2\nbatch_size=2\n"
        << "pretrain_epochs=2\npretrain_batch=2\n"
        << "corpus=" << (dir / "clean").string() << "\ndata_a=" << (dir / "a").string() << "\n"
        << "data_b=" << (dir / "b").string() << "\neval_dir=" << (dir / "b").string() << "\n";
  }
  // Same output directory both times, since it is part of the config.
  const fs::path work = dir / "run";
  auto run_once = [&](const std::string& keep) {
    fs::remove_all(work);
    const std::string o = "--out=" + work.string();
    EXPECT_EQ(run_cli({"pretrain", "--config", cfg_path, "--seed", "3", o}), 0);
    EXPECT_EQ(run_cli({"train", "--config", cfg_path, "--seed", "3", "--ae", (work / "ae.pol").string(), o}), 0);
    EXPECT_EQ(run_cli({"eval", "--ckpt", (work / "model.pol").string(), "--policy", "adaptive", "--nmax", "4",
                       "--csv", (work / "eval.csv").string()}),
              0);
    fs::rename(work, dir / keep);
  };
  run_once("r1");
  run_once("r2");
  for (const char* f : {"ae.pol", "model.pol", "pretrain.csv", "train.csv", "eval.csv"}) {
    const std::string a = slurp(dir / "r1" / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, slurp(dir / "r2" / f)) << f;
  }

  const Checkpoint ae = load_checkpoint(dir / "r1" / "ae.pol");
  for (const auto& t : ae.tensors) EXPECT_FALSE(t.frozen) << t.name;
  const Checkpoint model = load_checkpoint(dir / "r1" / "model.pol");
  std::size_t frozen = 0;
  for (const auto& t : model.tensors) {
    if (t.name.rfind("ae.", 0) == 0) {
      EXPECT_TRUE(t.frozen) << t.name;
      ++frozen;
    }
  }
  EXPECT_EQ(frozen, ae.tensors.size());
  EXPECT_EQ(run_cli({"inspect", (dir / "r1" / "model.pol").string()}), 0);

  const std::string in = (dir / "a" / "scene_0000.ppm").string();
  EXPECT_EQ(run_cli({"infer", "--ckpt", (dir / "r1" / "model.pol").string(), "--input", in, "--output",
                     (dir / "out.ppm").string(), "--policy", "oracle", "--nmax", "3"}),
            cli::usage);  // oracle without --reference
  EXPECT_EQ(run_cli({"infer", "--ckpt", (dir / "r1" / "model.pol").string(), "--input", in, "--output",
                     (dir / "out.ppm").string(), "--policy", "adaptive", "--nmax", "3", "--trace",
                     (dir / "trace.csv").string()}),
            0);
  EXPECT_TRUE(fs::exists(dir / "out.ppm"));
  // An autoencoder checkpoint cannot drive inference.
  EXPECT_EQ(run_cli({"infer", "--ckpt", (dir / "r1" / "ae.pol").string(), "--input", in, "--output",
                     (dir / "x.ppm").string()}),
            cli::data_error);
}

}  // namespace
