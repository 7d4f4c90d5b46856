#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>

#include "gpb/bench/checkpoint.hpp"
#include "gpb/bench/config.hpp"
#include "gpb/bench/report.hpp"
#include "gpb/bench/runner.hpp"
#include "gpb/error.hpp"
#include "gpb/graph/sampler.hpp"
#include "gpb/graph/synth.hpp"
#include "test_util.hpp"

namespace gpb::bench {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("gpb_bench_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& bytes) { std::ofstream(p, std::ios::binary) << bytes; }

model::PretrainedEncoder small_encoder(std::uint64_t seed) {
  auto ds = graph::two_blobs_node({.seed = seed});
  pretrain::PretextConfig pc;
  pc.method = pretrain::Pretext::dgi;
  pc.epochs = 5;
  pc.backbone.hidden_dim = 16;
  return pretrain::run_pretraining(pc, ds).encoder;
}

TEST(Checkpoint, EncoderRoundTripIsLossless) {
  TempDir dir;
  auto enc = small_encoder(1);
  save_encoder(dir.path() / "a.gpbckpt", enc, 42);
  auto loaded = load_encoder(dir.path() / "a.gpbckpt");
  EXPECT_EQ(loaded.config_hash, 42u);
  EXPECT_FALSE(loaded.hash_mismatch);
  save_encoder(dir.path() / "b.gpbckpt", loaded.value, 42);
  EXPECT_EQ(slurp(dir.path() / "a.gpbckpt"), slurp(dir.path() / "b.gpbckpt"));
  EXPECT_EQ(loaded.value.checksum(), enc.checksum());
  auto g = graph::two_blobs_node({.seed = 2}).graphs[0];
  EXPECT_LE(ad::max_abs_diff(loaded.value.embed(g), enc.embed(g)), 1e-15);
  EXPECT_EQ(loaded.value.pretext(), "dgi");
}

TEST(Checkpoint, HashMismatchIsAWarningFlag) {
  TempDir dir;
  save_encoder(dir.path() / "a.gpbckpt", small_encoder(1), 7);
  EXPECT_TRUE(load_encoder(dir.path() / "a.gpbckpt", 8).hash_mismatch);
  EXPECT_FALSE(load_encoder(dir.path() / "a.gpbckpt", 7).hash_mismatch);
}

TEST(Checkpoint, CorruptionIsAnIntegrityError) {
  TempDir dir;
  const auto file = dir.path() / "a.gpbckpt";
  save_encoder(file, small_encoder(1), 7);
  const auto bytes = slurp(file);
  for (std::size_t cut : {std::size_t{0}, std::size_t{5}, std::size_t{30}, bytes.size() / 2, bytes.size() - 1}) {
    spit(dir.path() / "t.gpbckpt", bytes.substr(0, cut));
    EXPECT_THROW(load_encoder(dir.path() / "t.gpbckpt"), IntegrityError) << cut;
  }
  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x20;
  spit(dir.path() / "f.gpbckpt", flipped);
  EXPECT_THROW(load_encoder(dir.path() / "f.gpbckpt"), IntegrityError);
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(decode_container(magic), IntegrityError);
  EXPECT_THROW(load_prompt(file), IntegrityError);
  EXPECT_THROW(load_encoder(dir.path() / "absent.gpbckpt"), MissingFileError);
}

TEST(Checkpoint, ContainerLayout) {
  Container c{ArtifactKind::prompt, kCheckpointVersion, 0x0102030405060708ull, "{}"};
  const auto bytes = encode_container(c);
  ASSERT_EQ(bytes.size(), 8u + 4 + 1 + 8 + 8 + 2 + 4);
  EXPECT_EQ(bytes.substr(0, 8), std::string("GPBCKPT\0", 8));
  EXPECT_EQ(bytes[12], 2);
  EXPECT_EQ(static_cast<unsigned char>(bytes[13]), 0x08);
  auto back = decode_container(bytes);
  EXPECT_EQ(back.payload, "{}");
  EXPECT_EQ(back.config_hash, c.config_hash);
  auto future = c;
  future.version = 2;
  EXPECT_THROW(decode_container(encode_container(future)), IntegrityError);
}

TEST(Checkpoint, PromptRoundTripPredictsIdentically) {
  TempDir dir;
  auto ds = graph::two_blobs_node({.seed = 3});
  auto enc = small_encoder(3);
  auto task = graph::sample_kshot(ds, 1, 4);
  for (auto m : prompt::all_methods()) {
    prompt::PromptRunConfig cfg;
    cfg.method = m;
    cfg.epochs = 10;
    auto tuned = prompt::tune_prompt(enc, ds, task, cfg);
    const auto file = dir.path() / (prompt::to_string(m) + ".gpbckpt");
    save_prompt(file, {tuned, "dgi"}, config_hash(cfg));
    auto loaded = load_prompt(file, config_hash(cfg));
    EXPECT_FALSE(loaded.hash_mismatch);
    EXPECT_EQ(prompt::predict(loaded.value.tuned, enc, ds, task.query, cfg).scores,
              prompt::predict(tuned, enc, ds, task.query, cfg).scores)
        << prompt::to_string(m);
    save_prompt(dir.path() / "again.gpbckpt", loaded.value, config_hash(cfg));
    EXPECT_EQ(slurp(file), slurp(dir.path() / "again.gpbckpt"));
  }
}

TEST(Config, DefaultsAndRoundTrip) {
  auto cfg = config_from_json(json::object());
  EXPECT_EQ(cfg.seeds, 5u);
  EXPECT_EQ(cfg.k, 1u);
  EXPECT_EQ(cfg.dataset.label(), "synth:two_blobs");
  cfg.validate();
  auto again = config_from_json(to_json(cfg));
  EXPECT_EQ(to_json(again).dump(), to_json(cfg).dump());
  EXPECT_EQ(config_hash(again), config_hash(cfg));
  auto moved = cfg;
  moved.output_dir = "elsewhere";
  EXPECT_EQ(config_hash(moved), config_hash(cfg));
  moved.k = 2;
  EXPECT_NE(config_hash(moved), config_hash(cfg));
}

TEST(Config, UnknownKeysAndTypesAreErrors) {
  auto expect_message = [](const json& j, const std::string& fragment) {
    try {
      config_from_json(j).validate();
      ADD_FAILURE() << "accepted " << j.dump();
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
  };
  expect_message({{"seedz", 3}}, "seedz");
  expect_message({{"prompt", {{"num_token", 3}}}}, "prompt.num_token");
  expect_message({{"dataset", {{"spec", "synth:two_blobs"}, {"params", {{"nodes", 3}}}}}}, "dataset.params.nodes");
  expect_message({{"k", "one"}}, "k");
  expect_message({{"methods", {"gpf", "gpf"}}}, "twice");
  expect_message({{"methods", {"prompt-magic"}}}, "unknown method");
  expect_message({{"pretexts", {"bert"}}}, "pretexts");
  expect_message({{"dataset", "bundle:/definitely/not/here"}}, "not found");
  expect_message({{"dataset", "synth:nope"}}, "unknown synthetic");
  expect_message({{"search", {{"trials", 2}, {"batch_sizes", json::array()}}}}, "search");
}

TEST(Config, LoadFromFile) {
  TempDir dir;
  EXPECT_THROW(load_config(dir.path() / "missing.json"), MissingFileError);
  spit(dir.path() / "broken.json", "{ not json");
  EXPECT_THROW(load_config(dir.path() / "broken.json"), ConfigError);
  spit(dir.path() / "ok.json", R"({ "k": 2, "methods": ["gpf"], "pretexts": ["dgi", "graphmae"] })");
  auto cfg = load_config(dir.path() / "ok.json");
  EXPECT_EQ(cfg.k, 2u);
  EXPECT_EQ(cfg.pretexts.size(), 2u);
}

ExperimentConfig tiny_experiment(const fs::path& out) {
  auto cfg = config_from_json({{"dataset", {{"spec", "synth:two_blobs"}, {"params", {{"num_nodes", 40}}}}},
                               {"seeds", 2},
                               {"methods", {"supervised", "finetune", "gpf", "gppt"}},
                               {"pretexts", {"dgi", "graphcl"}},
                               {"backbone", {{"hidden_dim", 8}}},
                               {"pretrain", {{"epochs", 3}}},
                               {"prompt", {{"epochs", 3}}},
                               {"train", {{"epochs", 3}}},
                               {"record_wall_clock", false},
                               {"output_dir", out.string()}});
  return cfg;
}

TEST(Config, FuzzedValidationMatchesPipeline) {
  // validate() accepts a config exactly when the pipeline runs it
  TempDir dir;
  Rng rng(7);
  const std::vector<std::pair<std::string, std::vector<json>>> fields{
      {"k", {0, 1, 2, 40}},
      {"seeds", {0, 1}},
      {"prompt.num_tokens", {0, 2}},
      {"prompt.link_threshold", {0.0, 0.5, 1.0}},
      {"prompt.hops", {0, 1}},
      {"prompt.learning_rate", {-1.0, 0.01}},
      {"pretrain.temperature", {0.0, 0.5}},
      {"pretrain.mask_rate", {0.0, 0.5}},
      {"train.batch_size", {0, 4}},
      {"backbone.num_layers", {0, 1, 2}},
  };
  std::size_t accepted = 0, rejected = 0;
  for (int trial = 0; trial < 24; ++trial) {
    auto j = to_json(tiny_experiment(dir.path() / "run"));
    for (const auto& [name, values] : fields) {
      if (uniform01(rng) < 0.7) continue;
      const auto& v = values[uniform_index(rng, values.size())];
      const auto dot = name.find('.');
      if (dot == std::string::npos) j[name] = v;
      else j[name.substr(0, dot)][name.substr(dot + 1)] = v;
    }
    const auto cfg = config_from_json(j);
    bool valid = true;
    try {
      cfg.validate();
    } catch (const ConfigError&) {
      valid = false;
    }
    bool ran = true;
    try {
      run_experiment(cfg, 1);
    } catch (const ConfigError&) {
      ran = false;
    }
    // k = 40 is well-formed yet infeasible for this dataset; the runner
    // reports it as a config error before any job starts
    if (j["k"] == 40) {
      EXPECT_FALSE(ran) << j.dump();
      continue;
    }
    EXPECT_EQ(valid, ran) << j.dump();
    (valid ? accepted : rejected)++;
  }
  EXPECT_GT(accepted, 0u);
  EXPECT_GT(rejected, 0u);
}

TEST(Profile, ParameterCountsAndTiming) {
  auto ds = graph::two_blobs_node({.feature_dim = 8});
  model::BackboneConfig b{.input_dim = 8, .hidden_dim = 16, .num_layers = 2};
  Rng rng(1);
  model::PretrainedEncoder enc(b, model::init_gcn_weights(b, rng), "random");
  EXPECT_EQ(model::param_count(enc), 8u * 16 + 16u * 16);
  auto task = graph::sample_kshot(ds, 1, 2);
  auto run_with = [&](prompt::Method m) {
    prompt::PromptRunConfig cfg;
    cfg.method = m;
    cfg.epochs = 5;
    eval::SeedRun run;
    auto eff = profile_run([&] { return eval::evaluate_prompt(enc, ds, task, cfg); }, &run);
    EXPECT_EQ(eff.tunable_params, run.tunable_params);
    double sum = 0.0;
    for (double e : eff.epoch_ms) sum += e;
    EXPECT_GE(eff.total_ms, sum);
    EXPECT_EQ(eff.epochs_run, 5u);
    return eff;
  };
  EXPECT_EQ(run_with(prompt::Method::gpf).tunable_params, 8u + 16 * 2);
  EXPECT_EQ(run_with(prompt::Method::allinone).tunable_params, 10u * 8 + 16 * 2);
  EXPECT_LT(run_with(prompt::Method::gpf).tunable_params, model::param_count(enc));
}

TEST(Runner, ParallelForRethrowsLowestFailure) {
  std::vector<int> hit(20);
  parallel_for(20, 4, [&](std::size_t i) { hit[i] = 1; });
  EXPECT_EQ(std::count(hit.begin(), hit.end(), 1), 20);
  try {
    parallel_for(10, 3, [](std::size_t i) {
      if (i == 7 || i == 4) throw InvalidArgument("job " + std::to_string(i));
    });
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_STREQ(e.what(), "job 4");
  }
}

TEST(Runner, RowsRoundTrip) {
  ResultRow r{"gpf", "dgi", "two_blobs_node", "node", 1, 18446744073709551615ull, 0.1, 1.0 / 3.0, 0.5, 72, 2.25};
  EXPECT_EQ(parse_result_row(to_csv(r)), r);
  EXPECT_THROW(parse_result_row("a,b,c"), ParseError);
}

TEST(Runner, LayoutReportsAndDeterminism) {
  TempDir dir;
  auto cfg = tiny_experiment(dir.path() / "a");
  auto first = run_experiment(cfg, 1);
  // supervised: 2 seeds; finetune, gpf, gppt: 2 pretexts x 2 seeds
  EXPECT_EQ(first.rows.size(), 2u + 3 * 2 * 2);
  EXPECT_TRUE(fs::exists(dir.path() / "a" / "encoders" / "dgi.gpbckpt"));
  EXPECT_TRUE(fs::exists(dir.path() / "a" / "summary.json"));
  const auto csv = slurp(dir.path() / "a" / "results.csv");
  EXPECT_EQ(render_csv(collect_rows(dir.path() / "a")), csv);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 14);

  cfg.output_dir = dir.path() / "b";
  run_experiment(cfg, 3);
  EXPECT_EQ(slurp(dir.path() / "b" / "results.csv"), csv);
  EXPECT_EQ(slurp(dir.path() / "b" / "summary.json"), slurp(dir.path() / "a" / "summary.json"));

  auto summary = json::parse(slurp(dir.path() / "a" / "summary.json"));
  EXPECT_EQ(summary["groups"].size(), 7u);
  EXPECT_EQ(summary["transfer"].size(), 6u);
  for (const auto& g : first.reports) EXPECT_EQ(g.runs.size(), 2u);
}

}  // namespace
}  // namespace gpb::bench
