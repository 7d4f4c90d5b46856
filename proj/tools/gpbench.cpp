// gpbench: command-line driver for pre-training, prompt tuning, evaluation,
// the flexibility probe, random search and report rendering.
#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <json.hpp>

#include "gpb/bench/checkpoint.hpp"
#include "gpb/bench/config.hpp"
#include "gpb/bench/report.hpp"
#include "gpb/bench/runner.hpp"
#include "gpb/error.hpp"
#include "gpb/eval/harness.hpp"
#include "gpb/graph/sampler.hpp"
#include "gpb/pretrain/pretext.hpp"
#include "gpb/probe/flexibility.hpp"
#include "gpb/random.hpp"

namespace {

using namespace gpb;
using nlohmann::json;

enum Exit : int { ok = 0, usage = 64, invalid_config = 65, not_found = 66, runtime = 70, io = 74 };

int fail(Exit code, const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}, {"exit", int(code)}}.dump() << std::endl;
  return code;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error("cannot write " + path);
}

std::vector<std::string> names_of(auto all) {
  std::vector<std::string> out;
  for (auto v : all) out.push_back(to_string(v));
  return out;
}

struct PretrainArgs {
  std::string method, dataset, out;
  std::size_t epochs = 200, hidden = 128, layers = 2;
  std::uint64_t seed = 0;
};

int cmd_pretrain(const PretrainArgs& a) {
  auto ds = bench::load_dataset(bench::parse_dataset_spec(a.dataset));
  pretrain::PretextConfig pc;
  pc.method = pretrain::parse_pretext(a.method);
  pc.epochs = a.epochs;
  pc.seed = a.seed;
  pc.backbone.hidden_dim = a.hidden;
  pc.backbone.num_layers = a.layers;
  auto result = pretrain::run_pretraining(pc, ds);
  const auto path = std::filesystem::path(a.out) / (a.method + ".gpbckpt");
  bench::save_encoder(path, result.encoder, bench::config_hash(pc));
  std::cout << json{{"checkpoint", path.string()},
                    {"final_loss", result.loss_trace.empty() ? 0.0 : result.loss_trace.back()},
                    {"checksum", result.encoder.checksum()}}
                   .dump()
            << std::endl;
  return ok;
}

struct TuneArgs {
  std::string checkpoint, method, dataset, out;
  std::size_t k = 1, epochs = 200;
  std::uint64_t seed = 0;
};

int cmd_tune(const TuneArgs& a) {
  auto enc = bench::load_encoder(a.checkpoint).value;
  auto ds = bench::load_dataset(bench::parse_dataset_spec(a.dataset));
  auto task = graph::sample_kshot(ds, a.k, derive_seed(a.seed, 0));
  prompt::PromptRunConfig cfg;
  cfg.method = prompt::parse_method(a.method);
  cfg.epochs = a.epochs;
  cfg.seed = a.seed;
  auto tuned = prompt::tune_prompt(enc, ds, task, cfg);
  auto pred = prompt::predict(tuned, enc, ds, task.query, cfg);
  std::vector<std::size_t> labels;
  for (const auto& item : task.query) labels.push_back(item.label);
  const auto path = std::filesystem::path(a.out) / (a.method + "-" + enc.pretext() + ".gpbckpt");
  bench::save_prompt(path, {tuned, enc.pretext()}, bench::config_hash(cfg));
  std::cout << json{{"checkpoint", path.string()},
                    {"query_accuracy", eval::accuracy(pred.labels, labels)},
                    {"tunable_params", prompt::tunable_params(tuned)}}
                   .dump()
            << std::endl;
  return ok;
}

bench::ExperimentConfig config_with_overrides(const std::string& path, const std::string& out) {
  auto cfg = bench::load_config(path);
  if (!out.empty()) cfg.output_dir = out;
  return cfg;
}

struct FlexArgs {
  std::string checkpoint, out;
  std::uint64_t seed = 0;
  double fraction = 0.1;
  std::size_t epochs = 500;
};

int cmd_flexibility(const FlexArgs& a) {
  const auto g = probe::probe_graph(a.seed);
  model::PretrainedEncoder enc;
  if (!a.checkpoint.empty()) {
    enc = bench::load_encoder(a.checkpoint).value;
  } else {
    graph::Dataset ds;
    ds.name = "probe";
    ds.num_classes = 3;
    ds.graphs.push_back(g);
    pretrain::PretextConfig pc;
    pc.method = pretrain::Pretext::graphcl;
    pc.seed = a.seed;
    enc = pretrain::run_pretraining(pc, ds).encoder;
  }
  probe::FlexibilityConfig cfg;
  cfg.fraction = a.fraction;
  cfg.seed = a.seed;
  cfg.fit.seed = a.seed;
  cfg.fit.epochs = a.epochs;
  std::ostringstream csv;
  probe::write_csv(csv, probe::run_flexibility(enc, g, cfg));
  emit(csv.str(), a.out);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph prompt benchmark driver"};
  app.require_subcommand(1);

  const auto pretexts = names_of(pretrain::all_pretexts());
  const auto methods = names_of(prompt::all_methods());

  PretrainArgs pa;
  auto* pre = app.add_subcommand("pretrain", "pre-train a GCN encoder and write one checkpoint");
  pre->add_option("--method", pa.method, "pretext")->required()->check(CLI::IsMember(pretexts));
  pre->add_option("--dataset", pa.dataset, "synth:<recipe> or bundle:<dir>")->required();
  pre->add_option("--out", pa.out, "output directory")->required();
  pre->add_option("--epochs", pa.epochs)->capture_default_str();
  pre->add_option("--hidden-dim", pa.hidden)->capture_default_str();
  pre->add_option("--layers", pa.layers)->capture_default_str();
  pre->add_option("--seed", pa.seed)->capture_default_str();

  TuneArgs ta;
  auto* tune = app.add_subcommand("tune", "tune a prompt against a frozen encoder checkpoint");
  tune->add_option("--checkpoint", ta.checkpoint, "encoder checkpoint")->required();
  tune->add_option("--method", ta.method)->required()->check(CLI::IsMember(methods));
  tune->add_option("--dataset", ta.dataset)->required();
  tune->add_option("--out", ta.out, "output directory")->required();
  tune->add_option("--k", ta.k)->capture_default_str();
  tune->add_option("--epochs", ta.epochs)->capture_default_str();
  tune->add_option("--seed", ta.seed)->capture_default_str();

  std::string eval_config, eval_out;
  std::size_t workers = 0;
  auto* evaluate = app.add_subcommand("evaluate", "run an experiment config");
  evaluate->add_option("--config", eval_config, "JSON experiment config")->required();
  evaluate->add_option("--out", eval_out, "override output_dir");
  evaluate->add_option("--workers", workers, "override GPB_WORKERS");

  FlexArgs fa;
  auto* flex = app.add_subcommand("flexibility", "error-bound probe on a seeded 30-node graph");
  flex->add_option("--checkpoint", fa.checkpoint, "encoder checkpoint (default: GraphCL on the probe graph)");
  flex->add_option("--seed", fa.seed)->capture_default_str();
  flex->add_option("--fraction", fa.fraction)->capture_default_str();
  flex->add_option("--epochs", fa.epochs)->capture_default_str();
  flex->add_option("--out", fa.out, "CSV path (default stdout)");

  std::string search_config, search_out;
  std::size_t trials = 0;
  auto* search = app.add_subcommand("search", "random search over learning rate, weight decay and batch size");
  search->add_option("--config", search_config)->required();
  search->add_option("--trials", trials, "override search.trials");
  search->add_option("--out", search_out, "JSON path (default stdout)");
  search->add_option("--workers", workers);

  std::vector<std::string> report_in;
  std::string format = "csv", report_out;
  auto* report = app.add_subcommand("report", "render tables from stored run directories");
  report->add_option("--in", report_in, "experiment output directory (repeatable)")->required();
  report->add_option("--format", format)->check(CLI::IsMember({"csv", "json", "markdown"}))->capture_default_str();
  report->add_option("--out", report_out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(usage, "usage", e.what());
  }

  auto worker_count = [&] { return workers > 0 ? workers : bench::workers_from_env(); };
  auto require_config = [](const std::string& path) {
    if (!std::filesystem::exists(path)) throw gpb::MissingFileError("config not found: " + path);
  };

  try {
    if (*pre) return cmd_pretrain(pa);
    if (*tune) return cmd_tune(ta);
    if (*flex) return cmd_flexibility(fa);
    if (*evaluate) {
      try {
        require_config(eval_config);
      } catch (const MissingFileError& e) {
        return fail(not_found, "config_not_found", e.what());
      }
      auto cfg = config_with_overrides(eval_config, eval_out);
      auto result = bench::run_experiment(cfg, worker_count());
      std::cout << json{{"output_dir", cfg.output_dir.string()}, {"runs", result.rows.size()}}.dump() << std::endl;
      return ok;
    }
    if (*search) {
      try {
        require_config(search_config);
      } catch (const MissingFileError& e) {
        return fail(not_found, "config_not_found", e.what());
      }
      auto cfg = bench::load_config(search_config);
      if (trials > 0) cfg.search_trials = trials;
      json out = json::array();
      for (const auto& s : bench::run_search(cfg, worker_count())) {
        json tj = json::array();
        for (const auto& t : s.result.trials)
          tj.push_back({{"index", t.index},
                        {"learning_rate", t.config.learning_rate},
                        {"weight_decay", t.config.weight_decay},
                        {"batch_size", t.config.batch_size},
                        {"score", t.score ? json(*t.score) : json(nullptr)},
                        {"error", t.error}});
        out.push_back({{"method", s.method},
                       {"pretext", s.pretext},
                       {"best_index", s.result.best_index},
                       {"best_score", s.result.best_score},
                       {"trials", tj}});
      }
      emit(out.dump(2) + "\n", search_out);
      return ok;
    }
    if (*report) {
      std::vector<bench::ResultRow> rows;
      for (const auto& dir : report_in) {
        auto part = bench::collect_rows(dir);
        rows.insert(rows.end(), part.begin(), part.end());
      }
      if (format == "csv") emit(bench::render_csv(rows), report_out);
      else if (format == "json") emit(bench::render_json(rows), report_out);
      else emit(bench::render_markdown(rows), report_out);
      return ok;
    }
  } catch (const ConfigError& e) {
    return fail(invalid_config, "invalid_config", e.what());
  } catch (const IntegrityError& e) {
    return fail(invalid_config, "integrity", e.what());
  } catch (const MissingFileError& e) {
    return fail(not_found, "not_found", e.what());
  } catch (const BundleError& e) {
    return fail(invalid_config, "bundle", e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(io, "io", e.what());
  } catch (const std::exception& e) {
    return fail(runtime, "runtime", e.what());
  }
  return usage;
}
