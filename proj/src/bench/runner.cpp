#include "gpb/bench/runner.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "gpb/bench/checkpoint.hpp"
#include "gpb/bench/report.hpp"
#include "gpb/error.hpp"
#include "gpb/random.hpp"
#include "gpb/text.hpp"

namespace gpb::bench {

using nlohmann::json;

double EfficiencyReport::mean_epoch_ms() const {
  if (epoch_ms.empty()) return 0.0;
  return std::accumulate(epoch_ms.begin(), epoch_ms.end(), 0.0) / double(epoch_ms.size());
}

EfficiencyReport profile_run(const std::function<eval::SeedRun()>& run, eval::SeedRun* out) {
  const auto t0 = std::chrono::steady_clock::now();
  auto r = run();
  EfficiencyReport rep;
  rep.total_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  rep.tunable_params = r.tunable_params;
  rep.epochs_run = r.epochs_run;
  rep.epoch_ms = r.epoch_ms;
  if (out) *out = std::move(r);
  return rep;
}

std::string to_csv(const ResultRow& r) {
  return r.method + ',' + r.pretext + ',' + r.dataset + ',' + r.level + ',' + std::to_string(r.k) + ',' +
         std::to_string(r.seed) + ',' + format_double(r.accuracy) + ',' + format_double(r.macro_f1) + ',' +
         format_double(r.macro_auroc) + ',' + std::to_string(r.tunable_params) + ',' + format_double(r.wall_ms);
}

ResultRow parse_result_row(const std::string& line) {
  const auto f = split(line, ',');
  if (f.size() != 11) throw ParseError("result row needs 11 fields, got " + std::to_string(f.size()) + ": " + line);
  auto count = [](std::string_view s) {
    const auto v = parse_int(s);
    if (v < 0) throw ParseError("negative count in result row");
    return static_cast<std::uint64_t>(v);
  };
  ResultRow r;
  r.method = std::string(f[0]);
  r.pretext = std::string(f[1]);
  r.dataset = std::string(f[2]);
  r.level = std::string(f[3]);
  r.k = count(f[4]);
  r.seed = std::stoull(std::string(f[5]));
  r.accuracy = parse_double(f[6]);
  r.macro_f1 = parse_double(f[7]);
  r.macro_auroc = parse_double(f[8]);
  r.tunable_params = count(f[9]);
  r.wall_ms = parse_double(f[10]);
  return r;
}

std::size_t workers_from_env() {
  const char* v = std::getenv("GPB_WORKERS");
  if (!v || !*v) return 1;
  long long n = 0;
  try {
    n = parse_int(v);
  } catch (const Error&) {
    throw ConfigError(std::string("GPB_WORKERS must be a positive integer, got '") + v + "'");
  }
  if (n < 1) throw ConfigError(std::string("GPB_WORKERS must be a positive integer, got '") + v + "'");
  return static_cast<std::size_t>(n);
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(workers, n));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace {

struct Job {
  std::string method;
  std::string pretext;  // "none" for supervised
  std::size_t seed_index = 0;
};

struct Prepared {
  graph::Dataset ds;
  std::vector<graph::KShotTask> tasks;
  std::map<std::string, model::PretrainedEncoder> encoders;
};

Prepared prepare(const ExperimentConfig& cfg, std::size_t workers, const std::filesystem::path* encoder_dir) {
  cfg.validate();
  Prepared p;
  p.ds = load_dataset(cfg.dataset);
  try {
    p.tasks = eval::make_tasks(p.ds, cfg.k, cfg.root_seed, cfg.seeds);
  } catch (const InfeasibleError& e) {
    throw ConfigError("k=" + std::to_string(cfg.k) + " is infeasible for " + cfg.dataset.label() + ": " + e.what());
  }
  const bool any_encoder = std::any_of(cfg.methods.begin(), cfg.methods.end(), needs_encoder);
  if (!any_encoder) return p;
  std::vector<model::PretrainedEncoder> encs(cfg.pretexts.size());
  parallel_for(cfg.pretexts.size(), workers, [&](std::size_t i) {
    auto pc = cfg.pretrain;
    pc.method = cfg.pretexts[i];
    pc.seed = derive_seed(cfg.root_seed, "pretrain:" + pretrain::to_string(pc.method));
    pc.backbone = cfg.backbone;
    pc.backbone.input_dim = 0;
    encs[i] = pretrain::run_pretraining(pc, p.ds).encoder;
    if (encoder_dir)
      save_encoder(*encoder_dir / (pretrain::to_string(pc.method) + ".gpbckpt"), encs[i], config_hash(pc));
  });
  for (std::size_t i = 0; i < encs.size(); ++i) p.encoders.emplace(pretrain::to_string(cfg.pretexts[i]), std::move(encs[i]));
  return p;
}

std::vector<Job> jobs_for(const ExperimentConfig& cfg) {
  std::vector<Job> jobs;
  for (const auto& m : cfg.methods) {
    if (m == "supervised") {
      for (std::size_t s = 0; s < cfg.seeds; ++s) jobs.push_back({m, "none", s});
      continue;
    }
    for (auto p : cfg.pretexts)
      for (std::size_t s = 0; s < cfg.seeds; ++s) jobs.push_back({m, pretrain::to_string(p), s});
  }
  return jobs;
}

void apply(const eval::TrialConfig& t, eval::TrainConfig& train, prompt::PromptRunConfig& prompt) {
  train.learning_rate = prompt.learning_rate = t.learning_rate;
  train.weight_decay = prompt.weight_decay = t.weight_decay;
  train.batch_size = prompt.batch_size = t.batch_size;
}

eval::SeedRun run_one(const Prepared& p, const std::string& method, const std::string& pretext,
                      const graph::KShotTask& task, eval::TrainConfig train, prompt::PromptRunConfig pcfg) {
  train.seed = task.seed;
  if (method == "supervised") return eval::evaluate_supervised(p.ds, task, train);
  const auto& enc = p.encoders.at(pretext);
  if (method == "finetune") return eval::evaluate_finetune(enc, p.ds, task, train);
  pcfg.method = prompt::parse_method(method);
  return eval::evaluate_prompt(enc, p.ds, task, pcfg);
}

std::string run_dir_name(std::size_t index, const Job& j) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04zu", index);
  return std::string(buf) + "_" + j.method + "_" + j.pretext + "_s" + std::to_string(j.seed_index);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<SearchOutcome> search_with(const ExperimentConfig& cfg, const Prepared& p, std::size_t workers) {
  std::vector<std::pair<std::string, std::string>> combos;
  for (const auto& m : cfg.methods) {
    if (m == "supervised") combos.emplace_back(m, "none");
    else
      for (auto pt : cfg.pretexts) combos.emplace_back(m, pretrain::to_string(pt));
  }
  std::vector<eval::ValidationSplit> splits;
  for (const auto& t : p.tasks) splits.push_back(eval::validation_split(t));
  std::vector<SearchOutcome> out(combos.size());
  parallel_for(combos.size(), workers, [&](std::size_t c) {
    const auto& [method, pretext] = combos[c];
    auto objective = [&](const eval::TrialConfig& trial) {
      auto train = cfg.train;
      auto pcfg = cfg.prompt;
      apply(trial, train, pcfg);
      double total = 0.0;
      for (const auto& s : splits) {
        auto t = s.train;
        t.query = s.validation;
        total += run_one(p, method, pretext, t, train, pcfg).accuracy;
      }
      return total / double(splits.size());
    };
    const auto seed = derive_seed(cfg.root_seed, "search:" + method + ":" + pretext);
    out[c] = {method, pretext, eval::random_search(cfg.search, objective, cfg.search_trials, seed)};
  });
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::size_t workers) {
  const auto& out = cfg.output_dir;
  std::filesystem::create_directories(out);
  std::filesystem::remove_all(out / "runs");
  std::filesystem::create_directories(out / "runs");
  write_text(out / "config.json", to_json(cfg).dump(2) + "\n");
  const auto encoder_dir = out / "encoders";
  const auto p = prepare(cfg, workers, &encoder_dir);

  std::map<std::pair<std::string, std::string>, eval::TrialConfig> tuned;
  if (cfg.search_trials > 0) {
    json trace = json::array();
    for (const auto& s : search_with(cfg, p, workers)) {
      tuned[{s.method, s.pretext}] = s.result.best;
      trace.push_back({{"method", s.method},
                       {"pretext", s.pretext},
                       {"best_index", s.result.best_index},
                       {"best_score", s.result.best_score},
                       {"learning_rate", s.result.best.learning_rate},
                       {"weight_decay", s.result.best.weight_decay},
                       {"batch_size", s.result.best.batch_size}});
    }
    write_text(out / "search.json", trace.dump(2) + "\n");
  }

  const auto jobs = jobs_for(cfg);
  std::vector<eval::SeedRun> runs(jobs.size());
  parallel_for(jobs.size(), workers, [&](std::size_t i) {
    const auto& job = jobs[i];
    auto train = cfg.train;
    auto pcfg = cfg.prompt;
    if (auto it = tuned.find({job.method, job.pretext}); it != tuned.end()) apply(it->second, train, pcfg);
    const auto& task = p.tasks[job.seed_index];
    auto eff = profile_run([&] { return run_one(p, job.method, job.pretext, task, train, pcfg); }, &runs[i]);
    if (!cfg.record_wall_clock) {
      eff.total_ms = 0.0;
      std::fill(eff.epoch_ms.begin(), eff.epoch_ms.end(), 0.0);
    }
    ResultRow row{job.method, job.pretext, p.ds.name, graph::to_string(p.ds.level), cfg.k, task.seed,
                  runs[i].accuracy, runs[i].macro_f1, runs[i].macro_auroc, runs[i].tunable_params, eff.total_ms};
    const auto dir = out / "runs" / run_dir_name(i, job);
    std::filesystem::create_directories(dir);
    write_text(dir / "row.csv", std::string(kResultHeader) + "\n" + to_csv(row) + "\n");
    json detail = {{"efficiency",
                    {{"tunable_params", eff.tunable_params},
                     {"epochs_run", eff.epochs_run},
                     {"total_ms", eff.total_ms},
                     {"mean_epoch_ms", eff.mean_epoch_ms()},
                     {"epoch_ms", eff.epoch_ms}}},
                   {"auroc_skipped", runs[i].auroc_skipped},
                   {"loss_trace", runs[i].loss_trace}};
    write_text(dir / "run.json", detail.dump(2) + "\n");
  });

  ExperimentResult result;
  result.rows = collect_rows(out);
  write_text(out / "results.csv", render_csv(result.rows));
  write_text(out / "summary.json", render_json(result.rows));

  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto key = std::make_pair(jobs[i].method, jobs[i].pretext);
    if (!index.count(key)) {
      index[key] = result.reports.size();
      eval::MetricReport r;
      r.method = jobs[i].method;
      r.pretext = jobs[i].pretext;
      r.dataset = p.ds.name;
      r.level = p.ds.level;
      r.k = cfg.k;
      result.reports.push_back(std::move(r));
    }
    result.reports[index[key]].runs.push_back(runs[i]);
  }
  for (auto& r : result.reports) r.aggregate();
  return result;
}

std::vector<SearchOutcome> run_search(const ExperimentConfig& cfg, std::size_t workers) {
  if (cfg.search_trials == 0) throw ConfigError("search.trials must be >= 1 for a search run");
  const auto p = prepare(cfg, workers, nullptr);
  return search_with(cfg, p, workers);
}

}  // namespace gpb::bench
