// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>
#include <set>
#include <string>
#include <unistd.h>

#include "gpb/bench/runner.hpp"
#include "gpb/error.hpp"
#include "gpb/eval/harness.hpp"
#include "gpb/eval/metrics.hpp"
#include "gpb/eval/transfer.hpp"
#include "gpb/graph/sampler.hpp"
#include "gpb/graph/synth.hpp"
#include "gpb/probe/flexibility.hpp"
#include "gradcases.hpp"
#include "oracles.hpp"

namespace {

using namespace gpb;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

model::PretrainedEncoder random_encoder(std::size_t d, std::size_t hidden, std::uint64_t seed) {
  Rng rng(seed);
  model::BackboneConfig cfg{.input_dim = d, .hidden_dim = hidden};
  return model::PretrainedEncoder(cfg, model::init_gcn_weights(cfg, rng), "random");
}

Outcome gradients() {
  auto results = testing::op_grad_results(101, 100, 8);
  const auto ops = results.size();
  auto pre = testing::pretext_grad_results();
  auto pro = testing::prompt_grad_results();
  results.insert(results.end(), pre.begin(), pre.end());
  results.insert(results.end(), pro.begin(), pro.end());
  std::size_t bad = 0, excluded = 0;
  const testing::GradResult* worst = nullptr;
  for (const auto& r : results) {
    if (r.ill_conditioned) {
      ++excluded;
      continue;
    }
    bad += !(r.error < 1e-4);
    if (!worst || r.error > worst->error) worst = &r;
  }
  return {bad == 0 && worst, fmt("%zu checks (%zu op, %zu pretext, %zu prompt), %zu excluded with |grad| < %.0e, "
                                 "%zu >= 1e-4, worst %.2e (%s)",
                                 results.size(), ops, pre.size(), pro.size(), excluded, testing::kConditioningFloor, bad,
                                 worst ? worst->error : 0.0, worst ? worst->name.c_str() : "-")};
}

Outcome identities() {
  using namespace prompt;
  Rng rng(202);
  std::size_t failures = 0, cases = 0;
  double gpf_worst = 0.0;
  for (int trial = 0; trial < 50; ++trial, ++cases) {
    const std::size_t n = 1 + uniform_index(rng, 12), d = 1 + uniform_index(rng, 6);
    auto g = testing::random_graph(n, 0.3, d, rng);
    auto enc = random_encoder(d, 8, 300 + trial);
    const auto plain = model::readout_mean(Tensor::constant(enc.embed(g))).value();

    PromptModule zero{Method::gpf, Tensor::parameter(Matrix(1, d)), {}, 0.5};
    const double diff = ad::max_abs_diff(prompted_embedding(zero, enc, g).value(), plain);
    gpf_worst = std::max(gpf_worst, diff);
    failures += !(diff <= 1e-12);

    const auto b = testing::random_matrix(1, d, rng);
    PromptModule gpf{Method::gpf, Tensor::parameter(b), {}, 0.5};
    PromptModule plus{Method::gpfplus, Tensor::parameter(b), Tensor::parameter(testing::random_matrix(1, d, rng)), 0.5};
    failures += !(prompted_embedding(plus, enc, g).value() == prompted_embedding(gpf, enc, g).value());

    PromptModule ones{Method::gprompt, Tensor::parameter(Matrix(1, 8, 1.0)), {}, 0.5};
    failures += !(prompted_embedding(ones, enc, g).value() == plain);

    PromptModule aio{Method::allinone, Tensor::parameter(testing::random_matrix(1 + uniform_index(rng, 5), d, rng)), {}, 0.5};
    auto inserted = allinone_insert(aio, g);
    std::vector<std::size_t> keep(n);
    std::iota(keep.begin(), keep.end(), 0);
    auto back = graph::restrict_to(inserted, keep);
    failures += !(back.adj == g.adj && back.features == g.features);
  }
  return {failures == 0, fmt("%zu random graphs x 4 identities, %zu violations, GPF zero-prompt max diff %.1e", cases,
                             failures, gpf_worst)};
}

Outcome frozen() {
  std::size_t runs = 0, changed = 0;
  const graph::Dataset sets[] = {graph::two_blobs_node({}), graph::motif_graphs({.seed = 3})};
  for (const auto& ds : sets) {
    auto enc = random_encoder(ds.feature_dim(), 128, 5);
    const auto checksum = enc.checksum();
    const auto weights = enc.weights();
    auto task = graph::sample_kshot(ds, 1, 9);
    for (auto m : prompt::all_methods()) {
      prompt::PromptRunConfig cfg;
      cfg.method = m;
      cfg.epochs = 20;
      prompt::tune_prompt(enc, ds, task, cfg);
      ++runs;
      changed += enc.checksum() != checksum || enc.weights() != weights;
    }
  }
  return {changed == 0, fmt("%zu tune_prompt runs (5 methods x node/graph), %zu changed the encoder", runs, changed)};
}

Outcome metrics() {
  Rng rng(404);
  std::size_t mismatches = 0, skipped_classes = 0;
  double auroc_worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 50), c = 1 + uniform_index(rng, 6);
    std::vector<std::size_t> labels(n), preds(n);
    for (auto& v : labels) v = uniform_index(rng, c);
    for (auto& v : preds) v = uniform_index(rng, c);
    mismatches += eval::accuracy(preds, labels) != testing::accuracy_oracle(preds, labels);
    mismatches += eval::macro_f1(preds, labels, c) != testing::f1_oracle(preds, labels, c);
    ad::Matrix scores(n, c);
    for (double& v : scores.values()) v = double(uniform_index(rng, 5)) / 5.0;
    const double want = testing::auroc_oracle(scores, labels, c);
    if (std::isnan(want)) {
      try {
        eval::macro_auroc(scores, labels, c);
        ++mismatches;
      } catch (const InvalidArgument&) {
      }
      continue;
    }
    auto got = eval::macro_auroc(scores, labels, c);
    skipped_classes += got.skipped.size();
    auroc_worst = std::max(auroc_worst, std::abs(got.value - want));
    mismatches += !(std::abs(got.value - want) <= 1e-12);
  }
  return {mismatches == 0, fmt("1000 instances (n<=50, C<=6, tied scores), %zu mismatches, AUROC max diff %.1e, "
                               "%zu skipped classes",
                               mismatches, auroc_worst, skipped_classes)};
}

Outcome kshot() {
  std::size_t violations = 0;
  std::string detail;
  struct Case {
    graph::Dataset ds;
    std::size_t pool;
  };
  std::vector<Case> cases;
  cases.push_back({graph::two_blobs_node({}), 36});
  cases.push_back({graph::homophilic_sbm({}), 54});
  cases.push_back({graph::motif_graphs({}), 24});
  for (const auto& c : cases) {
    for (std::size_t k : {1, 2}) {
      auto tasks = eval::make_tasks(c.ds, k, 11);
      violations += tasks.size() != 5;
      std::set<std::uint64_t> seeds;
      for (const auto& t : tasks) {
        seeds.insert(t.seed);
        violations += t.support.size() != k * c.ds.num_classes;
        violations += t.query.size() != c.pool;
        std::vector<std::size_t> per(c.ds.num_classes);
        for (const auto& s : t.support) per[s.label]++;
        for (auto v : per) violations += v != k;
        std::set<std::size_t> q;
        for (const auto& item : t.query) q.insert(item.id);
        for (const auto& s : t.support) violations += q.count(s.id);
      }
      violations += seeds.size() != 5;
    }
  }
  auto ds = graph::two_blobs_node({});
  prompt::PromptRunConfig cfg;
  cfg.epochs = 10;
  auto report = eval::run_prompt(random_encoder(8, 32, 1), ds, eval::make_tasks(ds, 1, 12), cfg);
  violations += report.runs.size() != 5;
  return {violations == 0, fmt("3 datasets x k in {1,2} x 5 seeds; pools 36/54/24 (floor 0.9N, floor 0.8G); report "
                               "carries %zu seeds; %zu violations",
                               report.runs.size(), violations)};
}

Outcome flexibility() {
  const auto g = probe::probe_graph(0);
  graph::Dataset ds;
  ds.name = "probe";
  ds.num_classes = 3;
  ds.graphs.push_back(g);
  pretrain::PretextConfig pc;
  pc.method = pretrain::Pretext::graphcl;
  auto enc = pretrain::run_pretraining(pc, ds).encoder;
  probe::FlexibilityConfig cfg;
  auto r = probe::run_flexibility(enc, g, cfg);
  std::size_t not_strict = 0;
  for (const auto& f : r.fits) not_strict += !(f.final_error < r.ori_error(f.kind));
  const double aio = r.red_percent(prompt::Method::allinone), gp = r.red_percent(prompt::Method::gprompt);
  const bool pass = g.num_nodes() == 30 && r.fits.size() == 12 && not_strict == 0 && aio >= 50.0 && gp >= 50.0;
  return {pass, fmt("N=%zu, ori %.4f/%.4f/%.4f, %zu of 12 fits not strictly below ori, RED%% allinone %.2f gprompt "
                    "%.2f gpfplus %.2f gpf %.2f (%zu epochs)",
                    g.num_nodes(), r.manipulations[0].ori_error, r.manipulations[1].ori_error,
                    r.manipulations[2].ori_error, not_strict, aio, gp, r.red_percent(prompt::Method::gpfplus),
                    r.red_percent(prompt::Method::gpf), cfg.fit.epochs)};
}

Outcome parameters() {
  std::size_t checked = 0, wrong = 0;
  Rng rng(707);
  for (std::size_t d : {1, 3, 8, 33})
    for (std::size_t D : {1, 4, 16, 128})
      for (std::size_t L : {1, 2, 3, 4}) {
        model::BackboneConfig b{.input_dim = d, .hidden_dim = D, .num_layers = L};
        auto enc = model::PretrainedEncoder(b, model::init_gcn_weights(b, rng), "x");
        ++checked;
        wrong += model::param_count(enc) != d * D + D * D * (L - 1);
        wrong += model::param_count(enc) != model::gcn_param_closed_form(d, D, L);
        for (std::size_t K : {1, 5, 10}) {
          prompt::PromptRunConfig pc;
          pc.method = prompt::Method::allinone;
          pc.num_tokens = K;
          ++checked;
          wrong += model::param_count(prompt::init_prompt(pc, d, D, rng).parameters()) != K * d;
        }
      }
  auto ds = graph::two_blobs_node({});
  auto enc = random_encoder(8, 128, 3);
  auto task = graph::sample_kshot(ds, 1, 4);
  std::string counts;
  for (auto m : prompt::all_methods()) {
    prompt::PromptRunConfig pc;
    pc.method = m;
    pc.epochs = 0;
    const auto n = prompt::tunable_params(prompt::tune_prompt(enc, ds, task, pc));
    wrong += !(n < model::param_count(enc));
    counts += " " + prompt::to_string(m) + "=" + std::to_string(n);
  }
  return {wrong == 0, fmt("%zu closed-form checks over (d,D,L,K), %zu wrong; encoder %zu vs%s", checked, wrong,
                          model::param_count(enc), counts.c_str())};
}

Outcome end_to_end() {
  auto ds = graph::two_blobs_node({});
  pretrain::PretextConfig pc;
  pc.method = pretrain::Pretext::graphmae;
  auto enc = pretrain::run_pretraining(pc, ds).encoder;
  auto tasks = eval::make_tasks(ds, 1, 0);
  prompt::PromptRunConfig cfg;
  cfg.method = prompt::Method::gpfplus;
  auto gp = eval::run_prompt(enc, ds, tasks, cfg);
  auto sup = eval::run_supervised(ds, tasks, {});
  const bool pass = gp.runs.size() == 5 && gp.accuracy.mean >= 0.85 && gp.accuracy.mean > sup.accuracy.mean;
  return {pass, fmt("two_blobs_node(n=40, d=8, separation=5), 1-shot, 5 seeds: GPF-plus %.4f +- %.4f, supervised "
                    "%.4f +- %.4f (needs >= 0.85 and strictly above supervised)",
                    gp.accuracy.mean, gp.accuracy.std, sup.accuracy.mean, sup.accuracy.std)};
}

Outcome transfer() {
  std::vector<std::string> names{"d1", "d2", "d3", "d4", "d5", "d6", "d7"};
  std::vector<double> sup{0.6, 0.6, 0.6, 0.6, 0.6, 0.6, 0.6};
  std::vector<double> cand{0.5, 0.7, 0.55, 0.8, 0.59, 0.65, 0.9};
  auto r = eval::transfer_table(names, sup, cand);
  const auto shown = eval::format_rate(r.negative_rate);
  return {r.down == 3 && r.negative_rate == 3.0 / 7.0 && shown == "43.0%",
          fmt("3 of 7 datasets below supervised: rate %.6f displayed as %s", r.negative_rate, shown.c_str())};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  const auto root = fs::temp_directory_path() / ("gpb_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  auto cfg = bench::config_from_json({{"dataset", "synth:two_blobs"},
                                      {"methods", {"supervised", "finetune", "gppt", "gprompt", "allinone", "gpf", "gpfplus"}},
                                      {"pretexts", {"graphcl", "graphmae"}},
                                      {"pretrain", {{"epochs", 50}}},
                                      {"prompt", {{"epochs", 50}}},
                                      {"train", {{"epochs", 50}}},
                                      {"record_wall_clock", false}});
  cfg.output_dir = root / "first";
  auto first = bench::run_experiment(cfg, 1);
  cfg.output_dir = root / "second";
  bench::run_experiment(cfg, 2);
  const auto a = slurp(root / "first" / "results.csv"), b = slurp(root / "second" / "results.csv");
  const auto sa = slurp(root / "first" / "summary.json"), sb = slurp(root / "second" / "summary.json");
  fs::remove_all(root);
  return {!a.empty() && a == b && sa == sb,
          fmt("%zu rows (7 pipelines, 2 pretexts, 5 seeds), run twice with 1 and 2 workers: results.csv %s, "
              "summary.json %s",
              first.rows.size(), a == b ? "identical" : "DIFFERENT", sa == sb ? "identical" : "DIFFERENT")};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "gradient correctness", 60, gradients},
      {2, "unified-view identities", 5, identities},
      {3, "frozen-encoder contract", 30, frozen},
      {4, "metric oracles", 10, metrics},
      {5, "k-shot protocol", 5, kshot},
      {6, "flexibility probe", 300, flexibility},
      {7, "parameter accounting", 1, parameters},
      {8, "end-to-end directional check", 180, end_to_end},
      {9, "negative-transfer arithmetic", 1, transfer},
      {10, "determinism", 180, determinism},
  };
  int passed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = s < c.limit_s;
    const bool ok = o.pass && in_time;
    passed += ok;
    std::printf("%s criterion %d (%s): %s [%.2f s, limit %.0f s%s]\n", ok ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), s, c.limit_s, in_time ? "" : ", TOO SLOW");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", passed, criteria.size());
  return passed == int(criteria.size()) ? 0 : 1;
}
