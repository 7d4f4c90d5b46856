#include "gpb/probe/flexibility.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <ostream>

#include "gpb/ad/ops.hpp"
#include "gpb/ad/optim.hpp"
#include "gpb/error.hpp"
#include "gpb/graph/synth.hpp"
#include "gpb/random.hpp"
#include "gpb/text.hpp"

namespace gpb::probe {

namespace {

Matrix pooled(const model::PretrainedEncoder& enc, const Graph& g) {
  return model::readout_mean(Tensor::constant(enc.embed(g))).value();
}

double distance(const Matrix& a, const Matrix& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    const double d = a(0, j) - b(0, j);
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

double embed_distance(const model::PretrainedEncoder& enc, const Graph& a, const Graph& b) {
  if (a.feature_dim() != b.feature_dim())
    throw DimensionError("embed_distance: feature widths " + std::to_string(a.feature_dim()) + " and " +
                         std::to_string(b.feature_dim()) + " differ");
  return distance(pooled(enc, a), pooled(enc, b));
}

void FitConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw ConfigError("fit: learning_rate must be positive");
  if (num_tokens == 0 || basis_count == 0) throw ConfigError("fit: num_tokens and basis_count must be >= 1");
  if (!(link_threshold > 0.0 && link_threshold < 1.0)) throw ConfigError("fit: link_threshold must lie in (0, 1)");
}

FitResult fit_prompt_to_target(prompt::Method method, const model::PretrainedEncoder& enc, const Graph& g,
                               const Matrix& target, const FitConfig& cfg) {
  cfg.validate();
  if (method == prompt::Method::gppt)
    throw InvalidArgument("GPPT defines no graph transformation and cannot be fitted to a target");
  if (target.rows() != 1 || target.cols() != enc.config().hidden_dim)
    throw DimensionError("target must be 1x" + std::to_string(enc.config().hidden_dim) + ", got " +
                         std::to_string(target.rows()) + "x" + std::to_string(target.cols()));
  prompt::PromptRunConfig pc;
  pc.method = method;
  pc.num_tokens = cfg.num_tokens;
  pc.basis_count = cfg.basis_count;
  pc.link_threshold = cfg.link_threshold;
  pc.seed = cfg.seed;
  Rng rng(derive_seed(cfg.seed, "flex-init"));
  auto module = prompt::init_prompt(pc, g.feature_dim(), enc.config().hidden_dim, rng);
  ad::Optimizer opt(module.parameters(), {.learning_rate = cfg.learning_rate});
  const auto goal = Tensor::constant(target);

  FitResult result;
  for (std::size_t epoch = 0;; ++epoch) {
    opt.zero_grad();
    auto loss = ad::squared_norm(ad::sub(prompt::prompted_embedding(module, enc, g), goal));
    const double err = std::sqrt(loss.value()(0, 0));
    if (!std::isfinite(err)) throw NonFiniteError("flexibility fit diverged at epoch " + std::to_string(epoch));
    result.error_trace.push_back(err);
    if (epoch == 0 || err < result.final_error) {
      result.final_error = err;
      result.best_epoch = epoch;
    }
    if (epoch == cfg.epochs) break;
    loss.backward();
    opt.step();
  }
  result.initial_error = result.error_trace.front();
  return result;
}

void FlexibilityConfig::validate() const {
  fit.validate();
  if (!(fraction >= 0.0 && fraction < 1.0)) throw ConfigError("flexibility: fraction must lie in [0, 1)");
  if (methods.empty() || manipulations.empty()) throw ConfigError("flexibility: methods and manipulations must be non-empty");
  for (auto m : methods)
    if (m == prompt::Method::gppt) throw ConfigError("flexibility: GPPT has no graph transformation to probe");
}

double red_percent(std::span<const double> ori, std::span<const double> final) {
  if (ori.size() != final.size() || ori.empty()) throw InvalidArgument("red_percent: need matched non-empty lists");
  double so = 0.0, sf = 0.0;
  for (double v : ori) so += v;
  for (double v : final) sf += v;
  so /= double(ori.size());
  sf /= double(final.size());
  if (!(so > 0.0)) throw InvalidArgument("red_percent: mean original error is 0");
  return 100.0 * (1.0 - sf / so);
}

ErrorBoundReport run_flexibility(const model::PretrainedEncoder& enc, const Graph& g,
                                 const FlexibilityConfig& cfg) {
  cfg.validate();
  ErrorBoundReport report;
  std::vector<Matrix> targets;
  for (std::size_t i = 0; i < cfg.manipulations.size(); ++i) {
    const auto kind = cfg.manipulations[i];
    auto manipulated = graph::apply_manipulation(g, {kind, cfg.fraction, derive_seed(cfg.seed, i)});
    ManipulationRow row{kind, embed_distance(enc, g, manipulated), false};
    row.skipped = row.ori_error == 0.0;
    report.manipulations.push_back(row);
    targets.push_back(pooled(enc, manipulated));
  }
  for (auto method : cfg.methods) {
    std::vector<double> ori, fin;
    for (std::size_t i = 0; i < cfg.manipulations.size(); ++i) {
      if (report.manipulations[i].skipped) continue;
      auto fit = fit_prompt_to_target(method, enc, g, targets[i], cfg.fit);
      report.fits.push_back({method, cfg.manipulations[i], fit.final_error});
      ori.push_back(report.manipulations[i].ori_error);
      fin.push_back(fit.final_error);
    }
    if (!ori.empty()) report.red.push_back({method, red_percent(ori, fin)});
  }
  return report;
}

double ErrorBoundReport::ori_error(graph::ManipulationKind kind) const {
  for (const auto& r : manipulations)
    if (r.kind == kind) return r.ori_error;
  throw InvalidArgument("no such manipulation in report: " + graph::to_string(kind));
}

double ErrorBoundReport::final_error(prompt::Method method, graph::ManipulationKind kind) const {
  for (const auto& f : fits)
    if (f.method == method && f.kind == kind) return f.final_error;
  throw InvalidArgument("no fit for " + prompt::to_string(method) + " on " + graph::to_string(kind));
}

double ErrorBoundReport::red_percent(prompt::Method method) const {
  for (const auto& r : red)
    if (r.method == method) return r.red_percent;
  throw InvalidArgument("no RED% for " + prompt::to_string(method));
}

void write_csv(std::ostream& out, const ErrorBoundReport& report) {
  out << "manipulation,ori_error,method,final_error,red_percent\n";
  for (const auto& f : report.fits) {
    out << graph::to_string(f.kind) << ',' << format_double(report.ori_error(f.kind)) << ','
        << prompt::to_string(f.method) << ',' << format_double(f.final_error) << ','
        << format_double(report.red_percent(f.method)) << '\n';
  }
}

Graph probe_graph(std::uint64_t seed) {
  graph::SbmOptions opt;
  opt.nodes_per_class = 10;
  opt.num_classes = 3;
  opt.seed = seed;
  return graph::homophilic_sbm(opt).graphs.front();
}

}  // namespace gpb::probe
