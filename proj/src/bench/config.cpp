#include "gpb/bench/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "gpb/bench/checkpoint.hpp"
#include "gpb/error.hpp"
#include "gpb/graph/bundle.hpp"
#include "gpb/graph/synth.hpp"

namespace gpb::bench {

using nlohmann::json;

namespace {

// Reads an object field by field and rejects whatever is left unread.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  template <class T>
  void opt(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + " has the wrong type");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ConfigError("unknown key " + where(key));
  }

  std::string where(const std::string& key = "") const {
    const std::string p = key.empty() ? path_ : path_.empty() ? key : path_ + "." + key;
    return p.empty() ? "<root>" : p;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class F>
auto as_config_error(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

graph::BlobsOptions blobs_options(const json& p) {
  graph::BlobsOptions o;
  Reader r(p, "dataset.params");
  r.opt("num_nodes", o.num_nodes);
  r.opt("feature_dim", o.feature_dim);
  r.opt("separation", o.separation);
  r.opt("num_classes", o.num_classes);
  r.opt("p_in", o.p_in);
  r.opt("p_out", o.p_out);
  r.opt("seed", o.seed);
  r.finish();
  return o;
}

graph::SbmOptions sbm_options(const json& p, graph::SbmOptions o) {
  Reader r(p, "dataset.params");
  r.opt("nodes_per_class", o.nodes_per_class);
  r.opt("num_classes", o.num_classes);
  r.opt("feature_dim", o.feature_dim);
  r.opt("p_in", o.p_in);
  r.opt("p_out", o.p_out);
  r.opt("feature_signal", o.feature_signal);
  r.opt("seed", o.seed);
  r.finish();
  return o;
}

graph::MotifOptions motif_options(const json& p) {
  graph::MotifOptions o;
  Reader r(p, "dataset.params");
  std::vector<std::string> classes;
  r.opt("classes", classes);
  if (!classes.empty()) {
    o.classes.clear();
    for (const auto& c : classes) o.classes.push_back(as_config_error("dataset.params.classes", [&] { return graph::parse_motif(c); }));
  }
  r.opt("num_graphs", o.num_graphs);
  r.opt("min_nodes", o.min_nodes);
  r.opt("max_nodes", o.max_nodes);
  r.opt("extra_edge_prob", o.extra_edge_prob);
  r.opt("seed", o.seed);
  r.finish();
  return o;
}

const std::vector<std::string>& recipes() {
  static const std::vector<std::string> names{"two_blobs", "homophilic_sbm", "heterophilic_sbm", "motifs"};
  return names;
}

json backbone_json(const model::BackboneConfig& b) {
  return {{"hidden_dim", b.hidden_dim}, {"num_layers", b.num_layers}};
}

json pretrain_json(const pretrain::PretextConfig& p) {
  json augs = json::array();
  for (auto a : p.augmentations) augs.push_back(graph::to_string(a));
  return {{"epochs", p.epochs},
          {"learning_rate", p.learning_rate},
          {"weight_decay", p.weight_decay},
          {"temperature", p.temperature},
          {"mask_rate", p.mask_rate},
          {"cosine_power", p.cosine_power},
          {"perturb_scale", p.perturb_scale},
          {"augmentations", augs},
          {"augment_rate", p.augment_rate},
          {"neg_ratio", p.neg_ratio},
          {"hops", p.hops},
          {"batch_size", p.batch_size}};
}

void read_pretrain(const json& j, pretrain::PretextConfig& p) {
  Reader r(j, "pretrain");
  r.opt("epochs", p.epochs);
  r.opt("learning_rate", p.learning_rate);
  r.opt("weight_decay", p.weight_decay);
  r.opt("temperature", p.temperature);
  r.opt("mask_rate", p.mask_rate);
  r.opt("cosine_power", p.cosine_power);
  r.opt("perturb_scale", p.perturb_scale);
  if (const json* a = r.child("augmentations")) {
    if (!a->is_array()) throw ConfigError("pretrain.augmentations must be a list");
    p.augmentations.clear();
    for (const auto& name : *a) {
      if (!name.is_string()) throw ConfigError("pretrain.augmentations entries must be strings");
      p.augmentations.push_back(as_config_error("pretrain.augmentations", [&] { return graph::parse_manipulation(name.get<std::string>()); }));
    }
  }
  r.opt("augment_rate", p.augment_rate);
  r.opt("neg_ratio", p.neg_ratio);
  r.opt("hops", p.hops);
  r.opt("batch_size", p.batch_size);
  r.finish();
}

json prompt_json(const prompt::PromptRunConfig& p) {
  return {{"num_tokens", p.num_tokens},       {"basis_count", p.basis_count},
          {"link_threshold", p.link_threshold}, {"hops", p.hops},
          {"epochs", p.epochs},               {"learning_rate", p.learning_rate},
          {"weight_decay", p.weight_decay},   {"batch_size", p.batch_size},
          {"temperature", p.temperature},     {"centers_per_class", p.centers_per_class},
          {"gppt_recluster", p.gppt_recluster}};
}

void read_prompt(const json& j, prompt::PromptRunConfig& p) {
  Reader r(j, "prompt");
  r.opt("num_tokens", p.num_tokens);
  r.opt("basis_count", p.basis_count);
  r.opt("link_threshold", p.link_threshold);
  r.opt("hops", p.hops);
  r.opt("epochs", p.epochs);
  r.opt("learning_rate", p.learning_rate);
  r.opt("weight_decay", p.weight_decay);
  r.opt("batch_size", p.batch_size);
  r.opt("temperature", p.temperature);
  r.opt("centers_per_class", p.centers_per_class);
  r.opt("gppt_recluster", p.gppt_recluster);
  r.finish();
}

json train_json(const eval::TrainConfig& t) {
  return {{"epochs", t.epochs},
          {"patience", t.patience},
          {"learning_rate", t.learning_rate},
          {"weight_decay", t.weight_decay},
          {"batch_size", t.batch_size}};
}

void read_train(const json& j, eval::TrainConfig& t) {
  Reader r(j, "train");
  r.opt("epochs", t.epochs);
  r.opt("patience", t.patience);
  r.opt("learning_rate", t.learning_rate);
  r.opt("weight_decay", t.weight_decay);
  r.opt("batch_size", t.batch_size);
  r.finish();
}

json search_json(std::size_t trials, const eval::SearchSpace& s) {
  return {{"trials", trials},       {"log_lr_lo", s.log_lr_lo}, {"log_lr_hi", s.log_lr_hi},
          {"log_wd_lo", s.log_wd_lo}, {"log_wd_hi", s.log_wd_hi}, {"batch_sizes", s.batch_sizes}};
}

void read_search(const json& j, std::size_t& trials, eval::SearchSpace& s) {
  Reader r(j, "search");
  r.opt("trials", trials);
  r.opt("log_lr_lo", s.log_lr_lo);
  r.opt("log_lr_hi", s.log_lr_hi);
  r.opt("log_wd_lo", s.log_wd_lo);
  r.opt("log_wd_hi", s.log_wd_hi);
  r.opt("batch_sizes", s.batch_sizes);
  r.finish();
}

}  // namespace

std::string DatasetSpec::label() const { return source + ":" + name; }

void DatasetSpec::validate() const {
  if (source == "bundle") {
    if (!std::filesystem::is_directory(name)) throw ConfigError("dataset bundle directory not found: " + name);
    if (!params.empty()) throw ConfigError("dataset.params applies to synthetic datasets only");
    return;
  }
  if (source != "synth") throw ConfigError("dataset source must be 'synth' or 'bundle', got '" + source + "'");
  if (std::find(recipes().begin(), recipes().end(), name) == recipes().end())
    throw ConfigError("unknown synthetic dataset '" + name + "'");
  // parsing the params checks names and types; generating checks ranges
  as_config_error("dataset", [&] {
    load_dataset(*this);
    return 0;
  });
}

DatasetSpec parse_dataset_spec(const std::string& text) {
  DatasetSpec spec;
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    spec.source = "bundle";
    spec.name = text;
  } else {
    spec.source = text.substr(0, colon);
    spec.name = text.substr(colon + 1);
  }
  if (spec.name.empty()) throw ConfigError("empty dataset name in '" + text + "'");
  if (spec.source != "synth" && spec.source != "bundle")
    throw ConfigError("dataset must look like synth:<recipe> or bundle:<dir>, got '" + text + "'");
  return spec;
}

graph::Dataset load_dataset(const DatasetSpec& spec) {
  if (spec.source == "bundle") return graph::load_bundle(spec.name);
  const json& p = spec.params.is_null() ? json::object() : spec.params;
  graph::Dataset ds;
  if (spec.name == "two_blobs") ds = graph::two_blobs_node(blobs_options(p));
  else if (spec.name == "homophilic_sbm") ds = graph::homophilic_sbm(sbm_options(p, {}));
  else if (spec.name == "heterophilic_sbm") ds = graph::heterophilic_sbm(sbm_options(p, graph::heterophilic_defaults()));
  else if (spec.name == "motifs") ds = graph::motif_graphs(motif_options(p));
  else throw ConfigError("unknown synthetic dataset '" + spec.name + "'");
  return ds;
}

bool is_prompt_method(const std::string& name) {
  const auto all = prompt::all_methods();
  return std::any_of(all.begin(), all.end(), [&](prompt::Method m) { return prompt::to_string(m) == name; });
}

bool needs_encoder(const std::string& name) { return name == "finetune" || is_prompt_method(name); }

void ExperimentConfig::validate() const {
  dataset.validate();
  if (k == 0) throw ConfigError("k must be >= 1");
  if (seeds == 0) throw ConfigError("seeds must be >= 1");
  if (methods.empty()) throw ConfigError("methods must list at least one pipeline");
  std::set<std::string> seen;
  for (const auto& m : methods) {
    if (m != "supervised" && !needs_encoder(m)) throw ConfigError("unknown method '" + m + "'");
    if (!seen.insert(m).second) throw ConfigError("method '" + m + "' listed twice");
  }
  const bool any_encoder = std::any_of(methods.begin(), methods.end(), needs_encoder);
  if (any_encoder && pretexts.empty()) throw ConfigError("pretexts must be non-empty for finetune or prompt methods");
  std::set<pretrain::Pretext> unique(pretexts.begin(), pretexts.end());
  if (unique.size() != pretexts.size()) throw ConfigError("pretexts contain duplicates");
  as_config_error("backbone", [&] {
    auto b = backbone;
    b.input_dim = 1;
    b.validate();
    return 0;
  });
  as_config_error("pretrain", [&] {
    pretrain.validate();
    return 0;
  });
  as_config_error("prompt", [&] {
    prompt.validate();
    return 0;
  });
  as_config_error("train", [&] {
    train.validate();
    return 0;
  });
  if (search_trials > 0)
    as_config_error("search", [&] {
      search.validate();
      return 0;
    });
  if (output_dir.empty()) throw ConfigError("output_dir must be set");
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  Reader r(j, "");
  if (const json* d = r.child("dataset")) {
    if (d->is_string()) {
      cfg.dataset = parse_dataset_spec(d->get<std::string>());
    } else {
      Reader rd(*d, "dataset");
      std::string spec;
      rd.opt("spec", spec);
      if (spec.empty()) throw ConfigError("dataset.spec is required");
      cfg.dataset = parse_dataset_spec(spec);
      if (const json* p = rd.child("params")) {
        if (!p->is_object()) throw ConfigError("dataset.params must be an object");
        cfg.dataset.params = *p;
      }
      rd.finish();
    }
  }
  r.opt("k", cfg.k);
  r.opt("seeds", cfg.seeds);
  r.opt("root_seed", cfg.root_seed);
  r.opt("methods", cfg.methods);
  std::vector<std::string> pretexts;
  if (j.contains("pretexts")) {
    r.opt("pretexts", pretexts);
    cfg.pretexts.clear();
    for (const auto& p : pretexts)
      cfg.pretexts.push_back(as_config_error("pretexts", [&] { return pretrain::parse_pretext(p); }));
  } else {
    r.child("pretexts");
  }
  if (const json* b = r.child("backbone")) {
    Reader rb(*b, "backbone");
    rb.opt("hidden_dim", cfg.backbone.hidden_dim);
    rb.opt("num_layers", cfg.backbone.num_layers);
    rb.finish();
  }
  if (const json* p = r.child("pretrain")) read_pretrain(*p, cfg.pretrain);
  if (const json* p = r.child("prompt")) read_prompt(*p, cfg.prompt);
  if (const json* t = r.child("train")) read_train(*t, cfg.train);
  if (const json* s = r.child("search")) read_search(*s, cfg.search_trials, cfg.search);
  r.opt("record_wall_clock", cfg.record_wall_clock);
  std::string out = cfg.output_dir.string();
  r.opt("output_dir", out);
  cfg.output_dir = out;
  r.finish();
  cfg.pretrain.backbone = cfg.backbone;
  cfg.train.backbone = cfg.backbone;
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  json pretexts = json::array();
  for (auto p : cfg.pretexts) pretexts.push_back(pretrain::to_string(p));
  json dataset = {{"spec", cfg.dataset.label()}};
  if (!cfg.dataset.params.empty()) dataset["params"] = cfg.dataset.params;
  return {{"dataset", dataset},
          {"k", cfg.k},
          {"seeds", cfg.seeds},
          {"root_seed", cfg.root_seed},
          {"methods", cfg.methods},
          {"pretexts", pretexts},
          {"backbone", backbone_json(cfg.backbone)},
          {"pretrain", pretrain_json(cfg.pretrain)},
          {"prompt", prompt_json(cfg.prompt)},
          {"train", train_json(cfg.train)},
          {"search", search_json(cfg.search_trials, cfg.search)},
          {"record_wall_clock", cfg.record_wall_clock},
          {"output_dir", cfg.output_dir.string()}};
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFileError("config not found: " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  auto cfg = config_from_json(j);
  cfg.validate();
  return cfg;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  auto j = to_json(cfg);
  j.erase("output_dir");
  return fnv1a(j.dump());
}

std::uint64_t config_hash(const pretrain::PretextConfig& cfg) {
  auto j = pretrain_json(cfg);
  j["method"] = pretrain::to_string(cfg.method);
  j["seed"] = cfg.seed;
  j["backbone"] = backbone_json(cfg.backbone);
  return fnv1a(j.dump());
}

std::uint64_t config_hash(const prompt::PromptRunConfig& cfg) {
  auto j = prompt_json(cfg);
  j["method"] = prompt::to_string(cfg.method);
  j["seed"] = cfg.seed;
  return fnv1a(j.dump());
}

}  // namespace gpb::bench
