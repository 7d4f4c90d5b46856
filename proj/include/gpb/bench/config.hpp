#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "gpb/eval/harness.hpp"
#include "gpb/eval/search.hpp"
#include "gpb/graph/graph.hpp"
#include "gpb/pretrain/pretext.hpp"
#include "gpb/prompt/prompt.hpp"

namespace gpb::bench {

// "synth:<recipe>" with optional generator params, or "bundle:<dir>".
// Recipes: two_blobs, homophilic_sbm, heterophilic_sbm, motifs.
struct DatasetSpec {
  std::string source = "synth";
  std::string name = "two_blobs";
  nlohmann::json params = nlohmann::json::object();

  std::string label() const;  // "synth:two_blobs", "bundle:<dir>"
  void validate() const;
};

DatasetSpec parse_dataset_spec(const std::string& text);
graph::Dataset load_dataset(const DatasetSpec& spec);

// Pipeline names accepted in "methods": the five prompt methods plus
// "supervised" and "finetune".
bool is_prompt_method(const std::string& name);
bool needs_encoder(const std::string& name);

struct ExperimentConfig {
  DatasetSpec dataset;
  std::size_t k = 1;
  std::size_t seeds = 5;
  std::uint64_t root_seed = 0;
  std::vector<std::string> methods{"supervised", "gpf"};
  std::vector<pretrain::Pretext> pretexts{pretrain::Pretext::graphcl};
  model::BackboneConfig backbone;  // input_dim ignored, taken from the data
  pretrain::PretextConfig pretrain;   // method and seed are per-run
  prompt::PromptRunConfig prompt;     // method and seed are per-run
  eval::TrainConfig train;            // seed is per-run
  std::size_t search_trials = 0;      // 0 disables random search
  eval::SearchSpace search;
  bool record_wall_clock = true;      // false writes wall_ms = 0
  std::filesystem::path output_dir = "runs";

  // Throws ConfigError for anything the pipeline would reject later.
  void validate() const;
};

// Unknown keys and wrong types are ConfigErrors naming the offending path.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);
// Throws MissingFileError when the file is absent, ConfigError when it does
// not parse or validate.
ExperimentConfig load_config(const std::filesystem::path& path);

// Hash of the canonical JSON form; output_dir does not take part.
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::uint64_t config_hash(const pretrain::PretextConfig& cfg);
std::uint64_t config_hash(const prompt::PromptRunConfig& cfg);

}  // namespace gpb::bench
