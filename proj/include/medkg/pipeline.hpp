// Copyright 2026 The medkg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "medkg/corpus.hpp"
#include "medkg/eval.hpp"
#include "medkg/linkpred.hpp"
#include "medkg/llm.hpp"
#include "medkg/preprocess.hpp"
#include "medkg/relmodel.hpp"
#include "medkg/stats.hpp"
#include "medkg/tensor.hpp"
#include "medkg/topics.hpp"

namespace medkg {

inline constexpr const char* kVersion = "0.1.0";

struct RemoteEndpoints {
  std::string llm_url;
  std::string llm_model;
  std::string embedding_url;
  std::string embedding_model;
  std::string literature_url;
};

// Resolved run configuration. Relative paths in the JSON file are resolved
// against the file's directory.
struct PipelineConfig {
  std::filesystem::path corpus;
  std::optional<std::filesystem::path> stopwords;
  TextFields fields = TextFields::kBoth;
  std::vector<std::string> keywords;
  std::optional<std::filesystem::path> exclusions;

  // Remote literature search replaces the corpus file when set.
  std::optional<std::string> literature_query;
  int year_from = 2000;
  int year_to = 2100;

  std::string extractor = "deterministic";  // deterministic | remote
  std::filesystem::path gazetteer;
  std::filesystem::path patterns;

  std::string embedding = "hashing";  // hashing | remote
  std::size_t embedding_dim = 64;

  RemoteEndpoints remote;

  CooccurrenceWindow window = CooccurrenceWindow::kSentence;
  double smoothing_alpha = 0.01;
  double epsilon = 1e-9;

  LdaConfig lda;
  EmConfig em;
  CpConfig cp;

  double w_model = 0.7;
  double w_tensor = 0.3;
  double tau = 0.5;

  std::string judge = "none";  // none | recorded | remote
  std::optional<std::filesystem::path> judge_responses;
  std::optional<std::filesystem::path> prompts;
  std::size_t sample_size = 100;
  std::optional<std::filesystem::path> gold_triples;
  std::optional<std::filesystem::path> ratings;

  bool linkpred = true;
  std::optional<std::filesystem::path> linkpred_dataset;
  std::vector<ModelKind> linkpred_models = {ModelKind::kTransE};
  ModelConfig model;

  std::uint64_t seed = 1;
  bool offline = true;

  // The configuration as written (paths unresolved), echoed into reports.
  std::string echo;

  // Seeds every stochastic module from `seed`.
  void apply_seed(std::uint64_t s);
  void set_offline(bool value);
  // Checks weights, ranges, the offline guard and that every referenced
  // path exists. Throws ConfigError.
  void validate() const;
};

PipelineConfig parse_config(const std::string& json_text,
                            const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

// FNV-1a hash of the config echo, as 16 hex digits.
std::string config_hash(const PipelineConfig& config);

// Factories for network-backed ports. Unset factories make the matching
// "remote" options fail at stage time.
struct Services {
  std::function<std::unique_ptr<LlmClient>(const RemoteEndpoints&)> llm;
  std::function<std::unique_ptr<EmbeddingProvider>(const RemoteEndpoints&)>
      embedding;
  std::function<std::unique_ptr<LiteratureClient>(const RemoteEndpoints&)>
      literature;
};

enum class Stage {
  kIngest,
  kExtract,
  kFitLda,
  kFitEm,
  kFitCp,
  kBuildGraph,
  kEval,
  kLinkpred,
};
std::string_view to_string(Stage s);
const std::vector<Stage>& pipeline_stages();

// Runs one stage reading and writing artifacts in `run_dir`. A missing
// input artifact raises StageError naming the file and the stage that
// produces it; any other failure is wrapped in StageError.
void run_stage(Stage stage, const PipelineConfig& config,
               const std::filesystem::path& run_dir,
               const Services& services = {});

// Validates the config, then runs every stage in order and writes
// manifest.json.
void run_pipeline(const PipelineConfig& config,
                  const std::filesystem::path& run_dir,
                  const Services& services = {});

void write_manifest(const PipelineConfig& config,
                    const std::filesystem::path& run_dir,
                    const std::vector<Stage>& stages);

// Candidate confidence: w_model * posterior(best) + w_tensor * score.
double combine_confidence(double w_model, double posterior, double w_tensor,
                          double tensor_score);

// Copies the run's graph to `to` in `format`.
void export_run_graph(const std::filesystem::path& run_dir,
                      const std::filesystem::path& to, GraphFormat format);

}  // namespace medkg
