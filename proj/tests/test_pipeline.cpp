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

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "medkg/error.hpp"
#include "medkg/pipeline.hpp"

namespace fs = std::filesystem;
using namespace medkg;

namespace {

const fs::path kData = MEDKG_DATA_DIR;
const fs::path kConfig = kData / "config" / "offline.json";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MEDKG_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Pipeline, LoadsOfflineConfig) {
  const PipelineConfig c = load_config(kConfig);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_TRUE(c.offline);
  EXPECT_TRUE(fs::exists(c.corpus));
  EXPECT_EQ(c.lda.num_topics, 4u);
  EXPECT_EQ(c.cp.rank, 4u);
  EXPECT_EQ(c.judge, "recorded");
  EXPECT_EQ(c.sample_size, 60u);
  EXPECT_EQ(c.linkpred_models,
            (std::vector<ModelKind>{ModelKind::kTransE, ModelKind::kDistMult}));
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(config_hash(c).size(), 16u);
  EXPECT_EQ(config_hash(c), config_hash(load_config(kConfig)));

  PipelineConfig reseeded = c;
  reseeded.apply_seed(8);
  EXPECT_NE(config_hash(reseeded), config_hash(c));
}

TEST(Pipeline, RejectsBadConfigs) {
  const fs::path base = kData / "config";
  EXPECT_THROW(parse_config("{not json", base), ConfigError);
  EXPECT_THROW(parse_config(R"({"graph": {"tua": 0.5}})", base), ConfigError);
  EXPECT_THROW(load_config(base / "missing.json"), ConfigError);

  PipelineConfig c = load_config(kConfig);
  c.w_model = 0.9;
  EXPECT_THROW(c.validate(), ConfigError);
  c = load_config(kConfig);
  c.tau = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = load_config(kConfig);
  c.gazetteer = base / "nope.tsv";
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Pipeline, OfflineGuardBlocksRemoteEndpoints) {
  PipelineConfig c = load_config(kConfig);
  c.extractor = "remote";
  try {
    c.validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("extractor"), std::string::npos);
  }
  c.set_offline(false);
  EXPECT_NO_THROW(c.validate());

  c = load_config(kConfig);
  c.judge = "remote";
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Pipeline, MissingArtifactNamesProducer) {
  const PipelineConfig c = load_config(kConfig);
  const fs::path dir = fresh_dir("medkg_pipeline_missing");
  try {
    run_stage(Stage::kExtract, c, dir);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "extract");
    EXPECT_NE(std::string(e.what()).find("ingest"), std::string::npos);
  }
  fs::remove_all(dir);
}

TEST(Pipeline, RemoteExtractorWithoutServiceFailsAtStage) {
  PipelineConfig c = load_config(kConfig);
  c.extractor = "remote";
  c.set_offline(false);
  const fs::path dir = fresh_dir("medkg_pipeline_remote");
  run_stage(Stage::kIngest, c, dir);
  EXPECT_THROW(run_stage(Stage::kExtract, c, dir), StageError);
  fs::remove_all(dir);
}

TEST(Pipeline, RunMatchesGoldenAndIsDeterministic) {
  const PipelineConfig c = load_config(kConfig);
  const fs::path a = fresh_dir("medkg_pipeline_a");
  const fs::path b = fresh_dir("medkg_pipeline_b");
  run_pipeline(c, a);
  run_pipeline(c, b);
  for (const char* f : {"graph.graphml", "graph.jsonl", "graph.tsv", "graph_stats.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(kData / "golden" / f)) << f;
  }
  for (const char* f : {"eval_report.json", "weights.tsv", "cp_A.tsv", "linkpred_report.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const std::string manifest = slurp(a / "manifest.json");
  EXPECT_NE(manifest.find(config_hash(c)), std::string::npos);
  EXPECT_NE(manifest.find("\"linkpred\""), std::string::npos);

  const fs::path out = a / "exported.jsonl";
  export_run_graph(a, out, GraphFormat::kJsonl);
  EXPECT_EQ(slurp(out), slurp(kData / "golden" / "graph.jsonl"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Pipeline, CombineConfidence) {
  EXPECT_DOUBLE_EQ(combine_confidence(0.7, 0.8, 0.3, 0.5), 0.71);
  EXPECT_DOUBLE_EQ(combine_confidence(1.0, 0.4, 0.0, 0.9), 0.4);
  EXPECT_EQ(pipeline_stages().size(), 8u);
  EXPECT_EQ(to_string(Stage::kBuildGraph), "build-graph");
}

TEST(Cli, ExitCodes) {
  const fs::path dir = fresh_dir("medkg_cli_run");
  const std::string common = "--config " + kConfig.string() + " --out " + dir.string();
  EXPECT_NE(run_cli("frobnicate " + common), 0);
  EXPECT_NE(run_cli("run --out " + dir.string()), 0);
  EXPECT_NE(run_cli("run --config " + (kData / "missing.json").string() + " --out " + dir.string()), 0);
  EXPECT_NE(run_cli("fit-em " + common), 0);
  EXPECT_EQ(run_cli("ingest " + common), 0);
  EXPECT_TRUE(fs::exists(dir / "corpus.jsonl"));
  EXPECT_EQ(run_cli("run " + common), 0);
  EXPECT_EQ(run_cli("export --format tsv --to " + (dir / "g.tsv").string() + " " + common), 0);
  EXPECT_EQ(slurp(dir / "g.tsv"), slurp(kData / "golden" / "graph.tsv"));
  fs::remove_all(dir);
}
