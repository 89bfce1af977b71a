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

// medkg: build a typed biomedical knowledge graph from abstracts.
//
//   medkg run --config cfg.json --out runs/a
//   medkg fit-cp --config cfg.json --out runs/a --rank 4
//   medkg export --config cfg.json --out runs/a --format tsv --to graph.tsv
//
// Exit codes: 0 success, 1 usage or config error, 2 stage failure.

#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "medkg/error.hpp"
#include "medkg/graph.hpp"
#include "medkg/pipeline.hpp"
#include "medkg/remote.hpp"

namespace {

struct Options {
  std::string config;
  std::string out;
  bool offline = false;
  std::optional<std::uint64_t> seed;

  std::optional<double> tau;
  std::optional<std::size_t> rank;
  std::optional<std::size_t> topics;
  std::string dataset;
  std::vector<std::string> models;
  std::string format = "graphml";
  std::string to;
};

medkg::PipelineConfig resolve(const Options& o, const std::string& subcommand) {
  medkg::PipelineConfig c = medkg::load_config(o.config);
  if (o.offline) c.set_offline(true);
  if (o.seed) c.apply_seed(*o.seed);
  if (o.tau) c.tau = *o.tau;
  if (o.rank) c.cp.rank = *o.rank;
  if (o.topics) c.lda.num_topics = *o.topics;
  if (!o.dataset.empty()) c.linkpred_dataset = o.dataset;
  if (!o.models.empty()) {
    c.linkpred_models.clear();
    for (const auto& m : o.models) c.linkpred_models.push_back(medkg::parse_model_kind(m));
  }
  if (subcommand == "linkpred") c.linkpred = true;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Build and evaluate a typed biomedical knowledge graph."};
  app.require_subcommand(1, 1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "JSON run configuration")->required();
  app.add_option("--out", o.out, "run directory for artifacts")->required();
  app.add_flag("--offline", o.offline, "forbid every remote endpoint");
  app.add_option("--seed", o.seed, "override the configured seed");

  const std::map<std::string, std::string> stage_help = {
      {"ingest", "load, filter and clean the corpus"},
      {"extract", "extract typed mentions and candidate triples"},
      {"fit-lda", "fit the topic model"},
      {"fit-em", "compute statistics and features, fit the relation model"},
      {"fit-cp", "build the data tensor and fit its CP decomposition"},
      {"build-graph", "score candidates and build the graph"},
      {"eval", "run metrics and judge protocols on the graph"},
      {"linkpred", "train and evaluate link prediction models"},
  };
  std::map<std::string, CLI::App*> subs;
  subs["run"] = app.add_subcommand("run", "run every stage in order");
  for (const auto& [name, help] : stage_help) subs[name] = app.add_subcommand(name, help);
  subs["build-graph"]->add_option("--tau", o.tau, "acceptance threshold");
  subs["fit-cp"]->add_option("--rank", o.rank, "CP rank");
  subs["fit-lda"]->add_option("--topics", o.topics, "number of topics");
  subs["linkpred"]->add_option("--dataset", o.dataset,
                               "directory with train/valid/test TSV splits");
  subs["linkpred"]->add_option("--model", o.models,
                               "transe, distmult, complex or rotate (repeatable)");
  auto* exp = app.add_subcommand("export", "write the run's graph in another format");
  exp->add_option("--format", o.format, "graphml, jsonl or tsv")
      ->check(CLI::IsMember({"graphml", "jsonl", "tsv"}));
  exp->add_option("--to", o.to, "output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  medkg::PipelineConfig config;
  try {
    config = resolve(o, cmd);
  } catch (const medkg::Error& e) {
    std::cerr << "medkg: " << e.what() << "\n";
    return 1;
  }

  const medkg::Services services = medkg::make_http_services(config.embedding_dim);
  try {
    if (cmd == "run") {
      medkg::run_pipeline(config, o.out, services);
    } else if (cmd == "export") {
      medkg::export_run_graph(o.out, o.to, medkg::parse_graph_format(o.format));
    } else {
      for (medkg::Stage s : medkg::pipeline_stages()) {
        if (medkg::to_string(s) != cmd) continue;
        medkg::run_stage(s, config, o.out, services);
        medkg::write_manifest(config, o.out, {s});
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "medkg: " << e.what() << "\n";
    return 2;
  }
  std::cout << "medkg " << cmd << ": done (" << o.out << ")\n";
  return 0;
}
