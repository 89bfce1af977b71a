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

#include "medkg/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "json.hpp"
#include "medkg/error.hpp"
#include "medkg/extract.hpp"
#include "medkg/graph.hpp"
#include "medkg/text.hpp"

namespace medkg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Rejects keys outside `allowed` so typos do not silently fall back to
// defaults.
void check_keys(const json& obj, const std::string& section,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError("config section '" + section + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&key](const char* a) { return key == a; })) {
      throw ConfigError("unknown config key '" + section + "." + key + "'");
    }
  }
}

json section(const json& root, const char* name) {
  if (!root.contains(name) || root.at(name).is_null()) return json::object();
  return root.at(name);
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key) && !obj.at(key).is_null()) out = obj.at(key).get<T>();
}

void read_path(const json& obj, const char* key, const fs::path& base,
               fs::path& out) {
  if (obj.contains(key) && !obj.at(key).is_null()) {
    out = base / obj.at(key).get<std::string>();
  }
}

void read_path(const json& obj, const char* key, const fs::path& base,
               std::optional<fs::path>& out) {
  if (obj.contains(key) && !obj.at(key).is_null()) {
    out = base / obj.at(key).get<std::string>();
  }
}

double round_to(double v, double scale) { return std::round(v * scale) / scale; }

json rate_json(std::optional<double> v) {
  if (!v) return nullptr;
  return round_to(*v, 1e4);
}

struct Artifact {
  const char* file;
  Stage producer;
};

fs::path require(const fs::path& run_dir, const Artifact& a) {
  const fs::path p = run_dir / a.file;
  if (!fs::exists(p)) {
    throw Error(std::string("missing prerequisite artifact ") + a.file +
                " (produced by stage '" + std::string(to_string(a.producer)) +
                "')");
  }
  return p;
}

const Artifact kCorpus{"corpus.jsonl", Stage::kIngest};
const Artifact kCleaned{"cleaned.jsonl", Stage::kIngest};
const Artifact kMentions{"mentions.jsonl", Stage::kExtract};
const Artifact kCandidates{"candidates.jsonl", Stage::kExtract};
const Artifact kLdaBeta{"lda_beta.tsv", Stage::kFitLda};
const Artifact kLdaTheta{"lda_theta.tsv", Stage::kFitLda};
const Artifact kFeatures{"features.tsv", Stage::kFitEm};
const Artifact kWeights{"weights.tsv", Stage::kFitEm};
const Artifact kTensor{"tensor.tsv", Stage::kFitCp};
const Artifact kFactorA{"cp_A.tsv", Stage::kFitCp};
const Artifact kGraph{"graph.jsonl", Stage::kBuildGraph};

StopwordSet stopwords_for(const PipelineConfig& c) {
  return c.stopwords ? load_stopwords(*c.stopwords) : default_stopwords();
}

std::vector<AnnotatedDocument> annotate(const std::vector<PreparedDocument>& docs,
                                        const std::vector<Mention>& mentions) {
  std::map<std::string, std::vector<Mention>> by_doc;
  for (const auto& m : mentions) by_doc[m.doc_id].push_back(m);
  std::vector<AnnotatedDocument> out;
  for (const auto& d : docs) {
    AnnotatedDocument ad{d, {}};
    if (const auto it = by_doc.find(d.doc_id); it != by_doc.end()) {
      ad.mentions = it->second;
    }
    out.push_back(std::move(ad));
  }
  return out;
}

std::string features_tsv(const std::vector<FeatureVector>& rows) {
  std::string out = "candidate";
  for (auto name : feature_names()) out += "\t" + std::string(name);
  out += "\n";
  for (std::size_t n = 0; n < rows.size(); ++n) {
    out += std::to_string(n);
    for (Eigen::Index k = 0; k < rows[n].size(); ++k) {
      out += "\t" + format_double(rows[n](k));
    }
    out += "\n";
  }
  return out;
}

std::vector<FeatureVector> load_features(const fs::path& path) {
  const auto rows = read_tsv(path);
  std::vector<FeatureVector> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    if (f.size() != kNumFeatures + 1) {
      throw ParseError("feature row has the wrong width", rows[r].line);
    }
    FeatureVector v(static_cast<Eigen::Index>(kNumFeatures));
    for (std::size_t k = 0; k < kNumFeatures; ++k) {
      v(static_cast<Eigen::Index>(k)) = parse_double(f[k + 1]);
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<EmCandidate> em_data(const std::vector<CandidateTriple>& cands,
                                 const std::vector<FeatureVector>& features) {
  if (cands.size() != features.size()) {
    throw Error("features.tsv does not match candidates.jsonl");
  }
  std::vector<EmCandidate> data;
  for (std::size_t n = 0; n < cands.size(); ++n) {
    data.push_back({features[n], index_of(cands[n].edge), cands[n].confidence});
  }
  return data;
}

std::string triple_key(const std::string& head, EdgeType e,
                       const std::string& tail) {
  return head + "|" + std::string(to_string(e)) + "|" + tail;
}

json protocol_json(const ProtocolReport& r, const KnowledgeGraph* g) {
  json j;
  j["rate"] = rate_json(r.rate);
  j["positive"] = r.positive;
  j["judged"] = r.judged;
  j["failed"] = r.failed;
  json items = json::array();
  for (const auto& it : r.items) {
    json i;
    i["id"] = it.item_id;
    if (it.verdict) {
      i["verdict"] = to_string(it.verdict->verdict);
      i["rationale"] = it.verdict->rationale;
    } else {
      i["error"] = it.error;
    }
    items.push_back(std::move(i));
  }
  j["items"] = std::move(items);
  if (g) {
    json flagged = json::array();
    for (std::size_t e : r.flagged_edges) {
      const Edge& edge = g->edges()[e];
      flagged.push_back(triple_key(node_label(g->node(edge.head)), edge.type,
                                   node_label(g->node(edge.tail))));
    }
    j["flagged"] = std::move(flagged);
  }
  return j;
}

json metrics_json(const ClassificationMetrics& m, const ConfusionCounts& c) {
  json j;
  j["precision"] = rate_json(m.precision);
  j["recall"] = rate_json(m.recall);
  j["f1"] = rate_json(m.f1);
  j["tp"] = c.tp;
  j["fp"] = c.fp;
  j["fn"] = c.fn;
  return j;
}

// ratings TSV: item <tab> rater <tab> label.
json kappa_json(const fs::path& path) {
  std::map<std::string, std::map<std::string, std::string>> by_rater;
  for (const auto& row : read_tsv(path)) {
    if (row.fields.size() != 3) throw ParseError("ratings row needs item, rater, label", row.line);
    by_rater[row.fields[1]][row.fields[0]] = row.fields[2];
  }
  json pairs = json::array();
  std::vector<KappaResult> results;
  for (auto a = by_rater.begin(); a != by_rater.end(); ++a) {
    for (auto b = std::next(a); b != by_rater.end(); ++b) {
      std::vector<std::string> la, lb;
      for (const auto& [item, label] : a->second) {
        const auto it = b->second.find(item);
        if (it == b->second.end()) continue;
        la.push_back(label);
        lb.push_back(it->second);
      }
      if (la.empty()) continue;
      const KappaResult k = cohen_kappa(la, lb);
      results.push_back(k);
      json p;
      p["raters"] = {a->first, b->first};
      p["items"] = k.n;
      p["p_o"] = round_to(k.p_o, 1e4);
      p["p_e"] = round_to(k.p_e, 1e4);
      p["kappa"] = rate_json(k.kappa);
      pairs.push_back(std::move(p));
    }
  }
  json j;
  j["pairs"] = std::move(pairs);
  j["weighted_mean"] = rate_json(weighted_mean_kappa(results));
  return j;
}

void stage_ingest(const PipelineConfig& c, const fs::path& run, const Services& s) {
  Corpus corpus;
  if (c.literature_query) {
    if (!s.literature) throw Error("no literature client available");
    auto client = s.literature(c.remote);
    corpus = Corpus(fetch_remote(*c.literature_query, c.year_from, c.year_to, *client));
  } else {
    corpus = load_corpus(c.corpus);
  }
  if (!c.keywords.empty()) {
    corpus = filter_by_keywords(corpus, {c.keywords.begin(), c.keywords.end()});
  }
  if (c.exclusions) corpus = apply_exclusions(corpus, load_id_list(*c.exclusions));
  if (corpus.empty()) throw Error("corpus is empty after filtering");
  save_corpus(corpus, run / kCorpus.file);

  const CorpusStats st = corpus_stats(corpus);
  json j;
  j["total"] = st.total;
  j["per_tag"] = st.per_tag;
  write_file(run / "corpus_stats.json", j.dump(2) + "\n");

  const StopwordSet stop = stopwords_for(c);
  std::vector<PreparedDocument> docs;
  for (const auto& d : corpus.documents()) {
    docs.push_back(prepare_document(d, stop, c.fields));
  }
  save_cleaned_cache(docs, run / kCleaned.file);
}

void stage_extract(const PipelineConfig& c, const fs::path& run, const Services& s) {
  const auto docs = load_cleaned_cache(require(run, kCleaned));
  std::unique_ptr<Extractor> extractor;
  std::unique_ptr<LlmClient> llm;
  if (c.extractor == "remote") {
    if (!s.llm) throw Error("no language model client available");
    llm = s.llm(c.remote);
    extractor = std::make_unique<LlmExtractor>(*llm);
  } else {
    const StopwordSet stop = stopwords_for(c);
    extractor = std::make_unique<DeterministicExtractor>(
        load_gazetteer(c.gazetteer, stop), load_patterns(c.patterns, stop));
  }
  std::vector<Mention> mentions;
  std::vector<CandidateTriple> candidates;
  RejectionTally tally;
  for (const auto& d : docs) {
    const auto m = extract_entities(d, *extractor, &tally);
    const auto t = extract_relations(d, m, *extractor, &tally);
    mentions.insert(mentions.end(), m.begin(), m.end());
    candidates.insert(candidates.end(), t.begin(), t.end());
  }
  if (auto* le = dynamic_cast<LlmExtractor*>(extractor.get())) {
    tally += le->parse_rejections();
  }
  save_mentions(mentions, run / kMentions.file);
  save_candidates(candidates, run / kCandidates.file);
  json j;
  j["extractor"] = extractor->name();
  j["documents"] = docs.size();
  j["mentions"] = mentions.size();
  j["candidates"] = candidates.size();
  j["rejected_mentions"] = tally.mentions;
  j["rejected_triples"] = tally.triples;
  write_file(run / "extraction.json", j.dump(2) + "\n");
}

void stage_fit_lda(const PipelineConfig& c, const fs::path& run, const Services&) {
  const auto docs = load_cleaned_cache(require(run, kCleaned));
  std::vector<std::vector<std::string>> tokens;
  std::vector<std::string> ids;
  for (const auto& d : docs) {
    auto t = tokenize(d.text);
    if (t.empty()) continue;
    tokens.push_back(std::move(t));
    ids.push_back(d.doc_id);
  }
  const LdaModel model = fit_lda(tokens, c.lda);
  save_lda(model, ids, run / kLdaBeta.file, run / kLdaTheta.file);
}

void stage_fit_em(const PipelineConfig& c, const fs::path& run, const Services& s) {
  const auto docs = load_cleaned_cache(require(run, kCleaned));
  const auto mentions = load_mentions(require(run, kMentions));
  const auto candidates = load_candidates(require(run, kCandidates));
  const LdaModel lda = load_lda(require(run, kLdaBeta), require(run, kLdaTheta));
  if (candidates.empty()) throw Error("no candidate triples to score");

  const auto annotated = annotate(docs, mentions);
  const CooccurrenceCounts counts = count_cooccurrences(annotated, c.window);
  std::optional<LogProbabilityMatrix> log_joint;
  if (counts.entities().size() >= 2) {
    const ProbabilityMatrix P = estimate_joint(counts, c.smoothing_alpha);
    save_matrix_tsv(P.entities, P.p, run / "joint.tsv");
    log_joint = log_normalize(P, c.epsilon);
    save_matrix_tsv(log_joint->entities, log_joint->values, run / "log_joint.tsv");
  }

  const auto contexts = entity_contexts(annotated);
  std::unique_ptr<EmbeddingProvider> provider;
  if (c.embedding == "remote") {
    if (!s.embedding) throw Error("no embedding provider available");
    provider = s.embedding(c.remote);
  } else {
    provider = std::make_unique<HashingEmbeddingProvider>(c.embedding_dim);
  }
  std::map<std::string, EmbeddingVector> embeddings;
  for (const auto& [entity, toks] : contexts) {
    if (toks.empty()) continue;
    embeddings[entity] = embed(CleanedText{join(toks, " "), {}}, *provider);
  }
  const auto hits = count_pattern_hits(candidates);

  FeatureContext ctx;
  ctx.counts = &counts;
  ctx.log_joint = log_joint ? &*log_joint : nullptr;
  ctx.embeddings = &embeddings;
  ctx.lda = &lda;
  ctx.topic_contexts = &contexts;
  ctx.pattern_hits = &hits;
  std::vector<FeatureVector> features;
  for (const auto& t : candidates) features.push_back(featurize(t.head, t.tail, ctx));
  write_file(run / kFeatures.file, features_tsv(features));

  const EmResult res = em_fit(em_data(candidates, features),
                              Weights::zeros(kNumFeatures), c.em);
  save_weights(res.weights, run / kWeights.file);
  std::string trace = "iteration\tq_before\tq_after\tlog_likelihood\n";
  for (const auto& it : res.trace) {
    trace += std::to_string(it.iteration) + "\t" + format_sci12(it.q_before) +
             "\t" + format_sci12(it.q_after) + "\t" +
             format_sci12(it.log_likelihood) + "\n";
  }
  write_file(run / "em_trace.tsv", trace);
}

void stage_fit_cp(const PipelineConfig& c, const fs::path& run, const Services&) {
  const auto candidates = load_candidates(require(run, kCandidates));
  const DataTensor T = build_tensor(candidates);
  save_tensor(T, run);
  const CpResult res = cp_als(T, c.cp);
  save_factors(res.factors, run);
  std::string trace = "iteration\trelative_error\n";
  for (std::size_t i = 0; i < res.errors.size(); ++i) {
    trace += std::to_string(i + 1) + "\t" + format_sci12(res.errors[i]) + "\n";
  }
  write_file(run / "cp_trace.tsv", trace);
}

void stage_build_graph(const PipelineConfig& c, const fs::path& run, const Services&) {
  const auto mentions = load_mentions(require(run, kMentions));
  const auto candidates = load_candidates(require(run, kCandidates));
  const auto features = load_features(require(run, kFeatures));
  const Weights w = load_weights(require(run, kWeights));
  require(run, kTensor);
  require(run, kFactorA);
  const DataTensor T = load_tensor(run);
  const CPFactors F = load_factors(run);

  const auto data = em_data(candidates, features);
  const Eigen::MatrixXd gamma = responsibilities(data, w);
  std::vector<CellIndex> calibration;
  for (const auto& t : candidates) {
    if (auto cell = cell_of(T, t)) calibration.push_back(*cell);
  }

  KnowledgeGraph g;
  for (const auto& m : mentions) g.upsert_node(m.surface, m.type, m.doc_id);
  std::string scores =
      "doc\thead\tobserved\ttail\tbest\tposterior\ttensor_score\tconfidence\taccepted\n";
  for (std::size_t n = 0; n < candidates.size(); ++n) {
    const auto row = gamma.row(static_cast<Eigen::Index>(n));
    Eigen::Index best = 0;
    for (Eigen::Index z = 1; z < row.size(); ++z) {
      if (row(z) > row(best)) best = z;
    }
    CandidateTriple t = candidates[n];
    t.edge = edge_type_at(static_cast<std::size_t>(best));
    double tensor_score = 0.0;
    if (const auto cell = cell_of(T, t); cell && !calibration.empty()) {
      tensor_score = relation_score(F, *cell, calibration);
    }
    t.confidence = std::clamp(
        round_to(combine_confidence(c.w_model, row(best), c.w_tensor, tensor_score), 1e6),
        0.0, 1.0);
    const bool accepted = g.add_edge(t, c.tau);
    scores += t.evidence.doc_id + "\t" + t.head.surface + "\t" +
              std::string(to_string(candidates[n].edge)) + "\t" + t.tail.surface +
              "\t" + std::string(to_string(t.edge)) + "\t" +
              format_fixed(row(best), 6) + "\t" + format_fixed(tensor_score, 6) +
              "\t" + format_fixed(t.confidence, 6) + "\t" +
              (accepted ? "yes" : "no") + "\n";
  }
  write_file(run / "scores.tsv", scores);
  export_graph(g, run / "graph.graphml", GraphFormat::kGraphml);
  export_graph(g, run / kGraph.file, GraphFormat::kJsonl);
  export_graph(g, run / "graph.tsv", GraphFormat::kTsv);
  write_file(run / "graph_stats.json", stats_to_json(graph_stats(g)));
}

void stage_eval(const PipelineConfig& c, const fs::path& run, const Services& s) {
  const KnowledgeGraph g = import_graph(require(run, kGraph), GraphFormat::kJsonl);
  json report;
  report["config"] = json::parse(c.echo);
  report["config_hash"] = config_hash(c);
  report["seed"] = c.seed;
  const GraphStats st = graph_stats(g);
  report["graph_stats"] = json::parse(stats_to_json(st));

  std::unique_ptr<LlmClient> llm;
  std::unique_ptr<Judge> judge;
  if (c.judge == "recorded") {
    judge = std::make_unique<RecordedJudge>(RecordedJudge::from_file(*c.judge_responses));
  } else if (c.judge == "remote") {
    if (!s.llm) throw Error("no language model client available for the judge");
    llm = s.llm(c.remote);
    judge = std::make_unique<LlmJudge>(*llm);
  }
  if (judge && c.prompts) {
    report["prompt_validation"] =
        protocol_json(prompt_validation(g, load_prompts(*c.prompts), *judge), nullptr);
  }
  if (judge && !g.edges().empty()) {
    report["consistency"] =
        protocol_json(consistency_check(g, c.sample_size, *judge, c.seed), &g);
  }
  if (c.gold_triples) {
    std::set<std::string> gold;
    for (const auto& row : read_tsv(*c.gold_triples)) {
      if (row.fields.size() != 3) throw ParseError("gold row needs head, edge, tail", row.line);
      const auto e = parse_edge_type(row.fields[1]);
      if (!e) throw ParseError("unknown edge type in gold triples", row.line);
      gold.insert(triple_key(to_lower(row.fields[0]), *e, to_lower(row.fields[2])));
    }
    std::set<std::string> predicted;
    for (const auto& e : g.edges()) {
      predicted.insert(triple_key(g.node(e.head).canonical_name, e.type,
                                  g.node(e.tail).canonical_name));
    }
    const ConfusionCounts cc = compare_sets(predicted, gold);
    report["gold"] = metrics_json(classification_metrics(cc), cc);
  }
  if (c.ratings) report["kappa"] = kappa_json(*c.ratings);
  write_file(run / "eval_report.json", report.dump(2) + "\n");
}

void stage_linkpred(const PipelineConfig& c, const fs::path& run, const Services&) {
  if (!c.linkpred) return;
  TripleDataset data;
  if (c.linkpred_dataset) {
    data = load_dataset(*c.linkpred_dataset);
  } else {
    const KnowledgeGraph g = import_graph(require(run, kGraph), GraphFormat::kJsonl);
    std::vector<StringTriple> triples;
    for (const auto& e : g.edges()) {
      triples.push_back({node_label(g.node(e.head)), std::string(to_string(e.type)),
                         node_label(g.node(e.tail))});
    }
    if (triples.size() < 10) {
      json j;
      j["skipped"] = "graph has fewer than 10 edges";
      write_file(run / "linkpred_report.json", j.dump(2) + "\n");
      return;
    }
    data = split_dataset(std::move(triples), 0.1, 0.1, c.seed);
    save_dataset(data, run / "linkpred");
  }
  std::vector<MetricRow> rows;
  json models = json::array();
  for (ModelKind kind : c.linkpred_models) {
    ModelConfig mc = c.model;
    mc.kind = kind;
    const TrainResult tr = train(data, mc);
    for (RankMode mode : {RankMode::kRaw, RankMode::kFiltered}) {
      rows.push_back(summarize(std::string(to_string(kind)), mode,
                               evaluate_ranking(tr.model, data, mode)));
    }
    json m;
    m["model"] = to_string(kind);
    m["initial_loss"] = tr.epoch_loss.front();
    m["final_loss"] = tr.epoch_loss.back();
    models.push_back(std::move(m));
  }
  write_file(run / "linkpred_report.txt", format_report(rows));
  json j;
  j["config_hash"] = config_hash(c);
  j["seed"] = c.seed;
  j["entities"] = data.entities.size();
  j["relations"] = data.relations.size();
  j["train"] = data.train.size();
  j["valid"] = data.valid.size();
  j["test"] = data.test.size();
  j["random_baseline_mrr"] = {{"raw", round_to(random_baseline_mrr(data, RankMode::kRaw), 1e3)},
                              {"filtered", round_to(random_baseline_mrr(data, RankMode::kFiltered), 1e3)}};
  j["training"] = std::move(models);
  json table = json::array();
  for (const auto& r : rows) {
    table.push_back({{"model", r.model}, {"mode", r.mode}, {"mr", round_to(r.mr, 1e3)},
                     {"mrr", round_to(r.mrr, 1e3)},
                     {"hits@1", round_to(r.hits[0], 1e3)}, {"hits@3", round_to(r.hits[1], 1e3)},
                     {"hits@10", round_to(r.hits[2], 1e3)}, {"p@1", round_to(r.p[0], 1e3)},
                     {"p@3", round_to(r.p[1], 1e3)}, {"p@10", round_to(r.p[2], 1e3)},
                     {"queries", r.queries}});
  }
  j["results"] = std::move(table);
  write_file(run / "linkpred_report.json", j.dump(2) + "\n");
}

}  // namespace

void PipelineConfig::apply_seed(std::uint64_t s) {
  seed = s;
  lda.seed = s;
  em.seed = s;
  cp.seed = s;
  model.seed = s;
  if (!echo.empty()) {
    json j = json::parse(echo);
    j["seed"] = s;
    echo = j.dump();
  }
}

void PipelineConfig::set_offline(bool value) {
  offline = value;
  if (!echo.empty()) {
    json j = json::parse(echo);
    j["offline"] = value;
    echo = j.dump();
  }
}

void PipelineConfig::validate() const {
  std::vector<std::string> remote_uses;
  if (extractor == "remote") remote_uses.push_back("extractor");
  if (embedding == "remote") remote_uses.push_back("embedding");
  if (judge == "remote") remote_uses.push_back("judge");
  if (literature_query) remote_uses.push_back("literature search");
  if (offline && !remote_uses.empty()) {
    throw ConfigError("offline mode forbids remote endpoints (configured: " +
                      join(remote_uses, ", ") + ")");
  }
  if (extractor != "deterministic" && extractor != "remote") {
    throw ConfigError("extractor.kind must be deterministic or remote");
  }
  if (embedding != "hashing" && embedding != "remote") {
    throw ConfigError("embedding.kind must be hashing or remote");
  }
  if (judge != "none" && judge != "recorded" && judge != "remote") {
    throw ConfigError("eval.judge must be none, recorded or remote");
  }
  if (!(w_model >= 0.0) || !(w_tensor >= 0.0) ||
      std::abs(w_model + w_tensor - 1.0) > 1e-9) {
    throw ConfigError("graph.w_model and graph.w_tensor must be nonnegative and sum to 1");
  }
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("graph.tau must lie in [0, 1]");
  if (embedding_dim == 0) throw ConfigError("embedding.dim must be positive");
  if (!(smoothing_alpha >= 0.0)) throw ConfigError("stats.alpha must be nonnegative");
  if (!(epsilon > 0.0)) throw ConfigError("stats.epsilon must be positive");
  if (sample_size == 0) throw ConfigError("eval.sample_size must be positive");
  if (judge == "recorded" && !judge_responses) {
    throw ConfigError("eval.judge_responses is required for the recorded judge");
  }
  try {
    lda.validate();
    model.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (cp.rank == 0) throw ConfigError("cp.rank must be positive");

  const auto must_exist = [](const fs::path& p, const char* what) {
    if (!fs::exists(p)) {
      throw ConfigError(std::string(what) + " not found: " + p.string());
    }
  };
  if (!literature_query) must_exist(corpus, "corpus");
  if (extractor == "deterministic") {
    must_exist(gazetteer, "gazetteer");
    must_exist(patterns, "patterns");
  }
  if (stopwords) must_exist(*stopwords, "stopwords");
  if (exclusions) must_exist(*exclusions, "exclusion list");
  if (judge_responses) must_exist(*judge_responses, "judge responses");
  if (prompts) must_exist(*prompts, "prompts");
  if (gold_triples) must_exist(*gold_triples, "gold triples");
  if (ratings) must_exist(*ratings, "ratings");
  if (linkpred_dataset) must_exist(*linkpred_dataset, "link prediction dataset");
}

PipelineConfig parse_config(const std::string& json_text, const fs::path& base) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  PipelineConfig c;
  try {
    check_keys(root, "config",
               {"seed", "offline", "corpus", "extractor", "embedding", "remote",
                "stats", "lda", "em", "cp", "graph", "eval", "linkpred"});
    read(root, "offline", c.offline);
    std::uint64_t seed = c.seed;
    read(root, "seed", seed);

    const json corpus = section(root, "corpus");
    check_keys(corpus, "corpus",
               {"path", "stopwords", "fields", "keywords", "exclusions",
                "remote_query", "year_from", "year_to"});
    read_path(corpus, "path", base, c.corpus);
    read_path(corpus, "stopwords", base, c.stopwords);
    read_path(corpus, "exclusions", base, c.exclusions);
    read(corpus, "keywords", c.keywords);
    std::string fields = "both";
    read(corpus, "fields", fields);
    if (fields == "both") c.fields = TextFields::kBoth;
    else if (fields == "title") c.fields = TextFields::kTitle;
    else if (fields == "abstract") c.fields = TextFields::kAbstract;
    else throw ConfigError("corpus.fields must be title, abstract or both");
    if (corpus.contains("remote_query") && !corpus.at("remote_query").is_null()) {
      c.literature_query = corpus.at("remote_query").get<std::string>();
    }
    read(corpus, "year_from", c.year_from);
    read(corpus, "year_to", c.year_to);

    const json ex = section(root, "extractor");
    check_keys(ex, "extractor", {"kind", "gazetteer", "patterns"});
    read(ex, "kind", c.extractor);
    read_path(ex, "gazetteer", base, c.gazetteer);
    read_path(ex, "patterns", base, c.patterns);

    const json emb = section(root, "embedding");
    check_keys(emb, "embedding", {"kind", "dim"});
    read(emb, "kind", c.embedding);
    read(emb, "dim", c.embedding_dim);

    const json rem = section(root, "remote");
    check_keys(rem, "remote",
               {"llm_url", "llm_model", "embedding_url", "embedding_model",
                "literature_url"});
    read(rem, "llm_url", c.remote.llm_url);
    read(rem, "llm_model", c.remote.llm_model);
    read(rem, "embedding_url", c.remote.embedding_url);
    read(rem, "embedding_model", c.remote.embedding_model);
    read(rem, "literature_url", c.remote.literature_url);

    const json st = section(root, "stats");
    check_keys(st, "stats", {"window", "alpha", "epsilon"});
    std::string window = "sentence";
    read(st, "window", window);
    if (window == "sentence") c.window = CooccurrenceWindow::kSentence;
    else if (window == "document") c.window = CooccurrenceWindow::kDocument;
    else throw ConfigError("stats.window must be sentence or document");
    read(st, "alpha", c.smoothing_alpha);
    read(st, "epsilon", c.epsilon);

    const json lda = section(root, "lda");
    check_keys(lda, "lda", {"topics", "alpha", "eta", "iterations"});
    read(lda, "topics", c.lda.num_topics);
    read(lda, "alpha", c.lda.alpha);
    read(lda, "eta", c.lda.eta);
    read(lda, "iterations", c.lda.iterations);

    const json em = section(root, "em");
    check_keys(em, "em", {"max_iters", "tol", "learning_rate", "inner_steps", "l2"});
    read(em, "max_iters", c.em.max_iters);
    read(em, "tol", c.em.tol);
    read(em, "learning_rate", c.em.learning_rate);
    read(em, "inner_steps", c.em.inner_steps);
    read(em, "l2", c.em.l2);

    const json cp = section(root, "cp");
    check_keys(cp, "cp", {"rank", "max_iters", "tol", "ridge"});
    read(cp, "rank", c.cp.rank);
    read(cp, "max_iters", c.cp.max_iters);
    read(cp, "tol", c.cp.tol);
    read(cp, "ridge", c.cp.ridge);

    const json gr = section(root, "graph");
    check_keys(gr, "graph", {"w_model", "w_tensor", "tau"});
    read(gr, "w_model", c.w_model);
    read(gr, "w_tensor", c.w_tensor);
    read(gr, "tau", c.tau);

    const json ev = section(root, "eval");
    check_keys(ev, "eval",
               {"judge", "judge_responses", "prompts", "sample_size",
                "gold_triples", "ratings"});
    read(ev, "judge", c.judge);
    read_path(ev, "judge_responses", base, c.judge_responses);
    read_path(ev, "prompts", base, c.prompts);
    read(ev, "sample_size", c.sample_size);
    read_path(ev, "gold_triples", base, c.gold_triples);
    read_path(ev, "ratings", base, c.ratings);

    const json lp = section(root, "linkpred");
    check_keys(lp, "linkpred",
               {"enabled", "dataset", "models", "dim", "margin", "learning_rate",
                "epochs", "negatives", "normalize_entities"});
    read(lp, "enabled", c.linkpred);
    read_path(lp, "dataset", base, c.linkpred_dataset);
    if (lp.contains("models")) {
      c.linkpred_models.clear();
      for (const auto& m : lp.at("models")) {
        c.linkpred_models.push_back(parse_model_kind(m.get<std::string>()));
      }
    }
    read(lp, "dim", c.model.dim);
    read(lp, "margin", c.model.margin);
    read(lp, "learning_rate", c.model.learning_rate);
    read(lp, "epochs", c.model.epochs);
    read(lp, "negatives", c.model.negatives);
    read(lp, "normalize_entities", c.model.normalize_entities);

    root["seed"] = seed;
    c.echo = root.dump();
    c.apply_seed(seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  return parse_config(read_file(path), path.parent_path());
}

std::string config_hash(const PipelineConfig& config) {
  return hex64(fnv1a64(config.echo));
}

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::kIngest: return "ingest";
    case Stage::kExtract: return "extract";
    case Stage::kFitLda: return "fit-lda";
    case Stage::kFitEm: return "fit-em";
    case Stage::kFitCp: return "fit-cp";
    case Stage::kBuildGraph: return "build-graph";
    case Stage::kEval: return "eval";
    case Stage::kLinkpred: return "linkpred";
  }
  return "?";
}

const std::vector<Stage>& pipeline_stages() {
  static const std::vector<Stage> stages = {
      Stage::kIngest, Stage::kExtract,    Stage::kFitLda, Stage::kFitEm,
      Stage::kFitCp,  Stage::kBuildGraph, Stage::kEval,   Stage::kLinkpred};
  return stages;
}

void run_stage(Stage stage, const PipelineConfig& config, const fs::path& run_dir,
               const Services& services) {
  fs::create_directories(run_dir);
  try {
    switch (stage) {
      case Stage::kIngest: stage_ingest(config, run_dir, services); break;
      case Stage::kExtract: stage_extract(config, run_dir, services); break;
      case Stage::kFitLda: stage_fit_lda(config, run_dir, services); break;
      case Stage::kFitEm: stage_fit_em(config, run_dir, services); break;
      case Stage::kFitCp: stage_fit_cp(config, run_dir, services); break;
      case Stage::kBuildGraph: stage_build_graph(config, run_dir, services); break;
      case Stage::kEval: stage_eval(config, run_dir, services); break;
      case Stage::kLinkpred: stage_linkpred(config, run_dir, services); break;
    }
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(std::string(to_string(stage)), e.what());
  }
}

void run_pipeline(const PipelineConfig& config, const fs::path& run_dir,
                  const Services& services) {
  config.validate();
  for (Stage s : pipeline_stages()) run_stage(s, config, run_dir, services);
  write_manifest(config, run_dir, pipeline_stages());
}

void write_manifest(const PipelineConfig& config, const fs::path& run_dir,
                    const std::vector<Stage>& stages) {
  json j;
  j["version"] = kVersion;
  j["seed"] = config.seed;
  j["config_hash"] = config_hash(config);
  json names = json::array();
  for (Stage s : stages) names.push_back(to_string(s));
  j["stages"] = std::move(names);
  write_file(run_dir / "manifest.json", j.dump(2) + "\n");
}

double combine_confidence(double w_model, double posterior, double w_tensor,
                          double tensor_score) {
  return w_model * posterior + w_tensor * tensor_score;
}

void export_run_graph(const fs::path& run_dir, const fs::path& to,
                      GraphFormat format) {
  export_graph(import_graph(require(run_dir, kGraph), GraphFormat::kJsonl), to,
               format);
}

}  // namespace medkg
