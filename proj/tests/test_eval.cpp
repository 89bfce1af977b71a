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

#include <filesystem>

#include "medkg/error.hpp"
#include "medkg/eval.hpp"
#include "medkg/text.hpp"

namespace fs = std::filesystem;
using namespace medkg;

namespace {

const fs::path kData = MEDKG_DATA_DIR;

class ConstantJudge : public Judge {
 public:
  explicit ConstantJudge(bool positive) : positive_(positive) {}
  JudgeVerdict judge(const JudgeRequest& r) override {
    ++calls;
    return parse_verdict(r.item_id, r.protocol, positive_ ? "yes" : "no");
  }
  int calls = 0;

 private:
  bool positive_;
};

class AlternatingJudge : public Judge {
 public:
  JudgeVerdict judge(const JudgeRequest& r) override {
    return parse_verdict(r.item_id, r.protocol, (n_++ % 2 == 0) ? "Correct." : "Incorrect.");
  }

 private:
  int n_ = 0;
};

class FlakyJudge : public Judge {
 public:
  JudgeVerdict judge(const JudgeRequest& r) override {
    if (r.item_id == "prompt-1") throw RemoteError("timeout");
    return parse_verdict(r.item_id, r.protocol, "yes");
  }
};

class EchoLlm : public LlmClient {
 public:
  std::string complete(const std::string& prompt) override {
    last = prompt;
    return "No, the relation is reversed.";
  }
  std::string last;
};

KnowledgeGraph golden_graph() {
  return import_graph(kData / "golden" / "graph.graphml", GraphFormat::kGraphml);
}

KnowledgeGraph small_graph(std::size_t edges) {
  KnowledgeGraph g;
  const std::vector<std::string> heads = {"aspirin", "tpa", "statins"};
  g.upsert_node("stroke", NodeType::kDiseases, "d");
  for (std::size_t i = 0; i < edges; ++i) {
    g.upsert_node(heads[i], NodeType::kMedications, "d");
    CandidateTriple t;
    t.head = {heads[i], NodeType::kMedications, "d", {0, 1}};
    t.tail = {"stroke", NodeType::kDiseases, "d", {0, 1}};
    t.edge = EdgeType::kTreats;
    t.confidence = 0.9;
    t.evidence = {"d", i};
    g.add_edge(t, 0.5);
  }
  return g;
}

std::vector<ValidationPrompt> prompts(std::size_t n) {
  std::vector<ValidationPrompt> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({"Does aspirin treat stroke?", "aspirin", "stroke"});
  return out;
}

}  // namespace

TEST(Eval, F1FromReportedRates) {
  const auto a = classification_metrics(PrecisionRecall{0.8711, 0.9103});
  ASSERT_TRUE(a.f1);
  EXPECT_NEAR(*a.f1, 0.8902, 0.0005);
  const auto b = classification_metrics(PrecisionRecall{0.9073, 0.8881});
  EXPECT_NEAR(*b.f1, 0.8976, 0.0005);
  EXPECT_FALSE(classification_metrics(PrecisionRecall{0.0, 0.0}).f1);
}

TEST(Eval, ConfusionMetrics) {
  const auto none = classification_metrics(ConfusionCounts{0, 0, 0, std::nullopt});
  EXPECT_FALSE(none.precision);
  EXPECT_FALSE(none.recall);
  EXPECT_FALSE(none.f1);
  EXPECT_FALSE(none.accuracy);

  const auto m = classification_metrics(ConfusionCounts{6, 2, 3, 9});
  EXPECT_DOUBLE_EQ(*m.precision, 0.75);
  EXPECT_DOUBLE_EQ(*m.recall, 6.0 / 9.0);
  EXPECT_NEAR(*m.f1, 2 * 0.75 * (6.0 / 9.0) / (0.75 + 6.0 / 9.0), 1e-12);
  EXPECT_LE(*m.f1, (*m.precision + *m.recall) / 2);
  EXPECT_DOUBLE_EQ(*m.accuracy, 15.0 / 20.0);

  const ConfusionCounts c = compare_sets({"a", "b", "c"}, {"b", "c", "d", "e"});
  EXPECT_EQ(c.tp, 2u);
  EXPECT_EQ(c.fp, 1u);
  EXPECT_EQ(c.fn, 2u);
  EXPECT_FALSE(c.tn);
}

TEST(Eval, KappaCases) {
  const auto half = cohen_kappa(std::vector<int>{1, 1, 0, 0}, std::vector<int>{1, 0, 0, 0});
  EXPECT_DOUBLE_EQ(half.p_o, 0.75);
  EXPECT_DOUBLE_EQ(half.p_e, 0.5);
  EXPECT_DOUBLE_EQ(*half.kappa, 0.5);

  const std::vector<std::string> x = {"a", "b", "c", "a"};
  EXPECT_DOUBLE_EQ(*cohen_kappa(x, x).kappa, 1.0);

  const std::vector<int> constant = {2, 2, 2};
  EXPECT_FALSE(cohen_kappa(constant, constant).kappa);
  EXPECT_THROW(cohen_kappa(std::vector<int>{}, std::vector<int>{}), std::invalid_argument);
  EXPECT_THROW(cohen_kappa(std::vector<int>{1}, std::vector<int>{1, 2}), std::invalid_argument);
}

TEST(Eval, KappaRelabelInvariantAndNearZeroWhenIndependent) {
  Rng rng(21);
  std::vector<int> a, b, pa, pb;
  for (int i = 0; i < 20000; ++i) {
    a.push_back(static_cast<int>(rng.uniform_index(3)));
    b.push_back(static_cast<int>(rng.uniform_index(3)));
  }
  EXPECT_NEAR(*cohen_kappa(a, b).kappa, 0.0, 0.05);
  const int perm[] = {2, 0, 1};
  for (std::size_t i = 0; i < 200; ++i) {
    pa.push_back(perm[a[i]]);
    pb.push_back(perm[b[i]]);
  }
  const std::vector<int> a200(a.begin(), a.begin() + 200), b200(b.begin(), b.begin() + 200);
  EXPECT_DOUBLE_EQ(*cohen_kappa(pa, pb).kappa, *cohen_kappa(a200, b200).kappa);
}

TEST(Eval, WeightedMeanKappa) {
  KappaResult p1, p2, undefined;
  p1.kappa = 0.5;
  p1.n = 10;
  p2.kappa = 1.0;
  p2.n = 30;
  undefined.n = 100;
  EXPECT_DOUBLE_EQ(*weighted_mean_kappa({p1, p2, undefined}), (5.0 + 30.0) / 40.0);
  EXPECT_FALSE(weighted_mean_kappa({undefined}));
}

TEST(Eval, VerdictParsing) {
  const auto v = parse_verdict("x", JudgeProtocol::kConsistency, "  Consistent: fits.");
  EXPECT_EQ(v.verdict, Verdict::kConsistent);
  EXPECT_EQ(v.rationale, "fits.");
  EXPECT_EQ(parse_verdict("x", JudgeProtocol::kPromptValidation, "NO").verdict,
            Verdict::kIncorrect);
  EXPECT_THROW(parse_verdict("x", JudgeProtocol::kConsistency, "Maybe so"), ParseError);
  EXPECT_THROW(parse_verdict("x", JudgeProtocol::kConsistency, ""), ParseError);
  EXPECT_EQ(to_string(Verdict::kInconsistent), "inconsistent");
}

TEST(Eval, PromptValidationWithMockJudges) {
  const KnowledgeGraph g = small_graph(1);
  ConstantJudge yes(true);
  const ProtocolReport all = prompt_validation(g, prompts(4), yes);
  EXPECT_EQ(*all.rate, 1.0);
  EXPECT_EQ(all.judged, 4u);
  EXPECT_NE(all.items[0].question.find("aspirin Treats stroke"), std::string::npos);

  AlternatingJudge alt;
  EXPECT_EQ(*prompt_validation(g, prompts(6), alt).rate, 0.5);

  FlakyJudge flaky;
  const ProtocolReport f = prompt_validation(g, prompts(3), flaky);
  EXPECT_EQ(f.failed, 1u);
  EXPECT_EQ(f.judged, 2u);
  EXPECT_EQ(*f.rate, 1.0);
  EXPECT_EQ(f.items[1].error, "timeout");

  EXPECT_THROW(prompt_validation(g, {}, yes), Error);
}

TEST(Eval, ConsistencyClampsAndIsDeterministic) {
  const KnowledgeGraph g = small_graph(3);
  ConstantJudge yes(true);
  const ProtocolReport r = consistency_check(g, 100, yes, 4);
  EXPECT_EQ(r.judged, 3u);
  EXPECT_EQ(*r.rate, 1.0);
  EXPECT_TRUE(r.flagged_edges.empty());

  ConstantJudge no(false);
  const ProtocolReport bad = consistency_check(g, 2, no, 4);
  EXPECT_EQ(bad.judged, 2u);
  EXPECT_EQ(bad.flagged_edges.size(), 2u);

  const KnowledgeGraph golden = golden_graph();
  EXPECT_EQ(sample_edges(golden, 10, 5), sample_edges(golden, 10, 5));
  EXPECT_NE(sample_edges(golden, 10, 5), sample_edges(golden, 10, 6));
}

TEST(Eval, SamplePrioritizesDiseasesAndTreatments) {
  const KnowledgeGraph g = golden_graph();
  std::size_t priority = 0;
  for (const auto& e : g.edges()) {
    const NodeType h = g.node(e.head).type, t = g.node(e.tail).type;
    priority += h == NodeType::kDiseases || t == NodeType::kDiseases ||
                h == NodeType::kTreatments || t == NodeType::kTreatments;
  }
  ASSERT_GT(priority, 5u);
  for (std::size_t idx : sample_edges(g, 5, 1)) {
    const Edge& e = g.edges()[idx];
    const NodeType h = g.node(e.head).type, t = g.node(e.tail).type;
    EXPECT_TRUE(h == NodeType::kDiseases || t == NodeType::kDiseases ||
                h == NodeType::kTreatments || t == NodeType::kTreatments);
  }
}

TEST(Eval, RecordedJudgeFixtures) {
  const KnowledgeGraph g = golden_graph();
  RecordedJudge judge = RecordedJudge::from_file(kData / "fixtures" / "judge_responses.json");
  const auto ps = load_prompts(kData / "fixtures" / "prompts.tsv");
  ASSERT_EQ(ps.size(), 10u);
  const ProtocolReport pv = prompt_validation(g, ps, judge);
  EXPECT_EQ(pv.judged, 10u);
  EXPECT_DOUBLE_EQ(*pv.rate, 0.9);

  const ProtocolReport cc = consistency_check(g, 60, judge, 7);
  EXPECT_EQ(cc.judged, 55u);
  EXPECT_EQ(cc.positive, 52u);
  EXPECT_EQ(cc.failed, 1u);
  EXPECT_EQ(cc.flagged_edges.size(), 3u);
}

TEST(Eval, GraphAnswerAndLlmJudge) {
  const KnowledgeGraph g = small_graph(2);
  EXPECT_EQ(graph_answer(g, "Stroke", "TPA"), "tpa Treats stroke");
  EXPECT_EQ(graph_answer(g, "stroke", "headache"), "no relation found");
  EXPECT_NE(edge_neighborhood(g, 0).find("tpa Treats stroke"), std::string::npos);

  EchoLlm llm;
  LlmJudge judge(llm);
  const JudgeVerdict v = judge.judge({"edge-0", JudgeProtocol::kConsistency, "aspirin Treats stroke"});
  EXPECT_EQ(v.verdict, Verdict::kInconsistent);
  EXPECT_EQ(v.rationale, "the relation is reversed.");
  EXPECT_NE(llm.last.find("aspirin Treats stroke"), std::string::npos);
}
