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
#include <tuple>

#include "medkg/error.hpp"
#include "medkg/extract.hpp"

namespace fs = std::filesystem;
using namespace medkg;

namespace {

const fs::path kData = MEDKG_DATA_DIR;

PreparedDocument prepared(const std::string& abstract, const std::string& id = "d1") {
  Document d;
  d.id = id;
  d.abstract = abstract;
  return prepare_document(d, default_stopwords(), TextFields::kAbstract);
}

DeterministicExtractor bundled_extractor() {
  return DeterministicExtractor(
      load_gazetteer(kData / "gazetteer.tsv", default_stopwords()),
      load_patterns(kData / "patterns.tsv", default_stopwords()));
}

class CannedExtractor : public Extractor {
 public:
  std::vector<RawMention> mentions;
  std::vector<RawTriple> triples;
  std::string name() const override { return "canned"; }
  std::vector<RawMention> find_entities(const PreparedDocument&) override {
    return mentions;
  }
  std::vector<RawTriple> find_relations(const PreparedDocument&,
                                        const std::vector<Mention>&) override {
    return triples;
  }
};

class CannedLlm : public LlmClient {
 public:
  explicit CannedLlm(std::string reply) : reply_(std::move(reply)) {}
  std::string complete(const std::string& prompt) override {
    ++calls;
    last_prompt = prompt;
    return reply_;
  }
  int calls = 0;
  std::string last_prompt;

 private:
  std::string reply_;
};

using Row = std::tuple<std::string, std::string, std::string>;

std::vector<Row> rows(const std::vector<CandidateTriple>& ts) {
  std::vector<Row> out;
  for (const auto& t : ts) {
    out.emplace_back(t.head.surface, std::string(to_string(t.edge)), t.tail.surface);
  }
  return out;
}

}  // namespace

TEST(Extract, GazetteerMentions) {
  Gazetteer g(default_stopwords());
  g.add("hypertension", NodeType::kRiskFactors);
  g.add("stroke", NodeType::kDiseases);
  DeterministicExtractor ex(g, {});
  const PreparedDocument doc = prepared("Hypertension causes stroke.");
  const auto ms = extract_entities(doc, ex);
  ASSERT_EQ(ms.size(), 2u);
  EXPECT_EQ(ms[0].surface, "hypertension");
  EXPECT_EQ(ms[0].type, NodeType::kRiskFactors);
  EXPECT_EQ(ms[1].surface, "stroke");
  EXPECT_EQ(ms[1].type, NodeType::kDiseases);
  EXPECT_EQ(doc.text.substr(ms[1].span.start, ms[1].span.end - ms[1].span.start),
            "stroke");
}

TEST(Extract, LongestMatchWins) {
  auto ex = bundled_extractor();
  const auto ms = extract_entities(prepared("Ischemic stroke and stroke."), ex);
  ASSERT_EQ(ms.size(), 2u);
  EXPECT_EQ(ms[0].surface, "ischemic stroke");
  EXPECT_EQ(ms[1].surface, "stroke");
}

TEST(Extract, EmptyDocument) {
  auto ex = bundled_extractor();
  const PreparedDocument doc = prepared("");
  EXPECT_TRUE(extract_entities(doc, ex).empty());
  EXPECT_TRUE(extract_relations(doc, {}, ex).empty());
}

TEST(Extract, UnknownTypeIsTallied) {
  CannedExtractor ex;
  ex.mentions = {{"stroke", "Planet", std::nullopt}};
  RejectionTally tally;
  EXPECT_TRUE(extract_entities(prepared("Stroke outcomes."), ex, &tally).empty());
  EXPECT_EQ(tally.mentions, 1u);
}

TEST(Extract, SpanMustMatchSurface) {
  CannedExtractor ex;
  const PreparedDocument doc = prepared("Aspirin treats stroke.");
  ex.mentions = {{"aspirin", "Medications", Span{0, 7}},
                 {"stroke", "Diseases", Span{0, 6}},
                 {"missing", "Diseases", std::nullopt}};
  RejectionTally tally;
  const auto ms = extract_entities(doc, ex, &tally);
  ASSERT_EQ(ms.size(), 1u);
  EXPECT_EQ(ms[0].surface, "aspirin");
  EXPECT_EQ(tally.mentions, 2u);
}

TEST(Extract, TreatsRule) {
  auto ex = bundled_extractor();
  const PreparedDocument doc = prepared("Aspirin treats ischemic stroke.");
  const auto ms = extract_entities(doc, ex);
  const auto ts = extract_relations(doc, ms, ex);
  ASSERT_EQ(ts.size(), 1u);
  EXPECT_EQ(rows(ts)[0], Row("aspirin", "Treats", "ischemic stroke"));
  EXPECT_EQ(ts[0].confidence, 1.0);
  EXPECT_EQ(ts[0].evidence.doc_id, "d1");
}

TEST(Extract, PatternFixtureTenSentences) {
  const std::string text =
      "Hypertension causes stroke. "
      "Aspirin treats ischemic stroke. "
      "Headache is a symptom of hemorrhagic stroke. "
      "Smoking is a risk factor for stroke. "
      "The NIHSS score is a biomarker for ischemic stroke. "
      "Statins prevent stroke. "
      "Thrombectomy was conducted at Mayo Clinic. "
      "APOE interacts with fibrinogen. "
      "Transient ischemic attack can develop into stroke. "
      "Warfarin is used to treat atrial fibrillation. "
      "Neurologists reviewed aspirin and stroke outcomes.";
  auto ex = bundled_extractor();
  const PreparedDocument doc = prepared(text);
  const auto ts = extract_relations(doc, extract_entities(doc, ex), ex);
  const std::vector<Row> expected = {
      {"hypertension", "Causes", "stroke"},
      {"aspirin", "Treats", "ischemic stroke"},
      {"headache", "SymptomOf", "hemorrhagic stroke"},
      {"stroke", "HasRiskFactor", "smoking"},
      {"nihss score", "BiomarkerFor", "ischemic stroke"},
      {"statins", "Prevents", "stroke"},
      {"thrombectomy", "ConductedAt", "mayo clinic"},
      {"apoe", "InteractsWith", "fibrinogen"},
      {"stroke", "DevelopsFrom", "transient ischemic attack"},
      {"warfarin", "Treats", "atrial fibrillation"},
  };
  std::vector<Row> got = rows(ts);
  std::vector<Row> want = expected;
  std::sort(got.begin(), got.end());
  std::sort(want.begin(), want.end());
  EXPECT_EQ(got, want);

  for (const auto& t : ts) {
    if (t.edge == EdgeType::kDevelopsFrom) EXPECT_EQ(t.confidence, 0.9);
    if (t.edge == EdgeType::kHasRiskFactor) EXPECT_EQ(t.evidence.sentence, 3u);
  }
}

TEST(Extract, DeterministicAcrossCalls) {
  auto ex = bundled_extractor();
  const PreparedDocument doc = prepared("Hypertension causes stroke. Aspirin prevents stroke.");
  const auto a = extract_relations(doc, extract_entities(doc, ex), ex);
  const auto b = extract_relations(doc, extract_entities(doc, ex), ex);
  EXPECT_EQ(a, b);
}

TEST(Extract, NoRuleAcrossSentences) {
  auto ex = bundled_extractor();
  const PreparedDocument doc = prepared("Aspirin. Causes stroke.");
  EXPECT_TRUE(extract_relations(doc, extract_entities(doc, ex), ex).empty());
}

TEST(Extract, PatternValidation) {
  const PatternRule r =
      make_pattern("<Y> is a risk factor for <X>", EdgeType::kHasRiskFactor,
                   default_stopwords());
  EXPECT_TRUE(r.reversed);
  EXPECT_EQ(r.phrase, "risk factor");
  EXPECT_FALSE(make_pattern("treats", EdgeType::kTreats, default_stopwords()).reversed);
  EXPECT_THROW(make_pattern("<X> and <Y>", EdgeType::kTreats, default_stopwords()), Error);
  EXPECT_THROW(make_pattern("<X> treats <Y>", EdgeType::kTreats, default_stopwords(), 1.5),
               Error);
}

TEST(Extract, GazetteerConflicts) {
  Gazetteer g(default_stopwords());
  g.add("Stroke", NodeType::kDiseases);
  EXPECT_NO_THROW(g.add("stroke", NodeType::kDiseases));
  EXPECT_THROW(g.add("stroke", NodeType::kSymptoms), Error);
  EXPECT_THROW(g.add("and the", NodeType::kSymptoms), Error);
  EXPECT_EQ(g.lookup("stroke"), NodeType::kDiseases);
}

TEST(Extract, LlmSchemaFixture) {
  const std::string reply = R"({
    "mentions": [
      {"surface": "aspirin", "type": "Medications"},
      {"surface": "ischemic stroke", "type": "Diseases"},
      {"surface": "headache", "type": "Symptoms"}
    ],
    "triples": [
      {"head": "aspirin", "edge": "Treats", "tail": "ischemic stroke",
       "confidence": 0.8, "attributes": {"frequency": "daily"}},
      {"head": "headache", "edge": "symptom of", "tail": "ischemic stroke"}
    ]})";
  CannedLlm llm(reply);
  LlmExtractor ex(llm);
  const PreparedDocument doc =
      prepared("Aspirin treats ischemic stroke. Headache is a symptom of ischemic stroke.");
  const auto ms = extract_entities(doc, ex);
  EXPECT_EQ(ms.size(), 4u);
  const auto ts = extract_relations(doc, ms, ex);
  ASSERT_EQ(ts.size(), 2u);
  EXPECT_EQ(rows(ts)[0], Row("aspirin", "Treats", "ischemic stroke"));
  EXPECT_EQ(ts[0].confidence, 0.8);
  EXPECT_EQ(ts[0].attributes.at("frequency"), "daily");
  EXPECT_EQ(rows(ts)[1], Row("headache", "SymptomOf", "ischemic stroke"));
  EXPECT_EQ(ts[1].confidence, 1.0);
  EXPECT_EQ(llm.calls, 1);
  EXPECT_NE(llm.last_prompt.find("AnalyzedIn"), std::string::npos);
  EXPECT_NE(llm.last_prompt.find("Publications"), std::string::npos);
}

TEST(Extract, LlmRejectsFreeText) {
  EXPECT_THROW(parse_llm_response("Aspirin treats stroke."), ParseError);
  EXPECT_THROW(parse_llm_response(R"({"mentions": []})"), ParseError);
  EXPECT_THROW(
      parse_llm_response(R"({"mentions": [{"surface": 3, "type": "Genes"}], "triples": []})"),
      ParseError);
  try {
    parse_llm_response("I cannot comply with that request");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("I cannot comply"), std::string::npos);
  }
}

TEST(Extract, LlmUnknownEdgeIsTallied) {
  const LlmExtraction r = parse_llm_response(R"({
    "mentions": [{"surface": "aspirin", "type": "Medications"},
                 {"surface": "mars", "type": "Planet"}],
    "triples": [{"head": "aspirin", "edge": "cures", "tail": "stroke"}]})");
  EXPECT_EQ(r.mentions.size(), 1u);
  EXPECT_TRUE(r.triples.empty());
  EXPECT_EQ(r.rejected.triples, 1u);
  EXPECT_EQ(r.rejected.mentions, 1u);
}

TEST(Extract, ArtifactsRoundTrip) {
  auto ex = bundled_extractor();
  const PreparedDocument doc = prepared("Warfarin is used to treat atrial fibrillation.");
  const auto ms = extract_entities(doc, ex);
  auto ts = extract_relations(doc, ms, ex);
  ASSERT_EQ(ts.size(), 1u);
  ts[0].attributes["intensity"] = "high";
  const fs::path dir = fs::temp_directory_path();
  save_mentions(ms, dir / "medkg_mentions.jsonl");
  save_candidates(ts, dir / "medkg_candidates.jsonl");
  EXPECT_EQ(load_mentions(dir / "medkg_mentions.jsonl"), ms);
  EXPECT_EQ(load_candidates(dir / "medkg_candidates.jsonl"), ts);
  fs::remove(dir / "medkg_mentions.jsonl");
  fs::remove(dir / "medkg_candidates.jsonl");
}
