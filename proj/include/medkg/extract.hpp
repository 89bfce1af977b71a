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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "medkg/llm.hpp"
#include "medkg/preprocess.hpp"
#include "medkg/taxonomy.hpp"

namespace medkg {

// [start, end) character offsets into PreparedDocument::text.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  friend auto operator<=>(const Span&, const Span&) = default;
};

struct Mention {
  std::string surface;
  NodeType type = NodeType::kDiseases;
  std::string doc_id;
  Span span;
  friend bool operator==(const Mention&, const Mention&) = default;
};

struct Evidence {
  std::string doc_id;
  std::size_t sentence = 0;
  friend auto operator<=>(const Evidence&, const Evidence&) = default;
};

struct CandidateTriple {
  Mention head;
  EdgeType edge = EdgeType::kAssociatedWith;
  Mention tail;
  double confidence = 1.0;
  std::map<std::string, std::string> attributes;
  Evidence evidence;
  friend bool operator==(const CandidateTriple&,
                         const CandidateTriple&) = default;
};

// Items an extractor produced that were dropped (type outside the closed
// taxonomy, unresolvable span or endpoint, bad confidence).
struct RejectionTally {
  std::size_t mentions = 0;
  std::size_t triples = 0;
  RejectionTally& operator+=(const RejectionTally& o) {
    mentions += o.mentions;
    triples += o.triples;
    return *this;
  }
};

// Untyped extractor output, validated by extract_entities/extract_relations.
struct RawMention {
  std::string surface;
  std::string type;
  std::optional<Span> span;  // located by surface search when absent
};

struct RawTriple {
  // Either indices into the mention list or surfaces to resolve.
  std::optional<std::size_t> head_index;
  std::optional<std::size_t> tail_index;
  std::string head;
  std::string tail;
  std::string edge;
  std::optional<double> confidence;
  std::map<std::string, std::string> attributes;
};

class Extractor {
 public:
  virtual ~Extractor() = default;
  virtual std::string name() const = 0;
  virtual std::vector<RawMention> find_entities(
      const PreparedDocument& doc) = 0;
  virtual std::vector<RawTriple> find_relations(
      const PreparedDocument& doc, const std::vector<Mention>& mentions) = 0;
};

// Typed mentions sorted by span start. Unknown types and invalid spans are
// dropped and counted in `tally`.
std::vector<Mention> extract_entities(const PreparedDocument& doc,
                                      Extractor& extractor,
                                      RejectionTally* tally = nullptr);

// Typed triples between the given mentions, sorted by (head start, tail
// start, edge). Confidence defaults to 1.0.
std::vector<CandidateTriple> extract_relations(
    const PreparedDocument& doc, const std::vector<Mention>& mentions,
    Extractor& extractor, RejectionTally* tally = nullptr);

// Term -> NodeType dictionary, matched longest-first on token boundaries.
// Terms are cleaned with the same stopword set as the documents.
class Gazetteer {
 public:
  Gazetteer() = default;
  explicit Gazetteer(const StopwordSet& stopwords) : stopwords_(stopwords) {}

  // Throws when the cleaned term is empty or already mapped to another type.
  void add(std::string_view term, NodeType type);
  std::size_t size() const { return terms_.size(); }
  std::size_t max_tokens() const { return max_tokens_; }
  std::optional<NodeType> lookup(const std::string& cleaned_term) const;

 private:
  StopwordSet stopwords_;
  std::unordered_map<std::string, NodeType> terms_;
  std::size_t max_tokens_ = 0;
};

// TSV: term <tab> NodeType.
Gazetteer load_gazetteer(const std::filesystem::path& path,
                         const StopwordSet& stopwords);

// "<X> phrase <Y>" links X (head) to Y (tail); "<Y> phrase <X>" links them
// in reverse text order. A bare phrase means "<X> phrase <Y>".
struct PatternRule {
  std::string phrase;  // cleaned
  EdgeType edge = EdgeType::kAssociatedWith;
  bool reversed = false;
  std::optional<double> confidence;
};

PatternRule make_pattern(std::string_view pattern, EdgeType edge,
                         const StopwordSet& stopwords,
                         std::optional<double> confidence = std::nullopt);

// TSV: pattern <tab> EdgeType [<tab> confidence].
std::vector<PatternRule> load_patterns(const std::filesystem::path& path,
                                       const StopwordSet& stopwords);

// Offline extractor: gazetteer NER plus pattern rules applied to adjacent
// mentions of one sentence whose in-between text equals a rule phrase.
class DeterministicExtractor : public Extractor {
 public:
  DeterministicExtractor(Gazetteer gazetteer, std::vector<PatternRule> rules)
      : gazetteer_(std::move(gazetteer)), rules_(std::move(rules)) {}

  std::string name() const override { return "deterministic"; }
  std::vector<RawMention> find_entities(const PreparedDocument& doc) override;
  std::vector<RawTriple> find_relations(
      const PreparedDocument& doc,
      const std::vector<Mention>& mentions) override;

 private:
  Gazetteer gazetteer_;
  std::vector<PatternRule> rules_;
};

// Prompt asking a language model for mentions and triples restricted to the
// closed taxonomies, answered in the JSON schema parsed below.
std::string build_llm_prompt(const PreparedDocument& doc);

struct LlmExtraction {
  std::vector<RawMention> mentions;
  std::vector<RawTriple> triples;
  RejectionTally rejected;
};

// Accepts exactly one JSON object:
//   {"mentions": [{"surface": str, "type": NodeType}, ...],
//    "triples":  [{"head": str, "edge": EdgeType, "tail": str,
//                  "confidence"?: number, "attributes"?: {str: str}}, ...]}
// Structural violations throw ParseError carrying the offending fragment;
// entries with types outside the taxonomies are dropped and tallied.
LlmExtraction parse_llm_response(const std::string& text);

// Extractor backed by an LlmClient. One completion per document; the parsed
// response is reused for relation extraction.
class LlmExtractor : public Extractor {
 public:
  explicit LlmExtractor(LlmClient& client) : client_(client) {}

  std::string name() const override { return "llm"; }
  std::vector<RawMention> find_entities(const PreparedDocument& doc) override;
  std::vector<RawTriple> find_relations(
      const PreparedDocument& doc,
      const std::vector<Mention>& mentions) override;
  const RejectionTally& parse_rejections() const { return rejected_; }

 private:
  const LlmExtraction& response_for(const PreparedDocument& doc);

  LlmClient& client_;
  std::map<std::string, LlmExtraction> cache_;
  RejectionTally rejected_;
};

// JSONL persistence for extraction artifacts.
void save_mentions(const std::vector<Mention>& mentions,
                   const std::filesystem::path& path);
std::vector<Mention> load_mentions(const std::filesystem::path& path);
void save_candidates(const std::vector<CandidateTriple>& triples,
                     const std::filesystem::path& path);
std::vector<CandidateTriple> load_candidates(
    const std::filesystem::path& path);

}  // namespace medkg
