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
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "medkg/graph.hpp"
#include "medkg/llm.hpp"

namespace medkg {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::optional<std::size_t> tn;
};

// Unset members are undefined (zero denominator or missing tn).
struct ClassificationMetrics {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  std::optional<double> accuracy;
};

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

ClassificationMetrics classification_metrics(const ConfusionCounts& c);
// F1 from already-computed rates; undefined when p + r == 0.
ClassificationMetrics classification_metrics(const PrecisionRecall& pr);

// Set comparison of predicted against gold items.
ConfusionCounts compare_sets(const std::set<std::string>& predicted,
                             const std::set<std::string>& gold);

struct KappaResult {
  double p_o = 0.0;
  double p_e = 0.0;
  std::optional<double> kappa;  // unset when p_e == 1
  std::size_t n = 0;
};

// Two-rater Cohen's kappa over any ordered label type. Throws on empty or
// unequal-length inputs.
template <typename Label>
KappaResult cohen_kappa(const std::vector<Label>& a,
                        const std::vector<Label>& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("kappa raters labeled different item counts");
  }
  if (a.empty()) throw std::invalid_argument("kappa needs at least one item");
  std::map<Label, std::size_t> ca;
  std::map<Label, std::size_t> cb;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++ca[a[i]];
    ++cb[b[i]];
    if (a[i] == b[i]) ++agree;
  }
  const double n = static_cast<double>(a.size());
  KappaResult r;
  r.n = a.size();
  r.p_o = static_cast<double>(agree) / n;
  for (const auto& [label, count] : ca) {
    const auto it = cb.find(label);
    if (it == cb.end()) continue;
    r.p_e += (static_cast<double>(count) / n) *
             (static_cast<double>(it->second) / n);
  }
  if (r.p_e < 1.0) r.kappa = (r.p_o - r.p_e) / (1.0 - r.p_e);
  return r;
}

// Mean of pairwise kappas weighted by item counts; pairs with an undefined
// kappa are skipped. Unset when nothing remains.
std::optional<double> weighted_mean_kappa(const std::vector<KappaResult>& pairs);

enum class Verdict { kConsistent, kInconsistent, kCorrect, kIncorrect };
std::string_view to_string(Verdict v);

enum class JudgeProtocol { kPromptValidation, kConsistency };

struct JudgeRequest {
  std::string item_id;
  JudgeProtocol protocol = JudgeProtocol::kPromptValidation;
  std::string text;  // full question shown to the judge
};

struct JudgeVerdict {
  std::string item_id;
  Verdict verdict = Verdict::kCorrect;
  std::string rationale;
};

// External judge. Implementations throw on transport or parse failure.
class Judge {
 public:
  virtual ~Judge() = default;
  virtual JudgeVerdict judge(const JudgeRequest& request) = 0;
};

// Maps a free-text response to a verdict by its first token: yes / correct /
// consistent / true are positive, no / incorrect / inconsistent / false are
// negative. Anything else throws ParseError.
JudgeVerdict parse_verdict(const std::string& item_id, JudgeProtocol protocol,
                           const std::string& response);

// Judge backed by a language model client.
class LlmJudge : public Judge {
 public:
  explicit LlmJudge(LlmClient& client) : client_(client) {}
  JudgeVerdict judge(const JudgeRequest& request) override;

 private:
  LlmClient& client_;
};

// Replays responses from a JSON object {item_id: response text}. Unknown
// items throw RemoteError.
class RecordedJudge : public Judge {
 public:
  explicit RecordedJudge(std::map<std::string, std::string> responses)
      : responses_(std::move(responses)) {}
  static RecordedJudge from_file(const std::filesystem::path& path);
  JudgeVerdict judge(const JudgeRequest& request) override;

 private:
  std::map<std::string, std::string> responses_;
};

struct ItemOutcome {
  std::string item_id;
  std::string question;
  std::optional<JudgeVerdict> verdict;
  std::string error;  // set when the judge failed
};

struct ProtocolReport {
  std::optional<double> rate;  // positive / judged
  std::size_t positive = 0;
  std::size_t judged = 0;
  std::size_t failed = 0;
  std::vector<ItemOutcome> items;
  std::vector<std::size_t> flagged_edges;  // indices into graph.edges()
};

struct ValidationPrompt {
  std::string text;
  std::string head;
  std::string tail;
};

// One prompt per line: text <tab> head|tail.
std::vector<ValidationPrompt> load_prompts(const std::filesystem::path& path);

// The graph's answer for an entity pair: every edge between nodes named
// head and tail, in either direction.
std::string graph_answer(const KnowledgeGraph& g, const std::string& head,
                         const std::string& tail);

// Item ids are "prompt-<n>" (0-based).
ProtocolReport prompt_validation(const KnowledgeGraph& g,
                                 const std::vector<ValidationPrompt>& prompts,
                                 Judge& judge);

// Seeded sample of edge indices: edges with a Diseases or Treatments
// endpoint first (shuffled), then the rest (shuffled), truncated to
// min(sample_size, edge count).
std::vector<std::size_t> sample_edges(const KnowledgeGraph& g,
                                      std::size_t sample_size,
                                      std::uint64_t seed);

// The edge statement followed by the other edges incident to its endpoints.
std::string edge_neighborhood(const KnowledgeGraph& g, std::size_t edge);

// Item ids are "edge-<index>". Inconsistent edges are flagged.
ProtocolReport consistency_check(const KnowledgeGraph& g,
                                 std::size_t sample_size, Judge& judge,
                                 std::uint64_t seed);

}  // namespace medkg
