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

#include "medkg/eval.hpp"

#include <algorithm>
#include <cctype>

#include "json.hpp"
#include "medkg/error.hpp"
#include "medkg/text.hpp"

namespace medkg {

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::optional<double> f1_of(double p, double r) {
  if (p + r == 0.0) return std::nullopt;
  return 2.0 * p * r / (p + r);
}

bool is_positive(Verdict v) {
  return v == Verdict::kConsistent || v == Verdict::kCorrect;
}

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.uniform_index(i)]);
  }
}

std::string edge_statement(const KnowledgeGraph& g, const Edge& e) {
  return g.node(e.head).canonical_name + " " + std::string(to_string(e.type)) +
         " " + g.node(e.tail).canonical_name;
}

void run_item(Judge& judge, JudgeRequest req, ProtocolReport& report) {
  ItemOutcome item{req.item_id, req.text, std::nullopt, {}};
  try {
    item.verdict = judge.judge(req);
    ++report.judged;
    if (is_positive(item.verdict->verdict)) ++report.positive;
  } catch (const std::exception& e) {
    item.error = e.what();
    ++report.failed;
  }
  report.items.push_back(std::move(item));
}

}  // namespace

ClassificationMetrics classification_metrics(const ConfusionCounts& c) {
  ClassificationMetrics m;
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  if (m.precision && m.recall) m.f1 = f1_of(*m.precision, *m.recall);
  if (c.tn) m.accuracy = ratio(c.tp + *c.tn, c.tp + *c.tn + c.fp + c.fn);
  return m;
}

ClassificationMetrics classification_metrics(const PrecisionRecall& pr) {
  if (pr.precision < 0.0 || pr.precision > 1.0 || pr.recall < 0.0 ||
      pr.recall > 1.0) {
    throw std::invalid_argument("precision and recall must lie in [0, 1]");
  }
  ClassificationMetrics m;
  m.precision = pr.precision;
  m.recall = pr.recall;
  m.f1 = f1_of(pr.precision, pr.recall);
  return m;
}

ConfusionCounts compare_sets(const std::set<std::string>& predicted,
                             const std::set<std::string>& gold) {
  ConfusionCounts c;
  for (const auto& p : predicted) (gold.count(p) ? c.tp : c.fp)++;
  for (const auto& g : gold) {
    if (!predicted.count(g)) ++c.fn;
  }
  return c;
}

std::optional<double> weighted_mean_kappa(const std::vector<KappaResult>& pairs) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& p : pairs) {
    if (!p.kappa) continue;
    num += static_cast<double>(p.n) * *p.kappa;
    den += static_cast<double>(p.n);
  }
  if (den == 0.0) return std::nullopt;
  return num / den;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kConsistent: return "consistent";
    case Verdict::kInconsistent: return "inconsistent";
    case Verdict::kCorrect: return "correct";
    case Verdict::kIncorrect: return "incorrect";
  }
  return "?";
}

JudgeVerdict parse_verdict(const std::string& item_id, JudgeProtocol protocol,
                           const std::string& response) {
  const std::string text = trim(response);
  std::size_t end = 0;
  while (end < text.size() && std::isalpha(static_cast<unsigned char>(text[end]))) {
    ++end;
  }
  const std::string first = to_lower(text.substr(0, end));
  bool positive;
  if (first == "yes" || first == "correct" || first == "consistent" ||
      first == "true") {
    positive = true;
  } else if (first == "no" || first == "incorrect" || first == "inconsistent" ||
             first == "false") {
    positive = false;
  } else {
    throw ParseError("judge response for " + item_id +
                     " does not start with a yes/no verdict: '" +
                     text.substr(0, 60) + "'");
  }
  JudgeVerdict v;
  v.item_id = item_id;
  if (protocol == JudgeProtocol::kConsistency) {
    v.verdict = positive ? Verdict::kConsistent : Verdict::kInconsistent;
  } else {
    v.verdict = positive ? Verdict::kCorrect : Verdict::kIncorrect;
  }
  std::string rest = trim(text.substr(end));
  while (!rest.empty() && (std::ispunct(static_cast<unsigned char>(rest[0])))) {
    rest = trim(rest.substr(1));
  }
  v.rationale = rest;
  return v;
}

JudgeVerdict LlmJudge::judge(const JudgeRequest& request) {
  std::string prompt =
      "You are reviewing a biomedical knowledge graph. Answer with \"yes\" or "
      "\"no\" as the first word, followed by a one-sentence rationale.\n\n";
  prompt += request.text;
  return parse_verdict(request.item_id, request.protocol, client_.complete(prompt));
}

RecordedJudge RecordedJudge::from_file(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError(path.string() + ": expected a JSON object");
  std::map<std::string, std::string> responses;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_string()) {
      throw ParseError(path.string() + ": response for " + k + " is not a string");
    }
    responses[k] = v.get<std::string>();
  }
  return RecordedJudge(std::move(responses));
}

JudgeVerdict RecordedJudge::judge(const JudgeRequest& request) {
  const auto it = responses_.find(request.item_id);
  if (it == responses_.end()) {
    throw RemoteError("no recorded judge response for " + request.item_id);
  }
  return parse_verdict(request.item_id, request.protocol, it->second);
}

std::vector<ValidationPrompt> load_prompts(const std::filesystem::path& path) {
  std::vector<ValidationPrompt> out;
  for (const auto& row : read_tsv(path)) {
    if (row.fields.size() != 2) {
      throw ParseError("prompt line needs text <tab> head|tail", row.line);
    }
    const auto pair = split(row.fields[1], '|');
    if (pair.size() != 2 || trim(pair[0]).empty() || trim(pair[1]).empty()) {
      throw ParseError("entity pair must be head|tail", row.line);
    }
    out.push_back({trim(row.fields[0]), to_lower(trim(pair[0])),
                   to_lower(trim(pair[1]))});
  }
  return out;
}

std::string graph_answer(const KnowledgeGraph& g, const std::string& head,
                         const std::string& tail) {
  const std::string h = to_lower(trim(head));
  const std::string t = to_lower(trim(tail));
  std::vector<std::string> facts;
  for (const auto& e : g.edges()) {
    const auto& hn = g.node(e.head).canonical_name;
    const auto& tn = g.node(e.tail).canonical_name;
    if ((hn == h && tn == t) || (hn == t && tn == h)) {
      facts.push_back(edge_statement(g, e));
    }
  }
  if (facts.empty()) return "no relation found";
  return join(facts, "; ");
}

ProtocolReport prompt_validation(const KnowledgeGraph& g,
                                 const std::vector<ValidationPrompt>& prompts,
                                 Judge& judge) {
  if (prompts.empty()) throw Error("prompt validation needs at least one prompt");
  ProtocolReport report;
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    const auto& p = prompts[i];
    JudgeRequest req;
    req.item_id = "prompt-" + std::to_string(i);
    req.protocol = JudgeProtocol::kPromptValidation;
    req.text = "Question: " + p.text + "\nGraph answer: " +
               graph_answer(g, p.head, p.tail) +
               "\nIs the graph answer medically correct?";
    run_item(judge, std::move(req), report);
  }
  report.rate = ratio(report.positive, report.judged);
  return report;
}

std::vector<std::size_t> sample_edges(const KnowledgeGraph& g,
                                      std::size_t sample_size,
                                      std::uint64_t seed) {
  std::vector<std::size_t> priority;
  std::vector<std::size_t> rest;
  const auto key_type = [](NodeType t) {
    return t == NodeType::kDiseases || t == NodeType::kTreatments;
  };
  for (std::size_t i = 0; i < g.edges().size(); ++i) {
    const Edge& e = g.edges()[i];
    const bool p = key_type(g.node(e.head).type) || key_type(g.node(e.tail).type);
    (p ? priority : rest).push_back(i);
  }
  Rng rng(seed);
  shuffle(priority, rng);
  shuffle(rest, rng);
  priority.insert(priority.end(), rest.begin(), rest.end());
  if (priority.size() > sample_size) priority.resize(sample_size);
  return priority;
}

std::string edge_neighborhood(const KnowledgeGraph& g, std::size_t edge) {
  const Edge& e = g.edges().at(edge);
  std::string out = "Relationship: " + edge_statement(g, e) + "\n";
  std::vector<std::string> context;
  for (const auto& other : g.edges()) {
    if (&other == &e) continue;
    if (other.head == e.head || other.tail == e.head || other.head == e.tail ||
        other.tail == e.tail) {
      context.push_back(edge_statement(g, other));
    }
  }
  if (!context.empty()) {
    out += "Neighboring relationships:\n";
    for (const auto& c : context) out += "- " + c + "\n";
  }
  return out;
}

ProtocolReport consistency_check(const KnowledgeGraph& g,
                                 std::size_t sample_size, Judge& judge,
                                 std::uint64_t seed) {
  if (g.edges().empty()) throw Error("consistency check needs at least one edge");
  ProtocolReport report;
  for (std::size_t idx : sample_edges(g, sample_size, seed)) {
    JudgeRequest req;
    req.item_id = "edge-" + std::to_string(idx);
    req.protocol = JudgeProtocol::kConsistency;
    req.text = edge_neighborhood(g, idx) +
               "Is this relationship consistent with its neighbors and with "
               "established medical knowledge?";
    run_item(judge, std::move(req), report);
    const auto& v = report.items.back().verdict;
    if (v && v->verdict == Verdict::kInconsistent) {
      report.flagged_edges.push_back(idx);
    }
  }
  report.rate = ratio(report.positive, report.judged);
  return report;
}

}  // namespace medkg
