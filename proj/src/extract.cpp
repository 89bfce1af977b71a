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

#include "medkg/extract.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "json.hpp"
#include "medkg/error.hpp"
#include "medkg/text.hpp"

namespace medkg {
namespace {

using nlohmann::json;

std::vector<Span> token_spans(const std::string& text) {
  std::vector<Span> spans;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    const std::size_t start = i;
    while (i < text.size() && text[i] != ' ') ++i;
    if (i > start) spans.push_back({start, i});
  }
  return spans;
}

bool at_token_boundary(const std::string& text, std::size_t start,
                       std::size_t end) {
  return (start == 0 || text[start - 1] == ' ') &&
         (end == text.size() || text[end] == ' ');
}

bool overlaps(const Span& a, const Span& b) {
  return a.start < b.end && b.start < a.end;
}

std::string fragment(const std::string& s) {
  constexpr std::size_t kMax = 120;
  return s.size() <= kMax ? s : s.substr(0, kMax) + "...";
}

std::vector<std::size_t> mentions_with_surface(
    const std::vector<Mention>& mentions, const std::string& surface) {
  const std::string key = clean_text(surface, {}).text;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mentions.size(); ++i) {
    if (mentions[i].surface == key) out.push_back(i);
  }
  return out;
}

// Picks the closest (head, tail) occurrence pair, preferring pairs that share
// a sentence.
std::optional<std::pair<std::size_t, std::size_t>> resolve_pair(
    const PreparedDocument& doc, const std::vector<Mention>& mentions,
    const std::vector<std::size_t>& heads,
    const std::vector<std::size_t>& tails) {
  std::optional<std::pair<std::size_t, std::size_t>> best;
  std::pair<int, std::size_t> best_key{2, 0};
  for (std::size_t h : heads) {
    for (std::size_t t : tails) {
      if (h == t) continue;
      const Span& hs = mentions[h].span;
      const Span& ts = mentions[t].span;
      const int cross =
          doc.sentence_of(hs.start) == doc.sentence_of(ts.start) ? 0 : 1;
      const std::size_t dist =
          hs.start > ts.start ? hs.start - ts.start : ts.start - hs.start;
      const std::pair<int, std::size_t> key{cross, dist};
      if (!best || key < best_key) {
        best = {h, t};
        best_key = key;
      }
    }
  }
  return best;
}

json mention_to_json(const Mention& m) {
  return {{"surface", m.surface},
          {"type", std::string(to_string(m.type))},
          {"doc_id", m.doc_id},
          {"span", {m.span.start, m.span.end}}};
}

Mention mention_from_json(const json& j) {
  Mention m;
  m.surface = j.at("surface").get<std::string>();
  const auto type = parse_node_type(j.at("type").get<std::string>());
  if (!type) throw Error("unknown node type " + j.at("type").dump());
  m.type = *type;
  m.doc_id = j.at("doc_id").get<std::string>();
  m.span = {j.at("span").at(0).get<std::size_t>(),
            j.at("span").at(1).get<std::size_t>()};
  return m;
}

template <typename T, typename F>
std::vector<T> load_jsonl(const std::filesystem::path& path, F&& convert) {
  std::istringstream in(read_file(path));
  std::vector<T> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      out.push_back(convert(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(path.filename().string() + ": " + e.what(), lineno);
    } catch (const Error& e) {
      throw ParseError(path.filename().string() + ": " + e.what(), lineno);
    }
  }
  return out;
}

}  // namespace

std::vector<Mention> extract_entities(const PreparedDocument& doc,
                                      Extractor& extractor,
                                      RejectionTally* tally) {
  RejectionTally local;
  std::vector<RawMention> raw = extractor.find_entities(doc);
  std::vector<Mention> out;
  std::vector<Span> claimed;

  // Explicit spans first, then surface lookups from longest to shortest so a
  // longer mention claims its text before any shorter one nested in it.
  std::stable_sort(raw.begin(), raw.end(),
                   [](const RawMention& a, const RawMention& b) {
                     if (a.span.has_value() != b.span.has_value()) {
                       return a.span.has_value();
                     }
                     return a.surface.size() > b.surface.size();
                   });

  for (const auto& r : raw) {
    const auto type = parse_node_type(r.type);
    if (!type) {
      ++local.mentions;
      continue;
    }
    if (r.span) {
      const Span sp = *r.span;
      if (sp.start >= sp.end || sp.end > doc.text.size() ||
          doc.text.compare(sp.start, sp.end - sp.start, r.surface) != 0) {
        ++local.mentions;
        continue;
      }
      out.push_back({r.surface, *type, doc.doc_id, sp});
      claimed.push_back(sp);
      continue;
    }
    const std::string needle = clean_text(r.surface, {}).text;
    bool found = false;
    if (!needle.empty()) {
      std::size_t pos = doc.text.find(needle);
      while (pos != std::string::npos) {
        const Span sp{pos, pos + needle.size()};
        if (at_token_boundary(doc.text, sp.start, sp.end)) {
          found = true;
          const bool taken =
              std::any_of(claimed.begin(), claimed.end(),
                          [&](const Span& c) { return overlaps(c, sp); });
          if (!taken) {
            out.push_back({needle, *type, doc.doc_id, sp});
            claimed.push_back(sp);
          }
        }
        pos = doc.text.find(needle, pos + 1);
      }
    }
    if (!found) ++local.mentions;
  }

  std::sort(out.begin(), out.end(), [](const Mention& a, const Mention& b) {
    return std::tie(a.span, a.type) < std::tie(b.span, b.type);
  });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (tally) *tally += local;
  return out;
}

std::vector<CandidateTriple> extract_relations(
    const PreparedDocument& doc, const std::vector<Mention>& mentions,
    Extractor& extractor, RejectionTally* tally) {
  RejectionTally local;
  std::vector<CandidateTriple> out;
  if (mentions.empty()) return out;
  for (const auto& r : extractor.find_relations(doc, mentions)) {
    const auto edge = parse_edge_type(r.edge);
    if (!edge) {
      ++local.triples;
      continue;
    }
    std::optional<std::pair<std::size_t, std::size_t>> pair;
    if (r.head_index && r.tail_index) {
      if (*r.head_index < mentions.size() && *r.tail_index < mentions.size() &&
          *r.head_index != *r.tail_index) {
        pair = {*r.head_index, *r.tail_index};
      }
    } else {
      pair = resolve_pair(doc, mentions, mentions_with_surface(mentions, r.head),
                          mentions_with_surface(mentions, r.tail));
    }
    const double conf = r.confidence.value_or(1.0);
    if (!pair || !(conf >= 0.0 && conf <= 1.0)) {
      ++local.triples;
      continue;
    }
    CandidateTriple t;
    t.head = mentions[pair->first];
    t.edge = *edge;
    t.tail = mentions[pair->second];
    t.confidence = conf;
    t.attributes = r.attributes;
    t.evidence = {doc.doc_id, doc.sentence_of(t.head.span.start)};
    out.push_back(std::move(t));
  }
  std::sort(out.begin(), out.end(),
            [](const CandidateTriple& a, const CandidateTriple& b) {
              return std::tie(a.head.span, a.tail.span, a.edge) <
                     std::tie(b.head.span, b.tail.span, b.edge);
            });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const CandidateTriple& a, const CandidateTriple& b) {
                          return a.head.span == b.head.span &&
                                 a.tail.span == b.tail.span && a.edge == b.edge;
                        }),
            out.end());
  if (tally) *tally += local;
  return out;
}

void Gazetteer::add(std::string_view term, NodeType type) {
  const std::string key = clean_text(term, stopwords_).text;
  if (key.empty()) {
    throw Error("gazetteer term '" + std::string(term) +
                "' is empty after cleaning");
  }
  const auto [it, inserted] = terms_.emplace(key, type);
  if (!inserted && it->second != type) {
    throw Error("gazetteer term '" + key + "' mapped to both " +
                std::string(to_string(it->second)) + " and " +
                std::string(to_string(type)));
  }
  max_tokens_ = std::max(max_tokens_, tokenize(key).size());
}

std::optional<NodeType> Gazetteer::lookup(
    const std::string& cleaned_term) const {
  const auto it = terms_.find(cleaned_term);
  if (it == terms_.end()) return std::nullopt;
  return it->second;
}

Gazetteer load_gazetteer(const std::filesystem::path& path,
                         const StopwordSet& stopwords) {
  Gazetteer g(stopwords);
  for (const auto& row : read_tsv(path)) {
    if (row.fields.size() < 2) {
      throw ParseError("gazetteer row needs term and type", row.line);
    }
    const auto type = parse_node_type(row.fields[1]);
    if (!type) {
      throw ParseError("unknown node type '" + row.fields[1] + "'", row.line);
    }
    try {
      g.add(row.fields[0], *type);
    } catch (const Error& e) {
      throw ParseError(e.what(), row.line);
    }
  }
  return g;
}

PatternRule make_pattern(std::string_view pattern, EdgeType edge,
                         const StopwordSet& stopwords,
                         std::optional<double> confidence) {
  std::string p = trim(pattern);
  PatternRule rule;
  rule.edge = edge;
  rule.confidence = confidence;
  if (p.rfind("<Y>", 0) == 0) rule.reversed = true;
  for (const char* ph : {"<X>", "<Y>"}) {
    for (std::size_t pos; (pos = p.find(ph)) != std::string::npos;) {
      p.replace(pos, 3, " ");
    }
  }
  rule.phrase = clean_text(p, stopwords).text;
  if (rule.phrase.empty()) {
    throw Error("pattern '" + std::string(pattern) +
                "' has no content words after cleaning");
  }
  if (confidence && !(*confidence >= 0.0 && *confidence <= 1.0)) {
    throw Error("pattern confidence outside [0, 1]");
  }
  return rule;
}

std::vector<PatternRule> load_patterns(const std::filesystem::path& path,
                                       const StopwordSet& stopwords) {
  std::vector<PatternRule> rules;
  for (const auto& row : read_tsv(path)) {
    if (row.fields.size() < 2) {
      throw ParseError("pattern row needs pattern and edge type", row.line);
    }
    const auto edge = parse_edge_type(row.fields[1]);
    if (!edge) {
      throw ParseError("unknown edge type '" + row.fields[1] + "'", row.line);
    }
    std::optional<double> conf;
    try {
      if (row.fields.size() > 2 && !trim(row.fields[2]).empty()) {
        conf = parse_double(row.fields[2]);
      }
      rules.push_back(make_pattern(row.fields[0], *edge, stopwords, conf));
    } catch (const Error& e) {
      throw ParseError(e.what(), row.line);
    }
  }
  return rules;
}

std::vector<RawMention> DeterministicExtractor::find_entities(
    const PreparedDocument& doc) {
  std::vector<RawMention> out;
  const std::vector<Span> toks = token_spans(doc.text);
  std::size_t i = 0;
  while (i < toks.size()) {
    const std::size_t sentence = doc.sentence_of(toks[i].start);
    bool matched = false;
    const std::size_t longest =
        std::min(gazetteer_.max_tokens(), toks.size() - i);
    for (std::size_t len = longest; len >= 1; --len) {
      const Span sp{toks[i].start, toks[i + len - 1].end};
      if (doc.sentence_of(toks[i + len - 1].start) != sentence) continue;
      const std::string key = doc.text.substr(sp.start, sp.end - sp.start);
      if (const auto type = gazetteer_.lookup(key)) {
        out.push_back({key, std::string(to_string(*type)), sp});
        i += len;
        matched = true;
        break;
      }
    }
    if (!matched) ++i;
  }
  return out;
}

std::vector<RawTriple> DeterministicExtractor::find_relations(
    const PreparedDocument& doc, const std::vector<Mention>& mentions) {
  std::vector<RawTriple> out;
  for (std::size_t k = 0; k + 1 < mentions.size(); ++k) {
    const Mention& a = mentions[k];
    const Mention& b = mentions[k + 1];
    if (b.span.start < a.span.end) continue;
    if (doc.sentence_of(a.span.start) != doc.sentence_of(b.span.start)) {
      continue;
    }
    const std::string between =
        trim(std::string_view(doc.text).substr(a.span.end,
                                               b.span.start - a.span.end));
    for (const auto& rule : rules_) {
      if (rule.phrase != between) continue;
      RawTriple t;
      t.head_index = rule.reversed ? k + 1 : k;
      t.tail_index = rule.reversed ? k : k + 1;
      t.edge = std::string(to_string(rule.edge));
      t.confidence = rule.confidence;
      out.push_back(std::move(t));
    }
  }
  return out;
}

std::string build_llm_prompt(const PreparedDocument& doc) {
  std::string node_types;
  for (NodeType t : all_node_types()) {
    if (!node_types.empty()) node_types += ", ";
    node_types += to_string(t);
  }
  std::string edge_types;
  for (EdgeType t : all_edge_types()) {
    if (!edge_types.empty()) edge_types += ", ";
    edge_types += to_string(t);
  }
  std::string p;
  p += "You extract a biomedical knowledge graph from text.\n";
  p += "Entity types (use exactly one of these names): " + node_types + "\n";
  p += "Relation types (use exactly one of these names): " + edge_types +
       "\n";
  p += "Copy every entity surface verbatim from the text.\n";
  p += "Answer with a single JSON object and nothing else, in this form:\n";
  p += "{\"mentions\": [{\"surface\": \"...\", \"type\": \"...\"}],\n";
  p += " \"triples\": [{\"head\": \"...\", \"edge\": \"...\", \"tail\": "
       "\"...\", \"confidence\": 0.0, \"attributes\": {}}]}\n";
  p += "Optional attributes are short strings such as intensity or "
       "frequency.\n";
  p += "Text (document " + doc.doc_id + "):\n";
  p += doc.text;
  p += "\n";
  return p;
}

LlmExtraction parse_llm_response(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception&) {
    throw ParseError("response is not a JSON object: " + fragment(text));
  }
  if (!j.is_object() || !j.contains("mentions") || !j.contains("triples") ||
      !j.at("mentions").is_array() || !j.at("triples").is_array()) {
    throw ParseError(
        "response lacks \"mentions\"/\"triples\" arrays: " + fragment(text));
  }
  const auto is_str = [](const json& o, const char* key) {
    return o.contains(key) && o.at(key).is_string();
  };
  LlmExtraction out;
  for (const auto& m : j.at("mentions")) {
    if (!m.is_object() || !is_str(m, "surface") || !is_str(m, "type")) {
      throw ParseError("malformed mention: " + fragment(m.dump()));
    }
    RawMention rm{m.at("surface").get<std::string>(),
                  m.at("type").get<std::string>(), std::nullopt};
    if (!parse_node_type(rm.type)) {
      ++out.rejected.mentions;
      continue;
    }
    out.mentions.push_back(std::move(rm));
  }
  for (const auto& t : j.at("triples")) {
    if (!t.is_object() || !is_str(t, "head") || !is_str(t, "edge") ||
        !is_str(t, "tail")) {
      throw ParseError("malformed triple: " + fragment(t.dump()));
    }
    RawTriple rt;
    rt.head = t.at("head").get<std::string>();
    rt.edge = t.at("edge").get<std::string>();
    rt.tail = t.at("tail").get<std::string>();
    if (t.contains("confidence")) {
      if (!t.at("confidence").is_number()) {
        throw ParseError("non-numeric confidence: " + fragment(t.dump()));
      }
      rt.confidence = t.at("confidence").get<double>();
    }
    if (t.contains("attributes")) {
      const auto& attrs = t.at("attributes");
      if (!attrs.is_object()) {
        throw ParseError("attributes must be an object: " +
                         fragment(t.dump()));
      }
      for (const auto& [k, v] : attrs.items()) {
        if (!v.is_string()) {
          throw ParseError("attribute values must be strings: " +
                           fragment(t.dump()));
        }
        rt.attributes[k] = v.get<std::string>();
      }
    }
    if (!parse_edge_type(rt.edge)) {
      ++out.rejected.triples;
      continue;
    }
    out.triples.push_back(std::move(rt));
  }
  return out;
}

const LlmExtraction& LlmExtractor::response_for(const PreparedDocument& doc) {
  auto it = cache_.find(doc.doc_id);
  if (it == cache_.end()) {
    LlmExtraction parsed =
        parse_llm_response(client_.complete(build_llm_prompt(doc)));
    rejected_ += parsed.rejected;
    it = cache_.emplace(doc.doc_id, std::move(parsed)).first;
  }
  return it->second;
}

std::vector<RawMention> LlmExtractor::find_entities(
    const PreparedDocument& doc) {
  if (doc.text.empty()) return {};
  return response_for(doc).mentions;
}

std::vector<RawTriple> LlmExtractor::find_relations(
    const PreparedDocument& doc, const std::vector<Mention>&) {
  if (doc.text.empty()) return {};
  return response_for(doc).triples;
}

void save_mentions(const std::vector<Mention>& mentions,
                   const std::filesystem::path& path) {
  std::string out;
  for (const auto& m : mentions) out += mention_to_json(m).dump() + "\n";
  write_file(path, out);
}

std::vector<Mention> load_mentions(const std::filesystem::path& path) {
  return load_jsonl<Mention>(path, mention_from_json);
}

void save_candidates(const std::vector<CandidateTriple>& triples,
                     const std::filesystem::path& path) {
  std::string out;
  for (const auto& t : triples) {
    json j;
    j["head"] = mention_to_json(t.head);
    j["edge"] = std::string(to_string(t.edge));
    j["tail"] = mention_to_json(t.tail);
    j["confidence"] = t.confidence;
    j["attributes"] = t.attributes;
    j["evidence"] = {t.evidence.doc_id, t.evidence.sentence};
    out += j.dump() + "\n";
  }
  write_file(path, out);
}

std::vector<CandidateTriple> load_candidates(
    const std::filesystem::path& path) {
  return load_jsonl<CandidateTriple>(path, [](const json& j) {
    CandidateTriple t;
    t.head = mention_from_json(j.at("head"));
    const auto edge = parse_edge_type(j.at("edge").get<std::string>());
    if (!edge) throw Error("unknown edge type " + j.at("edge").dump());
    t.edge = *edge;
    t.tail = mention_from_json(j.at("tail"));
    t.confidence = j.at("confidence").get<double>();
    t.attributes =
        j.value("attributes", std::map<std::string, std::string>{});
    t.evidence = {j.at("evidence").at(0).get<std::string>(),
                  j.at("evidence").at(1).get<std::size_t>()};
    return t;
  });
}

}  // namespace medkg
