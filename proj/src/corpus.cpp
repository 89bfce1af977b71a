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

#include "medkg/corpus.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "medkg/error.hpp"
#include "medkg/text.hpp"

namespace medkg {
namespace {

using nlohmann::json;

Document document_from_json(const json& j) {
  if (!j.is_object()) throw Error("record is not an object");
  Document doc;
  doc.id = j.at("id").get<std::string>();
  doc.title = j.value("title", std::string());
  doc.abstract = j.value("abstract", std::string());
  if (j.contains("keywords")) {
    for (const auto& k : j.at("keywords")) {
      doc.keywords.insert(k.get<std::string>());
    }
  }
  doc.year = j.at("year").get<int>();
  doc.source = j.value("source", std::string("local"));
  return doc;
}

json document_to_json(const Document& doc) {
  json j;
  j["id"] = doc.id;
  j["title"] = doc.title;
  j["abstract"] = doc.abstract;
  j["keywords"] = json::array();
  for (const auto& k : doc.keywords) j["keywords"].push_back(k);
  j["year"] = doc.year;
  j["source"] = doc.source;
  return j;
}

// True when `needle` occurs as a contiguous run inside `haystack`.
bool contains_sequence(const std::vector<std::string>& haystack,
                       const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    bool ok = true;
    for (std::size_t j = 0; j < needle.size() && ok; ++j) {
      ok = haystack[i + j] == needle[j];
    }
    if (ok) return true;
  }
  return false;
}

}  // namespace

void validate_document(const Document& doc) {
  if (doc.id.empty()) throw Error("document id is empty");
  if (doc.title.empty() && doc.abstract.empty()) {
    throw Error("document " + doc.id + " has neither title nor abstract");
  }
  if (doc.year < 1900 || doc.year > 2100) {
    throw Error("document " + doc.id + " has year " +
                std::to_string(doc.year) + " outside [1900, 2100]");
  }
}

Corpus::Corpus(std::vector<Document> documents)
    : documents_(std::move(documents)) {
  std::unordered_set<std::string> seen;
  for (const auto& doc : documents_) {
    validate_document(doc);
    if (!seen.insert(doc.id).second) {
      throw Error("duplicate document id " + doc.id);
    }
    for (const auto& k : doc.keywords) ++manifest_[k];
  }
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read corpus " + path.string());
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    Document doc;
    try {
      doc = document_from_json(json::parse(line));
      validate_document(doc);
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed corpus record: ") + e.what(),
                       lineno);
    } catch (const Error& e) {
      throw ParseError(std::string("invalid corpus record: ") + e.what(),
                       lineno);
    }
    if (!seen.insert(doc.id).second) {
      throw ParseError("duplicate document id " + doc.id, lineno);
    }
    docs.push_back(std::move(doc));
  }
  return Corpus(std::move(docs));
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& doc : corpus.documents()) {
    out += document_to_json(doc).dump();
    out += '\n';
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  write_file(path, serialize_corpus(corpus));
}

Corpus filter_by_keywords(const Corpus& corpus,
                          const std::set<std::string>& terms) {
  if (terms.empty()) throw Error("keyword filter needs at least one term");
  std::vector<std::vector<std::string>> term_tokens;
  for (const auto& t : terms) {
    auto toks = word_tokens(t);
    if (!toks.empty()) term_tokens.push_back(std::move(toks));
  }
  std::vector<Document> kept;
  for (const auto& doc : corpus.documents()) {
    std::vector<std::vector<std::string>> fields = {word_tokens(doc.title),
                                                    word_tokens(doc.abstract)};
    for (const auto& k : doc.keywords) fields.push_back(word_tokens(k));
    bool hit = false;
    for (const auto& field : fields) {
      for (const auto& term : term_tokens) {
        if (contains_sequence(field, term)) {
          hit = true;
          break;
        }
      }
      if (hit) break;
    }
    if (hit) kept.push_back(doc);
  }
  return Corpus(std::move(kept));
}

Corpus apply_exclusions(const Corpus& corpus,
                        const std::set<std::string>& excluded_ids) {
  std::vector<Document> kept;
  for (const auto& doc : corpus.documents()) {
    if (!excluded_ids.count(doc.id)) kept.push_back(doc);
  }
  return Corpus(std::move(kept));
}

std::set<std::string> load_id_list(const std::filesystem::path& path) {
  std::set<std::string> ids;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    ids.insert(t);
  }
  return ids;
}

CorpusStats corpus_stats(const Corpus& corpus) {
  return {corpus.manifest(), corpus.size()};
}

std::vector<Document> fetch_remote(const std::string& query, int year_from,
                                   int year_to, LiteratureClient& client) {
  if (year_from > year_to) {
    throw Error("date range is not ordered: " + std::to_string(year_from) +
                " > " + std::to_string(year_to));
  }
  std::vector<Document> docs;
  for (auto& rec : client.search(query, year_from, year_to)) {
    Document doc;
    doc.id = rec.id;
    doc.title = rec.title;
    doc.abstract = rec.abstract;
    doc.keywords.insert(rec.keywords.begin(), rec.keywords.end());
    doc.year = rec.year;
    doc.source = client.source_name();
    validate_document(doc);
    docs.push_back(std::move(doc));
  }
  return docs;
}

RecordedLiteratureClient::RecordedLiteratureClient(
    const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
    source_ = j.value("source", std::string("recorded"));
    for (const auto& r : j.at("responses")) {
      Response resp;
      resp.query = r.at("query").get<std::string>();
      resp.from = r.at("from").get<int>();
      resp.to = r.at("to").get<int>();
      resp.error = r.value("error", std::string());
      if (r.contains("records")) {
        for (const auto& rec : r.at("records")) {
          LiteratureRecord lr;
          lr.id = rec.at("id").get<std::string>();
          lr.title = rec.value("title", std::string());
          lr.abstract = rec.value("abstract", std::string());
          lr.keywords =
              rec.value("keywords", std::vector<std::string>{});
          lr.year = rec.at("year").get<int>();
          resp.records.push_back(std::move(lr));
        }
      }
      responses_.push_back(std::move(resp));
    }
  } catch (const json::exception& e) {
    throw ParseError("malformed recorded response file " + path.string() +
                     ": " + e.what());
  }
}

std::vector<LiteratureRecord> RecordedLiteratureClient::search(
    const std::string& query, int year_from, int year_to) {
  for (const auto& r : responses_) {
    if (r.query == query && r.from == year_from && r.to == year_to) {
      if (!r.error.empty()) throw RemoteError(r.error);
      return r.records;
    }
  }
  return {};
}

}  // namespace medkg
