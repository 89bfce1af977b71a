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
#include <set>
#include <string>
#include <vector>

namespace medkg {

struct Document {
  std::string id;
  std::string title;
  std::string abstract;
  std::set<std::string> keywords;
  int year = 2000;
  std::string source = "local";

  friend bool operator==(const Document&, const Document&) = default;
};

// Throws medkg::Error when a document violates the record invariants
// (empty id, empty title and abstract, year outside [1900, 2100]).
void validate_document(const Document& doc);

// Ordered, id-unique document collection. The manifest (keyword tag ->
// document count) is always recomputed from the documents.
class Corpus {
 public:
  Corpus() = default;
  // Throws on invalid documents or duplicate ids.
  explicit Corpus(std::vector<Document> documents);

  const std::vector<Document>& documents() const { return documents_; }
  const std::map<std::string, std::size_t>& manifest() const {
    return manifest_;
  }
  std::size_t size() const { return documents_.size(); }
  bool empty() const { return documents_.empty(); }

  friend bool operator==(const Corpus&, const Corpus&) = default;

 private:
  std::vector<Document> documents_;
  std::map<std::string, std::size_t> manifest_;
};

// Reads a JSONL corpus (one object per line with id, title, abstract,
// keywords, year, source). Blank lines are skipped. Errors carry the
// 1-based line number.
Corpus load_corpus(const std::filesystem::path& path);
std::string serialize_corpus(const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

// Keeps documents whose title, abstract or any keyword contains one of the
// terms as a whole-token sequence, ignoring case. Throws on an empty term set.
Corpus filter_by_keywords(const Corpus& corpus,
                          const std::set<std::string>& terms);

// Removes documents listed in a manual-review exclusion list.
Corpus apply_exclusions(const Corpus& corpus,
                        const std::set<std::string>& excluded_ids);
// One id per line; blank lines and '#' comments ignored.
std::set<std::string> load_id_list(const std::filesystem::path& path);

struct CorpusStats {
  std::map<std::string, std::size_t> per_tag;
  std::size_t total = 0;
};

CorpusStats corpus_stats(const Corpus& corpus);

// Record shape returned by a literature source before it is mapped onto a
// Document.
struct LiteratureRecord {
  std::string id;
  std::string title;
  std::string abstract;
  std::vector<std::string> keywords;
  int year = 0;
};

// Port to a remote literature database.
class LiteratureClient {
 public:
  virtual ~LiteratureClient() = default;
  virtual std::string source_name() const = 0;
  // Throws RemoteError on transport or authentication failure.
  virtual std::vector<LiteratureRecord> search(const std::string& query,
                                               int year_from, int year_to) = 0;
};

std::vector<Document> fetch_remote(const std::string& query, int year_from,
                                   int year_to, LiteratureClient& client);

// Replays responses recorded in a JSON file:
//   {"source": "pubmed",
//    "responses": [{"query": "...", "from": 2020, "to": 2024,
//                   "records": [...]} | {"...", "error": "message"}]}
// Unknown queries return an empty result.
class RecordedLiteratureClient : public LiteratureClient {
 public:
  explicit RecordedLiteratureClient(const std::filesystem::path& path);
  std::string source_name() const override { return source_; }
  std::vector<LiteratureRecord> search(const std::string& query,
                                       int year_from, int year_to) override;

 private:
  struct Response {
    std::string query;
    int from = 0;
    int to = 0;
    std::string error;
    std::vector<LiteratureRecord> records;
  };
  std::string source_;
  std::vector<Response> responses_;
};

}  // namespace medkg
