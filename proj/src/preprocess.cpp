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

#include "medkg/preprocess.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "medkg/error.hpp"
#include "medkg/text.hpp"

namespace medkg {

const StopwordSet& default_stopwords() {
  static const StopwordSet words = {
      "a",       "about",  "above",   "after",   "again",  "against", "all",
      "also",    "am",     "an",      "and",     "any",    "are",     "as",
      "at",      "be",     "because", "been",    "before", "being",   "below",
      "between", "both",   "but",     "by",      "can",    "could",   "did",
      "do",      "does",   "doing",   "down",    "during", "each",    "few",
      "for",     "from",   "further", "had",     "has",    "have",    "having",
      "he",      "her",    "here",    "hers",    "him",    "his",     "how",
      "i",       "if",     "in",      "into",    "is",     "it",      "its",
      "itself",  "just",   "may",     "me",      "more",   "most",    "my",
      "no",      "nor",    "not",     "now",     "of",     "off",     "on",
      "once",    "only",   "or",      "other",   "our",    "ours",    "out",
      "over",    "own",    "same",    "she",     "should", "so",      "some",
      "such",    "than",   "that",    "the",     "their",  "theirs",  "them",
      "then",    "there",  "these",   "they",    "this",   "those",   "through",
      "to",      "too",    "under",   "until",   "up",     "very",    "was",
      "we",      "were",   "what",    "when",    "where",  "which",   "while",
      "who",     "whom",   "why",     "will",    "with",   "would",   "you",
      "your",    "yours",
  };
  return words;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
  StopwordSet words;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = to_lower(trim(line));
    if (t.empty() || t[0] == '#') continue;
    words.insert(t);
  }
  return words;
}

CleanedText clean_text(std::string_view raw, const StopwordSet& stopwords,
                       std::string source_doc,
                       const SpellCorrector* corrector) {
  std::vector<std::string> kept;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    std::string tok = corrector ? to_lower(corrector->correct(cur)) : cur;
    // A corrector may only return letters; anything else is dropped.
    std::string letters;
    for (char c : tok) {
      if (c >= 'a' && c <= 'z') letters += c;
    }
    if (!letters.empty() && !stopwords.count(letters)) {
      kept.push_back(std::move(letters));
    }
    cur.clear();
  };
  for (char c : raw) {
    if (c >= 'a' && c <= 'z') {
      cur += c;
    } else if (c >= 'A' && c <= 'Z') {
      cur += static_cast<char>(c - 'A' + 'a');
    } else {
      flush();
    }
  }
  flush();
  return {join(kept, " "), std::move(source_doc)};
}

std::vector<std::string> tokenize(std::string_view cleaned) {
  if (cleaned.empty()) return {};
  return split(cleaned, ' ');
}

std::vector<std::string> tokenize(const CleanedText& cleaned) {
  return tokenize(cleaned.text);
}

std::vector<std::string> split_sentences(std::string_view raw) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = raw.find(". ", start);
    if (pos == std::string_view::npos) {
      out.emplace_back(raw.substr(start));
      return out;
    }
    out.emplace_back(raw.substr(start, pos + 1 - start));
    start = pos + 2;
  }
}

std::size_t PreparedDocument::sentence_of(std::size_t pos) const {
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (pos < sentences[i].end) return i;
  }
  return sentences.empty() ? 0 : sentences.size() - 1;
}

std::string_view PreparedDocument::sentence_text(std::size_t i) const {
  const Range& r = sentences.at(i);
  return std::string_view(text).substr(r.start, r.end - r.start);
}

PreparedDocument prepare_document(const Document& doc,
                                  const StopwordSet& stopwords,
                                  TextFields fields,
                                  const SpellCorrector* corrector) {
  std::vector<std::string> raw_sentences;
  if (fields != TextFields::kAbstract && !doc.title.empty()) {
    raw_sentences.push_back(doc.title);
  }
  if (fields != TextFields::kTitle && !doc.abstract.empty()) {
    for (auto& s : split_sentences(doc.abstract)) {
      raw_sentences.push_back(std::move(s));
    }
  }
  PreparedDocument out;
  out.doc_id = doc.id;
  for (const auto& raw : raw_sentences) {
    CleanedText c = clean_text(raw, stopwords, doc.id, corrector);
    if (c.text.empty()) continue;
    if (!out.text.empty()) out.text += ' ';
    const std::size_t start = out.text.size();
    out.text += c.text;
    out.sentences.push_back({start, out.text.size()});
  }
  return out;
}

void save_cleaned_cache(const std::vector<PreparedDocument>& docs,
                        const std::filesystem::path& path) {
  std::string out;
  for (const auto& d : docs) {
    nlohmann::json j;
    j["id"] = d.doc_id;
    j["text"] = d.text;
    j["sentences"] = nlohmann::json::array();
    for (const auto& r : d.sentences) {
      j["sentences"].push_back({r.start, r.end});
    }
    out += j.dump();
    out += '\n';
  }
  write_file(path, out);
}

std::vector<PreparedDocument> load_cleaned_cache(
    const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<PreparedDocument> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      PreparedDocument d;
      d.doc_id = j.at("id").get<std::string>();
      d.text = j.at("text").get<std::string>();
      for (const auto& r : j.at("sentences")) {
        d.sentences.push_back({r.at(0).get<std::size_t>(),
                               r.at(1).get<std::size_t>()});
      }
      docs.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed cleaned-cache record: ") +
                           e.what(),
                       lineno);
    }
  }
  return docs;
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) throw Error("embedding dimensions differ");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

EmbeddingVector embed(const CleanedText& cleaned,
                      EmbeddingProvider& provider) {
  if (cleaned.text.empty()) throw Error("cannot embed empty text");
  std::vector<double> v = provider.raw_embedding(cleaned.text);
  if (v.size() != provider.dim()) {
    throw Error("provider " + provider.name() + " returned dimension " +
                std::to_string(v.size()) + ", expected " +
                std::to_string(provider.dim()));
  }
  double norm2 = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw NumericalError("provider " + provider.name() +
                           " returned a non-finite value");
    }
    norm2 += x * x;
  }
  if (norm2 == 0.0) {
    throw NumericalError("provider " + provider.name() +
                         " returned a zero vector");
  }
  const double norm = std::sqrt(norm2);
  for (double& x : v) x /= norm;
  return {std::move(v)};
}

HashingEmbeddingProvider::HashingEmbeddingProvider(std::size_t dim)
    : dim_(dim) {
  if (dim == 0) throw Error("embedding dimension must be positive");
}

std::vector<double> HashingEmbeddingProvider::raw_embedding(
    std::string_view text) {
  std::vector<double> sum(dim_, 0.0);
  for (const auto& tok : tokenize(text)) {
    Rng rng(fnv1a64(tok));
    for (double& x : sum) x += 2.0 * rng.uniform() - 1.0;
  }
  return sum;
}

}  // namespace medkg
