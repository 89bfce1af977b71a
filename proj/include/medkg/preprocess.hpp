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
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "medkg/corpus.hpp"

namespace medkg {

using StopwordSet = std::set<std::string>;

// Bundled English stopword list (also shipped as data/stopwords.txt).
const StopwordSet& default_stopwords();
// One lowercase word per line; '#' comments allowed.
StopwordSet load_stopwords(const std::filesystem::path& path);

// Hook for spelling/typo correction applied to each surviving token before
// stopword removal. The default instance leaves tokens unchanged.
class SpellCorrector {
 public:
  virtual ~SpellCorrector() = default;
  virtual std::string correct(std::string_view token) const {
    return std::string(token);
  }
};

// Lowercase [a-z] tokens joined by single spaces, stopwords removed.
struct CleanedText {
  std::string text;
  std::string source_doc;
};

// Every byte that is not an ASCII letter (punctuation, digits, symbols and
// all non-ASCII bytes) acts as a token separator; tokens are lowercased,
// spell-corrected, stripped of stopwords and re-joined with single spaces.
CleanedText clean_text(std::string_view raw, const StopwordSet& stopwords,
                       std::string source_doc = {},
                       const SpellCorrector* corrector = nullptr);

std::vector<std::string> tokenize(const CleanedText& cleaned);
std::vector<std::string> tokenize(std::string_view cleaned);

// Splits raw text on a period followed by a space.
std::vector<std::string> split_sentences(std::string_view raw);

// Which raw fields feed extraction.
enum class TextFields { kTitle, kAbstract, kBoth };

// A cleaned document with sentence boundaries. `text` is the concatenation of
// the non-empty cleaned sentences with single spaces; sentences[i] is the
// [start, end) range of sentence i inside `text`.
struct PreparedDocument {
  struct Range {
    std::size_t start = 0;
    std::size_t end = 0;
    friend bool operator==(const Range&, const Range&) = default;
  };

  std::string doc_id;
  std::string text;
  std::vector<Range> sentences;

  // Index of the sentence containing character offset `pos`.
  std::size_t sentence_of(std::size_t pos) const;
  std::string_view sentence_text(std::size_t i) const;

  friend bool operator==(const PreparedDocument&,
                         const PreparedDocument&) = default;
};

// The title (when selected) forms its own sentence; the abstract is split
// with split_sentences. Sentences that clean to nothing are dropped.
PreparedDocument prepare_document(const Document& doc,
                                  const StopwordSet& stopwords,
                                  TextFields fields = TextFields::kBoth,
                                  const SpellCorrector* corrector = nullptr);

// Cleaned-corpus cache: JSONL of {"id", "text", "sentences": [[s, e], ...]}.
void save_cleaned_cache(const std::vector<PreparedDocument>& docs,
                        const std::filesystem::path& path);
std::vector<PreparedDocument> load_cleaned_cache(
    const std::filesystem::path& path);

struct EmbeddingVector {
  std::vector<double> values;
  std::size_t dim() const { return values.size(); }
};

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

// Port to an embedding model.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  // Unnormalized vector for `text`; may throw RemoteError.
  virtual std::vector<double> raw_embedding(std::string_view text) = 0;
};

// Validates and unit-normalizes the provider output. Empty input, a wrong
// dimension, non-finite values and zero vectors are rejected.
EmbeddingVector embed(const CleanedText& cleaned, EmbeddingProvider& provider);

// Offline provider: each token seeds a pseudo-random vector from its hash,
// token vectors are summed and the sum is normalized by embed().
class HashingEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit HashingEmbeddingProvider(std::size_t dim = 64);
  std::string name() const override { return "hashing"; }
  std::size_t dim() const override { return dim_; }
  std::vector<double> raw_embedding(std::string_view text) override;

 private:
  std::size_t dim_;
};

}  // namespace medkg
