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

#include <cmath>
#include <filesystem>

#include "medkg/error.hpp"
#include "medkg/preprocess.hpp"

namespace fs = std::filesystem;
using namespace medkg;

namespace {

const fs::path kData = MEDKG_DATA_DIR;

class FixedProvider : public EmbeddingProvider {
 public:
  explicit FixedProvider(std::vector<double> v) : v_(std::move(v)) {}
  std::string name() const override { return "fixed"; }
  std::size_t dim() const override { return 3; }
  std::vector<double> raw_embedding(std::string_view) override { return v_; }

 private:
  std::vector<double> v_;
};

class UkSpelling : public SpellCorrector {
 public:
  std::string correct(std::string_view t) const override {
    return t == "haemorrhage" ? "hemorrhage" : std::string(t);
  }
};

CleanedText clean(std::string_view s) { return clean_text(s, default_stopwords()); }

}  // namespace

TEST(Preprocess, CleaningExamples) {
  EXPECT_EQ(clean("Stroke, Affects!! 15 Patients.").text, "stroke affects patients");
  EXPECT_EQ(clean("and to in").text, "");
  EXPECT_EQ(clean("C-reactive protein").text, "c reactive protein");
  EXPECT_EQ(clean("NOTCH3 variants").text, "notch variants");
  EXPECT_EQ(clean("caf\xc3\xa9 stroke").text, "caf stroke");
  EXPECT_EQ(clean("").text, "");
}

TEST(Preprocess, CleaningIsIdempotent) {
  for (const char* s : {"The NIHSS score is a Biomarker for stroke.",
                        "  tPA   treats; ischemic-stroke  ", "and to in"}) {
    const CleanedText once = clean(s);
    EXPECT_EQ(clean(once.text).text, once.text);
  }
}

TEST(Preprocess, OutputAlphabet) {
  const std::string t = clean("Mixed 42 CASE, with-punct & \t tabs\n").text;
  for (char ch : t) EXPECT_TRUE((ch >= 'a' && ch <= 'z') || ch == ' ');
  EXPECT_EQ(t.find("  "), std::string::npos);
  EXPECT_NE(t.front(), ' ');
  EXPECT_NE(t.back(), ' ');
}

TEST(Preprocess, SourceDocAndCorrector) {
  UkSpelling uk;
  const CleanedText c =
      clean_text("Haemorrhage after stroke", default_stopwords(), "d1", &uk);
  EXPECT_EQ(c.text, "hemorrhage stroke");
  EXPECT_EQ(c.source_doc, "d1");
}

TEST(Preprocess, Tokenize) {
  EXPECT_EQ(tokenize(clean("Stroke affects patients")),
            (std::vector<std::string>{"stroke", "affects", "patients"}));
  EXPECT_TRUE(tokenize(std::string_view("")).empty());
}

TEST(Preprocess, StopwordFileMatchesBuiltin) {
  EXPECT_EQ(load_stopwords(kData / "stopwords.txt"), default_stopwords());
}

TEST(Preprocess, SentenceSplitting) {
  EXPECT_EQ(split_sentences("A b. C d. E"),
            (std::vector<std::string>{"A b.", "C d.", "E"}));
  EXPECT_EQ(split_sentences("No split 3.5 mg"),
            (std::vector<std::string>{"No split 3.5 mg"}));
}

TEST(Preprocess, PreparedDocumentRanges) {
  Document d;
  d.id = "d1";
  d.title = "Stroke risk";
  d.abstract = "Hypertension causes stroke. And to in. Aspirin prevents stroke.";
  const PreparedDocument p = prepare_document(d, default_stopwords());
  EXPECT_EQ(p.text,
            "stroke risk hypertension causes stroke aspirin prevents stroke");
  ASSERT_EQ(p.sentences.size(), 3u);
  EXPECT_EQ(p.sentence_text(0), "stroke risk");
  EXPECT_EQ(p.sentence_text(1), "hypertension causes stroke");
  EXPECT_EQ(p.sentence_text(2), "aspirin prevents stroke");
  EXPECT_EQ(p.sentence_of(0), 0u);
  EXPECT_EQ(p.sentence_of(p.text.find("causes")), 1u);
  EXPECT_EQ(p.sentence_of(p.text.find("aspirin")), 2u);

  const PreparedDocument t = prepare_document(d, default_stopwords(), TextFields::kTitle);
  EXPECT_EQ(t.text, "stroke risk");
  const PreparedDocument a =
      prepare_document(d, default_stopwords(), TextFields::kAbstract);
  EXPECT_EQ(a.sentences.size(), 2u);
}

TEST(Preprocess, CleanedCacheRoundTrip) {
  Document d;
  d.id = "d1";
  d.title = "Stroke risk";
  d.abstract = "Hypertension causes stroke.";
  const std::vector<PreparedDocument> docs = {prepare_document(d, default_stopwords())};
  const fs::path p = fs::temp_directory_path() / "medkg_cleaned_cache.jsonl";
  save_cleaned_cache(docs, p);
  EXPECT_EQ(load_cleaned_cache(p), docs);
  fs::remove(p);
}

TEST(Preprocess, EmbeddingIsUnitNorm) {
  HashingEmbeddingProvider h(64);
  const EmbeddingVector v = embed(clean("ischemic stroke"), h);
  ASSERT_EQ(v.dim(), 64u);
  double n = 0.0;
  for (double x : v.values) n += x * x;
  EXPECT_NEAR(std::sqrt(n), 1.0, 1e-12);
  EXPECT_NEAR(cosine_similarity(v, v), 1.0, 1e-12);
  EXPECT_EQ(embed(clean("ischemic stroke"), h).values, v.values);
  const EmbeddingVector w = embed(clean("aspirin"), h);
  EXPECT_LT(cosine_similarity(v, w), 0.9);
}

TEST(Preprocess, EmbeddingRejectsBadProviderOutput) {
  FixedProvider zero({0.0, 0.0, 0.0});
  FixedProvider wrong_dim({1.0, 2.0});
  FixedProvider nan({1.0, std::nan(""), 0.0});
  FixedProvider ok({3.0, 0.0, 4.0});
  const CleanedText c = clean("stroke");
  EXPECT_THROW(embed(c, zero), Error);
  EXPECT_THROW(embed(c, wrong_dim), Error);
  EXPECT_THROW(embed(c, nan), NumericalError);
  EXPECT_THROW(embed(clean("and"), ok), Error);
  EXPECT_EQ(embed(c, ok).values, (std::vector<double>{0.6, 0.0, 0.8}));
  EXPECT_THROW(HashingEmbeddingProvider(0), Error);
}
