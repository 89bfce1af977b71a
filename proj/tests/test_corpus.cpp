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

#include "medkg/corpus.hpp"
#include "medkg/error.hpp"
#include "medkg/text.hpp"

namespace fs = std::filesystem;
using namespace medkg;

namespace {

const fs::path kData = MEDKG_DATA_DIR;

Document doc(std::string id, std::string title, std::set<std::string> kw = {}) {
  Document d;
  d.id = std::move(id);
  d.title = std::move(title);
  d.keywords = std::move(kw);
  d.year = 2021;
  return d;
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("medkg_corpus_" + name);
}

}  // namespace

TEST(Corpus, ValidateRejectsBrokenRecords) {
  EXPECT_NO_THROW(validate_document(doc("a", "Title")));
  EXPECT_THROW(validate_document(doc("", "Title")), Error);
  EXPECT_THROW(validate_document(doc("a", "")), Error);
  Document abstract_only = doc("a", "");
  abstract_only.abstract = "Body.";
  EXPECT_NO_THROW(validate_document(abstract_only));
  Document old = doc("a", "Title");
  old.year = 1899;
  EXPECT_THROW(validate_document(old), Error);
  old.year = 2101;
  EXPECT_THROW(validate_document(old), Error);
}

TEST(Corpus, DuplicateIdsRejected) {
  EXPECT_THROW(Corpus({doc("a", "x"), doc("a", "y")}), Error);
}

TEST(Corpus, ManifestCountsTags) {
  Corpus c({doc("a", "x", {"stroke", "genetics"}), doc("b", "y", {"stroke"}),
            doc("c", "z")});
  EXPECT_EQ(c.manifest().at("stroke"), 2u);
  EXPECT_EQ(c.manifest().at("genetics"), 1u);
  const CorpusStats s = corpus_stats(c);
  EXPECT_EQ(s.total, 3u);
  EXPECT_EQ(s.per_tag, c.manifest());
}

TEST(Corpus, FixtureLoadsAndRoundTrips) {
  const Corpus c = load_corpus(kData / "fixtures" / "corpus20.jsonl");
  ASSERT_EQ(c.size(), 20u);
  EXPECT_EQ(c.documents().front().id, "doc01");
  EXPECT_EQ(c.documents().front().source, "fixture");

  const fs::path p = temp_file("roundtrip.jsonl");
  save_corpus(c, p);
  const Corpus back = load_corpus(p);
  EXPECT_EQ(back, c);
  EXPECT_EQ(serialize_corpus(back), serialize_corpus(c));
  fs::remove(p);
}

TEST(Corpus, MalformedLineReportsLineNumber) {
  const fs::path p = temp_file("bad.jsonl");
  write_file(p,
             "{\"id\":\"a\",\"title\":\"T\",\"abstract\":\"\",\"keywords\":[],"
             "\"year\":2020,\"source\":\"x\"}\n\n{not json}\n");
  try {
    load_corpus(p);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  fs::remove(p);
}

TEST(Corpus, KeywordFilterMatchesWholeTokens) {
  Corpus c({doc("a", "Ischemic Stroke outcomes"), doc("b", "Strokes of luck"),
            doc("c", "Unrelated", {"stroke"}), doc("d", "Brain imaging")});
  const Corpus f = filter_by_keywords(c, {"stroke"});
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f.documents()[0].id, "a");
  EXPECT_EQ(f.documents()[1].id, "c");
  EXPECT_EQ(filter_by_keywords(f, {"stroke"}), f);
  EXPECT_EQ(filter_by_keywords(c, {"ischemic stroke"}).size(), 1u);
  EXPECT_THROW(filter_by_keywords(c, {}), Error);
}

TEST(Corpus, Exclusions) {
  Corpus c({doc("a", "x"), doc("b", "y"), doc("c", "z")});
  const Corpus kept = apply_exclusions(c, {"b", "missing"});
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept.documents()[1].id, "c");

  const fs::path p = temp_file("ids.txt");
  write_file(p, "# excluded\nb\n\n c \n");
  EXPECT_EQ(load_id_list(p), (std::set<std::string>{"b", "c"}));
  fs::remove(p);
}

TEST(Corpus, RecordedLiteratureSearch) {
  RecordedLiteratureClient client(kData / "fixtures" / "literature_responses.json");
  const auto docs = fetch_remote("stroke", 2020, 2024, client);
  ASSERT_EQ(docs.size(), 3u);
  for (const auto& d : docs) {
    EXPECT_EQ(d.source, "pubmed");
    EXPECT_GE(d.year, 2020);
    EXPECT_LE(d.year, 2024);
  }
  EXPECT_TRUE(docs[2].abstract.empty());
  EXPECT_TRUE(fetch_remote("stroke", 2010, 2012, client).empty());
}

TEST(Corpus, RemoteErrorPropagatesUpstreamMessage) {
  RecordedLiteratureClient client(kData / "fixtures" / "literature_responses.json");
  try {
    fetch_remote("brain", 2020, 2024, client);
    FAIL() << "expected RemoteError";
  } catch (const RemoteError& e) {
    EXPECT_STREQ(e.what(), "API rate limit exceeded");
  }
  EXPECT_THROW(fetch_remote("stroke", 2024, 2020, client), Error);
}
