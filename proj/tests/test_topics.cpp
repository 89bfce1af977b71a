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

#include "medkg/error.hpp"
#include "medkg/text.hpp"
#include "medkg/topics.hpp"

namespace fs = std::filesystem;
using namespace medkg;

namespace {

using Docs = std::vector<std::vector<std::string>>;

std::string word(char topic, std::size_t i) {
  return std::string(1, topic) + std::string(1, static_cast<char>('a' + i));
}

// Each document draws all its tokens from one of two disjoint 10-word topics.
Docs planted_corpus(std::size_t num_docs, std::size_t length, std::uint64_t seed) {
  Rng rng(seed);
  Docs docs;
  for (std::size_t d = 0; d < num_docs; ++d) {
    const char topic = d % 2 == 0 ? 'p' : 'q';
    std::vector<std::string> doc;
    for (std::size_t n = 0; n < length; ++n) doc.push_back(word(topic, rng.uniform_index(10)));
    docs.push_back(std::move(doc));
  }
  return docs;
}

LdaConfig config(std::size_t k, std::size_t iters, std::uint64_t seed) {
  LdaConfig c;
  c.num_topics = k;
  c.alpha = 0.5;
  c.eta = 0.01;
  c.iterations = iters;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(Topics, SingleWordVocabulary) {
  const LdaModel m = fit_lda({{"x", "x"}, {"x"}}, config(3, 10, 1));
  ASSERT_EQ(m.vocab_size(), 1u);
  for (std::size_t z = 0; z < 3; ++z) EXPECT_DOUBLE_EQ(m.topic_word_prob(0, z), 1.0);
}

TEST(Topics, HandCountedSmoothing) {
  Eigen::MatrixXi wz(2, 1), dz(1, 1);
  wz << 3, 1;
  dz << 4;
  const LdaModel m = LdaModel::from_counts({"w1", "w2"}, wz, dz, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(m.topic_word_prob(0, 0), 4.0 / 6.0);
  EXPECT_DOUBLE_EQ(m.topic_word_prob(1, 0), 2.0 / 6.0);
  EXPECT_DOUBLE_EQ(m.doc_topic_prob(0, 0), 1.0);
  EXPECT_THROW(m.topic_word_prob(2, 0), std::out_of_range);
  EXPECT_THROW(m.doc_topic_prob(1, 0), std::out_of_range);
  EXPECT_THROW(m.doc_topic_prob(0, 1), std::out_of_range);
}

TEST(Topics, RowsAreDistributionsAndCountsConserved) {
  const Docs docs = planted_corpus(40, 20, 2);
  const LdaModel m = fit_lda(docs, config(3, 30, 4));
  for (Eigen::Index z = 0; z < m.beta().rows(); ++z) {
    EXPECT_NEAR(m.beta().row(z).sum(), 1.0, 1e-9);
  }
  for (Eigen::Index d = 0; d < m.theta().rows(); ++d) {
    EXPECT_NEAR(m.theta().row(d).sum(), 1.0, 1e-9);
  }
  EXPECT_EQ(m.word_topic_counts().sum(), 40 * 20);
  EXPECT_EQ(m.doc_topic_counts().sum(), 40 * 20);
  EXPECT_EQ(m.doc_topic_counts().row(5).sum(), 20);
  EXPECT_GE(m.beta().minCoeff(), 0.0);
}

TEST(Topics, DeterministicForSeed) {
  const Docs docs = planted_corpus(30, 15, 5);
  const LdaModel a = fit_lda(docs, config(2, 20, 11));
  const LdaModel b = fit_lda(docs, config(2, 20, 11));
  EXPECT_EQ(a.beta(), b.beta());
  EXPECT_EQ(a.theta(), b.theta());
}

TEST(Topics, RejectsBadInput) {
  EXPECT_THROW(fit_lda({}, config(2, 10, 1)), Error);
  EXPECT_THROW(fit_lda({{"a"}, {}}, config(2, 10, 1)), Error);
  EXPECT_THROW(fit_lda({{"a"}}, config(0, 10, 1)), Error);
  LdaConfig bad = config(2, 10, 1);
  bad.alpha = 0.0;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Topics, OverlapSeparatesPlantedTopics) {
  const Docs docs = planted_corpus(100, 30, 7);
  const LdaModel m = fit_lda(docs, config(2, 100, 3));
  const std::vector<std::string> ctx_p = {"pa", "pb", "pc"};
  const std::vector<std::string> ctx_q = {"qa", "qd", "qj"};
  EXPECT_NEAR(topic_overlap(m, ctx_p, ctx_p), 1.0, 1e-9);
  EXPECT_LT(topic_overlap(m, ctx_p, ctx_q), 0.2);
  EXPECT_EQ(topic_overlap(m, {"unseen"}, ctx_p), 0.0);
  EXPECT_TRUE(fold_in(m, {"unseen"}).isZero());
  EXPECT_NEAR(fold_in(m, ctx_q).sum(), 1.0, 1e-9);
}

TEST(Topics, SaveLoadRoundTrip) {
  const Docs docs = planted_corpus(6, 5, 1);
  const LdaModel m = fit_lda(docs, config(2, 5, 1));
  const fs::path dir = fs::temp_directory_path();
  const std::vector<std::string> ids = {"d1", "d2", "d3", "d4", "d5", "d6"};
  save_lda(m, ids, dir / "medkg_beta.tsv", dir / "medkg_theta.tsv");
  const LdaModel back = load_lda(dir / "medkg_beta.tsv", dir / "medkg_theta.tsv");
  EXPECT_EQ(back.vocab(), m.vocab());
  EXPECT_TRUE(back.beta().isApprox(m.beta(), 1e-11));
  EXPECT_TRUE(back.theta().isApprox(m.theta(), 1e-11));
  fs::remove(dir / "medkg_beta.tsv");
  fs::remove(dir / "medkg_theta.tsv");
}
