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

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace medkg {

struct LdaConfig {
  std::size_t num_topics = 10;
  double alpha = 0.1;
  double eta = 0.01;
  std::size_t iterations = 500;
  std::uint64_t seed = 1;

  void validate() const;
};

// Topic model state. beta is K x V (topic-word), theta is D x K
// (document-topic). Assignment counts are kept when the model was fitted.
class LdaModel {
 public:
  LdaModel() = default;

  // Builds the smoothed distributions from assignment counts:
  //   beta(z, w)  = (n_wz + eta)   / sum_w' (n_w'z + eta)
  //   theta(d, z) = (n_dz + alpha) / sum_z' (n_dz' + alpha)
  // word_topic is V x K, doc_topic is D x K.
  static LdaModel from_counts(std::vector<std::string> vocab,
                              Eigen::MatrixXi word_topic,
                              Eigen::MatrixXi doc_topic, double alpha,
                              double eta);
  // Model restored from exported distributions (no counts).
  static LdaModel from_distributions(std::vector<std::string> vocab,
                                     Eigen::MatrixXd beta,
                                     Eigen::MatrixXd theta);

  std::size_t num_topics() const { return static_cast<std::size_t>(beta_.rows()); }
  std::size_t vocab_size() const { return vocab_.size(); }
  std::size_t num_docs() const { return static_cast<std::size_t>(theta_.rows()); }

  const std::vector<std::string>& vocab() const { return vocab_; }
  const Eigen::MatrixXd& beta() const { return beta_; }
  const Eigen::MatrixXd& theta() const { return theta_; }
  const Eigen::MatrixXi& word_topic_counts() const { return word_topic_; }
  const Eigen::MatrixXi& doc_topic_counts() const { return doc_topic_; }

  std::optional<std::size_t> word_index(const std::string& w) const;

  // P(w | z); throws std::out_of_range on bad indices.
  double topic_word_prob(std::size_t w, std::size_t z) const;
  // P(z | d); throws std::out_of_range on bad indices.
  double doc_topic_prob(std::size_t z, std::size_t d) const;

 private:
  std::vector<std::string> vocab_;
  Eigen::MatrixXd beta_;
  Eigen::MatrixXd theta_;
  Eigen::MatrixXi word_topic_;
  Eigen::MatrixXi doc_topic_;
};

// Collapsed Gibbs sampling, single chain, final-state estimator. The
// vocabulary is the sorted set of tokens. Deterministic for a given seed.
LdaModel fit_lda(const std::vector<std::vector<std::string>>& docs,
                 const LdaConfig& config);

// Topic posterior of a token multiset: the mean over in-vocabulary tokens of
// the normalized responsibilities beta(., w) / sum_z beta(z, w). Zero vector
// when no token is in the vocabulary.
Eigen::VectorXd fold_in(const LdaModel& model,
                        const std::vector<std::string>& context);

// Cosine similarity of the two folded-in posteriors, clipped to [0, 1];
// 0 when either context has no in-vocabulary token.
double topic_overlap(const LdaModel& model,
                     const std::vector<std::string>& ctx1,
                     const std::vector<std::string>& ctx2);

// beta.tsv: header "topic" + vocab, one row per topic.
// theta.tsv: header "doc" + topic indices, one row per document id.
void save_lda(const LdaModel& model, const std::vector<std::string>& doc_ids,
              const std::filesystem::path& beta_path,
              const std::filesystem::path& theta_path);
LdaModel load_lda(const std::filesystem::path& beta_path,
                  const std::filesystem::path& theta_path);

}  // namespace medkg
