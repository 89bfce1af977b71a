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

#include "medkg/topics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "medkg/error.hpp"
#include "medkg/text.hpp"

namespace medkg {

void LdaConfig::validate() const {
  if (num_topics == 0) throw Error("LDA needs at least one topic");
  if (!(alpha > 0.0)) throw Error("LDA alpha must be positive");
  if (!(eta > 0.0)) throw Error("LDA eta must be positive");
  if (iterations == 0) throw Error("LDA needs at least one iteration");
}

LdaModel LdaModel::from_counts(std::vector<std::string> vocab,
                               Eigen::MatrixXi word_topic,
                               Eigen::MatrixXi doc_topic, double alpha,
                               double eta) {
  LdaModel m;
  const Eigen::Index V = word_topic.rows();
  const Eigen::Index K = word_topic.cols();
  const Eigen::Index D = doc_topic.rows();
  if (static_cast<std::size_t>(V) != vocab.size() || doc_topic.cols() != K) {
    throw Error("LDA count matrices have inconsistent shapes");
  }
  m.beta_.resize(K, V);
  for (Eigen::Index z = 0; z < K; ++z) {
    const double denom = word_topic.col(z).cast<double>().sum() +
                         static_cast<double>(V) * eta;
    for (Eigen::Index w = 0; w < V; ++w) {
      m.beta_(z, w) = (word_topic(w, z) + eta) / denom;
    }
  }
  m.theta_.resize(D, K);
  for (Eigen::Index d = 0; d < D; ++d) {
    const double denom = doc_topic.row(d).cast<double>().sum() +
                         static_cast<double>(K) * alpha;
    for (Eigen::Index z = 0; z < K; ++z) {
      m.theta_(d, z) = (doc_topic(d, z) + alpha) / denom;
    }
  }
  m.vocab_ = std::move(vocab);
  m.word_topic_ = std::move(word_topic);
  m.doc_topic_ = std::move(doc_topic);
  return m;
}

LdaModel LdaModel::from_distributions(std::vector<std::string> vocab,
                                      Eigen::MatrixXd beta,
                                      Eigen::MatrixXd theta) {
  if (static_cast<std::size_t>(beta.cols()) != vocab.size() ||
      (theta.size() != 0 && theta.cols() != beta.rows())) {
    throw Error("LDA distribution matrices have inconsistent shapes");
  }
  LdaModel m;
  m.vocab_ = std::move(vocab);
  m.beta_ = std::move(beta);
  m.theta_ = std::move(theta);
  return m;
}

std::optional<std::size_t> LdaModel::word_index(const std::string& w) const {
  const auto it = std::lower_bound(vocab_.begin(), vocab_.end(), w);
  if (it == vocab_.end() || *it != w) return std::nullopt;
  return static_cast<std::size_t>(it - vocab_.begin());
}

double LdaModel::topic_word_prob(std::size_t w, std::size_t z) const {
  if (w >= vocab_size() || z >= num_topics()) {
    throw std::out_of_range("topic_word_prob index out of range");
  }
  return beta_(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(w));
}

double LdaModel::doc_topic_prob(std::size_t z, std::size_t d) const {
  if (d >= num_docs() || z >= num_topics()) {
    throw std::out_of_range("doc_topic_prob index out of range");
  }
  return theta_(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(z));
}

LdaModel fit_lda(const std::vector<std::vector<std::string>>& docs,
                 const LdaConfig& config) {
  config.validate();
  if (docs.empty()) throw Error("LDA corpus is empty");
  std::vector<std::string> vocab;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (docs[d].empty()) {
      throw Error("LDA document " + std::to_string(d) + " has no tokens");
    }
    vocab.insert(vocab.end(), docs[d].begin(), docs[d].end());
  }
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
  if (vocab.empty()) throw Error("LDA vocabulary is empty");

  const auto K = static_cast<Eigen::Index>(config.num_topics);
  const auto V = static_cast<Eigen::Index>(vocab.size());
  const auto D = static_cast<Eigen::Index>(docs.size());
  const double alpha = config.alpha;
  const double eta = config.eta;
  const double v_eta = static_cast<double>(V) * eta;

  std::vector<std::vector<int>> words(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& tok : docs[d]) {
      const auto it = std::lower_bound(vocab.begin(), vocab.end(), tok);
      words[d].push_back(static_cast<int>(it - vocab.begin()));
    }
  }

  Rng rng(config.seed);
  Eigen::MatrixXi n_wz = Eigen::MatrixXi::Zero(V, K);
  Eigen::MatrixXi n_dz = Eigen::MatrixXi::Zero(D, K);
  Eigen::VectorXi n_z = Eigen::VectorXi::Zero(K);
  std::vector<std::vector<int>> z(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (int w : words[d]) {
      const int k = static_cast<int>(rng.uniform_index(config.num_topics));
      z[d].push_back(k);
      ++n_wz(w, k);
      ++n_dz(static_cast<Eigen::Index>(d), k);
      ++n_z(k);
    }
  }

  std::vector<double> cumulative(config.num_topics);
  for (std::size_t it = 0; it < config.iterations; ++it) {
    for (std::size_t d = 0; d < docs.size(); ++d) {
      const auto di = static_cast<Eigen::Index>(d);
      for (std::size_t i = 0; i < words[d].size(); ++i) {
        const int w = words[d][i];
        int k = z[d][i];
        --n_wz(w, k);
        --n_dz(di, k);
        --n_z(k);
        double total = 0.0;
        for (Eigen::Index t = 0; t < K; ++t) {
          total += (n_dz(di, t) + alpha) * (n_wz(w, t) + eta) /
                   (n_z(t) + v_eta);
          cumulative[static_cast<std::size_t>(t)] = total;
        }
        const double u = rng.uniform() * total;
        k = static_cast<int>(
            std::upper_bound(cumulative.begin(), cumulative.end(), u) -
            cumulative.begin());
        if (k >= K) k = static_cast<int>(K - 1);
        z[d][i] = k;
        ++n_wz(w, k);
        ++n_dz(di, k);
        ++n_z(k);
      }
    }
  }
  return LdaModel::from_counts(std::move(vocab), std::move(n_wz),
                               std::move(n_dz), alpha, eta);
}

Eigen::VectorXd fold_in(const LdaModel& model,
                        const std::vector<std::string>& context) {
  const auto K = static_cast<Eigen::Index>(model.num_topics());
  Eigen::VectorXd post = Eigen::VectorXd::Zero(K);
  std::size_t used = 0;
  for (const auto& tok : context) {
    const auto w = model.word_index(tok);
    if (!w) continue;
    const Eigen::VectorXd col = model.beta().col(static_cast<Eigen::Index>(*w));
    const double s = col.sum();
    if (s <= 0.0) continue;
    post += col / s;
    ++used;
  }
  if (used) post /= static_cast<double>(used);
  return post;
}

double topic_overlap(const LdaModel& model,
                     const std::vector<std::string>& ctx1,
                     const std::vector<std::string>& ctx2) {
  const Eigen::VectorXd a = fold_in(model, ctx1);
  const Eigen::VectorXd b = fold_in(model, ctx2);
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(a.dot(b) / (na * nb), 0.0, 1.0);
}

void save_lda(const LdaModel& model, const std::vector<std::string>& doc_ids,
              const std::filesystem::path& beta_path,
              const std::filesystem::path& theta_path) {
  std::string beta = "topic";
  for (const auto& w : model.vocab()) beta += "\t" + w;
  beta += "\n";
  for (Eigen::Index z = 0; z < model.beta().rows(); ++z) {
    beta += std::to_string(z);
    for (Eigen::Index w = 0; w < model.beta().cols(); ++w) {
      beta += "\t" + format_sci12(model.beta()(z, w));
    }
    beta += "\n";
  }
  write_file(beta_path, beta);

  std::string theta = "doc";
  for (Eigen::Index z = 0; z < model.theta().cols(); ++z) {
    theta += "\t" + std::to_string(z);
  }
  theta += "\n";
  for (Eigen::Index d = 0; d < model.theta().rows(); ++d) {
    const auto di = static_cast<std::size_t>(d);
    theta += di < doc_ids.size() ? doc_ids[di] : std::to_string(d);
    for (Eigen::Index z = 0; z < model.theta().cols(); ++z) {
      theta += "\t" + format_sci12(model.theta()(d, z));
    }
    theta += "\n";
  }
  write_file(theta_path, theta);
}

namespace {

// Reads a TSV whose first row is a header and first column a row label.
Eigen::MatrixXd read_labelled_matrix(const std::filesystem::path& path,
                                     std::vector<std::string>* header) {
  const auto rows = read_tsv(path);
  if (rows.empty()) throw ParseError("empty matrix file " + path.string());
  const auto& head = rows.front().fields;
  if (header) header->assign(head.begin() + 1, head.end());
  const auto cols = static_cast<Eigen::Index>(head.size() - 1);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size() - 1), cols);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    if (static_cast<Eigen::Index>(f.size()) != cols + 1) {
      throw ParseError("wrong column count in " + path.string(), rows[r].line);
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      try {
        m(static_cast<Eigen::Index>(r - 1), c) =
            parse_double(f[static_cast<std::size_t>(c + 1)]);
      } catch (const ParseError& e) {
        throw ParseError(e.what(), rows[r].line);
      }
    }
  }
  return m;
}

}  // namespace

LdaModel load_lda(const std::filesystem::path& beta_path,
                  const std::filesystem::path& theta_path) {
  std::vector<std::string> vocab;
  Eigen::MatrixXd beta = read_labelled_matrix(beta_path, &vocab);
  Eigen::MatrixXd theta = read_labelled_matrix(theta_path, nullptr);
  if (!std::is_sorted(vocab.begin(), vocab.end())) {
    throw ParseError("vocabulary in " + beta_path.string() + " is not sorted");
  }
  return LdaModel::from_distributions(std::move(vocab), std::move(beta),
                                      std::move(theta));
}

}  // namespace medkg
