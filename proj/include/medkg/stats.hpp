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
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "medkg/extract.hpp"
#include "medkg/preprocess.hpp"

namespace medkg {

// A cleaned document together with the mentions found in it.
struct AnnotatedDocument {
  PreparedDocument doc;
  std::vector<Mention> mentions;
};

enum class CooccurrenceWindow { kSentence, kDocument };

// Window counts over canonical entity keys (mention surfaces). Pair keys are
// unordered and stored with first < second; self pairs never appear.
class CooccurrenceCounts {
 public:
  using Pair = std::pair<std::string, std::string>;

  // Records one window containing the given distinct entities.
  void add_window(const std::set<std::string>& entities);
  // Commutative merge of partial counts.
  void merge(const CooccurrenceCounts& other);

  // All entity keys seen, sorted.
  std::vector<std::string> entities() const;
  std::size_t windows() const { return windows_; }
  std::size_t entity_windows(const std::string& e) const;
  std::size_t pair_count(const std::string& a, const std::string& b) const;
  std::size_t total_pair_count() const;
  const std::map<Pair, std::size_t>& pairs() const { return pairs_; }

  friend bool operator==(const CooccurrenceCounts&,
                         const CooccurrenceCounts&) = default;

 private:
  std::size_t windows_ = 0;
  std::map<std::string, std::size_t> entity_windows_;
  std::map<Pair, std::size_t> pairs_;
};

CooccurrenceCounts count_cooccurrences(
    const std::vector<AnnotatedDocument>& docs, CooccurrenceWindow window);

// p(i, j) over two (possibly different) supports.
struct JointDistribution {
  std::vector<std::string> support_x;
  std::vector<std::string> support_y;
  Eigen::MatrixXd p;

  Eigen::VectorXd marginal_x() const { return p.rowwise().sum(); }
  Eigen::VectorXd marginal_y() const { return p.colwise().sum().transpose(); }
};

// Throws when an entry is negative/non-finite or the total is not 1 ± 1e-9.
void validate_joint(const JointDistribution& joint);

// Symmetric N x N joint over entity pairs.
struct ProbabilityMatrix {
  std::vector<std::string> entities;
  Eigen::MatrixXd p;

  std::optional<std::size_t> index_of(const std::string& key) const;
  JointDistribution as_joint() const { return {entities, entities, p}; }
};

struct LogProbabilityMatrix {
  std::vector<std::string> entities;
  Eigen::MatrixXd values;
  double epsilon = 1e-9;

  std::optional<std::size_t> index_of(const std::string& key) const;
};

// Off-diagonal cells: (count(i,j) + alpha) / Z with Z the off-diagonal total;
// the diagonal stays 0. Needs at least two entities and either a nonzero
// count or alpha > 0.
ProbabilityMatrix estimate_joint(const CooccurrenceCounts& counts,
                                 double alpha = 0.01);

// 2 x 2 presence/absence joint of two entities over all counted windows.
JointDistribution pair_joint(const CooccurrenceCounts& counts,
                             const std::string& a, const std::string& b);

// Mutual information in nats; 0 * ln(0 / q) is taken as 0.
double mutual_information(const JointDistribution& joint);

// Elementwise ln(p + epsilon). Throws on epsilon <= 0.
LogProbabilityMatrix log_normalize(const ProbabilityMatrix& P,
                                   double epsilon = 1e-9);

// Header row and column of entity keys, values with 12 significant digits.
std::string matrix_to_tsv(const std::vector<std::string>& keys,
                          const Eigen::MatrixXd& m);
void save_matrix_tsv(const std::vector<std::string>& keys,
                     const Eigen::MatrixXd& m,
                     const std::filesystem::path& path);

}  // namespace medkg
