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
#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace medkg {

struct Triple {
  std::size_t h = 0;
  std::size_t r = 0;
  std::size_t t = 0;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct StringTriple {
  std::string head;
  std::string relation;
  std::string tail;
  friend auto operator<=>(const StringTriple&, const StringTriple&) = default;
};

struct TripleDataset {
  std::vector<std::string> entities;   // sorted
  std::vector<std::string> relations;  // sorted
  std::vector<Triple> train;
  std::vector<Triple> valid;
  std::vector<Triple> test;

  // Builds sorted index maps over all splits and validates.
  static TripleDataset from_strings(const std::vector<StringTriple>& train,
                                    const std::vector<StringTriple>& valid,
                                    const std::vector<StringTriple>& test);
  // Throws when indices are out of range, a split repeats a triple of
  // another split, or train is empty.
  void validate() const;
  std::set<Triple> all_triples() const;
};

// Directory with train.tsv, valid.tsv and test.tsv (head, relation, tail).
// valid.tsv may be absent.
TripleDataset load_dataset(const std::filesystem::path& dir);
void save_dataset(const TripleDataset& d, const std::filesystem::path& dir);

// Seeded shuffle of `triples` into train/valid/test by fraction.
TripleDataset split_dataset(std::vector<StringTriple> triples, double valid_frac,
                            double test_frac, std::uint64_t seed);

// n entities on a line; relation k links i to i + step_k for the steps
// {1, 2, 3, 5}. Split 80/10/10 by seed.
TripleDataset composition_kg(std::size_t num_entities, std::uint64_t seed);

enum class ModelKind { kTransE, kDistMult, kComplEx, kRotatE };
std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view s);

struct ModelConfig {
  ModelKind kind = ModelKind::kTransE;
  std::size_t dim = 32;
  double margin = 1.0;
  double learning_rate = 0.01;
  std::size_t epochs = 500;
  std::size_t negatives = 4;
  std::uint64_t seed = 1;
  // Project entity vectors onto the unit sphere after each update.
  bool normalize_entities = false;
  void validate() const;
};

// Embeddings. ComplEx and RotatE store the real parts in the first dim/2
// columns and the imaginary parts in the last dim/2. RotatE relations hold
// dim/2 phases.
class EmbeddingModel {
 public:
  EmbeddingModel(ModelKind kind, std::size_t dim, Eigen::MatrixXd entities,
                 Eigen::MatrixXd relations);

  ModelKind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  std::size_t num_entities() const { return static_cast<std::size_t>(E_.rows()); }
  std::size_t num_relations() const { return static_cast<std::size_t>(R_.rows()); }
  const Eigen::MatrixXd& entities() const { return E_; }
  const Eigen::MatrixXd& relations() const { return R_; }
  Eigen::MatrixXd& entities() { return E_; }
  Eigen::MatrixXd& relations() { return R_; }

  // Higher is more plausible. Throws std::out_of_range on bad indices.
  double score(std::size_t h, std::size_t r, std::size_t t) const;

 private:
  ModelKind kind_;
  std::size_t dim_;
  Eigen::MatrixXd E_;
  Eigen::MatrixXd R_;
};

struct TrainResult {
  EmbeddingModel model;
  std::vector<double> epoch_loss;  // mean loss per sampled pair
};

// SGD over shuffled training triples; each positive is paired with
// `negatives` uniform head-or-tail corruptions. Margin ranking loss for
// TransE/RotatE, logistic loss for DistMult/ComplEx. Throws NumericalError
// naming the epoch when the loss becomes non-finite.
TrainResult train(const TripleDataset& data, const ModelConfig& config);

// Mean loss over all training triples against a fixed seeded negative set.
double training_loss(const EmbeddingModel& m, const TripleDataset& data,
                     const ModelConfig& config);

// 1 + #strictly better + #ties / 2 over non-excluded candidates other than
// `truth`. Throws when truth is excluded or out of range.
double rank_from_scores(const std::vector<double>& scores, std::size_t truth,
                        const std::vector<bool>& excluded = {});

enum class RankMode { kRaw, kFiltered };

struct Query {
  Triple triple;
  bool predict_tail = true;
};

// Ranks the true answer of `q` among all entities. In filtered mode other
// answers that appear in `known` are removed first.
double rank_query(const EmbeddingModel& m, const Query& q, RankMode mode,
                  const std::set<Triple>& known);

struct RankingResult {
  std::vector<double> ranks;
};

// Two queries (tail and head) per test triple, filtered against every
// split.
RankingResult evaluate_ranking(const EmbeddingModel& m, const TripleDataset& d,
                               RankMode mode);

double mr(const std::vector<double>& ranks);
double mrr(const std::vector<double>& ranks);
double hits_at_k(const std::vector<double>& ranks, double k);
// hits@K / K: one relevant item per query.
double p_at_k(const std::vector<double>& ranks, double k);

// Expected MRR of a uniformly random ranking, averaged over the evaluation
// queries: H_n / n with n the query's candidate count.
double random_baseline_mrr(const TripleDataset& d, RankMode mode);

struct MetricRow {
  std::string model;
  std::string mode;
  double mr = 0.0;
  double mrr = 0.0;
  std::array<double, 3> hits{};  // @1, @3, @10
  std::array<double, 3> p{};     // @1, @3, @10
  std::size_t queries = 0;
};

MetricRow summarize(const std::string& model, RankMode mode,
                    const RankingResult& r);

// Fixed-width table with 3 decimals, one row per model and mode.
std::string format_report(const std::vector<MetricRow>& rows);

}  // namespace medkg
