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
#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "medkg/extract.hpp"

namespace medkg {

struct CellIndex {
  std::size_t i = 0;  // entity
  std::size_t j = 0;  // action (relation)
  std::size_t k = 0;  // attribute
  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

// Sparse nonnegative 3-mode tensor with a key per index on every axis.
class DataTensor {
 public:
  DataTensor() = default;
  DataTensor(std::vector<std::string> entities, std::vector<std::string> actions,
             std::vector<std::string> attributes);

  std::size_t dim_i() const { return entities_.size(); }
  std::size_t dim_j() const { return actions_.size(); }
  std::size_t dim_k() const { return attributes_.size(); }

  const std::vector<std::string>& entities() const { return entities_; }
  const std::vector<std::string>& actions() const { return actions_; }
  const std::vector<std::string>& attributes() const { return attributes_; }
  const std::map<CellIndex, double>& entries() const { return entries_; }

  std::optional<std::size_t> entity_index(const std::string& key) const;
  std::optional<std::size_t> action_index(const std::string& key) const;
  std::optional<std::size_t> attribute_index(const std::string& key) const;

  // Adds `value` (>= 0) to a cell. Throws on bad indices or negative values.
  void add(const CellIndex& cell, double value);
  double at(const CellIndex& cell) const;
  double squared_norm() const;

  friend bool operator==(const DataTensor&, const DataTensor&) = default;

 private:
  std::vector<std::string> entities_;
  std::vector<std::string> actions_;
  std::vector<std::string> attributes_;
  std::map<std::string, std::size_t> entity_lookup_;
  std::map<std::string, std::size_t> action_lookup_;
  std::map<std::string, std::size_t> attribute_lookup_;
  std::map<CellIndex, double> entries_;
};

inline constexpr const char* kNoAttribute = "none";

// Attribute-axis key of a triple: "tail:<key>" when it has no attributes,
// otherwise one "attr:<name>=<value>" key per attribute.
std::vector<std::string> attribute_keys(const CandidateTriple& t);

// Entities (heads and tails, sorted) x 24 edge types x attribute keys
// ("none" first, the rest sorted). Each triple adds its confidence to
// (head, edge, key) for every key in attribute_keys(). An empty input gives
// dims (0, 24, 1).
DataTensor build_tensor(const std::vector<CandidateTriple>& triples);

// Cell addressed by a triple's head, edge and first attribute key.
std::optional<CellIndex> cell_of(const DataTensor& t, const CandidateTriple& c);

struct CPFactors {
  Eigen::MatrixXd A;  // I x R
  Eigen::MatrixXd B;  // J x R
  Eigen::MatrixXd C;  // K x R
  std::size_t rank() const { return static_cast<std::size_t>(A.cols()); }
};

struct CpConfig {
  std::size_t rank = 8;
  std::size_t max_iters = 200;
  double tol = 1e-6;
  std::uint64_t seed = 1;
  double ridge = 1e-8;
};

struct CpResult {
  CPFactors factors;
  // Relative Frobenius error ||T - X|| / ||T|| after each sweep.
  std::vector<double> errors;
  bool converged = false;
  // Set when the rank exceeds every axis dimension.
  bool rank_exceeds_dims = false;
};

// Alternating least squares. Factors start uniform in [0, 1) from the seed;
// each half-step solves its normal equations (Gram Hadamard product plus
// `ridge` on the diagonal). Column norms are rebalanced across the three
// factors after every sweep. Stops when the change in relative error drops
// below tol or after max_iters.
CpResult cp_als(const DataTensor& T, const CpConfig& config);

// sum_r A(i,r) B(j,r) C(k,r); throws std::out_of_range on bad indices.
double reconstruct(const CPFactors& f, std::size_t i, std::size_t j,
                   std::size_t k);

// Min-max normalized reconstruction of `cell` against the raw values of the
// calibration cells, clipped to [0, 1]; 0.5 when the calibration values are
// all equal. Throws on an empty calibration set.
double relation_score(const CPFactors& f, const CellIndex& cell,
                      const std::vector<CellIndex>& calibration);

// <prefix>.tsv (i, j, k, value) plus <prefix>_entities.tsv,
// <prefix>_actions.tsv and <prefix>_attributes.tsv index maps.
void save_tensor(const DataTensor& t, const std::filesystem::path& dir,
                 const std::string& prefix = "tensor");
DataTensor load_tensor(const std::filesystem::path& dir,
                       const std::string& prefix = "tensor");

// <prefix>_A.tsv, <prefix>_B.tsv, <prefix>_C.tsv: one row per index.
void save_factors(const CPFactors& f, const std::filesystem::path& dir,
                  const std::string& prefix = "cp");
CPFactors load_factors(const std::filesystem::path& dir,
                       const std::string& prefix = "cp");

}  // namespace medkg
