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
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "medkg/extract.hpp"
#include "medkg/stats.hpp"
#include "medkg/topics.hpp"

namespace medkg {

// Feature templates, in vector order.
enum class Feature : std::size_t {
  kMutualInformation,
  kLogJoint,
  kEmbeddingCosine,
  kTopicOverlap,
  kTypePair,
  kPatternHits,
};
inline constexpr std::size_t kNumFeatures = 6;
const std::array<std::string_view, kNumFeatures>& feature_names();

using FeatureVector = Eigen::VectorXd;

// Artifacts feeding featurize(). Any null member contributes 0 to its
// feature(s).
struct FeatureContext {
  const CooccurrenceCounts* counts = nullptr;
  const LogProbabilityMatrix* log_joint = nullptr;
  const std::map<std::string, EmbeddingVector>* embeddings = nullptr;
  const LdaModel* lda = nullptr;
  const std::map<std::string, std::vector<std::string>>* topic_contexts =
      nullptr;
  const std::map<CooccurrenceCounts::Pair, std::size_t>* pattern_hits =
      nullptr;
};

// [MI of the presence/absence joint, log-joint entry, context-embedding
//  cosine, topic overlap, typical-type-pair indicator, pattern hits].
// All but the type-pair and pattern templates are symmetric in (head, tail).
FeatureVector featurize(const Mention& head, const Mention& tail,
                        const FeatureContext& ctx);

// Tokens of every sentence that mentions each entity.
std::map<std::string, std::vector<std::string>> entity_contexts(
    const std::vector<AnnotatedDocument>& docs);

// Number of candidate triples per unordered entity pair.
std::map<CooccurrenceCounts::Pair, std::size_t> count_pattern_hits(
    const std::vector<CandidateTriple>& candidates);

// lambda(k, r): weight of feature k for relation class r. Columns are the
// relation classes; 24 columns index EdgeType by ordinal.
struct Weights {
  Eigen::MatrixXd lambda;

  static Weights zeros(std::size_t num_features,
                       std::size_t num_relations = kNumEdgeTypes);
  std::size_t num_features() const { return static_cast<std::size_t>(lambda.rows()); }
  std::size_t num_relations() const { return static_cast<std::size_t>(lambda.cols()); }
};

// Softmax over relation classes of lambda^T f, max-subtracted. Throws
// NumericalError on non-finite features or weights.
Eigen::VectorXd relation_posterior(const Weights& w, const FeatureVector& f);
// Same, keyed by edge type; requires 24 relation columns.
std::map<EdgeType, double> edge_posterior(const Weights& w,
                                          const FeatureVector& f);
// Arg-max class; ties go to the lowest index.
std::size_t predict_relation(const Weights& w, const FeatureVector& f);

struct EmCandidate {
  FeatureVector features;
  std::size_t label = 0;    // observed (possibly wrong) relation class
  double confidence = 1.0;  // probability the observed label is correct
};

struct EmConfig {
  std::size_t max_iters = 100;
  double tol = 1e-6;
  double learning_rate = 0.1;
  std::size_t inner_steps = 50;
  double l2 = 0.0;
  std::uint64_t seed = 0;
};

// Observed-label likelihood: P(y | z) = c when y == z, else (1 - c)/(M - 1).
double label_likelihood(std::size_t observed, std::size_t latent,
                        double confidence, std::size_t num_relations);

// E-step: gamma(n, z) = P(z | f_n, y_n; w), an N x M matrix.
Eigen::MatrixXd responsibilities(const std::vector<EmCandidate>& data,
                                 const Weights& w);

// Expected complete-data log-likelihood under fixed responsibilities:
//   sum_n sum_z gamma(n,z) [ln P(z | f_n; w) + ln P(y_n | z)] - l2/2 |w|^2
double q_value(const std::vector<EmCandidate>& data,
               const Eigen::MatrixXd& gamma, const Weights& w,
               double l2 = 0.0);

// Gradient of q_value with respect to lambda.
Eigen::MatrixXd q_gradient(const std::vector<EmCandidate>& data,
                           const Eigen::MatrixXd& gamma, const Weights& w,
                           double l2 = 0.0);

// sum_n ln sum_z P(z | f_n; w) P(y_n | z).
double observed_log_likelihood(const std::vector<EmCandidate>& data,
                               const Weights& w);

struct EmIteration {
  std::size_t iteration = 0;
  double q_before = 0.0;  // Q(w_t | w_t)
  double q_after = 0.0;   // Q(w_{t+1} | w_t)
  double log_likelihood = 0.0;  // at w_t
};

struct EmResult {
  Weights weights;
  std::vector<EmIteration> trace;
  bool converged = false;
};

// EM over the latent true relation. The M-step runs `inner_steps` of
// full-batch gradient ascent on Q, halving the step until Q does not
// decrease, so every accepted iteration has q_after >= q_before. Stops when
// q_after - q_before < tol or after max_iters.
EmResult em_fit(const std::vector<EmCandidate>& data, const Weights& init,
                const EmConfig& config);

// TSV rows: feature index, relation (edge name for 24 columns, else class
// index), value.
void save_weights(const Weights& w, const std::filesystem::path& path);
Weights load_weights(const std::filesystem::path& path);

}  // namespace medkg
