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
#include "medkg/relmodel.hpp"
#include "medkg/text.hpp"

namespace fs = std::filesystem;
using namespace medkg;

namespace {

Mention mention(const std::string& s, NodeType t) { return {s, t, "d", {0, s.size()}}; }

// Plain-loop evaluation of the expected complete-data log-likelihood with
// responsibilities taken at `at` and the model evaluated at `w`.
double reference_q(const std::vector<EmCandidate>& data, const Eigen::MatrixXd& at,
                   const Eigen::MatrixXd& w) {
  const auto M = w.cols();
  const auto log_post = [&](const Eigen::MatrixXd& lam, const EmCandidate& c) {
    std::vector<double> s(static_cast<std::size_t>(M));
    double norm = 0.0;
    for (Eigen::Index r = 0; r < M; ++r) {
      double v = 0.0;
      for (Eigen::Index k = 0; k < lam.rows(); ++k) v += lam(k, r) * c.features(k);
      s[static_cast<std::size_t>(r)] = v;
      norm += std::exp(v);
    }
    for (auto& v : s) v -= std::log(norm);
    return s;
  };
  const auto like = [&](const EmCandidate& c, Eigen::Index z) {
    return static_cast<std::size_t>(z) == c.label
               ? c.confidence
               : (1.0 - c.confidence) / static_cast<double>(M - 1);
  };
  double q = 0.0;
  for (const auto& c : data) {
    const auto lp_at = log_post(at, c);
    std::vector<double> g(static_cast<std::size_t>(M));
    double z_sum = 0.0;
    for (Eigen::Index z = 0; z < M; ++z) {
      g[static_cast<std::size_t>(z)] = std::exp(lp_at[static_cast<std::size_t>(z)]) * like(c, z);
      z_sum += g[static_cast<std::size_t>(z)];
    }
    const auto lp = log_post(w, c);
    for (Eigen::Index z = 0; z < M; ++z) {
      const double gz = g[static_cast<std::size_t>(z)] / z_sum;
      q += gz * (lp[static_cast<std::size_t>(z)] + std::log(like(c, z)));
    }
  }
  return q;
}

std::vector<EmCandidate> two_candidates() {
  EmCandidate a, b;
  a.features = Eigen::Vector2d(1.0, 0.5);
  a.label = 0;
  a.confidence = 0.8;
  b.features = Eigen::Vector2d(-0.5, 2.0);
  b.label = 2;
  b.confidence = 0.6;
  return {a, b};
}

}  // namespace

TEST(RelModel, ReducedPosterior) {
  Weights w = Weights::zeros(1, 2);
  w.lambda(0, 0) = std::log(3.0);
  const Eigen::VectorXd p = relation_posterior(w, Eigen::VectorXd::Ones(1));
  EXPECT_NEAR(p(0), 0.75, 1e-12);
  EXPECT_NEAR(p(1), 0.25, 1e-12);
}

TEST(RelModel, ZeroWeightsGiveUniform) {
  const Weights w = Weights::zeros(kNumFeatures);
  FeatureVector f(kNumFeatures);
  f << 0.3, -2.0, 0.9, 0.1, 1.0, 4.0;
  const auto post = edge_posterior(w, f);
  ASSERT_EQ(post.size(), 24u);
  for (const auto& [edge, p] : post) EXPECT_NEAR(p, 1.0 / 24.0, 1e-15);
  EXPECT_EQ(predict_relation(w, f), 0u);
}

TEST(RelModel, ShiftInvarianceAndOverflow) {
  Weights w = Weights::zeros(2, 4);
  w.lambda << 1.0, -2.0, 0.5, 3.0, 0.0, 1.0, -1.0, 2.0;
  const Eigen::Vector2d f(0.7, -1.3);
  Weights shifted = w;
  shifted.lambda.row(0).array() += 5.0;
  shifted.lambda.row(1).array() -= 3.0;
  EXPECT_TRUE(relation_posterior(w, f).isApprox(relation_posterior(shifted, f), 1e-12));
  EXPECT_NEAR(relation_posterior(w, f).sum(), 1.0, 1e-12);

  Weights huge = w;
  huge.lambda *= 1e5;
  const Eigen::VectorXd p = relation_posterior(huge, f);
  EXPECT_TRUE(p.allFinite());
  EXPECT_NEAR(p.sum(), 1.0, 1e-12);
}

TEST(RelModel, PosteriorRejectsBadInput) {
  const Weights w = Weights::zeros(2, 3);
  EXPECT_THROW(relation_posterior(w, Eigen::Vector2d(std::nan(""), 0.0)), NumericalError);
  EXPECT_THROW(relation_posterior(w, Eigen::Vector3d(0.0, 0.0, 0.0)), Error);
  EXPECT_THROW(edge_posterior(w, Eigen::Vector2d(0.0, 0.0)), Error);
}

TEST(RelModel, LabelLikelihood) {
  EXPECT_DOUBLE_EQ(label_likelihood(3, 3, 0.7, 24), 0.7);
  EXPECT_DOUBLE_EQ(label_likelihood(3, 4, 0.7, 24), 0.3 / 23.0);
  double sum = 0.0;
  for (std::size_t z = 0; z < 24; ++z) sum += label_likelihood(5, z, 0.4, 24);
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(RelModel, OneIterationMatchesReferenceQ) {
  const auto data = two_candidates();
  Weights init = Weights::zeros(2, 3);
  init.lambda << 0.2, -0.1, 0.3, 0.0, 0.4, -0.2;
  EXPECT_NEAR(q_value(data, responsibilities(data, init), init),
              reference_q(data, init.lambda, init.lambda), 1e-12);

  EmConfig cfg;
  cfg.max_iters = 1;
  cfg.inner_steps = 10;
  cfg.learning_rate = 0.5;
  cfg.tol = 0.0;
  const EmResult r = em_fit(data, init, cfg);
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_NEAR(r.trace[0].q_before, reference_q(data, init.lambda, init.lambda), 1e-12);
  EXPECT_NEAR(r.trace[0].q_after, reference_q(data, init.lambda, r.weights.lambda), 1e-12);
  EXPECT_GT(r.trace[0].q_after, r.trace[0].q_before);
}

TEST(RelModel, GradientMatchesFiniteDifferences) {
  const auto data = two_candidates();
  Weights w = Weights::zeros(2, 3);
  w.lambda << 0.5, -0.3, 0.1, 0.2, 0.0, -0.4;
  const Eigen::MatrixXd gamma = responsibilities(data, w);
  const double l2 = 0.1;
  const Eigen::MatrixXd g = q_gradient(data, gamma, w, l2);
  const double h = 1e-6;
  for (Eigen::Index k = 0; k < 2; ++k) {
    for (Eigen::Index r = 0; r < 3; ++r) {
      Weights plus = w, minus = w;
      plus.lambda(k, r) += h;
      minus.lambda(k, r) -= h;
      const double fd =
          (q_value(data, gamma, plus, l2) - q_value(data, gamma, minus, l2)) / (2 * h);
      EXPECT_NEAR(g(k, r), fd, 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(RelModel, FixedPointStopsAtFirstIteration) {
  std::vector<EmCandidate> data(3);
  for (std::size_t n = 0; n < data.size(); ++n) {
    data[n].features = Eigen::VectorXd::Zero(2);
    data[n].label = n;
    data[n].confidence = 0.9;
  }
  EmConfig cfg;
  cfg.tol = 1e-10;
  const EmResult r = em_fit(data, Weights::zeros(2, 3), cfg);
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(std::abs(r.trace[0].q_after - r.trace[0].q_before), cfg.tol);
}

TEST(RelModel, SeparableSetIsLearned) {
  // Label = which of three bins feature 0 falls in; feature 1 is a bias.
  std::vector<EmCandidate> data;
  Rng rng(4);
  for (int n = 0; n < 60; ++n) {
    EmCandidate c;
    const std::size_t label = static_cast<std::size_t>(n % 3);
    const double x = static_cast<double>(label) * 2.0 - 2.0 + 0.4 * (rng.uniform() - 0.5);
    c.features = Eigen::Vector3d(x, x * x, 1.0);
    c.label = label;
    c.confidence = 0.9;
    data.push_back(c);
  }
  EmConfig cfg;
  cfg.max_iters = 100;
  cfg.tol = 1e-10;
  cfg.learning_rate = 0.5;
  const EmResult r = em_fit(data, Weights::zeros(3, 3), cfg);
  std::size_t correct = 0;
  for (const auto& c : data) correct += predict_relation(r.weights, c.features) == c.label;
  EXPECT_EQ(correct, data.size());
  for (const auto& it : r.trace) EXPECT_GE(it.q_after, it.q_before - 1e-8);
}

TEST(RelModel, EmRejectsBadInput) {
  EXPECT_THROW(em_fit({}, Weights::zeros(2, 3), {}), Error);
  auto data = two_candidates();
  data[0].confidence = 1.5;
  EXPECT_THROW(em_fit(data, Weights::zeros(2, 3), {}), Error);
  data = two_candidates();
  data[1].label = 7;
  EXPECT_THROW(em_fit(data, Weights::zeros(2, 3), {}), Error);
}

TEST(RelModel, FeaturizeDefaultsAndSymmetry) {
  const Mention a = mention("aspirin", NodeType::kMedications);
  const Mention b = mention("stroke", NodeType::kDiseases);
  const FeatureVector empty = featurize(a, b, {});
  FeatureVector expected = FeatureVector::Zero(kNumFeatures);
  expected(static_cast<Eigen::Index>(Feature::kTypePair)) = 1.0;
  EXPECT_EQ(empty, expected);

  CooccurrenceCounts counts;
  counts.add_window({"aspirin", "stroke"});
  counts.add_window({"aspirin"});
  counts.add_window({"stroke", "headache"});
  counts.add_window({"headache"});
  const LogProbabilityMatrix lj = log_normalize(estimate_joint(counts, 0.0), 1e-9);
  const std::map<CooccurrenceCounts::Pair, std::size_t> hits = {{{"aspirin", "stroke"}, 2}};
  FeatureContext ctx;
  ctx.counts = &counts;
  ctx.log_joint = &lj;
  ctx.pattern_hits = &hits;
  const FeatureVector ab = featurize(a, b, ctx);
  const FeatureVector ba = featurize(b, a, ctx);

  // Presence/absence joint over 4 windows: both 1, only a 1, only b 1, none 1.
  EXPECT_NEAR(ab(0), 0.0, 1e-12);
  // Pair counts: (aspirin, stroke) 1, (headache, stroke) 1 -> p = 1/4 per cell.
  EXPECT_NEAR(ab(1), std::log(0.25 + 1e-9), 1e-12);
  EXPECT_EQ(ab(5), 2.0);
  for (Feature k : {Feature::kMutualInformation, Feature::kLogJoint,
                    Feature::kEmbeddingCosine, Feature::kTopicOverlap, Feature::kPatternHits}) {
    EXPECT_EQ(ab(static_cast<Eigen::Index>(k)), ba(static_cast<Eigen::Index>(k)));
  }
  EXPECT_EQ(feature_names().size(), kNumFeatures);
}

TEST(RelModel, WeightsRoundTrip) {
  Weights w = Weights::zeros(kNumFeatures);
  Rng rng(2);
  for (Eigen::Index k = 0; k < w.lambda.rows(); ++k) {
    for (Eigen::Index r = 0; r < w.lambda.cols(); ++r) w.lambda(k, r) = rng.normal();
  }
  const fs::path p = fs::temp_directory_path() / "medkg_weights.tsv";
  save_weights(w, p);
  EXPECT_EQ(load_weights(p).lambda, w.lambda);
  Weights small = Weights::zeros(2, 3);
  small.lambda(1, 2) = 0.25;
  save_weights(small, p);
  EXPECT_EQ(load_weights(p).lambda, small.lambda);
  fs::remove(p);
}
