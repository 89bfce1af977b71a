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

#include "medkg/relmodel.hpp"

#include <cmath>
#include <limits>

#include "medkg/error.hpp"
#include "medkg/text.hpp"

namespace medkg {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

CooccurrenceCounts::Pair unordered(const std::string& a, const std::string& b) {
  return a < b ? CooccurrenceCounts::Pair{a, b} : CooccurrenceCounts::Pair{b, a};
}

// Scalar exp: Eigen's vectorized exp maps -inf to a denormal, not 0.
Eigen::VectorXd exp_of(const Eigen::VectorXd& x) {
  return x.unaryExpr([](double v) { return std::exp(v); });
}

Eigen::VectorXd log_softmax(const Eigen::VectorXd& scores) {
  const double m = scores.maxCoeff();
  const double lse = m + std::log(exp_of(scores.array() - m).sum());
  return scores.array() - lse;
}

void check_data(const std::vector<EmCandidate>& data, const Weights& w) {
  if (data.empty()) throw Error("EM needs at least one candidate");
  if (w.num_relations() < 2) throw Error("EM needs at least two relations");
  for (const auto& c : data) {
    if (static_cast<std::size_t>(c.features.size()) != w.num_features()) {
      throw Error("candidate feature length does not match the weights");
    }
    if (c.label >= w.num_relations()) {
      throw Error("candidate label outside the relation set");
    }
    if (!(c.confidence >= 0.0 && c.confidence <= 1.0)) {
      throw Error("candidate confidence outside [0, 1]");
    }
  }
}

}  // namespace

const std::array<std::string_view, kNumFeatures>& feature_names() {
  static const std::array<std::string_view, kNumFeatures> names = {
      "mutual_information", "log_joint",  "embedding_cosine",
      "topic_overlap",      "type_pair", "pattern_hits",
  };
  return names;
}

FeatureVector featurize(const Mention& head, const Mention& tail,
                        const FeatureContext& ctx) {
  FeatureVector f = FeatureVector::Zero(kNumFeatures);
  const std::string& a = head.surface;
  const std::string& b = tail.surface;
  const auto at = [&f](Feature k) -> double& {
    return f(static_cast<Eigen::Index>(k));
  };

  if (ctx.counts && ctx.counts->windows() > 0) {
    at(Feature::kMutualInformation) =
        mutual_information(pair_joint(*ctx.counts, a, b));
  }
  if (ctx.log_joint) {
    const auto i = ctx.log_joint->index_of(a);
    const auto j = ctx.log_joint->index_of(b);
    if (i && j) {
      at(Feature::kLogJoint) = ctx.log_joint->values(
          static_cast<Eigen::Index>(*i), static_cast<Eigen::Index>(*j));
    }
  }
  if (ctx.embeddings) {
    const auto ia = ctx.embeddings->find(a);
    const auto ib = ctx.embeddings->find(b);
    if (ia != ctx.embeddings->end() && ib != ctx.embeddings->end()) {
      at(Feature::kEmbeddingCosine) = cosine_similarity(ia->second, ib->second);
    }
  }
  if (ctx.lda && ctx.topic_contexts) {
    const auto ia = ctx.topic_contexts->find(a);
    const auto ib = ctx.topic_contexts->find(b);
    if (ia != ctx.topic_contexts->end() && ib != ctx.topic_contexts->end()) {
      at(Feature::kTopicOverlap) =
          topic_overlap(*ctx.lda, ia->second, ib->second);
    }
  }
  at(Feature::kTypePair) = is_typical_type_pair(head.type, tail.type) ? 1.0 : 0.0;
  if (ctx.pattern_hits) {
    const auto it = ctx.pattern_hits->find(unordered(a, b));
    if (it != ctx.pattern_hits->end()) {
      at(Feature::kPatternHits) = static_cast<double>(it->second);
    }
  }
  for (Eigen::Index k = 0; k < f.size(); ++k) {
    if (!std::isfinite(f(k))) f(k) = 0.0;
  }
  return f;
}

std::map<std::string, std::vector<std::string>> entity_contexts(
    const std::vector<AnnotatedDocument>& docs) {
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& ad : docs) {
    std::map<std::string, std::set<std::size_t>> sentences;
    for (const auto& m : ad.mentions) {
      sentences[m.surface].insert(ad.doc.sentence_of(m.span.start));
    }
    for (const auto& [entity, ids] : sentences) {
      auto& toks = out[entity];
      for (std::size_t s : ids) {
        for (auto& t : tokenize(ad.doc.sentence_text(s))) {
          toks.push_back(std::move(t));
        }
      }
    }
  }
  return out;
}

std::map<CooccurrenceCounts::Pair, std::size_t> count_pattern_hits(
    const std::vector<CandidateTriple>& candidates) {
  std::map<CooccurrenceCounts::Pair, std::size_t> hits;
  for (const auto& t : candidates) {
    ++hits[unordered(t.head.surface, t.tail.surface)];
  }
  return hits;
}

Weights Weights::zeros(std::size_t num_features, std::size_t num_relations) {
  return {Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(num_features),
                                static_cast<Eigen::Index>(num_relations))};
}

Eigen::VectorXd relation_posterior(const Weights& w, const FeatureVector& f) {
  if (static_cast<std::size_t>(f.size()) != w.num_features()) {
    throw Error("feature length " + std::to_string(f.size()) +
                " does not match weights (" +
                std::to_string(w.num_features()) + ")");
  }
  if (!f.allFinite()) throw NumericalError("non-finite feature value");
  if (!w.lambda.allFinite()) throw NumericalError("non-finite weight");
  return exp_of(log_softmax(w.lambda.transpose() * f));
}

std::map<EdgeType, double> edge_posterior(const Weights& w,
                                          const FeatureVector& f) {
  if (w.num_relations() != kNumEdgeTypes) {
    throw Error("edge posterior needs weights for all 24 edge types");
  }
  const Eigen::VectorXd p = relation_posterior(w, f);
  std::map<EdgeType, double> out;
  for (EdgeType e : all_edge_types()) {
    out[e] = p(static_cast<Eigen::Index>(index_of(e)));
  }
  return out;
}

std::size_t predict_relation(const Weights& w, const FeatureVector& f) {
  const Eigen::VectorXd p = relation_posterior(w, f);
  Eigen::Index best = 0;
  for (Eigen::Index r = 1; r < p.size(); ++r) {
    if (p(r) > p(best)) best = r;
  }
  return static_cast<std::size_t>(best);
}

double label_likelihood(std::size_t observed, std::size_t latent,
                        double confidence, std::size_t num_relations) {
  if (observed == latent) return confidence;
  return (1.0 - confidence) / static_cast<double>(num_relations - 1);
}

Eigen::MatrixXd responsibilities(const std::vector<EmCandidate>& data,
                                 const Weights& w) {
  check_data(data, w);
  const auto M = static_cast<Eigen::Index>(w.num_relations());
  Eigen::MatrixXd gamma(static_cast<Eigen::Index>(data.size()), M);
  for (std::size_t n = 0; n < data.size(); ++n) {
    const auto& c = data[n];
    Eigen::VectorXd lp = log_softmax(w.lambda.transpose() * c.features);
    for (Eigen::Index z = 0; z < M; ++z) {
      const double like = label_likelihood(c.label, static_cast<std::size_t>(z),
                                           c.confidence, w.num_relations());
      lp(z) = like > 0.0 ? lp(z) + std::log(like) : kNegInf;
    }
    const double m = lp.maxCoeff();
    Eigen::VectorXd g = exp_of(lp.array() - m);
    gamma.row(static_cast<Eigen::Index>(n)) = (g / g.sum()).transpose();
  }
  return gamma;
}

double q_value(const std::vector<EmCandidate>& data,
               const Eigen::MatrixXd& gamma, const Weights& w, double l2) {
  const auto M = static_cast<Eigen::Index>(w.num_relations());
  double q = 0.0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    const auto& c = data[n];
    const Eigen::VectorXd lp = log_softmax(w.lambda.transpose() * c.features);
    for (Eigen::Index z = 0; z < M; ++z) {
      const double g = gamma(static_cast<Eigen::Index>(n), z);
      if (g == 0.0) continue;
      const double like = label_likelihood(c.label, static_cast<std::size_t>(z),
                                           c.confidence, w.num_relations());
      q += g * (lp(z) + std::log(like));
    }
  }
  return q - 0.5 * l2 * w.lambda.squaredNorm();
}

Eigen::MatrixXd q_gradient(const std::vector<EmCandidate>& data,
                           const Eigen::MatrixXd& gamma, const Weights& w,
                           double l2) {
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(w.lambda.rows(), w.lambda.cols());
  for (std::size_t n = 0; n < data.size(); ++n) {
    const auto& c = data[n];
    const Eigen::VectorXd p =
        exp_of(log_softmax(w.lambda.transpose() * c.features));
    const Eigen::VectorXd g = gamma.row(static_cast<Eigen::Index>(n)).transpose();
    // d/d lambda(k, r) of sum_z g_z ln p_z = f_k (g_r - p_r sum_z g_z).
    grad += c.features * (g - p * g.sum()).transpose();
  }
  return grad - l2 * w.lambda;
}

double observed_log_likelihood(const std::vector<EmCandidate>& data,
                               const Weights& w) {
  double ll = 0.0;
  for (const auto& c : data) {
    const Eigen::VectorXd lp = log_softmax(w.lambda.transpose() * c.features);
    double m = kNegInf;
    Eigen::VectorXd terms(lp.size());
    for (Eigen::Index z = 0; z < lp.size(); ++z) {
      const double like = label_likelihood(c.label, static_cast<std::size_t>(z),
                                           c.confidence, w.num_relations());
      terms(z) = like > 0.0 ? lp(z) + std::log(like) : kNegInf;
      m = std::max(m, terms(z));
    }
    ll += m + std::log(exp_of(terms.array() - m).sum());
  }
  return ll;
}

EmResult em_fit(const std::vector<EmCandidate>& data, const Weights& init,
                const EmConfig& config) {
  check_data(data, init);
  if (!init.lambda.allFinite()) throw NumericalError("non-finite initial weights");
  if (!(config.learning_rate > 0.0)) throw Error("learning rate must be positive");

  EmResult result{init, {}, false};
  Weights& w = result.weights;
  for (std::size_t t = 0; t < config.max_iters; ++t) {
    EmIteration it;
    it.iteration = t;
    it.log_likelihood = observed_log_likelihood(data, w);
    const Eigen::MatrixXd gamma = responsibilities(data, w);
    it.q_before = q_value(data, gamma, w, config.l2);
    if (!std::isfinite(it.q_before)) {
      throw NumericalError("non-finite Q at iteration " + std::to_string(t));
    }

    double q = it.q_before;
    for (std::size_t s = 0; s < config.inner_steps; ++s) {
      const Eigen::MatrixXd grad = q_gradient(data, gamma, w, config.l2);
      if (grad.squaredNorm() == 0.0) break;
      double step = config.learning_rate;
      bool accepted = false;
      for (int halving = 0; halving < 40 && !accepted; ++halving) {
        Weights trial{w.lambda + step * grad};
        const double q_trial = q_value(data, gamma, trial, config.l2);
        if (std::isfinite(q_trial) && q_trial >= q) {
          w = std::move(trial);
          q = q_trial;
          accepted = true;
        } else {
          step *= 0.5;
        }
      }
      if (!accepted) break;
    }
    it.q_after = q;
    if (!std::isfinite(it.q_after)) {
      throw NumericalError("non-finite Q at iteration " + std::to_string(t));
    }
    result.trace.push_back(it);
    if (it.q_after - it.q_before < config.tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

void save_weights(const Weights& w, const std::filesystem::path& path) {
  std::string out = "feature\trelation\tvalue\n";
  const bool named = w.num_relations() == kNumEdgeTypes;
  for (Eigen::Index k = 0; k < w.lambda.rows(); ++k) {
    for (Eigen::Index r = 0; r < w.lambda.cols(); ++r) {
      out += std::to_string(k) + "\t";
      out += named ? std::string(to_string(edge_type_at(static_cast<std::size_t>(r))))
                   : std::to_string(r);
      out += "\t" + format_double(w.lambda(k, r)) + "\n";
    }
  }
  write_file(path, out);
}

Weights load_weights(const std::filesystem::path& path) {
  struct Entry {
    std::size_t k, r;
    double v;
  };
  std::vector<Entry> entries;
  std::size_t K = 0, M = 0;
  bool named = false;
  const auto rows = read_tsv(path);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (i == 0 && !row.fields.empty() && row.fields[0] == "feature") continue;
    if (row.fields.size() != 3) {
      throw ParseError("weights row needs 3 fields", row.line);
    }
    try {
      Entry e{static_cast<std::size_t>(parse_int(row.fields[0])), 0,
              parse_double(row.fields[2])};
      if (const auto edge = parse_edge_type(row.fields[1])) {
        e.r = index_of(*edge);
        named = true;
      } else {
        e.r = static_cast<std::size_t>(parse_int(row.fields[1]));
      }
      K = std::max(K, e.k + 1);
      M = std::max(M, e.r + 1);
      entries.push_back(e);
    } catch (const ParseError& err) {
      throw ParseError(err.what(), row.line);
    }
  }
  if (named) M = kNumEdgeTypes;
  Weights w = Weights::zeros(K, M);
  for (const auto& e : entries) {
    w.lambda(static_cast<Eigen::Index>(e.k), static_cast<Eigen::Index>(e.r)) = e.v;
  }
  if (!w.lambda.allFinite()) throw NumericalError("non-finite weight in " + path.string());
  return w;
}

}  // namespace medkg
