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

#include "medkg/stats.hpp"

#include <algorithm>
#include <cmath>

#include "medkg/error.hpp"
#include "medkg/text.hpp"

namespace medkg {
namespace {

std::optional<std::size_t> find_key(const std::vector<std::string>& keys,
                                    const std::string& key) {
  const auto it = std::lower_bound(keys.begin(), keys.end(), key);
  if (it != keys.end() && *it == key) {
    return static_cast<std::size_t>(it - keys.begin());
  }
  // Fall back to a scan for unsorted key lists.
  const auto lin = std::find(keys.begin(), keys.end(), key);
  if (lin == keys.end()) return std::nullopt;
  return static_cast<std::size_t>(lin - keys.begin());
}

}  // namespace

void CooccurrenceCounts::add_window(const std::set<std::string>& entities) {
  ++windows_;
  for (const auto& e : entities) ++entity_windows_[e];
  for (auto a = entities.begin(); a != entities.end(); ++a) {
    for (auto b = std::next(a); b != entities.end(); ++b) {
      ++pairs_[{*a, *b}];
    }
  }
}

void CooccurrenceCounts::merge(const CooccurrenceCounts& other) {
  windows_ += other.windows_;
  for (const auto& [e, n] : other.entity_windows_) entity_windows_[e] += n;
  for (const auto& [p, n] : other.pairs_) pairs_[p] += n;
}

std::vector<std::string> CooccurrenceCounts::entities() const {
  std::vector<std::string> out;
  out.reserve(entity_windows_.size());
  for (const auto& [e, n] : entity_windows_) out.push_back(e);
  return out;
}

std::size_t CooccurrenceCounts::entity_windows(const std::string& e) const {
  const auto it = entity_windows_.find(e);
  return it == entity_windows_.end() ? 0 : it->second;
}

std::size_t CooccurrenceCounts::pair_count(const std::string& a,
                                           const std::string& b) const {
  if (a == b) return 0;
  const auto it = pairs_.find(a < b ? Pair{a, b} : Pair{b, a});
  return it == pairs_.end() ? 0 : it->second;
}

std::size_t CooccurrenceCounts::total_pair_count() const {
  std::size_t total = 0;
  for (const auto& [p, n] : pairs_) total += n;
  return total;
}

CooccurrenceCounts count_cooccurrences(
    const std::vector<AnnotatedDocument>& docs, CooccurrenceWindow window) {
  CooccurrenceCounts counts;
  for (const auto& ad : docs) {
    if (ad.doc.text.empty()) continue;
    if (window == CooccurrenceWindow::kDocument) {
      std::set<std::string> ents;
      for (const auto& m : ad.mentions) ents.insert(m.surface);
      counts.add_window(ents);
      continue;
    }
    std::vector<std::set<std::string>> per_sentence(
        std::max<std::size_t>(ad.doc.sentences.size(), 1));
    for (const auto& m : ad.mentions) {
      per_sentence[ad.doc.sentence_of(m.span.start)].insert(m.surface);
    }
    for (const auto& s : per_sentence) counts.add_window(s);
  }
  return counts;
}

void validate_joint(const JointDistribution& joint) {
  if (joint.p.size() == 0) throw Error("joint distribution is empty");
  if (static_cast<std::size_t>(joint.p.rows()) != joint.support_x.size() ||
      static_cast<std::size_t>(joint.p.cols()) != joint.support_y.size()) {
    throw Error("joint distribution shape does not match its supports");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < joint.p.rows(); ++i) {
    for (Eigen::Index j = 0; j < joint.p.cols(); ++j) {
      const double v = joint.p(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        throw Error("joint distribution has an invalid entry");
      }
      total += v;
    }
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error("joint distribution sums to " + format_double(total));
  }
}

std::optional<std::size_t> ProbabilityMatrix::index_of(
    const std::string& key) const {
  return find_key(entities, key);
}

std::optional<std::size_t> LogProbabilityMatrix::index_of(
    const std::string& key) const {
  return find_key(entities, key);
}

ProbabilityMatrix estimate_joint(const CooccurrenceCounts& counts,
                                 double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw Error("smoothing alpha must be a finite value >= 0");
  }
  ProbabilityMatrix P;
  P.entities = counts.entities();
  const std::size_t n = P.entities.size();
  if (n < 2) throw Error("joint estimation needs at least two entities");
  if (counts.total_pair_count() == 0 && alpha == 0.0) {
    throw Error("all cooccurrence counts are zero and alpha = 0");
  }
  const auto N = static_cast<Eigen::Index>(n);
  P.p = Eigen::MatrixXd::Zero(N, N);
  for (const auto& [pair, c] : counts.pairs()) {
    const auto i = static_cast<Eigen::Index>(*P.index_of(pair.first));
    const auto j = static_cast<Eigen::Index>(*P.index_of(pair.second));
    P.p(i, j) = static_cast<double>(c);
    P.p(j, i) = static_cast<double>(c);
  }
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) {
      if (i != j) P.p(i, j) += alpha;
    }
  }
  P.p /= P.p.sum();
  return P;
}

JointDistribution pair_joint(const CooccurrenceCounts& counts,
                             const std::string& a, const std::string& b) {
  const double w = static_cast<double>(counts.windows());
  if (w == 0.0) throw Error("no windows counted");
  const double nab = static_cast<double>(counts.pair_count(a, b));
  const double na = static_cast<double>(counts.entity_windows(a));
  const double nb = static_cast<double>(counts.entity_windows(b));
  JointDistribution j;
  j.support_x = {"absent:" + a, "present:" + a};
  j.support_y = {"absent:" + b, "present:" + b};
  j.p.resize(2, 2);
  j.p(1, 1) = nab / w;
  j.p(1, 0) = (na - nab) / w;
  j.p(0, 1) = (nb - nab) / w;
  j.p(0, 0) = (w - na - nb + nab) / w;
  return j;
}

double mutual_information(const JointDistribution& joint) {
  const Eigen::VectorXd px = joint.marginal_x();
  const Eigen::VectorXd py = joint.marginal_y();
  double mi = 0.0;
  for (Eigen::Index i = 0; i < joint.p.rows(); ++i) {
    for (Eigen::Index j = 0; j < joint.p.cols(); ++j) {
      const double pxy = joint.p(i, j);
      if (pxy <= 0.0) continue;
      mi += pxy * std::log(pxy / (px(i) * py(j)));
    }
  }
  return mi;
}

LogProbabilityMatrix log_normalize(const ProbabilityMatrix& P,
                                   double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw Error("epsilon must be positive");
  }
  LogProbabilityMatrix out;
  out.entities = P.entities;
  out.epsilon = epsilon;
  out.values = P.p.unaryExpr([epsilon](double v) { return std::log(v + epsilon); });
  return out;
}

std::string matrix_to_tsv(const std::vector<std::string>& keys,
                          const Eigen::MatrixXd& m) {
  std::string out;
  for (const auto& k : keys) out += "\t" + k;
  out += "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out += keys.at(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out += "\t" + format_sci12(m(i, j));
    }
    out += "\n";
  }
  return out;
}

void save_matrix_tsv(const std::vector<std::string>& keys,
                     const Eigen::MatrixXd& m,
                     const std::filesystem::path& path) {
  write_file(path, matrix_to_tsv(keys, m));
}

}  // namespace medkg
