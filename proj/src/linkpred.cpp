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

#include "medkg/linkpred.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <stdexcept>

#include "medkg/error.hpp"
#include "medkg/text.hpp"

namespace medkg {

namespace {

std::size_t index_in(const std::vector<std::string>& sorted,
                     const std::string& key) {
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), key);
  return static_cast<std::size_t>(it - sorted.begin());
}

std::vector<StringTriple> read_split(const std::filesystem::path& path) {
  std::vector<StringTriple> out;
  for (const auto& row : read_tsv(path)) {
    if (row.fields.size() != 3) {
      throw ParseError(path.string() + ": expected head, relation, tail",
                       row.line);
    }
    out.push_back({row.fields[0], row.fields[1], row.fields[2]});
  }
  return out;
}

bool uses_complex(ModelKind k) {
  return k == ModelKind::kComplEx || k == ModelKind::kRotatE;
}

double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// theta += step * d score / d theta for the rows of triple x.
void ascend(EmbeddingModel& m, const Triple& x, double step) {
  auto& E = m.entities();
  auto& R = m.relations();
  const auto hi = static_cast<Eigen::Index>(x.h);
  const auto ri = static_cast<Eigen::Index>(x.r);
  const auto ti = static_cast<Eigen::Index>(x.t);
  const Eigen::RowVectorXd h = E.row(hi);
  const Eigen::RowVectorXd r = R.row(ri);
  const Eigen::RowVectorXd t = E.row(ti);
  Eigen::RowVectorXd gh, gr, gt;
  switch (m.kind()) {
    case ModelKind::kTransE: {
      const Eigen::RowVectorXd u = h + r - t;
      const double n = u.norm();
      const Eigen::RowVectorXd g = n > 0 ? Eigen::RowVectorXd(u / n)
                                         : Eigen::RowVectorXd::Zero(u.size());
      gh = -g;
      gr = -g;
      gt = g;
      break;
    }
    case ModelKind::kDistMult:
      gh = r.cwiseProduct(t);
      gr = h.cwiseProduct(t);
      gt = h.cwiseProduct(r);
      break;
    case ModelKind::kComplEx: {
      const Eigen::Index k = h.size() / 2;
      const auto a = h.head(k), b = h.tail(k);
      const auto c = r.head(k), d = r.tail(k);
      const auto e = t.head(k), f = t.tail(k);
      gh.resize(h.size());
      gr.resize(r.size());
      gt.resize(t.size());
      gh << c.cwiseProduct(e) + d.cwiseProduct(f), c.cwiseProduct(f) - d.cwiseProduct(e);
      gr << a.cwiseProduct(e) + b.cwiseProduct(f), a.cwiseProduct(f) - b.cwiseProduct(e);
      gt << a.cwiseProduct(c) - b.cwiseProduct(d), b.cwiseProduct(c) + a.cwiseProduct(d);
      break;
    }
    case ModelKind::kRotatE: {
      const Eigen::Index k = h.size() / 2;
      const Eigen::ArrayXXd a = h.head(k).array(), b = h.tail(k).array();
      const Eigen::ArrayXXd e = t.head(k).array(), f = t.tail(k).array();
      const Eigen::ArrayXXd cs = r.array().cos(), sn = r.array().sin();
      const Eigen::ArrayXXd ure = a * cs - b * sn - e;
      const Eigen::ArrayXXd uim = a * sn + b * cs - f;
      const double n = std::sqrt((ure.square() + uim.square()).sum());
      const double inv = n > 0 ? 1.0 / n : 0.0;
      gh.resize(h.size());
      gt.resize(t.size());
      gh << (-(ure * cs + uim * sn) * inv).matrix(),
          (-(-ure * sn + uim * cs) * inv).matrix();
      gt << (ure * inv).matrix(), (uim * inv).matrix();
      gr = (-(ure * (-a * sn - b * cs) + uim * (a * cs - b * sn)) * inv).matrix();
      break;
    }
  }
  E.row(hi) += step * gh;
  R.row(ri) += step * gr;
  E.row(ti) += step * gt;
}

Triple corrupt(const Triple& x, std::size_t num_entities, Rng& rng) {
  Triple c = x;
  const bool head = rng.uniform() < 0.5;
  for (int attempt = 0; attempt < 32; ++attempt) {
    const std::size_t e = rng.uniform_index(num_entities);
    (head ? c.h : c.t) = e;
    if (c != x || num_entities == 1) break;
  }
  return c;
}

bool margin_loss(ModelKind k) {
  return k == ModelKind::kTransE || k == ModelKind::kRotatE;
}

double pair_loss(const EmbeddingModel& m, const Triple& pos, const Triple& neg,
                 double margin) {
  const double sp = m.score(pos.h, pos.r, pos.t);
  const double sn = m.score(neg.h, neg.r, neg.t);
  if (margin_loss(m.kind())) return std::max(0.0, margin - sp + sn);
  return softplus(-sp) + softplus(sn);
}

void normalize_rows(Eigen::MatrixXd& E, std::initializer_list<std::size_t> rows) {
  for (std::size_t i : rows) {
    const auto r = static_cast<Eigen::Index>(i);
    const double n = E.row(r).norm();
    if (n > 0) E.row(r) /= n;
  }
}

}  // namespace

TripleDataset TripleDataset::from_strings(const std::vector<StringTriple>& train,
                                          const std::vector<StringTriple>& valid,
                                          const std::vector<StringTriple>& test) {
  TripleDataset d;
  std::set<std::string> ents;
  std::set<std::string> rels;
  for (const auto* split : {&train, &valid, &test}) {
    for (const auto& t : *split) {
      ents.insert(t.head);
      ents.insert(t.tail);
      rels.insert(t.relation);
    }
  }
  d.entities.assign(ents.begin(), ents.end());
  d.relations.assign(rels.begin(), rels.end());
  const auto convert = [&d](const std::vector<StringTriple>& in) {
    std::vector<Triple> out;
    for (const auto& t : in) {
      out.push_back({index_in(d.entities, t.head), index_in(d.relations, t.relation),
                     index_in(d.entities, t.tail)});
    }
    return out;
  };
  d.train = convert(train);
  d.valid = convert(valid);
  d.test = convert(test);
  d.validate();
  return d;
}

void TripleDataset::validate() const {
  if (train.empty()) throw Error("link prediction needs a non-empty train split");
  const std::vector<const std::vector<Triple>*> splits = {&train, &valid, &test};
  const char* names[] = {"train", "valid", "test"};
  std::map<Triple, std::size_t> owner;
  for (std::size_t s = 0; s < splits.size(); ++s) {
    for (const auto& t : *splits[s]) {
      if (t.h >= entities.size() || t.t >= entities.size() ||
          t.r >= relations.size()) {
        throw Error(std::string("triple index out of range in ") + names[s]);
      }
      const auto [it, inserted] = owner.emplace(t, s);
      if (!inserted && it->second != s) {
        throw Error(std::string("triple (") + entities[t.h] + ", " +
                    relations[t.r] + ", " + entities[t.t] + ") appears in both " +
                    names[it->second] + " and " + names[s]);
      }
    }
  }
}

std::set<Triple> TripleDataset::all_triples() const {
  std::set<Triple> out(train.begin(), train.end());
  out.insert(valid.begin(), valid.end());
  out.insert(test.begin(), test.end());
  return out;
}

TripleDataset load_dataset(const std::filesystem::path& dir) {
  const auto train = read_split(dir / "train.tsv");
  const auto valid = std::filesystem::exists(dir / "valid.tsv")
                         ? read_split(dir / "valid.tsv")
                         : std::vector<StringTriple>{};
  const auto test = read_split(dir / "test.tsv");
  return TripleDataset::from_strings(train, valid, test);
}

void save_dataset(const TripleDataset& d, const std::filesystem::path& dir) {
  const auto dump = [&d](const std::vector<Triple>& split) {
    std::string out;
    for (const auto& t : split) {
      out += d.entities[t.h] + "\t" + d.relations[t.r] + "\t" + d.entities[t.t] + "\n";
    }
    return out;
  };
  write_file(dir / "train.tsv", dump(d.train));
  write_file(dir / "valid.tsv", dump(d.valid));
  write_file(dir / "test.tsv", dump(d.test));
}

TripleDataset split_dataset(std::vector<StringTriple> triples, double valid_frac,
                            double test_frac, std::uint64_t seed) {
  if (valid_frac < 0 || test_frac < 0 || valid_frac + test_frac >= 1.0) {
    throw Error("split fractions must be nonnegative and sum below 1");
  }
  std::sort(triples.begin(), triples.end());
  triples.erase(std::unique(triples.begin(), triples.end()), triples.end());
  Rng rng(seed);
  for (std::size_t i = triples.size(); i > 1; --i) {
    std::swap(triples[i - 1], triples[rng.uniform_index(i)]);
  }
  const auto n = static_cast<double>(triples.size());
  const auto n_test = static_cast<std::size_t>(std::floor(n * test_frac));
  const auto n_valid = static_cast<std::size_t>(std::floor(n * valid_frac));
  const std::vector<StringTriple> test(triples.begin(), triples.begin() + n_test);
  const std::vector<StringTriple> valid(triples.begin() + n_test,
                                        triples.begin() + n_test + n_valid);
  const std::vector<StringTriple> train(triples.begin() + n_test + n_valid,
                                        triples.end());
  return TripleDataset::from_strings(train, valid, test);
}

TripleDataset composition_kg(std::size_t num_entities, std::uint64_t seed) {
  const std::size_t steps[] = {1, 2, 3, 5};
  std::vector<StringTriple> triples;
  char name[32];
  const auto ent = [&name](std::size_t i) {
    std::snprintf(name, sizeof name, "e%03zu", i);
    return std::string(name);
  };
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t i = 0; i + steps[k] < num_entities; ++i) {
      triples.push_back({ent(i), "r" + std::to_string(k), ent(i + steps[k])});
    }
  }
  return split_dataset(std::move(triples), 0.1, 0.1, seed);
}

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kTransE: return "transe";
    case ModelKind::kDistMult: return "distmult";
    case ModelKind::kComplEx: return "complex";
    case ModelKind::kRotatE: return "rotate";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view s) {
  const std::string k = to_lower(s);
  if (k == "transe") return ModelKind::kTransE;
  if (k == "distmult") return ModelKind::kDistMult;
  if (k == "complex") return ModelKind::kComplEx;
  if (k == "rotate") return ModelKind::kRotatE;
  throw Error("unknown model kind '" + std::string(s) + "'");
}

void ModelConfig::validate() const {
  if (dim == 0) throw Error("embedding dim must be positive");
  if (uses_complex(kind) && dim % 2 != 0) {
    throw Error(std::string(to_string(kind)) + " needs an even dim");
  }
  if (!(learning_rate > 0)) throw Error("learning rate must be positive");
  if (epochs == 0) throw Error("epochs must be positive");
  if (negatives == 0) throw Error("negatives per positive must be positive");
  if (margin < 0) throw Error("margin must be nonnegative");
}

EmbeddingModel::EmbeddingModel(ModelKind kind, std::size_t dim,
                               Eigen::MatrixXd entities, Eigen::MatrixXd relations)
    : kind_(kind), dim_(dim), E_(std::move(entities)), R_(std::move(relations)) {
  const auto d = static_cast<Eigen::Index>(dim);
  const Eigen::Index rel_cols = kind == ModelKind::kRotatE ? d / 2 : d;
  if (uses_complex(kind) && dim % 2 != 0) throw Error("complex models need an even dim");
  if (E_.cols() != d || R_.cols() != rel_cols) {
    throw Error("embedding matrices do not match dim " + std::to_string(dim));
  }
}

double EmbeddingModel::score(std::size_t h, std::size_t r, std::size_t t) const {
  if (h >= num_entities() || t >= num_entities() || r >= num_relations()) {
    throw std::out_of_range("score index out of range");
  }
  const auto hv = E_.row(static_cast<Eigen::Index>(h));
  const auto rv = R_.row(static_cast<Eigen::Index>(r));
  const auto tv = E_.row(static_cast<Eigen::Index>(t));
  const Eigen::Index k = E_.cols() / 2;
  switch (kind_) {
    case ModelKind::kTransE:
      return -(hv + rv - tv).norm();
    case ModelKind::kDistMult:
      return hv.cwiseProduct(rv).dot(tv);
    case ModelKind::kComplEx: {
      const auto a = hv.head(k), b = hv.tail(k);
      const auto c = rv.head(k), d = rv.tail(k);
      const auto e = tv.head(k), f = tv.tail(k);
      return a.cwiseProduct(c).dot(e) + b.cwiseProduct(c).dot(f) +
             a.cwiseProduct(d).dot(f) - b.cwiseProduct(d).dot(e);
    }
    case ModelKind::kRotatE: {
      const Eigen::ArrayXd a = hv.head(k).transpose().array();
      const Eigen::ArrayXd b = hv.tail(k).transpose().array();
      const Eigen::ArrayXd cs = rv.transpose().array().cos();
      const Eigen::ArrayXd sn = rv.transpose().array().sin();
      const Eigen::ArrayXd ure = a * cs - b * sn - tv.head(k).transpose().array();
      const Eigen::ArrayXd uim = a * sn + b * cs - tv.tail(k).transpose().array();
      return -std::sqrt((ure.square() + uim.square()).sum());
    }
  }
  return 0.0;
}

TrainResult train(const TripleDataset& data, const ModelConfig& config) {
  config.validate();
  data.validate();
  const auto n_ent = static_cast<Eigen::Index>(data.entities.size());
  const auto n_rel = static_cast<Eigen::Index>(data.relations.size());
  const auto d = static_cast<Eigen::Index>(config.dim);
  Rng rng(config.seed);
  const auto fill = [&rng](Eigen::MatrixXd& m, double lo, double hi) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = lo + (hi - lo) * rng.uniform();
    }
  };
  Eigen::MatrixXd E(n_ent, d);
  Eigen::MatrixXd R(n_rel, config.kind == ModelKind::kRotatE ? d / 2 : d);
  // Margin models start near the origin: with unnormalized entities a wide
  // start leaves slack that the margin loss never removes.
  const double bound = (margin_loss(config.kind) ? 0.1 : 1.0) /
                       std::sqrt(static_cast<double>(d));
  fill(E, -bound, bound);
  if (config.kind == ModelKind::kRotatE) {
    fill(R, -std::numbers::pi, std::numbers::pi);
  } else {
    fill(R, -bound, bound);
  }
  TrainResult res{EmbeddingModel(config.kind, config.dim, std::move(E), std::move(R)), {}};
  EmbeddingModel& m = res.model;
  if (config.normalize_entities) {
    for (Eigen::Index i = 0; i < n_ent; ++i) m.entities().row(i).normalize();
  }

  std::vector<std::size_t> order(data.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const double lr = config.learning_rate;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.uniform_index(i)]);
    }
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t idx : order) {
      const Triple& pos = data.train[idx];
      for (std::size_t n = 0; n < config.negatives; ++n) {
        const Triple neg = corrupt(pos, data.entities.size(), rng);
        const double sp = m.score(pos.h, pos.r, pos.t);
        const double sn = m.score(neg.h, neg.r, neg.t);
        double loss;
        if (margin_loss(config.kind)) {
          loss = std::max(0.0, config.margin - sp + sn);
          if (loss > 0.0) {
            ascend(m, pos, lr);
            ascend(m, neg, -lr);
          }
        } else {
          loss = softplus(-sp) + softplus(sn);
          ascend(m, pos, lr * sigmoid(-sp));
          ascend(m, neg, -lr * sigmoid(sn));
        }
        if (config.normalize_entities) {
          normalize_rows(m.entities(), {pos.h, pos.t, neg.h, neg.t});
        }
        total += loss;
        ++pairs;
      }
    }
    const double mean = total / static_cast<double>(pairs);
    if (!std::isfinite(mean) || !m.entities().allFinite() || !m.relations().allFinite()) {
      throw NumericalError("training diverged at epoch " + std::to_string(epoch));
    }
    res.epoch_loss.push_back(mean);
  }
  return res;
}

double training_loss(const EmbeddingModel& m, const TripleDataset& data,
                     const ModelConfig& config) {
  Rng rng(config.seed ^ 0x5eedULL);
  double total = 0.0;
  std::size_t pairs = 0;
  for (const auto& pos : data.train) {
    for (std::size_t n = 0; n < config.negatives; ++n) {
      total += pair_loss(m, pos, corrupt(pos, data.entities.size(), rng), config.margin);
      ++pairs;
    }
  }
  return pairs ? total / static_cast<double>(pairs) : 0.0;
}

double rank_from_scores(const std::vector<double>& scores, std::size_t truth,
                        const std::vector<bool>& excluded) {
  if (truth >= scores.size()) throw std::out_of_range("true answer out of range");
  if (!excluded.empty() && excluded.size() != scores.size()) {
    throw std::invalid_argument("exclusion mask size mismatch");
  }
  if (!excluded.empty() && excluded[truth]) {
    throw std::logic_error("true answer was filtered out of the candidates");
  }
  const double s = scores[truth];
  double better = 0;
  double ties = 0;
  for (std::size_t c = 0; c < scores.size(); ++c) {
    if (c == truth || (!excluded.empty() && excluded[c])) continue;
    if (scores[c] > s) {
      ++better;
    } else if (scores[c] == s) {
      ++ties;
    }
  }
  return 1.0 + better + ties / 2.0;
}

namespace {

std::vector<bool> filter_mask(const Query& q, std::size_t n,
                              const std::set<Triple>& known) {
  std::vector<bool> mask(n, false);
  const std::size_t truth = q.predict_tail ? q.triple.t : q.triple.h;
  for (std::size_t c = 0; c < n; ++c) {
    if (c == truth) continue;
    const Triple cand = q.predict_tail ? Triple{q.triple.h, q.triple.r, c}
                                       : Triple{c, q.triple.r, q.triple.t};
    mask[c] = known.count(cand) > 0;
  }
  return mask;
}

}  // namespace

double rank_query(const EmbeddingModel& m, const Query& q, RankMode mode,
                  const std::set<Triple>& known) {
  const std::size_t n = m.num_entities();
  std::vector<double> scores(n);
  for (std::size_t c = 0; c < n; ++c) {
    scores[c] = q.predict_tail ? m.score(q.triple.h, q.triple.r, c)
                               : m.score(c, q.triple.r, q.triple.t);
  }
  const std::size_t truth = q.predict_tail ? q.triple.t : q.triple.h;
  if (mode == RankMode::kRaw) return rank_from_scores(scores, truth);
  return rank_from_scores(scores, truth, filter_mask(q, n, known));
}

RankingResult evaluate_ranking(const EmbeddingModel& m, const TripleDataset& d,
                               RankMode mode) {
  const auto known = d.all_triples();
  RankingResult r;
  for (const auto& t : d.test) {
    r.ranks.push_back(rank_query(m, {t, true}, mode, known));
    r.ranks.push_back(rank_query(m, {t, false}, mode, known));
  }
  return r;
}

namespace {
void require_ranks(const std::vector<double>& ranks) {
  if (ranks.empty()) throw std::invalid_argument("rank list is empty");
}
void require_k(double k) {
  if (!(k >= 1)) throw std::invalid_argument("K must be at least 1");
}
}  // namespace

double mr(const std::vector<double>& ranks) {
  require_ranks(ranks);
  double s = 0;
  for (double r : ranks) s += r;
  return s / static_cast<double>(ranks.size());
}

double mrr(const std::vector<double>& ranks) {
  require_ranks(ranks);
  double s = 0;
  for (double r : ranks) s += 1.0 / r;
  return s / static_cast<double>(ranks.size());
}

double hits_at_k(const std::vector<double>& ranks, double k) {
  require_ranks(ranks);
  require_k(k);
  std::size_t hits = 0;
  for (double r : ranks) {
    if (r <= k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

double p_at_k(const std::vector<double>& ranks, double k) {
  return hits_at_k(ranks, k) / k;
}

double random_baseline_mrr(const TripleDataset& d, RankMode mode) {
  if (d.test.empty()) throw Error("dataset has no test triples");
  const auto known = d.all_triples();
  const std::size_t n_ent = d.entities.size();
  double total = 0;
  std::size_t queries = 0;
  for (const auto& t : d.test) {
    for (bool tail : {true, false}) {
      std::size_t n = n_ent;
      if (mode == RankMode::kFiltered) {
        const auto mask = filter_mask({t, tail}, n_ent, known);
        n -= static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
      }
      double harmonic = 0;
      for (std::size_t i = 1; i <= n; ++i) harmonic += 1.0 / static_cast<double>(i);
      total += harmonic / static_cast<double>(n);
      ++queries;
    }
  }
  return total / static_cast<double>(queries);
}

MetricRow summarize(const std::string& model, RankMode mode,
                    const RankingResult& r) {
  MetricRow row;
  row.model = model;
  row.mode = mode == RankMode::kRaw ? "raw" : "filtered";
  row.mr = mr(r.ranks);
  row.mrr = mrr(r.ranks);
  const double ks[] = {1, 3, 10};
  for (std::size_t i = 0; i < 3; ++i) {
    row.hits[i] = hits_at_k(r.ranks, ks[i]);
    row.p[i] = p_at_k(r.ranks, ks[i]);
  }
  row.queries = r.ranks.size();
  return row;
}

std::string format_report(const std::vector<MetricRow>& rows) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "%-10s %-9s %9s %7s %7s %7s %7s %7s %7s %7s %7s\n", "model",
                "mode", "MR", "MRR", "Hits@1", "Hits@3", "Hits@10", "P@1",
                "P@3", "P@10", "queries");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf,
                  "%-10s %-9s %9.3f %7.3f %7.3f %7.3f %7.3f %7.3f %7.3f %7.3f %7zu\n",
                  r.model.c_str(), r.mode.c_str(), r.mr, r.mrr, r.hits[0],
                  r.hits[1], r.hits[2], r.p[0], r.p[1], r.p[2], r.queries);
    out += buf;
  }
  return out;
}

}  // namespace medkg
