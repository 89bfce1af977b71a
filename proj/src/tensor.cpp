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

#include "medkg/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "medkg/error.hpp"
#include "medkg/text.hpp"

namespace medkg {
namespace {

std::map<std::string, std::size_t> make_lookup(
    const std::vector<std::string>& keys, const char* axis) {
  std::map<std::string, std::size_t> lookup;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (!lookup.emplace(keys[i], i).second) {
      throw Error(std::string("duplicate key '") + keys[i] + "' on " + axis +
                  " axis");
    }
  }
  return lookup;
}

std::optional<std::size_t> find(const std::map<std::string, std::size_t>& m,
                                const std::string& key) {
  const auto it = m.find(key);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

// Matricized-tensor times Khatri-Rao product for mode `mode`.
Eigen::MatrixXd mttkrp(const DataTensor& T, const CPFactors& f, int mode) {
  const auto R = static_cast<Eigen::Index>(f.rank());
  const Eigen::Index rows = mode == 0 ? f.A.rows() : mode == 1 ? f.B.rows() : f.C.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, R);
  for (const auto& [cell, v] : T.entries()) {
    const auto i = static_cast<Eigen::Index>(cell.i);
    const auto j = static_cast<Eigen::Index>(cell.j);
    const auto k = static_cast<Eigen::Index>(cell.k);
    switch (mode) {
      case 0:
        out.row(i) += v * f.B.row(j).cwiseProduct(f.C.row(k));
        break;
      case 1:
        out.row(j) += v * f.A.row(i).cwiseProduct(f.C.row(k));
        break;
      default:
        out.row(k) += v * f.A.row(i).cwiseProduct(f.B.row(j));
        break;
    }
  }
  return out;
}

// Solves X G = M for X with G symmetric positive (semi)definite.
Eigen::MatrixXd solve_normal(Eigen::MatrixXd G, const Eigen::MatrixXd& M,
                             double ridge) {
  G.diagonal().array() += ridge;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
  if (ldlt.info() != Eigen::Success) {
    return G.completeOrthogonalDecomposition().solve(M.transpose()).transpose();
  }
  return ldlt.solve(M.transpose()).transpose();
}

double squared_error(const DataTensor& T, const CPFactors& f) {
  const std::size_t cells = T.dim_i() * T.dim_j() * T.dim_k();
  constexpr std::size_t kDenseLimit = 4'000'000;
  if (cells <= kDenseLimit) {
    double err = 0.0;
    auto it = T.entries().begin();
    const auto end = T.entries().end();
    for (std::size_t i = 0; i < T.dim_i(); ++i) {
      for (std::size_t j = 0; j < T.dim_j(); ++j) {
        const Eigen::RowVectorXd ab =
            f.A.row(static_cast<Eigen::Index>(i))
                .cwiseProduct(f.B.row(static_cast<Eigen::Index>(j)));
        for (std::size_t k = 0; k < T.dim_k(); ++k) {
          const double x = ab.dot(f.C.row(static_cast<Eigen::Index>(k)));
          double t = 0.0;
          if (it != end && it->first == CellIndex{i, j, k}) {
            t = it->second;
            ++it;
          }
          err += (t - x) * (t - x);
        }
      }
    }
    return err;
  }
  // ||X||^2 - sum_nnz x^2 + sum_nnz (t - x)^2
  const Eigen::MatrixXd gram = (f.A.transpose() * f.A)
                                   .cwiseProduct(f.B.transpose() * f.B)
                                   .cwiseProduct(f.C.transpose() * f.C);
  double err = gram.sum();
  for (const auto& [cell, t] : T.entries()) {
    const double x = reconstruct(f, cell.i, cell.j, cell.k);
    err += (t - x) * (t - x) - x * x;
  }
  return std::max(err, 0.0);
}

void rebalance(CPFactors& f) {
  for (Eigen::Index r = 0; r < f.A.cols(); ++r) {
    const double na = f.A.col(r).norm();
    const double nb = f.B.col(r).norm();
    const double nc = f.C.col(r).norm();
    if (na == 0.0 || nb == 0.0 || nc == 0.0) continue;
    const double g = std::cbrt(na * nb * nc);
    f.A.col(r) *= g / na;
    f.B.col(r) *= g / nb;
    f.C.col(r) *= g / nc;
  }
}

std::string factor_tsv(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out += std::to_string(i);
    for (Eigen::Index r = 0; r < m.cols(); ++r) {
      out += "\t" + format_double(m(i, r));
    }
    out += "\n";
  }
  return out;
}

Eigen::MatrixXd read_factor(const std::filesystem::path& path) {
  const auto rows = read_tsv(path);
  if (rows.empty()) return {};
  const std::size_t R = rows.front().fields.size() - 1;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(R));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].fields.size() != R + 1) {
      throw ParseError("ragged factor file " + path.string(), rows[i].line);
    }
    for (std::size_t r = 0; r < R; ++r) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r)) =
          parse_double(rows[i].fields[r + 1]);
    }
  }
  return m;
}

std::vector<std::string> read_index_map(const std::filesystem::path& path) {
  std::vector<std::string> keys;
  for (const auto& row : read_tsv(path)) {
    if (row.fields.size() != 2 ||
        parse_int(row.fields[0]) != static_cast<long long>(keys.size())) {
      throw ParseError("bad index map row in " + path.string(), row.line);
    }
    keys.push_back(row.fields[1]);
  }
  return keys;
}

}  // namespace

DataTensor::DataTensor(std::vector<std::string> entities,
                       std::vector<std::string> actions,
                       std::vector<std::string> attributes)
    : entities_(std::move(entities)),
      actions_(std::move(actions)),
      attributes_(std::move(attributes)) {
  entity_lookup_ = make_lookup(entities_, "entity");
  action_lookup_ = make_lookup(actions_, "action");
  attribute_lookup_ = make_lookup(attributes_, "attribute");
}

std::optional<std::size_t> DataTensor::entity_index(const std::string& key) const {
  return find(entity_lookup_, key);
}
std::optional<std::size_t> DataTensor::action_index(const std::string& key) const {
  return find(action_lookup_, key);
}
std::optional<std::size_t> DataTensor::attribute_index(
    const std::string& key) const {
  return find(attribute_lookup_, key);
}

void DataTensor::add(const CellIndex& cell, double value) {
  if (cell.i >= dim_i() || cell.j >= dim_j() || cell.k >= dim_k()) {
    throw std::out_of_range("tensor cell index out of range");
  }
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw Error("tensor entries must be finite and nonnegative");
  }
  entries_[cell] += value;
}

double DataTensor::at(const CellIndex& cell) const {
  const auto it = entries_.find(cell);
  return it == entries_.end() ? 0.0 : it->second;
}

double DataTensor::squared_norm() const {
  double s = 0.0;
  for (const auto& [c, v] : entries_) s += v * v;
  return s;
}

std::vector<std::string> attribute_keys(const CandidateTriple& t) {
  if (t.attributes.empty()) return {"tail:" + t.tail.surface};
  std::vector<std::string> keys;
  for (const auto& [name, value] : t.attributes) {
    keys.push_back("attr:" + name + "=" + value);
  }
  return keys;
}

DataTensor build_tensor(const std::vector<CandidateTriple>& triples) {
  std::set<std::string> entities;
  std::set<std::string> attrs;
  for (const auto& t : triples) {
    entities.insert(t.head.surface);
    entities.insert(t.tail.surface);
    for (auto& k : attribute_keys(t)) attrs.insert(std::move(k));
  }
  attrs.erase(kNoAttribute);
  std::vector<std::string> attribute_axis = {kNoAttribute};
  attribute_axis.insert(attribute_axis.end(), attrs.begin(), attrs.end());
  std::vector<std::string> actions;
  for (EdgeType e : all_edge_types()) actions.emplace_back(to_string(e));

  DataTensor T({entities.begin(), entities.end()}, std::move(actions),
               std::move(attribute_axis));
  for (const auto& t : triples) {
    const std::size_t i = *T.entity_index(t.head.surface);
    for (const auto& key : attribute_keys(t)) {
      T.add({i, index_of(t.edge), *T.attribute_index(key)}, t.confidence);
    }
  }
  return T;
}

std::optional<CellIndex> cell_of(const DataTensor& t, const CandidateTriple& c) {
  const auto i = t.entity_index(c.head.surface);
  const auto j = t.action_index(std::string(to_string(c.edge)));
  const auto k = t.attribute_index(attribute_keys(c).front());
  if (!i || !j || !k) return std::nullopt;
  return CellIndex{*i, *j, *k};
}

CpResult cp_als(const DataTensor& T, const CpConfig& config) {
  if (config.rank == 0) throw Error("CP rank must be at least 1");
  if (T.entries().empty()) throw Error("CP-ALS needs a tensor with a nonzero entry");
  const double norm2 = T.squared_norm();
  if (norm2 == 0.0) throw Error("CP-ALS needs a tensor with a nonzero entry");

  CpResult res;
  res.rank_exceeds_dims = config.rank > T.dim_i() && config.rank > T.dim_j() &&
                          config.rank > T.dim_k();
  const auto R = static_cast<Eigen::Index>(config.rank);
  Rng rng(config.seed);
  auto init = [&](std::size_t rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), R);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index r = 0; r < R; ++r) m(i, r) = rng.uniform();
    }
    return m;
  };
  CPFactors& f = res.factors;
  f.A = init(T.dim_i());
  f.B = init(T.dim_j());
  f.C = init(T.dim_k());

  const double norm = std::sqrt(norm2);
  double prev = std::sqrt(squared_error(T, f)) / norm;
  for (std::size_t it = 0; it < config.max_iters; ++it) {
    f.A = solve_normal((f.B.transpose() * f.B).cwiseProduct(f.C.transpose() * f.C),
                       mttkrp(T, f, 0), config.ridge);
    f.B = solve_normal((f.A.transpose() * f.A).cwiseProduct(f.C.transpose() * f.C),
                       mttkrp(T, f, 1), config.ridge);
    f.C = solve_normal((f.A.transpose() * f.A).cwiseProduct(f.B.transpose() * f.B),
                       mttkrp(T, f, 2), config.ridge);
    rebalance(f);
    if (!f.A.allFinite() || !f.B.allFinite() || !f.C.allFinite()) {
      throw NumericalError("CP-ALS produced non-finite factors at iteration " +
                           std::to_string(it));
    }
    const double err = std::sqrt(squared_error(T, f)) / norm;
    res.errors.push_back(err);
    if (std::abs(prev - err) < config.tol) {
      res.converged = true;
      break;
    }
    prev = err;
  }
  return res;
}

double reconstruct(const CPFactors& f, std::size_t i, std::size_t j,
                   std::size_t k) {
  if (i >= static_cast<std::size_t>(f.A.rows()) ||
      j >= static_cast<std::size_t>(f.B.rows()) ||
      k >= static_cast<std::size_t>(f.C.rows())) {
    throw std::out_of_range("reconstruct index out of range");
  }
  return f.A.row(static_cast<Eigen::Index>(i))
      .cwiseProduct(f.B.row(static_cast<Eigen::Index>(j)))
      .dot(f.C.row(static_cast<Eigen::Index>(k)));
}

double relation_score(const CPFactors& f, const CellIndex& cell,
                      const std::vector<CellIndex>& calibration) {
  if (calibration.empty()) throw Error("relation score needs a calibration set");
  double lo = reconstruct(f, calibration[0].i, calibration[0].j, calibration[0].k);
  double hi = lo;
  for (const auto& c : calibration) {
    const double v = reconstruct(f, c.i, c.j, c.k);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi == lo) return 0.5;
  const double raw = reconstruct(f, cell.i, cell.j, cell.k);
  return std::clamp((raw - lo) / (hi - lo), 0.0, 1.0);
}

void save_tensor(const DataTensor& t, const std::filesystem::path& dir,
                 const std::string& prefix) {
  std::string cells = "i\tj\tk\tvalue\n";
  for (const auto& [c, v] : t.entries()) {
    cells += std::to_string(c.i) + "\t" + std::to_string(c.j) + "\t" +
             std::to_string(c.k) + "\t" + format_double(v) + "\n";
  }
  write_file(dir / (prefix + ".tsv"), cells);
  const auto write_map = [&](const std::vector<std::string>& keys,
                             const std::string& name) {
    std::string out;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      out += std::to_string(i) + "\t" + keys[i] + "\n";
    }
    write_file(dir / (prefix + "_" + name + ".tsv"), out);
  };
  write_map(t.entities(), "entities");
  write_map(t.actions(), "actions");
  write_map(t.attributes(), "attributes");
}

DataTensor load_tensor(const std::filesystem::path& dir,
                       const std::string& prefix) {
  DataTensor t(read_index_map(dir / (prefix + "_entities.tsv")),
               read_index_map(dir / (prefix + "_actions.tsv")),
               read_index_map(dir / (prefix + "_attributes.tsv")));
  const auto rows = read_tsv(dir / (prefix + ".tsv"));
  for (std::size_t n = 0; n < rows.size(); ++n) {
    const auto& f = rows[n].fields;
    if (n == 0 && !f.empty() && f[0] == "i") continue;
    if (f.size() != 4) throw ParseError("tensor row needs 4 fields", rows[n].line);
    try {
      t.add({static_cast<std::size_t>(parse_int(f[0])),
             static_cast<std::size_t>(parse_int(f[1])),
             static_cast<std::size_t>(parse_int(f[2]))},
            parse_double(f[3]));
    } catch (const std::exception& e) {
      throw ParseError(e.what(), rows[n].line);
    }
  }
  return t;
}

void save_factors(const CPFactors& f, const std::filesystem::path& dir,
                  const std::string& prefix) {
  write_file(dir / (prefix + "_A.tsv"), factor_tsv(f.A));
  write_file(dir / (prefix + "_B.tsv"), factor_tsv(f.B));
  write_file(dir / (prefix + "_C.tsv"), factor_tsv(f.C));
}

CPFactors load_factors(const std::filesystem::path& dir,
                       const std::string& prefix) {
  CPFactors f{read_factor(dir / (prefix + "_A.tsv")),
              read_factor(dir / (prefix + "_B.tsv")),
              read_factor(dir / (prefix + "_C.tsv"))};
  if (f.A.cols() != f.B.cols() || f.A.cols() != f.C.cols()) {
    throw ParseError("factor matrices disagree on rank");
  }
  return f;
}

}  // namespace medkg
