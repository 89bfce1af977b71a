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

#include "medkg/taxonomy.hpp"

#include <bitset>
#include <vector>

namespace medkg {
namespace {

constexpr std::array<std::string_view, kNumNodeTypes> kNodeNames = {
    "Diseases",   "Symptoms",      "RiskFactors",  "Treatments", "Medications",
    "Procedures", "Genes",         "Proteins",     "Biomarkers", "Hospitals",
    "Researchers", "Organizations", "Publications",
};

constexpr std::array<std::string_view, kNumEdgeTypes> kEdgeNames = {
    "Causes",        "Treats",           "AssociatedWith", "SymptomOf",
    "ExpressedIn",   "EncodedBy",        "BiomarkerFor",   "OccursIn",
    "DiagnosedWith", "DevelopsFrom",     "HasRiskFactor",  "Prevents",
    "MonitoredBy",   "PublishedBy",      "ConductedAt",    "FundedBy",
    "CollaboratedWith", "RegulatedBy",   "InteractsWith",  "ObservedIn",
    "StudiedIn",     "ImplementedIn",    "ResearchedBy",   "AnalyzedIn",
};

std::string squash(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == ' ' || c == '_' || c == '-' || c == '\t') continue;
    out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
  }
  return out;
}

using N = NodeType;

struct Signature {
  std::vector<N> heads;
  std::vector<N> tails;
};

// Argument-type signatures for each relation, derived from the usage notes of
// the relation taxonomy. Order follows EdgeType.
const std::array<Signature, kNumEdgeTypes>& signatures() {
  static const std::array<Signature, kNumEdgeTypes> sigs = {{
      // Causes
      {{N::kRiskFactors, N::kDiseases, N::kGenes, N::kProteins},
       {N::kDiseases, N::kSymptoms}},
      // Treats
      {{N::kMedications, N::kTreatments, N::kProcedures},
       {N::kDiseases, N::kSymptoms}},
      // AssociatedWith
      {{N::kDiseases, N::kRiskFactors, N::kGenes, N::kProteins,
        N::kBiomarkers, N::kSymptoms},
       {N::kDiseases, N::kRiskFactors, N::kSymptoms, N::kBiomarkers}},
      // SymptomOf
      {{N::kSymptoms}, {N::kDiseases}},
      // ExpressedIn
      {{N::kGenes, N::kProteins, N::kBiomarkers}, {N::kDiseases}},
      // EncodedBy
      {{N::kProteins}, {N::kGenes}},
      // BiomarkerFor
      {{N::kBiomarkers, N::kProteins}, {N::kDiseases, N::kSymptoms}},
      // OccursIn
      {{N::kDiseases, N::kSymptoms}, {N::kHospitals, N::kOrganizations}},
      // DiagnosedWith
      {{N::kDiseases, N::kSymptoms}, {N::kProcedures, N::kBiomarkers}},
      // DevelopsFrom
      {{N::kDiseases}, {N::kDiseases, N::kRiskFactors}},
      // HasRiskFactor
      {{N::kDiseases}, {N::kRiskFactors}},
      // Prevents
      {{N::kMedications, N::kTreatments, N::kProcedures}, {N::kDiseases}},
      // MonitoredBy
      {{N::kDiseases, N::kSymptoms}, {N::kBiomarkers, N::kProcedures}},
      // PublishedBy
      {{N::kPublications}, {N::kOrganizations, N::kResearchers}},
      // ConductedAt
      {{N::kPublications, N::kProcedures, N::kTreatments}, {N::kHospitals}},
      // FundedBy
      {{N::kPublications, N::kResearchers}, {N::kOrganizations}},
      // CollaboratedWith
      {{N::kResearchers, N::kOrganizations, N::kHospitals},
       {N::kResearchers, N::kOrganizations, N::kHospitals}},
      // RegulatedBy
      {{N::kProteins, N::kGenes}, {N::kGenes, N::kProteins}},
      // InteractsWith
      {{N::kProteins, N::kMedications, N::kGenes},
       {N::kProteins, N::kMedications, N::kGenes}},
      // ObservedIn
      {{N::kSymptoms, N::kBiomarkers}, {N::kDiseases, N::kPublications}},
      // StudiedIn
      {{N::kGenes, N::kProteins, N::kDiseases, N::kTreatments,
        N::kMedications},
       {N::kPublications}},
      // ImplementedIn
      {{N::kTreatments, N::kProcedures}, {N::kHospitals, N::kOrganizations}},
      // ResearchedBy
      {{N::kDiseases, N::kTreatments, N::kGenes}, {N::kResearchers}},
      // AnalyzedIn
      {{N::kBiomarkers, N::kGenes, N::kProteins}, {N::kPublications}},
  }};
  return sigs;
}

}  // namespace

const std::array<NodeType, kNumNodeTypes>& all_node_types() {
  static const auto values = [] {
    std::array<NodeType, kNumNodeTypes> a{};
    for (std::size_t i = 0; i < kNumNodeTypes; ++i) {
      a[i] = static_cast<NodeType>(i);
    }
    return a;
  }();
  return values;
}

const std::array<EdgeType, kNumEdgeTypes>& all_edge_types() {
  static const auto values = [] {
    std::array<EdgeType, kNumEdgeTypes> a{};
    for (std::size_t i = 0; i < kNumEdgeTypes; ++i) {
      a[i] = static_cast<EdgeType>(i);
    }
    return a;
  }();
  return values;
}

std::string_view to_string(NodeType t) { return kNodeNames[index_of(t)]; }
std::string_view to_string(EdgeType t) { return kEdgeNames[index_of(t)]; }

std::optional<NodeType> parse_node_type(std::string_view s) {
  const std::string key = squash(s);
  for (std::size_t i = 0; i < kNumNodeTypes; ++i) {
    if (squash(kNodeNames[i]) == key) return static_cast<NodeType>(i);
  }
  return std::nullopt;
}

std::optional<EdgeType> parse_edge_type(std::string_view s) {
  const std::string key = squash(s);
  for (std::size_t i = 0; i < kNumEdgeTypes; ++i) {
    if (squash(kEdgeNames[i]) == key) return static_cast<EdgeType>(i);
  }
  return std::nullopt;
}

bool is_typical_type_pair(NodeType head, NodeType tail) {
  static const auto table = [] {
    std::array<std::bitset<kNumNodeTypes>, kNumNodeTypes> t{};
    for (const Signature& sig : signatures()) {
      for (N h : sig.heads) {
        for (N tl : sig.tails) t[index_of(h)].set(index_of(tl));
      }
    }
    return t;
  }();
  return table[index_of(head)].test(index_of(tail));
}

}  // namespace medkg
