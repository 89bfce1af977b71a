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

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace medkg {

// Closed set of entity (node) types.
enum class NodeType {
  kDiseases,
  kSymptoms,
  kRiskFactors,
  kTreatments,
  kMedications,
  kProcedures,
  kGenes,
  kProteins,
  kBiomarkers,
  kHospitals,
  kResearchers,
  kOrganizations,
  kPublications,
};

// Closed set of relation (edge) types. The ordinal doubles as the axis index
// for the relation mode of the data tensor and the column of the weight
// matrix in the relation model.
enum class EdgeType {
  kCauses,
  kTreats,
  kAssociatedWith,
  kSymptomOf,
  kExpressedIn,
  kEncodedBy,
  kBiomarkerFor,
  kOccursIn,
  kDiagnosedWith,
  kDevelopsFrom,
  kHasRiskFactor,
  kPrevents,
  kMonitoredBy,
  kPublishedBy,
  kConductedAt,
  kFundedBy,
  kCollaboratedWith,
  kRegulatedBy,
  kInteractsWith,
  kObservedIn,
  kStudiedIn,
  kImplementedIn,
  kResearchedBy,
  kAnalyzedIn,
};

inline constexpr std::size_t kNumNodeTypes = 13;
inline constexpr std::size_t kNumEdgeTypes = 24;

const std::array<NodeType, kNumNodeTypes>& all_node_types();
const std::array<EdgeType, kNumEdgeTypes>& all_edge_types();

std::string_view to_string(NodeType t);
std::string_view to_string(EdgeType t);

// Lenient parsing: case, spaces, underscores and hyphens are ignored, so
// "Associated with", "associated_with" and "AssociatedWith" all resolve.
// Anything outside the closed set yields nullopt.
std::optional<NodeType> parse_node_type(std::string_view s);
std::optional<EdgeType> parse_edge_type(std::string_view s);

inline std::size_t index_of(NodeType t) { return static_cast<std::size_t>(t); }
inline std::size_t index_of(EdgeType t) { return static_cast<std::size_t>(t); }
inline EdgeType edge_type_at(std::size_t i) { return static_cast<EdgeType>(i); }

// True when (head, tail) is a typical argument pair for some relation type.
bool is_typical_type_pair(NodeType head, NodeType tail);

}  // namespace medkg
