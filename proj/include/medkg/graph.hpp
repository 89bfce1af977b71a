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

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "medkg/extract.hpp"
#include "medkg/taxonomy.hpp"

namespace medkg {

struct Node {
  std::string id;
  NodeType type = NodeType::kDiseases;
  std::string canonical_name;  // lowercase
  std::set<std::string> aliases;
  std::set<std::string> provenance;  // document ids
  friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
  std::string head;  // node id
  EdgeType type = EdgeType::kAssociatedWith;
  std::string tail;  // node id
  double confidence = 0.0;
  std::vector<Evidence> evidence;
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct GraphStats {
  std::size_t node_count = 0;
  std::size_t node_type_count = 0;
  std::size_t edge_count = 0;
  std::size_t edge_type_count = 0;
  friend bool operator==(const GraphStats&, const GraphStats&) = default;
};

enum class GraphFormat { kGraphml, kJsonl, kTsv };
GraphFormat parse_graph_format(std::string_view name);

class KnowledgeGraph {
 public:
  // Merges on (lowercased surface, type) against canonical names and
  // aliases; otherwise creates a node. Returns the node id.
  std::string upsert_node(std::string_view surface, NodeType type,
                          const std::string& doc_id);

  // Returns false when t.confidence < tau. Endpoints are looked up by
  // (surface, type) and must already exist. A repeated (head, type, tail)
  // appends evidence and keeps the larger confidence.
  bool add_edge(const CandidateTriple& t, double tau);

  // Low-level inserts used by importers. Throw on duplicate ids or keys,
  // dangling endpoints and out-of-range confidence.
  void insert_node(Node node);
  void insert_edge(Edge edge);

  std::optional<std::string> find_node(std::string_view surface,
                                       NodeType type) const;
  const Node& node(const std::string& id) const;
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }

  // Edges touching a node, in insertion order.
  std::vector<const Edge*> incident_edges(const std::string& node_id) const;

 private:
  std::string next_id();
  void index_alias(const std::string& lowered, NodeType type,
                   const std::string& id);

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::map<std::string, std::size_t> node_pos_;
  std::map<std::pair<std::string, NodeType>, std::string> key_index_;
  std::map<std::tuple<std::string, EdgeType, std::string>, std::size_t>
      edge_pos_;
  std::size_t id_counter_ = 0;
};

GraphStats graph_stats(const KnowledgeGraph& g);

// Id-free canonical forms for comparing graphs up to id relabeling.
struct CanonicalNode {
  std::string name;
  NodeType type;
  std::set<std::string> aliases;
  std::set<std::string> provenance;
  friend auto operator<=>(const CanonicalNode&, const CanonicalNode&) = default;
};
struct CanonicalEdge {
  std::string head;  // "Type:name"
  EdgeType type;
  std::string tail;
  double confidence;
  std::vector<Evidence> evidence;
  friend auto operator<=>(const CanonicalEdge&, const CanonicalEdge&) = default;
};
std::vector<CanonicalNode> canonical_nodes(const KnowledgeGraph& g);
std::vector<CanonicalEdge> canonical_edges(const KnowledgeGraph& g);
bool isomorphic(const KnowledgeGraph& a, const KnowledgeGraph& b);

// "Type:name" label of a node.
std::string node_label(const Node& n);

// GraphML and JSONL are lossless. The TSV edge list (head, type, tail,
// confidence, evidence) drops isolated nodes, aliases and provenance.
std::string serialize_graph(const KnowledgeGraph& g, GraphFormat format);
KnowledgeGraph parse_graph(std::string_view content, GraphFormat format);
void export_graph(const KnowledgeGraph& g, const std::filesystem::path& path,
                  GraphFormat format);
KnowledgeGraph import_graph(const std::filesystem::path& path,
                            GraphFormat format);

std::string stats_to_json(const GraphStats& s);
GraphStats stats_from_json(std::string_view json);

}  // namespace medkg
