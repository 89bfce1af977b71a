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

#include "medkg/graph.hpp"

#include <algorithm>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "medkg/error.hpp"
#include "medkg/text.hpp"

namespace medkg {

using nlohmann::json;

GraphFormat parse_graph_format(std::string_view name) {
  const std::string n = to_lower(name);
  if (n == "graphml") return GraphFormat::kGraphml;
  if (n == "jsonl") return GraphFormat::kJsonl;
  if (n == "tsv") return GraphFormat::kTsv;
  throw Error("unknown graph format '" + std::string(name) +
              "' (expected graphml, jsonl or tsv)");
}

std::string KnowledgeGraph::next_id() {
  std::string id;
  do {
    id = "n" + std::to_string(id_counter_++);
  } while (node_pos_.count(id));
  return id;
}

void KnowledgeGraph::index_alias(const std::string& lowered, NodeType type,
                                 const std::string& id) {
  key_index_.emplace(std::make_pair(lowered, type), id);
}

std::optional<std::string> KnowledgeGraph::find_node(std::string_view surface,
                                                     NodeType type) const {
  const auto it = key_index_.find({to_lower(trim(surface)), type});
  if (it == key_index_.end()) return std::nullopt;
  return it->second;
}

std::string KnowledgeGraph::upsert_node(std::string_view surface, NodeType type,
                                        const std::string& doc_id) {
  const std::string raw = trim(surface);
  if (raw.empty()) throw Error("node surface is empty");
  if (auto id = find_node(raw, type)) {
    Node& n = nodes_[node_pos_.at(*id)];
    n.aliases.insert(raw);
    if (!doc_id.empty()) n.provenance.insert(doc_id);
    return *id;
  }
  Node n;
  n.id = next_id();
  n.type = type;
  n.canonical_name = to_lower(raw);
  n.aliases.insert(raw);
  if (!doc_id.empty()) n.provenance.insert(doc_id);
  const std::string id = n.id;
  insert_node(std::move(n));
  return id;
}

void KnowledgeGraph::insert_node(Node node) {
  if (node.id.empty()) throw Error("node id is empty");
  if (node.canonical_name.empty()) {
    throw Error("node " + node.id + " has an empty canonical name");
  }
  if (node.canonical_name != to_lower(node.canonical_name)) {
    throw Error("node " + node.id + " canonical name is not lowercase");
  }
  if (node_pos_.count(node.id)) throw Error("duplicate node id " + node.id);
  if (key_index_.count({node.canonical_name, node.type})) {
    throw Error("duplicate node (" + node.canonical_name + ", " +
                std::string(to_string(node.type)) + ")");
  }
  index_alias(node.canonical_name, node.type, node.id);
  for (const auto& a : node.aliases) index_alias(to_lower(a), node.type, node.id);
  node_pos_[node.id] = nodes_.size();
  nodes_.push_back(std::move(node));
}

void KnowledgeGraph::insert_edge(Edge edge) {
  if (!node_pos_.count(edge.head)) {
    throw Error("dangling endpoint: edge head '" + edge.head + "' is not a node");
  }
  if (!node_pos_.count(edge.tail)) {
    throw Error("dangling endpoint: edge tail '" + edge.tail + "' is not a node");
  }
  if (!(edge.confidence >= 0.0 && edge.confidence <= 1.0)) {
    throw Error("edge confidence outside [0, 1]");
  }
  if (edge.evidence.empty()) throw Error("edge has no evidence");
  const auto key = std::make_tuple(edge.head, edge.type, edge.tail);
  if (edge_pos_.count(key)) {
    throw Error("duplicate edge " + edge.head + " " +
                std::string(to_string(edge.type)) + " " + edge.tail);
  }
  edge_pos_[key] = edges_.size();
  edges_.push_back(std::move(edge));
}

bool KnowledgeGraph::add_edge(const CandidateTriple& t, double tau) {
  if (!(t.confidence >= 0.0 && t.confidence <= 1.0)) {
    throw Error("triple confidence outside [0, 1]");
  }
  if (t.confidence < tau) return false;
  const auto head = find_node(t.head.surface, t.head.type);
  const auto tail = find_node(t.tail.surface, t.tail.type);
  if (!head) throw Error("dangling endpoint: no node for head '" + t.head.surface + "'");
  if (!tail) throw Error("dangling endpoint: no node for tail '" + t.tail.surface + "'");
  const auto key = std::make_tuple(*head, t.edge, *tail);
  if (const auto it = edge_pos_.find(key); it != edge_pos_.end()) {
    Edge& e = edges_[it->second];
    e.evidence.push_back(t.evidence);
    e.confidence = std::max(e.confidence, t.confidence);
    return true;
  }
  insert_edge(Edge{*head, t.edge, *tail, t.confidence, {t.evidence}});
  return true;
}

const Node& KnowledgeGraph::node(const std::string& id) const {
  const auto it = node_pos_.find(id);
  if (it == node_pos_.end()) throw std::out_of_range("no node with id " + id);
  return nodes_[it->second];
}

std::vector<const Edge*> KnowledgeGraph::incident_edges(
    const std::string& node_id) const {
  std::vector<const Edge*> out;
  for (const auto& e : edges_) {
    if (e.head == node_id || e.tail == node_id) out.push_back(&e);
  }
  return out;
}

GraphStats graph_stats(const KnowledgeGraph& g) {
  std::set<NodeType> node_types;
  std::set<EdgeType> edge_types;
  for (const auto& n : g.nodes()) node_types.insert(n.type);
  for (const auto& e : g.edges()) edge_types.insert(e.type);
  return {g.nodes().size(), node_types.size(), g.edges().size(),
          edge_types.size()};
}

std::string node_label(const Node& n) {
  return std::string(to_string(n.type)) + ":" + n.canonical_name;
}

std::vector<CanonicalNode> canonical_nodes(const KnowledgeGraph& g) {
  std::vector<CanonicalNode> out;
  for (const auto& n : g.nodes()) {
    out.push_back({n.canonical_name, n.type, n.aliases, n.provenance});
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<CanonicalEdge> canonical_edges(const KnowledgeGraph& g) {
  std::vector<CanonicalEdge> out;
  for (const auto& e : g.edges()) {
    out.push_back({node_label(g.node(e.head)), e.type, node_label(g.node(e.tail)),
                   e.confidence, e.evidence});
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool isomorphic(const KnowledgeGraph& a, const KnowledgeGraph& b) {
  return canonical_nodes(a) == canonical_nodes(b) &&
         canonical_edges(a) == canonical_edges(b);
}

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

json evidence_json(const std::vector<Evidence>& ev) {
  json arr = json::array();
  for (const auto& e : ev) arr.push_back(json::array({e.doc_id, e.sentence}));
  return arr;
}

std::vector<Evidence> evidence_from_json(const json& arr) {
  if (!arr.is_array()) throw Error("evidence must be an array");
  std::vector<Evidence> out;
  for (const auto& item : arr) {
    if (!item.is_array() || item.size() != 2 || !item[0].is_string() ||
        !item[1].is_number_unsigned()) {
      throw Error("evidence entries must be [doc_id, sentence]");
    }
    out.push_back({item[0].get<std::string>(), item[1].get<std::size_t>()});
  }
  return out;
}

json string_set_json(const std::set<std::string>& s) {
  return json(std::vector<std::string>(s.begin(), s.end()));
}

std::set<std::string> string_set_from_json(const json& j) {
  if (!j.is_array()) throw Error("expected a string array");
  std::set<std::string> out;
  for (const auto& v : j) out.insert(v.get<std::string>());
  return out;
}

NodeType node_type_or_throw(const std::string& s) {
  const auto t = parse_node_type(s);
  if (!t) throw Error("unknown node type '" + s + "'");
  return *t;
}

EdgeType edge_type_or_throw(const std::string& s) {
  const auto t = parse_edge_type(s);
  if (!t) throw Error("unknown edge type '" + s + "'");
  return *t;
}

std::string to_graphml(const KnowledgeGraph& g) {
  std::string out =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
      "  <key id=\"type\" for=\"node\" attr.name=\"type\" attr.type=\"string\"/>\n"
      "  <key id=\"name\" for=\"node\" attr.name=\"canonical_name\" attr.type=\"string\"/>\n"
      "  <key id=\"aliases\" for=\"node\" attr.name=\"aliases\" attr.type=\"string\"/>\n"
      "  <key id=\"provenance\" for=\"node\" attr.name=\"provenance\" attr.type=\"string\"/>\n"
      "  <key id=\"relation\" for=\"edge\" attr.name=\"type\" attr.type=\"string\"/>\n"
      "  <key id=\"confidence\" for=\"edge\" attr.name=\"confidence\" attr.type=\"double\"/>\n"
      "  <key id=\"evidence\" for=\"edge\" attr.name=\"evidence\" attr.type=\"string\"/>\n"
      "  <graph id=\"G\" edgedefault=\"directed\">\n";
  const auto data = [](const char* key, const std::string& value) {
    return std::string("      <data key=\"") + key + "\">" + xml_escape(value) +
           "</data>\n";
  };
  for (const auto& n : g.nodes()) {
    out += "    <node id=\"" + xml_escape(n.id) + "\">\n";
    out += data("type", std::string(to_string(n.type)));
    out += data("name", n.canonical_name);
    out += data("aliases", string_set_json(n.aliases).dump());
    out += data("provenance", string_set_json(n.provenance).dump());
    out += "    </node>\n";
  }
  for (std::size_t i = 0; i < g.edges().size(); ++i) {
    const Edge& e = g.edges()[i];
    out += "    <edge id=\"e" + std::to_string(i) + "\" source=\"" +
           xml_escape(e.head) + "\" target=\"" + xml_escape(e.tail) + "\">\n";
    out += data("relation", std::string(to_string(e.type)));
    out += data("confidence", format_double(e.confidence));
    out += data("evidence", evidence_json(e.evidence).dump());
    out += "    </edge>\n";
  }
  out += "  </graph>\n</graphml>\n";
  return out;
}

KnowledgeGraph from_graphml(std::string_view content) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(content)};
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError("malformed GraphML: " + e.message(), e.line());
  }
  const auto graph_node = tree.get_child_optional("graphml.graph");
  if (!graph_node) throw ParseError("GraphML has no <graph> element");

  const auto read_data = [](const pt::ptree& elem) {
    std::map<std::string, std::string> out;
    for (const auto& [tag, child] : elem) {
      if (tag != "data") continue;
      out[child.get<std::string>("<xmlattr>.key", "")] = child.data();
    }
    return out;
  };
  const auto need = [](const std::map<std::string, std::string>& d,
                       const std::string& key, const std::string& where) {
    const auto it = d.find(key);
    if (it == d.end()) throw ParseError(where + " is missing data key '" + key + "'");
    return it->second;
  };

  KnowledgeGraph g;
  std::vector<Edge> edges;
  std::size_t node_no = 0;
  std::size_t edge_no = 0;
  for (const auto& [tag, elem] : *graph_node) {
    try {
      if (tag == "node") {
        const std::string where = "node #" + std::to_string(node_no++);
        const auto d = read_data(elem);
        Node n;
        n.id = elem.get<std::string>("<xmlattr>.id", "");
        n.type = node_type_or_throw(need(d, "type", where));
        n.canonical_name = need(d, "name", where);
        n.aliases = string_set_from_json(json::parse(need(d, "aliases", where)));
        n.provenance =
            string_set_from_json(json::parse(need(d, "provenance", where)));
        g.insert_node(std::move(n));
      } else if (tag == "edge") {
        const std::string where = "edge #" + std::to_string(edge_no++);
        const auto d = read_data(elem);
        Edge e;
        e.head = elem.get<std::string>("<xmlattr>.source", "");
        e.tail = elem.get<std::string>("<xmlattr>.target", "");
        e.type = edge_type_or_throw(need(d, "relation", where));
        e.confidence = parse_double(need(d, "confidence", where));
        e.evidence = evidence_from_json(json::parse(need(d, "evidence", where)));
        edges.push_back(std::move(e));
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& ex) {
      throw ParseError(std::string("GraphML ") + tag + " #" +
                       std::to_string(tag == "node" ? node_no : edge_no) +
                       ": " + ex.what());
    }
  }
  for (std::size_t i = 0; i < edges.size(); ++i) {
    try {
      g.insert_edge(std::move(edges[i]));
    } catch (const Error& ex) {
      throw ParseError("GraphML edge #" + std::to_string(i) + ": " + ex.what());
    }
  }
  return g;
}

std::string to_jsonl(const KnowledgeGraph& g) {
  std::string out;
  for (const auto& n : g.nodes()) {
    json j;
    j["kind"] = "node";
    j["id"] = n.id;
    j["type"] = to_string(n.type);
    j["name"] = n.canonical_name;
    j["aliases"] = string_set_json(n.aliases);
    j["provenance"] = string_set_json(n.provenance);
    out += j.dump() + "\n";
  }
  for (const auto& e : g.edges()) {
    json j;
    j["kind"] = "edge";
    j["head"] = e.head;
    j["type"] = to_string(e.type);
    j["tail"] = e.tail;
    j["confidence"] = e.confidence;
    j["evidence"] = evidence_json(e.evidence);
    out += j.dump() + "\n";
  }
  return out;
}

KnowledgeGraph from_jsonl(std::string_view content) {
  KnowledgeGraph g;
  std::vector<std::pair<std::size_t, Edge>> edges;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "node") {
        Node n;
        n.id = j.at("id").get<std::string>();
        n.type = node_type_or_throw(j.at("type").get<std::string>());
        n.canonical_name = j.at("name").get<std::string>();
        n.aliases = string_set_from_json(j.at("aliases"));
        n.provenance = string_set_from_json(j.at("provenance"));
        g.insert_node(std::move(n));
      } else if (kind == "edge") {
        Edge e;
        e.head = j.at("head").get<std::string>();
        e.tail = j.at("tail").get<std::string>();
        e.type = edge_type_or_throw(j.at("type").get<std::string>());
        e.confidence = j.at("confidence").get<double>();
        e.evidence = evidence_from_json(j.at("evidence"));
        edges.emplace_back(line_no, std::move(e));
      } else {
        throw Error("unknown record kind '" + kind + "'");
      }
    } catch (const std::exception& ex) {
      throw ParseError(ex.what(), line_no);
    }
  }
  for (auto& [ln, e] : edges) {
    try {
      g.insert_edge(std::move(e));
    } catch (const Error& ex) {
      throw ParseError(ex.what(), ln);
    }
  }
  return g;
}

std::string to_tsv(const KnowledgeGraph& g) {
  std::string out = "head\ttype\ttail\tconfidence\tevidence\n";
  for (const auto& e : g.edges()) {
    out += node_label(g.node(e.head)) + "\t" + std::string(to_string(e.type)) +
           "\t" + node_label(g.node(e.tail)) + "\t" +
           format_double(e.confidence) + "\t" +
           evidence_json(e.evidence).dump() + "\n";
  }
  return out;
}

KnowledgeGraph from_tsv(std::string_view content) {
  KnowledgeGraph g;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  const auto endpoint = [&g](const std::string& label) {
    const auto colon = label.find(':');
    if (colon == std::string::npos) {
      throw Error("endpoint '" + label + "' is not Type:name");
    }
    const NodeType t = node_type_or_throw(label.substr(0, colon));
    const std::string name = label.substr(colon + 1);
    if (auto id = g.find_node(name, t)) return *id;
    return g.upsert_node(name, t, "");
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (line_no == 1 && line.rfind("head\t", 0) == 0) continue;
    try {
      const auto f = split(line, '\t');
      if (f.size() != 5) throw Error("expected 5 tab-separated fields");
      Edge e;
      e.head = endpoint(f[0]);
      e.type = edge_type_or_throw(f[1]);
      e.tail = endpoint(f[2]);
      e.confidence = parse_double(f[3]);
      e.evidence = evidence_from_json(json::parse(f[4]));
      g.insert_edge(std::move(e));
    } catch (const std::exception& ex) {
      throw ParseError(ex.what(), line_no);
    }
  }
  return g;
}

}  // namespace

std::string serialize_graph(const KnowledgeGraph& g, GraphFormat format) {
  switch (format) {
    case GraphFormat::kGraphml: return to_graphml(g);
    case GraphFormat::kJsonl: return to_jsonl(g);
    case GraphFormat::kTsv: return to_tsv(g);
  }
  throw Error("unknown graph format");
}

KnowledgeGraph parse_graph(std::string_view content, GraphFormat format) {
  switch (format) {
    case GraphFormat::kGraphml: return from_graphml(content);
    case GraphFormat::kJsonl: return from_jsonl(content);
    case GraphFormat::kTsv: return from_tsv(content);
  }
  throw Error("unknown graph format");
}

void export_graph(const KnowledgeGraph& g, const std::filesystem::path& path,
                  GraphFormat format) {
  write_file(path, serialize_graph(g, format));
}

KnowledgeGraph import_graph(const std::filesystem::path& path,
                            GraphFormat format) {
  try {
    return parse_graph(read_file(path), format);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string stats_to_json(const GraphStats& s) {
  json j;
  j["node_count"] = s.node_count;
  j["node_type_count"] = s.node_type_count;
  j["edge_count"] = s.edge_count;
  j["edge_type_count"] = s.edge_type_count;
  return j.dump(2) + "\n";
}

GraphStats stats_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    return {j.at("node_count").get<std::size_t>(),
            j.at("node_type_count").get<std::size_t>(),
            j.at("edge_count").get<std::size_t>(),
            j.at("edge_type_count").get<std::size_t>()};
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad graph stats: ") + e.what());
  }
}

}  // namespace medkg
