#include "qlat/graph.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace qlat {

namespace {

std::uint64_t pair_key(NodeIndex u, NodeIndex v) {
  return (static_cast<std::uint64_t>(u) << 32) | v;
}

void check_keys(const nlohmann::json& obj, std::initializer_list<std::string_view> allowed,
                const std::string& subject) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw GraphError(subject, "unknown key '" + key + "' in " + subject);
  }
}

AttrMap attrs_from_json(const nlohmann::json& obj, const std::string& subject) {
  AttrMap out;
  if (obj.is_null()) return out;
  if (!obj.is_object()) throw GraphError(subject, "attrs of " + subject + " must be an object");
  for (const auto& [key, value] : obj.items()) out.emplace(key, attr_from_json(value, subject));
  return out;
}

const std::string& required_string(const nlohmann::json& obj, const char* key,
                                   const std::string& subject) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string())
    throw GraphError(subject, std::string("missing or non-string '") + key + "' in " + subject);
  return it->get_ref<const std::string&>();
}

}  // namespace

PropertyGraph::PropertyGraph(bool directed, std::vector<GraphNode> nodes,
                             std::vector<GraphEdge> edges)
    : directed_(directed), nodes_(std::move(nodes)), edges_(std::move(edges)) {
  node_by_id_.reserve(nodes_.size());
  for (NodeIndex i = 0; i < nodes_.size(); ++i) {
    for (const auto& [k, v] : nodes_[i].attrs)
      if (v.is_number() && !std::isfinite(v.number()))
        throw GraphError(nodes_[i].id, "non-finite number in attribute '" + k + "' of node " +
                                           nodes_[i].id);
    if (!node_by_id_.emplace(nodes_[i].id, i).second)
      throw GraphError(nodes_[i].id, "duplicate node id " + nodes_[i].id);
  }
  incident_.resize(nodes_.size());
  degrees_.resize(nodes_.size());
  ends_.reserve(edges_.size());
  for (EdgeIndex e = 0; e < edges_.size(); ++e) {
    const GraphEdge& edge = edges_[e];
    for (const auto& [k, v] : edge.attrs)
      if (v.is_number() && !std::isfinite(v.number()))
        throw GraphError(edge.id,
                         "non-finite number in attribute '" + k + "' of edge " + edge.id);
    if (!edge_by_id_.emplace(edge.id, e).second)
      throw GraphError(edge.id, "duplicate edge id " + edge.id);
    auto s = node_by_id_.find(edge.source);
    if (s == node_by_id_.end())
      throw GraphError(edge.source, "edge " + edge.id + " has dangling endpoint " + edge.source);
    auto t = node_by_id_.find(edge.target);
    if (t == node_by_id_.end())
      throw GraphError(edge.target, "edge " + edge.id + " has dangling endpoint " + edge.target);
    const NodeIndex u = s->second;
    const NodeIndex v = t->second;
    ends_.emplace_back(u, v);

    incident_[u].push_back(e);
    if (v != u) incident_[v].push_back(e);

    pair_edges_[pair_key(u, v)].push_back(e);
    if (!directed_ && u != v) pair_edges_[pair_key(v, u)].push_back(e);

    if (directed_) {
      degrees_[u].out += 1;
      degrees_[v].in += 1;
      degrees_[u].total += 1;
      degrees_[v].total += 1;
    } else {
      for (NodeIndex n : {u, v}) {
        degrees_[n].in += 1;
        degrees_[n].out += 1;
        degrees_[n].total += 1;
      }
    }
  }
}

std::optional<NodeIndex> PropertyGraph::find_node(std::string_view id) const {
  auto it = node_by_id_.find(std::string(id));
  if (it == node_by_id_.end()) return std::nullopt;
  return it->second;
}

std::optional<EdgeIndex> PropertyGraph::find_edge(std::string_view id) const {
  auto it = edge_by_id_.find(std::string(id));
  if (it == edge_by_id_.end()) return std::nullopt;
  return it->second;
}

std::span<const EdgeIndex> PropertyGraph::edges_between(NodeIndex u, NodeIndex v) const {
  auto it = pair_edges_.find(pair_key(u, v));
  if (it == pair_edges_.end()) return {};
  return it->second;
}

nlohmann::json attr_to_json(const AttrValue& v) {
  if (v.is_text()) return v.text();
  if (v.is_bool()) return v.boolean();
  const double d = v.number();
  // Integral values below 2^53 serialise as JSON integers.
  if (std::trunc(d) == d && std::fabs(d) < 9007199254740992.0)
    return static_cast<std::int64_t>(d);
  return d;
}

AttrValue attr_from_json(const nlohmann::json& j, const std::string& subject) {
  if (j.is_string()) return AttrValue(j.get<std::string>());
  if (j.is_boolean()) return AttrValue(j.get<bool>());
  if (j.is_number()) {
    const double d = j.get<double>();
    if (!std::isfinite(d)) throw GraphError(subject, "non-finite number in " + subject);
    return AttrValue(d);
  }
  throw GraphError(subject, "attribute values must be string, number or boolean (" + subject + ")");
}

PropertyGraph load_graph(const nlohmann::json& doc) {
  if (!doc.is_object()) throw GraphError("document", "graph document must be a JSON object");
  check_keys(doc, {"directed", "nodes", "edges"}, "document");
  auto dir = doc.find("directed");
  if (dir == doc.end() || !dir->is_boolean())
    throw GraphError("document", "missing boolean 'directed'");

  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  const auto& jn = doc.value("nodes", nlohmann::json::array());
  const auto& je = doc.value("edges", nlohmann::json::array());
  if (!jn.is_array() || !je.is_array())
    throw GraphError("document", "'nodes' and 'edges' must be arrays");

  nodes.reserve(jn.size());
  for (size_t i = 0; i < jn.size(); ++i) {
    const auto& n = jn[i];
    const std::string where = "nodes[" + std::to_string(i) + "]";
    if (!n.is_object()) throw GraphError(where, where + " must be an object");
    check_keys(n, {"id", "attrs"}, where);
    GraphNode node;
    node.id = required_string(n, "id", where);
    node.attrs = attrs_from_json(n.value("attrs", nlohmann::json()), "node " + node.id);
    nodes.push_back(std::move(node));
  }
  edges.reserve(je.size());
  for (size_t i = 0; i < je.size(); ++i) {
    const auto& e = je[i];
    const std::string where = "edges[" + std::to_string(i) + "]";
    if (!e.is_object()) throw GraphError(where, where + " must be an object");
    check_keys(e, {"id", "source", "target", "label", "attrs"}, where);
    GraphEdge edge;
    edge.id = required_string(e, "id", where);
    edge.source = required_string(e, "source", "edge " + edge.id);
    edge.target = required_string(e, "target", "edge " + edge.id);
    if (auto l = e.find("label"); l != e.end() && !l->is_null()) {
      if (!l->is_string()) throw GraphError(edge.id, "label of edge " + edge.id + " must be text");
      edge.label = l->get<std::string>();
    }
    edge.attrs = attrs_from_json(e.value("attrs", nlohmann::json()), "edge " + edge.id);
    edges.push_back(std::move(edge));
  }
  return PropertyGraph(dir->get<bool>(), std::move(nodes), std::move(edges));
}

PropertyGraph load_graph_text(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    size_t line = 1;
    for (size_t i = 0; i < e.byte && i < text.size(); ++i) line += text[i] == '\n';
    throw GraphError("line " + std::to_string(line),
                     "malformed graph document at line " + std::to_string(line) + ": " + e.what());
  }
  return load_graph(doc);
}

PropertyGraph load_graph_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GraphError(path.string(), "cannot open graph file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_graph_text(ss.str());
}

nlohmann::json to_json(const PropertyGraph& g) {
  nlohmann::json doc;
  doc["directed"] = g.directed();
  auto& nodes = doc["nodes"] = nlohmann::json::array();
  for (const auto& n : g.nodes()) {
    nlohmann::json attrs = nlohmann::json::object();
    for (const auto& [k, v] : n.attrs) attrs[k] = attr_to_json(v);
    nodes.push_back({{"id", n.id}, {"attrs", attrs}});
  }
  auto& edges = doc["edges"] = nlohmann::json::array();
  for (const auto& e : g.edges()) {
    nlohmann::json attrs = nlohmann::json::object();
    for (const auto& [k, v] : e.attrs) attrs[k] = attr_to_json(v);
    nlohmann::json je{{"id", e.id}, {"source", e.source}, {"target", e.target}};
    if (e.label) je["label"] = *e.label;
    je["attrs"] = attrs;
    edges.push_back(std::move(je));
  }
  return doc;
}

std::unordered_map<std::string, Degree> degree_index(const PropertyGraph& g) {
  std::unordered_map<std::string, Degree> out;
  out.reserve(g.node_count());
  for (NodeIndex i = 0; i < g.node_count(); ++i) out.emplace(g.nodes()[i].id, g.degree(i));
  return out;
}

}  // namespace qlat
