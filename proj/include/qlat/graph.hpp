#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "qlat/error.hpp"
#include "qlat/value.hpp"

namespace qlat {

using NodeIndex = std::uint32_t;
using EdgeIndex = std::uint32_t;

struct GraphNode {
  std::string id;
  AttrMap attrs;
  friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

struct GraphEdge {
  std::string id;
  std::string source;
  std::string target;
  std::optional<std::string> label;
  AttrMap attrs;
  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

struct Degree {
  std::uint32_t in = 0;
  std::uint32_t out = 0;
  std::uint32_t total = 0;
  friend bool operator==(const Degree&, const Degree&) = default;
};

/// Directed or undirected multigraph with attributed nodes and edges.
///
/// Immutable once constructed. In undirected graphs the stored (source, target)
/// order is kept for round-tripping but carries no meaning.
class PropertyGraph {
 public:
  /// Validates ids and endpoints; throws GraphError naming the offending id.
  PropertyGraph(bool directed, std::vector<GraphNode> nodes, std::vector<GraphEdge> edges);
  PropertyGraph() : PropertyGraph(false, {}, {}) {}

  bool directed() const noexcept { return directed_; }
  std::span<const GraphNode> nodes() const noexcept { return nodes_; }
  std::span<const GraphEdge> edges() const noexcept { return edges_; }
  size_t node_count() const noexcept { return nodes_.size(); }
  size_t edge_count() const noexcept { return edges_.size(); }

  std::optional<NodeIndex> find_node(std::string_view id) const;
  std::optional<EdgeIndex> find_edge(std::string_view id) const;

  NodeIndex source(EdgeIndex e) const { return ends_[e].first; }
  NodeIndex target(EdgeIndex e) const { return ends_[e].second; }

  /// Every edge touching `n` (self-loops listed once).
  std::span<const EdgeIndex> incident(NodeIndex n) const { return incident_[n]; }

  /// Edges that can realise a pattern edge u->v (directed) or {u,v} (undirected).
  std::span<const EdgeIndex> edges_between(NodeIndex u, NodeIndex v) const;

  const Degree& degree(NodeIndex n) const { return degrees_[n]; }

  friend bool operator==(const PropertyGraph& a, const PropertyGraph& b) {
    return a.directed_ == b.directed_ && a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  bool directed_;
  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
  std::vector<std::pair<NodeIndex, NodeIndex>> ends_;
  std::vector<std::vector<EdgeIndex>> incident_;
  std::vector<Degree> degrees_;
  std::unordered_map<std::string, NodeIndex> node_by_id_;
  std::unordered_map<std::string, EdgeIndex> edge_by_id_;
  std::unordered_map<std::uint64_t, std::vector<EdgeIndex>> pair_edges_;
};

/// Parses the graph document format. Unknown keys are rejected.
PropertyGraph load_graph(const nlohmann::json& doc);
PropertyGraph load_graph_text(std::string_view text);
PropertyGraph load_graph_file(const std::filesystem::path& path);

nlohmann::json to_json(const PropertyGraph& g);

/// In undirected graphs every endpoint incidence counts towards in, out and
/// total alike; a self-loop contributes two to its node.
std::unordered_map<std::string, Degree> degree_index(const PropertyGraph& g);

nlohmann::json attr_to_json(const AttrValue& v);
/// Throws GraphError for unsupported or non-finite values.
AttrValue attr_from_json(const nlohmann::json& j, const std::string& subject);

}  // namespace qlat
