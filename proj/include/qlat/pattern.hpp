#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qlat/value.hpp"

namespace qlat {

/// Entity and copy that produced a pattern element. The element id is
/// `<entity>#<copy>#<local>`.
struct Origin {
  std::string entity;
  int copy = 0;
  std::string local;

  std::string id() const;
  friend bool operator==(const Origin&, const Origin&) = default;
};

/// Stand-in for a path motif whose length is still open. Carried by the
/// marker edge joining the path's head and tail.
struct PathAbstraction {
  std::string entity;
  int min_nodes = 2;
  PredicateSet node_predicates;
  PredicateSet edge_predicates;
  friend bool operator==(const PathAbstraction&, const PathAbstraction&) = default;
};

struct PatternNode {
  std::string id;
  PredicateSet predicates;
  Origin origin;
  friend bool operator==(const PatternNode&, const PatternNode&) = default;
};

struct PatternEdge {
  std::string id;
  std::string source;
  std::string target;
  bool directed = true;
  PredicateSet predicates;
  Origin origin;
  std::optional<PathAbstraction> abstraction;
  friend bool operator==(const PatternEdge&, const PatternEdge&) = default;
};

class PatternGraph {
 public:
  std::vector<PatternNode> nodes;
  std::vector<PatternEdge> edges;

  const PatternNode* find_node(std::string_view id) const;
  PatternNode* find_node(std::string_view id);
  const PatternEdge* find_edge(std::string_view id) const;
  bool has_abstractions() const;
  bool empty() const { return nodes.empty() && edges.empty(); }

  friend bool operator==(const PatternGraph&, const PatternGraph&) = default;
};

/// Replaces every path-abstraction marker by the path at its minimum size.
PatternGraph concretize(const PatternGraph& p);

/// Same node/edge sets (by id) with identical contents, ignoring list order.
bool structurally_equal(const PatternGraph& a, const PatternGraph& b);

nlohmann::json to_json(const PatternGraph& p);
PatternGraph pattern_from_json(const nlohmann::json& j);

}  // namespace qlat
