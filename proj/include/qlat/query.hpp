#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "qlat/diagnostics.hpp"
#include "qlat/value.hpp"

namespace qlat {

enum class MotifKind { Path, Loop, Tree, Clique };
std::string_view motif_name(MotifKind k);
std::optional<MotifKind> motif_from_name(std::string_view name);
/// Smallest legal node count for the kind.
int motif_min_nodes(MotifKind k);

/// Which node of a path motif an edge attaches to.
enum class Port { None, Head, Tail };

struct EndpointRef {
  std::string entity;
  Port port = Port::None;
  friend bool operator==(const EndpointRef&, const EndpointRef&) = default;
};

struct NodeEntity {
  friend bool operator==(const NodeEntity&, const NodeEntity&) = default;
};
struct EdgeEntity {
  EndpointRef source;
  EndpointRef target;
  bool directed = true;
  friend bool operator==(const EdgeEntity&, const EdgeEntity&) = default;
};
struct MotifEntity {
  MotifKind kind = MotifKind::Path;
  friend bool operator==(const MotifEntity&, const MotifEntity&) = default;
};
struct CustomEntity {
  std::vector<std::string> members;
  friend bool operator==(const CustomEntity&, const CustomEntity&) = default;
};

struct Entity {
  std::string id;
  std::variant<NodeEntity, EdgeEntity, MotifEntity, CustomEntity> kind;

  bool is_node() const { return std::holds_alternative<NodeEntity>(kind); }
  bool is_edge() const { return std::holds_alternative<EdgeEntity>(kind); }
  bool is_motif() const { return std::holds_alternative<MotifEntity>(kind); }
  bool is_custom() const { return std::holds_alternative<CustomEntity>(kind); }
  const EdgeEntity& edge() const { return std::get<EdgeEntity>(kind); }
  const MotifEntity& motif() const { return std::get<MotifEntity>(kind); }
  const CustomEntity& custom() const { return std::get<CustomEntity>(kind); }

  friend bool operator==(const Entity&, const Entity&) = default;
};

struct IntRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  bool fixed() const noexcept { return lo == hi; }
  std::int64_t size() const noexcept { return hi >= lo ? hi - lo + 1 : 0; }
  bool contains(std::int64_t v) const noexcept { return lo <= v && v <= hi; }
  friend bool operator==(const IntRange&, const IntRange&) = default;
};

struct NodeAttrRule {
  Predicate predicate;
  friend bool operator==(const NodeAttrRule&, const NodeAttrRule&) = default;
};
struct EdgeAttrRule {
  Predicate predicate;
  friend bool operator==(const EdgeAttrRule&, const EdgeAttrRule&) = default;
};
struct MotifConfigRule {
  IntRange nodes;
  std::optional<IntRange> width;
  std::optional<IntRange> depth;
  friend bool operator==(const MotifConfigRule&, const MotifConfigRule&) = default;
};
struct RepeatingRule {
  IntRange count;
  friend bool operator==(const RepeatingRule&, const RepeatingRule&) = default;
};

enum class ChainMode { LinkedChain, SharedNode };

struct ChainingRule {
  std::string start;
  std::string end;
  IntRange iterations;
  ChainMode mode = ChainMode::LinkedChain;
  friend bool operator==(const ChainingRule&, const ChainingRule&) = default;
};

using RuleBody =
    std::variant<NodeAttrRule, EdgeAttrRule, MotifConfigRule, RepeatingRule, ChainingRule>;

struct Rule {
  std::string id;
  std::string target;
  RuleBody body;

  /// Motif configuration, repeating and chaining rules shape the pattern.
  bool is_structural() const {
    return !std::holds_alternative<NodeAttrRule>(body) &&
           !std::holds_alternative<EdgeAttrRule>(body);
  }
  template <class T>
  const T* as() const {
    return std::get_if<T>(&body);
  }
  friend bool operator==(const Rule&, const Rule&) = default;
};

struct QueryRepresentation {
  std::string name = "unnamed";
  /// Explicit pattern direction; derived from edge entities when absent.
  std::optional<bool> directed;
  std::vector<Entity> entities;
  std::vector<Rule> rules;

  const Entity* find_entity(std::string_view id) const;
  const Rule* find_rule(std::string_view id) const;
  /// The motif configuration rule attached to `motif_id`, if any.
  const Rule* motif_config(std::string_view motif_id) const;
  size_t rule_index(std::string_view id) const;

  friend bool operator==(const QueryRepresentation&, const QueryRepresentation&) = default;
};

/// Pattern direction: the explicit flag, else directed iff some edge entity is
/// directed, else `fallback`.
bool effective_directed(const QueryRepresentation& qr, bool fallback = false);
/// True when neither the explicit flag nor any edge entity fixes the direction.
bool direction_open(const QueryRepresentation& qr);

/// Upper bounds enforced by validation.
inline constexpr std::int64_t kMaxTreeNodes = 8;
inline constexpr std::int64_t kMaxMotifNodes = 64;
inline constexpr std::int64_t kMaxCopies = 256;

std::vector<Diagnostic> validate(const QueryRepresentation& qr);

struct RuleClassification {
  std::vector<std::string> fully_specified;
  std::vector<std::string> underspecified;
};

/// Structural rules whose ranges are all single values are fully specified.
/// A tree configuration additionally needs to admit exactly one shape.
RuleClassification classify_rules(const QueryRepresentation& qr);

using Assignment = std::map<std::string, std::int64_t>;

/// Cartesian product of the rule's ranges, lexicographic (nodes, width, depth).
std::vector<Assignment> assignments(const Rule& rule);

nlohmann::json to_json(const QueryRepresentation& qr);
/// Throws QueryError on schema violations (not on semantic ones; see validate).
QueryRepresentation query_from_json(const nlohmann::json& j);

}  // namespace qlat

namespace qlat {

/// Concrete parameter choices the lattice enumerates for a structural rule.
/// Equal to assignments() except for trees, where each admissible shape is a
/// separate choice {nodes, shape} with width/depth ranges acting as windows.
std::vector<Assignment> rule_variants(const Rule& rule, const QueryRepresentation& qr);

}  // namespace qlat
