#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qlat/pattern.hpp"
#include "qlat/query.hpp"

namespace qlat {

/// Chosen parameters per structural rule id. Rules absent from the map are
/// left in their backbone form (motif abstract, entity present once).
using RuleChoice = std::map<std::string, Assignment>;

enum class StageKind { Backbone, Preview, FsFinal, Combo };
std::string_view stage_name(StageKind k);

struct Stage {
  StageKind kind = StageKind::Backbone;
  std::string rule;                // Preview
  int layer = 0;                   // Combo
  std::vector<std::string> rules;  // Combo, declaration order
  friend bool operator==(const Stage&, const Stage&) = default;
};

struct QueryInstance {
  std::string id;
  Stage stage;
  RuleChoice assignment;
  PatternGraph pattern;
  friend bool operator==(const QueryInstance&, const QueryInstance&) = default;
};

struct ComboCell {
  std::string id;  // L<k>:<rule,rule,...>
  int layer = 0;
  std::vector<std::string> rules;
  std::vector<std::string> instances;
  friend bool operator==(const ComboCell&, const ComboCell&) = default;
};

struct Flow {
  std::string from;
  std::string to;
  friend bool operator==(const Flow&, const Flow&) = default;
};

/// Injective map of the `from` instance's executable pattern into the `to`
/// instance's executable pattern.
struct Witness {
  std::string from;
  std::string to;
  std::map<std::string, std::string> nodes;
  std::map<std::string, std::string> edges;
  friend bool operator==(const Witness&, const Witness&) = default;
};

struct LatticeOptions {
  /// Pattern direction when the query leaves it open.
  bool default_directed = false;
  std::size_t max_instances = 10000;
  std::size_t max_pattern_nodes = 4096;
  bool witnesses = true;
};

class InstantiationLattice {
 public:
  QueryRepresentation query;
  bool directed = false;
  std::vector<std::string> underspecified;
  std::vector<QueryInstance> instances;
  std::string backbone;
  std::vector<std::string> previews;
  std::string fs_final;
  std::vector<std::vector<ComboCell>> layers;  // layers[k-1] is layer k
  std::vector<Flow> flows;
  std::vector<Witness> witnesses;

  const QueryInstance* find(std::string_view id) const;
  const QueryInstance& at(std::string_view id) const;
  const ComboCell* find_cell(std::string_view id) const;
  /// Instance ids selected by a step reference: backbone | preview:<rule> |
  /// fs-final | final | L<k> | L<k>:<rules> | <instance id>.
  std::vector<std::string> resolve_step(std::string_view ref) const;
  std::size_t combo_instance_count() const;

 private:
  mutable std::map<std::string, std::size_t, std::less<>> index_;
  void reindex() const;
};

/// Builds the pattern for one parameter choice.
PatternGraph materialize(const QueryRepresentation& qr, bool directed, const RuleChoice& choice);

PatternGraph build_backbone(const QueryRepresentation& qr, bool directed = false);

/// Adds k copies of the rule's target. Edge targets gain parallel edges only.
PatternGraph apply_repeating(const PatternGraph& p, const QueryRepresentation& qr,
                             const Rule& rule, std::int64_t k);

/// Appends k sequential copies of the rule's target; link edges use `directed`.
PatternGraph apply_chaining(const PatternGraph& p, const QueryRepresentation& qr,
                            const Rule& rule, std::int64_t k, bool directed);

struct FullySpecified {
  std::vector<QueryInstance> previews;
  QueryInstance final;
};
FullySpecified instantiate_fully_specified(const QueryRepresentation& qr,
                                           const LatticeOptions& opts = {});

/// Throws QueryError when `qr` is invalid and CapError when a limit is exceeded.
InstantiationLattice build_lattice(const QueryRepresentation& qr, const LatticeOptions& opts = {});

/// Checks injectivity, endpoint/orientation consistency and predicate
/// containment of `w` between two concrete patterns.
bool verify_witness(const PatternGraph& from, const PatternGraph& to, const Witness& w);

/// Completes a node map into a witness by choosing edge images; nullopt if
/// the map does not extend to a valid embedding.
std::optional<Witness> extend_witness(const PatternGraph& from, const PatternGraph& to,
                                      const std::map<std::string, std::string>& nodes);

nlohmann::json to_json(const QueryInstance& inst);
nlohmann::json to_json(const InstantiationLattice& lattice);
/// Sizes only: counts per layer and cell, instance ids, flows.
nlohmann::json lattice_summary(const InstantiationLattice& lattice);

}  // namespace qlat
