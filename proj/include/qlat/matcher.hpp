#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qlat/graph.hpp"
#include "qlat/pattern.hpp"

namespace qlat {

/// One embedding: pattern ids to data ids.
struct MatchResult {
  std::map<std::string, std::string> nodes;
  std::map<std::string, std::string> edges;
  friend bool operator==(const MatchResult&, const MatchResult&) = default;
  friend auto operator<=>(const MatchResult&, const MatchResult&) = default;
};

struct MatchOptions {
  std::optional<std::size_t> limit;
  std::optional<std::chrono::milliseconds> time_budget;
  bool count_only = false;
};

struct MatchOutcome {
  std::vector<MatchResult> results;  // empty when count_only
  std::size_t count = 0;
  /// The search space was exhausted (nothing beyond `count` exists).
  bool complete = true;
  /// The pattern was empty; its single embedding is the empty map.
  bool degenerate = false;
};

/// Node- and edge-injective embeddings of `pattern` into `g` in a fixed search
/// order. Edge predicates on `label` fall back to the data edge's label.
/// Throws NotConcreteError on path-abstraction markers and ExecutionError when
/// the pattern direction differs from the graph's.
MatchOutcome match(const PatternGraph& pattern, const PropertyGraph& g, const MatchOptions& opts = {});

/// As match() without materializing embeddings.
MatchOutcome count(const PatternGraph& pattern, const PropertyGraph& g, MatchOptions opts = {});

}  // namespace qlat
