#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>

#include "qlat/instantiate.hpp"
#include "qlat/pattern.hpp"

namespace qlat {

struct TranslatedQuery {
  std::string text;
  std::map<std::string, std::string> var_map;  // pattern id -> variable
};

/// Cypher text for a concrete pattern. Throws NotConcreteError for patterns
/// with path-abstraction markers and QueryError for empty patterns.
TranslatedQuery translate(const PatternGraph& pattern, std::optional<std::size_t> limit = {});
TranslatedQuery translate(const QueryInstance& instance, std::optional<std::size_t> limit = {});

}  // namespace qlat
