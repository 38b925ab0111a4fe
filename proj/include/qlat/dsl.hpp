#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qlat/diagnostics.hpp"
#include "qlat/query.hpp"

namespace qlat {

struct ParseResult {
  /// Present only when the text parsed and the representation validates.
  std::optional<QueryRepresentation> query;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return query.has_value(); }
};

/// Parses `.gq` source. Every diagnostic carries a span into `text`.
ParseResult parse(std::string_view text);

/// Deterministic text form; parse(serialize(qr)) == qr for valid qr.
std::string serialize(const QueryRepresentation& qr);

/// Identifier as it must appear in source (backtick-quoted when needed).
std::string format_identifier(std::string_view id);

}  // namespace qlat
