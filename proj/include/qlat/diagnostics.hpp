#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace qlat {

enum class Severity { Error, Warning };

struct SourceSpan {
  int line = 1;
  int column = 1;
  int length = 0;
  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string subject;  // entity or rule id, empty for document-level issues
  std::string message;
  std::optional<SourceSpan> span;
};

bool has_errors(const std::vector<Diagnostic>& diags);
std::string format_diagnostic(const Diagnostic& d, const std::string& file = {});
nlohmann::json to_json(const Diagnostic& d);

}  // namespace qlat
