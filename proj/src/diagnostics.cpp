#include "qlat/diagnostics.hpp"

#include <algorithm>

namespace qlat {

bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

std::string format_diagnostic(const Diagnostic& d, const std::string& file) {
  std::string out;
  if (!file.empty()) out += file + ":";
  if (d.span) out += std::to_string(d.span->line) + ":" + std::to_string(d.span->column) + ":";
  if (!out.empty()) out += " ";
  out += d.severity == Severity::Error ? "error: " : "warning: ";
  out += d.message;
  if (!d.subject.empty()) out += " [" + d.subject + "]";
  return out;
}

nlohmann::json to_json(const Diagnostic& d) {
  nlohmann::json j{{"severity", d.severity == Severity::Error ? "error" : "warning"},
                   {"subject", d.subject},
                   {"message", d.message}};
  if (d.span)
    j["span"] = {{"line", d.span->line}, {"column", d.span->column}, {"length", d.span->length}};
  return j;
}

}  // namespace qlat
