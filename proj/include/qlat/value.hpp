#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qlat {

/// Attribute value stored on graph elements and used as predicate literal.
/// Numbers use 64-bit float semantics.
class AttrValue {
 public:
  using Storage = std::variant<std::string, double, bool>;

  AttrValue() : value_(std::string{}) {}
  AttrValue(std::string s) : value_(std::move(s)) {}
  AttrValue(const char* s) : value_(std::string(s)) {}
  AttrValue(double d) : value_(d) {}
  AttrValue(int i) : value_(static_cast<double>(i)) {}
  AttrValue(bool b) : value_(b) {}

  bool is_text() const noexcept { return std::holds_alternative<std::string>(value_); }
  bool is_number() const noexcept { return std::holds_alternative<double>(value_); }
  bool is_bool() const noexcept { return std::holds_alternative<bool>(value_); }

  const std::string& text() const { return std::get<std::string>(value_); }
  double number() const { return std::get<double>(value_); }
  bool boolean() const { return std::get<bool>(value_); }

  const Storage& storage() const noexcept { return value_; }

  friend bool operator==(const AttrValue&, const AttrValue&) = default;
  /// Total order used for canonical sorting only (type index first).
  friend std::strong_ordering operator<=>(const AttrValue& a, const AttrValue& b);

 private:
  Storage value_;
};

using AttrMap = std::map<std::string, AttrValue, std::less<>>;

enum class CompareOp { EQ, NE, LT, LE, GT, GE };

std::string_view op_symbol(CompareOp op);  // "==", "!=", "<", ...
std::optional<CompareOp> parse_op(std::string_view symbol);
std::string_view op_name(CompareOp op);  // "EQ", "NE", ...
std::optional<CompareOp> op_from_name(std::string_view name);

struct Predicate {
  std::string attr;
  CompareOp op = CompareOp::EQ;
  AttrValue literal;

  friend bool operator==(const Predicate&, const Predicate&) = default;
  friend std::strong_ordering operator<=>(const Predicate& a, const Predicate& b);
};

/// Sorted, duplicate-free predicate set.
using PredicateSet = std::vector<Predicate>;
void normalize(PredicateSet& preds);
void merge_into(PredicateSet& dst, const PredicateSet& src);
/// True when every predicate of `sub` occurs in `super` (both normalized).
bool is_subset(const PredicateSet& sub, const PredicateSet& super);

/// Missing attributes and cross-type comparisons are unsatisfied, never errors.
bool satisfies(const Predicate& p, const AttrMap& attrs);
bool satisfies_all(const PredicateSet& preds, const AttrMap& attrs);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double d);
/// Double-quoted with `"` and `\` (and control characters) escaped.
std::string quote_string(std::string_view s);
std::string format_literal(const AttrValue& v);

}  // namespace qlat
