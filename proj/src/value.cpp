#include "qlat/value.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace qlat {

std::strong_ordering operator<=>(const AttrValue& a, const AttrValue& b) {
  if (a.value_.index() != b.value_.index()) return a.value_.index() <=> b.value_.index();
  if (a.is_text()) return a.text().compare(b.text()) <=> 0;
  if (a.is_bool()) return a.boolean() <=> b.boolean();
  const double x = a.number();
  const double y = b.number();
  if (x < y) return std::strong_ordering::less;
  if (x > y) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

namespace {
constexpr std::array<std::string_view, 6> kSymbols{"==", "!=", "<", "<=", ">", ">="};
constexpr std::array<std::string_view, 6> kNames{"EQ", "NE", "LT", "LE", "GT", "GE"};
}  // namespace

std::string_view op_symbol(CompareOp op) { return kSymbols[static_cast<size_t>(op)]; }
std::string_view op_name(CompareOp op) { return kNames[static_cast<size_t>(op)]; }

std::optional<CompareOp> parse_op(std::string_view symbol) {
  for (size_t i = 0; i < kSymbols.size(); ++i)
    if (kSymbols[i] == symbol) return static_cast<CompareOp>(i);
  return std::nullopt;
}

std::optional<CompareOp> op_from_name(std::string_view name) {
  for (size_t i = 0; i < kNames.size(); ++i)
    if (kNames[i] == name) return static_cast<CompareOp>(i);
  return std::nullopt;
}

std::strong_ordering operator<=>(const Predicate& a, const Predicate& b) {
  if (auto c = a.attr <=> b.attr; c != 0) return c;
  if (auto c = a.op <=> b.op; c != 0) return c;
  return a.literal <=> b.literal;
}

void normalize(PredicateSet& preds) {
  std::sort(preds.begin(), preds.end());
  preds.erase(std::unique(preds.begin(), preds.end()), preds.end());
}

void merge_into(PredicateSet& dst, const PredicateSet& src) {
  dst.insert(dst.end(), src.begin(), src.end());
  normalize(dst);
}

bool is_subset(const PredicateSet& sub, const PredicateSet& super) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

bool satisfies(const Predicate& p, const AttrMap& attrs) {
  auto it = attrs.find(p.attr);
  if (it == attrs.end()) return false;
  const AttrValue& v = it->second;
  if (v.storage().index() != p.literal.storage().index()) return false;

  if (v.is_number()) {
    const double x = v.number();
    const double y = p.literal.number();
    switch (p.op) {
      case CompareOp::EQ: return x == y;
      case CompareOp::NE: return x != y;
      case CompareOp::LT: return x < y;
      case CompareOp::LE: return x <= y;
      case CompareOp::GT: return x > y;
      case CompareOp::GE: return x >= y;
    }
    return false;
  }
  // Text and booleans only support equality.
  switch (p.op) {
    case CompareOp::EQ: return v == p.literal;
    case CompareOp::NE: return v != p.literal;
    default: return false;
  }
}

bool satisfies_all(const PredicateSet& preds, const AttrMap& attrs) {
  return std::all_of(preds.begin(), preds.end(),
                     [&](const Predicate& p) { return satisfies(p, attrs); });
}

std::string format_number(double d) {
  if (d == 0.0) return "0";  // folds -0
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), d);
  return std::string(buf.data(), end);
}

std::string quote_string(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 2);
  out.push_back('"');
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char hex[8];
          std::snprintf(hex, sizeof hex, "\\u%04x", static_cast<unsigned>(c));
          out += hex;
        } else {
          out.push_back(c);
        }
    }
  }
  out.push_back('"');
  return out;
}

std::string format_literal(const AttrValue& v) {
  if (v.is_text()) return quote_string(v.text());
  if (v.is_bool()) return v.boolean() ? "true" : "false";
  return format_number(v.number());
}

}  // namespace qlat
