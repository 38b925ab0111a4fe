#include "qlat/translator.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "qlat/dsl.hpp"
#include "qlat/error.hpp"

namespace qlat {

namespace {

std::string_view cypher_op(CompareOp op) {
  switch (op) {
    case CompareOp::EQ: return "=";
    case CompareOp::NE: return "<>";
    default: return op_symbol(op);
  }
}

std::string property(std::string_view attr) {
  bool bare = !attr.empty() && !(attr[0] >= '0' && attr[0] <= '9');
  for (char c : attr)
    bare = bare && ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_');
  if (bare) return std::string(attr);
  std::string out = "`";
  for (char c : attr) {
    if (c == '`') out.push_back('`');
    out.push_back(c);
  }
  return out + "`";
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string s;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) s += sep;
    s += parts[i];
  }
  return s;
}

}  // namespace

TranslatedQuery translate(const PatternGraph& pattern, std::optional<std::size_t> limit) {
  if (pattern.has_abstractions())
    throw NotConcreteError("instance still contains path abstractions");
  if (pattern.empty()) throw QueryError("empty pattern has no query text");

  std::vector<const PatternNode*> nodes;
  for (const auto& n : pattern.nodes) nodes.push_back(&n);
  std::sort(nodes.begin(), nodes.end(), [](auto* a, auto* b) { return a->id < b->id; });
  std::vector<const PatternEdge*> edges;
  for (const auto& e : pattern.edges) edges.push_back(&e);
  std::sort(edges.begin(), edges.end(), [](auto* a, auto* b) { return a->id < b->id; });

  TranslatedQuery q;
  for (size_t i = 0; i < nodes.size(); ++i) q.var_map[nodes[i]->id] = "n" + std::to_string(i);
  for (size_t i = 0; i < edges.size(); ++i) q.var_map[edges[i]->id] = "e" + std::to_string(i);
  auto var = [&](const std::string& id) -> const std::string& {
    auto it = q.var_map.find(id);
    if (it == q.var_map.end()) throw QueryError("pattern edge endpoint " + id + " is missing");
    return it->second;
  };

  std::vector<std::string> parts;
  std::set<std::string> touched;
  for (const PatternEdge* e : edges) {
    parts.push_back("(" + var(e->source) + ")-[" + var(e->id) + "]-" + (e->directed ? ">" : "") +
                    "(" + var(e->target) + ")");
    touched.insert(e->source);
    touched.insert(e->target);
  }
  for (const PatternNode* n : nodes)
    if (!touched.count(n->id)) parts.push_back("(" + var(n->id) + ")");

  using Term = std::tuple<std::string, Predicate>;
  std::vector<Term> preds;
  for (const auto& n : pattern.nodes)
    for (const auto& p : n.predicates) preds.emplace_back(n.id, p);
  for (const auto& e : pattern.edges)
    for (const auto& p : e.predicates) preds.emplace_back(e.id, p);
  std::sort(preds.begin(), preds.end());

  std::vector<std::string> terms;
  for (const auto& [id, p] : preds)
    terms.push_back(var(id) + "." + property(p.attr) + " " + std::string(cypher_op(p.op)) + " " +
                    format_literal(p.literal));
  for (size_t i = 0; i < nodes.size(); ++i)
    for (size_t j = i + 1; j < nodes.size(); ++j)
      terms.push_back(var(nodes[i]->id) + " <> " + var(nodes[j]->id));
  for (size_t i = 0; i < edges.size(); ++i)
    for (size_t j = i + 1; j < edges.size(); ++j) {
      const PatternEdge& a = *edges[i];
      const PatternEdge& b = *edges[j];
      const bool same = (a.source == b.source && a.target == b.target) ||
                        (!a.directed && a.source == b.target && a.target == b.source);
      if (same) terms.push_back(var(a.id) + " <> " + var(b.id));
    }

  std::vector<std::string> returned;
  for (const PatternNode* n : nodes) returned.push_back(var(n->id));

  q.text = "MATCH " + join(parts, ", ");
  if (!terms.empty()) q.text += "\nWHERE " + join(terms, " AND ");
  q.text += "\nRETURN DISTINCT " + join(returned, ", ");
  if (limit) q.text += "\nLIMIT " + std::to_string(*limit);
  return q;
}

TranslatedQuery translate(const QueryInstance& instance, std::optional<std::size_t> limit) {
  return translate(instance.pattern, limit);
}

}  // namespace qlat
