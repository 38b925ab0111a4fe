#include "qlat/pattern.hpp"

#include <algorithm>
#include <map>

#include "qlat/error.hpp"
#include "qlat/graph.hpp"

namespace qlat {

using nlohmann::json;

std::string Origin::id() const { return entity + "#" + std::to_string(copy) + "#" + local; }

const PatternNode* PatternGraph::find_node(std::string_view id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

PatternNode* PatternGraph::find_node(std::string_view id) {
  for (auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

const PatternEdge* PatternGraph::find_edge(std::string_view id) const {
  for (const auto& e : edges)
    if (e.id == id) return &e;
  return nullptr;
}

bool PatternGraph::has_abstractions() const {
  return std::any_of(edges.begin(), edges.end(),
                     [](const PatternEdge& e) { return e.abstraction.has_value(); });
}

PatternGraph concretize(const PatternGraph& p) {
  PatternGraph out;
  out.nodes = p.nodes;
  for (const auto& e : p.edges) {
    if (!e.abstraction) {
      out.edges.push_back(e);
      continue;
    }
    const auto& a = *e.abstraction;
    const Origin& o = e.origin;
    auto local_id = [&](int i) {
      if (i == 0) return e.source;
      if (i == a.min_nodes - 1) return e.target;
      return Origin{o.entity, o.copy, std::to_string(i)}.id();
    };
    for (int i = 1; i + 1 < a.min_nodes; ++i) {
      Origin no{o.entity, o.copy, std::to_string(i)};
      out.nodes.push_back({no.id(), a.node_predicates, no});
    }
    for (int i = 0; i + 1 < a.min_nodes; ++i) {
      Origin eo{o.entity, o.copy, "e" + std::to_string(i)};
      out.edges.push_back(
          {eo.id(), local_id(i), local_id(i + 1), e.directed, a.edge_predicates, eo, std::nullopt});
    }
  }
  return out;
}

bool structurally_equal(const PatternGraph& a, const PatternGraph& b) {
  if (a.nodes.size() != b.nodes.size() || a.edges.size() != b.edges.size()) return false;
  std::map<std::string, const PatternNode*> nb;
  for (const auto& n : b.nodes) nb[n.id] = &n;
  for (const auto& n : a.nodes) {
    auto it = nb.find(n.id);
    if (it == nb.end() || !(*it->second == n)) return false;
  }
  std::map<std::string, const PatternEdge*> eb;
  for (const auto& e : b.edges) eb[e.id] = &e;
  for (const auto& e : a.edges) {
    auto it = eb.find(e.id);
    if (it == eb.end() || !(*it->second == e)) return false;
  }
  return true;
}

namespace {

json preds_json(const PredicateSet& ps) {
  json arr = json::array();
  for (const auto& p : ps)
    arr.push_back({{"attr", p.attr}, {"op", op_name(p.op)}, {"literal", attr_to_json(p.literal)}});
  return arr;
}

PredicateSet preds_from(const json& arr, const std::string& where) {
  PredicateSet out;
  for (const auto& j : arr) {
    auto op = op_from_name(j.at("op").get<std::string>());
    if (!op) throw QueryError("unknown operator in " + where);
    out.push_back({j.at("attr").get<std::string>(), *op, attr_from_json(j.at("literal"), where)});
  }
  normalize(out);
  return out;
}

json origin_json(const Origin& o) {
  return {{"entity", o.entity}, {"copy", o.copy}, {"local", o.local}};
}

Origin origin_from(const json& j) {
  return {j.at("entity").get<std::string>(), j.at("copy").get<int>(),
          j.at("local").get<std::string>()};
}

}  // namespace

json to_json(const PatternGraph& p) {
  json nodes = json::array();
  for (const auto& n : p.nodes)
    nodes.push_back(
        {{"id", n.id}, {"origin", origin_json(n.origin)}, {"predicates", preds_json(n.predicates)}});
  json edges = json::array();
  for (const auto& e : p.edges) {
    json je{{"id", e.id},
            {"source", e.source},
            {"target", e.target},
            {"directed", e.directed},
            {"origin", origin_json(e.origin)},
            {"predicates", preds_json(e.predicates)}};
    if (e.abstraction) {
      je["path_abstraction"] = {{"entity", e.abstraction->entity},
                                {"min_nodes", e.abstraction->min_nodes},
                                {"node_predicates", preds_json(e.abstraction->node_predicates)},
                                {"edge_predicates", preds_json(e.abstraction->edge_predicates)}};
    }
    edges.push_back(std::move(je));
  }
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

PatternGraph pattern_from_json(const json& j) {
  PatternGraph p;
  try {
    for (const auto& jn : j.at("nodes")) {
      const auto id = jn.at("id").get<std::string>();
      p.nodes.push_back(
          {id, preds_from(jn.value("predicates", json::array()), id), origin_from(jn.at("origin"))});
    }
    for (const auto& je : j.at("edges")) {
      PatternEdge e;
      e.id = je.at("id").get<std::string>();
      e.source = je.at("source").get<std::string>();
      e.target = je.at("target").get<std::string>();
      e.directed = je.at("directed").get<bool>();
      e.predicates = preds_from(je.value("predicates", json::array()), e.id);
      e.origin = origin_from(je.at("origin"));
      if (auto a = je.find("path_abstraction"); a != je.end()) {
        e.abstraction = PathAbstraction{a->at("entity").get<std::string>(),
                                        a->at("min_nodes").get<int>(),
                                        preds_from(a->at("node_predicates"), e.id),
                                        preds_from(a->at("edge_predicates"), e.id)};
      }
      p.edges.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw QueryError(std::string("malformed pattern: ") + e.what());
  }
  return p;
}

}  // namespace qlat
