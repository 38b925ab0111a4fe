#include "qlat/query.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "qlat/error.hpp"
#include "qlat/graph.hpp"
#include "qlat/motif.hpp"

namespace qlat {

namespace {
constexpr std::array<std::string_view, 4> kMotifNames{"path", "loop", "tree", "clique"};
}

std::string_view motif_name(MotifKind k) { return kMotifNames[static_cast<size_t>(k)]; }

std::optional<MotifKind> motif_from_name(std::string_view name) {
  for (size_t i = 0; i < kMotifNames.size(); ++i)
    if (kMotifNames[i] == name) return static_cast<MotifKind>(i);
  return std::nullopt;
}

int motif_min_nodes(MotifKind k) { return k == MotifKind::Loop ? 3 : 2; }

const Entity* QueryRepresentation::find_entity(std::string_view id) const {
  for (const auto& e : entities)
    if (e.id == id) return &e;
  return nullptr;
}

const Rule* QueryRepresentation::find_rule(std::string_view id) const {
  for (const auto& r : rules)
    if (r.id == id) return &r;
  return nullptr;
}

const Rule* QueryRepresentation::motif_config(std::string_view motif_id) const {
  for (const auto& r : rules)
    if (r.target == motif_id && r.as<MotifConfigRule>()) return &r;
  return nullptr;
}

size_t QueryRepresentation::rule_index(std::string_view id) const {
  for (size_t i = 0; i < rules.size(); ++i)
    if (rules[i].id == id) return i;
  return rules.size();
}

bool direction_open(const QueryRepresentation& qr) {
  if (qr.directed) return false;
  return std::none_of(qr.entities.begin(), qr.entities.end(),
                      [](const Entity& e) { return e.is_edge(); });
}

bool effective_directed(const QueryRepresentation& qr, bool fallback) {
  if (qr.directed) return *qr.directed;
  for (const auto& e : qr.entities)
    if (e.is_edge()) return e.edge().directed;
  return fallback;
}

// ---------------------------------------------------------------------------
// validation

namespace {

class Validator {
 public:
  explicit Validator(const QueryRepresentation& qr) : qr_(qr) {}

  std::vector<Diagnostic> run() {
    check_entities();
    check_direction();
    check_rules();
    check_motifs_configured();
    return std::move(diags_);
  }

 private:
  void error(const std::string& subject, std::string msg) {
    diags_.push_back({Severity::Error, subject, std::move(msg), std::nullopt});
  }
  void warning(const std::string& subject, std::string msg) {
    diags_.push_back({Severity::Warning, subject, std::move(msg), std::nullopt});
  }

  void check_endpoint(const Entity& edge, const EndpointRef& ref) {
    const Entity* t = qr_.find_entity(ref.entity);
    if (!t) {
      error(edge.id, "edge " + edge.id + " references undeclared entity " + ref.entity);
      return;
    }
    if (t->is_edge() || t->is_custom()) {
      error(edge.id, "edge " + edge.id + " must attach to a node or motif, not " + ref.entity);
      return;
    }
    const bool is_path = t->is_motif() && t->motif().kind == MotifKind::Path;
    if (is_path && ref.port == Port::None)
      error(edge.id, "edge " + edge.id + " attaches to path " + ref.entity +
                         " and must name head or tail");
    if (!is_path && ref.port != Port::None)
      error(edge.id, "edge " + edge.id + " uses head/tail on non-path entity " + ref.entity);
  }

  void check_entities() {
    std::unordered_set<std::string> seen;
    for (const auto& e : qr_.entities) {
      if (e.id.empty()) error(e.id, "entity with empty id");
      if (!seen.insert(e.id).second) error(e.id, "duplicate entity id " + e.id);
    }
    for (const auto& e : qr_.entities) {
      if (e.is_edge()) {
        check_endpoint(e, e.edge().source);
        check_endpoint(e, e.edge().target);
      } else if (e.is_custom()) {
        const auto& members = e.custom().members;
        if (members.empty()) error(e.id, "group " + e.id + " has no members");
        std::unordered_set<std::string> uniq;
        for (const auto& m : members) {
          if (!uniq.insert(m).second) error(e.id, "group " + e.id + " lists " + m + " twice");
          const Entity* t = qr_.find_entity(m);
          if (!t)
            error(e.id, "group " + e.id + " references undeclared entity " + m);
          else if (t->is_custom())
            error(e.id, "group " + e.id + " cannot contain group " + m);
        }
      }
    }
  }

  void check_direction() {
    std::optional<bool> seen;
    for (const auto& e : qr_.entities) {
      if (!e.is_edge()) continue;
      const bool d = e.edge().directed;
      if (qr_.directed && *qr_.directed != d)
        error(e.id, "edge " + e.id + (d ? " is directed" : " is undirected") +
                        " but the query is declared " +
                        (*qr_.directed ? "directed" : "undirected"));
      else if (seen && *seen != d)
        error(e.id, "edge " + e.id + " mixes directed and undirected edges in one query");
      seen = seen.value_or(d);
    }
  }

  void check_predicate(const Rule& r, const Predicate& p) {
    if (p.attr.empty()) error(r.id, "rule " + r.id + " has an empty attribute name");
    if (p.literal.is_number() && !std::isfinite(p.literal.number()))
      error(r.id, "rule " + r.id + " has a non-finite literal");
    const bool ordering = p.op != CompareOp::EQ && p.op != CompareOp::NE;
    if (ordering && !p.literal.is_number())
      error(r.id, "rule " + r.id + " uses " + std::string(op_symbol(p.op)) +
                      " with a non-numeric literal");
  }

  void check_range(const Rule& r, const IntRange& range, std::int64_t min, std::int64_t max,
                   const char* what) {
    if (range.lo > range.hi)
      error(r.id, "rule " + r.id + ": " + what + " range " + std::to_string(range.lo) + ".." +
                      std::to_string(range.hi) + " is empty");
    if (range.lo < min)
      error(r.id, "rule " + r.id + ": " + what + " must be at least " + std::to_string(min));
    if (range.hi > max)
      error(r.id, "rule " + r.id + ": " + what + " must be at most " + std::to_string(max));
  }

  void check_rules() {
    std::unordered_set<std::string> seen;
    std::unordered_map<std::string, std::string> structural_on;
    for (const auto& r : qr_.rules) {
      if (r.id.empty()) error(r.id, "rule with empty id");
      if (!seen.insert(r.id).second) error(r.id, "duplicate rule id " + r.id);
      const Entity* t = qr_.find_entity(r.target);
      if (!t) {
        error(r.id, "rule " + r.id + " targets undeclared entity " + r.target);
        continue;
      }
      if (r.is_structural()) {
        // A motif keeps its configuration alongside one repeating/chaining rule.
        const std::string slot = (r.as<MotifConfigRule>() ? "config:" : "copy:") + r.target;
        auto [it, fresh] = structural_on.emplace(slot, r.id);
        if (!fresh)
          error(r.id, "entity " + r.target + " already has structural rule " + it->second +
                          "; rule " + r.id + " conflicts");
      }
      std::visit([&](const auto& body) { check_body(r, *t, body); }, r.body);
    }
  }

  void check_body(const Rule& r, const Entity& t, const NodeAttrRule& body) {
    if (t.is_edge()) error(r.id, "node attribute rule " + r.id + " targets edge " + t.id);
    check_predicate(r, body.predicate);
  }

  void check_body(const Rule& r, const Entity& t, const EdgeAttrRule& body) {
    if (t.is_node()) error(r.id, "edge attribute rule " + r.id + " targets node " + t.id);
    check_predicate(r, body.predicate);
  }

  void check_body(const Rule& r, const Entity& t, const MotifConfigRule& body) {
    if (!t.is_motif()) {
      error(r.id, "motif configuration " + r.id + " targets non-motif " + t.id);
      return;
    }
    const MotifKind kind = t.motif().kind;
    const std::int64_t max = kind == MotifKind::Tree ? kMaxTreeNodes : kMaxMotifNodes;
    check_range(r, body.nodes, motif_min_nodes(kind), max, "nodes");
    if (kind != MotifKind::Tree && (body.width || body.depth)) {
      error(r.id, "width/depth are only valid for tree motifs (" + t.id + ")");
      return;
    }
    if (body.width) check_range(r, *body.width, 1, kMaxTreeNodes, "width");
    if (body.depth) check_range(r, *body.depth, 1, kMaxTreeNodes, "depth");
    if (kind == MotifKind::Tree && !has_errors(diags_) && rule_variants(r, qr_).empty())
      error(r.id, "tree configuration " + r.id + " admits no tree shape");
  }

  void check_body(const Rule& r, const Entity&, const RepeatingRule& body) {
    check_range(r, body.count, 0, kMaxCopies, "count");
  }

  void check_body(const Rule& r, const Entity& t, const ChainingRule& body) {
    check_range(r, body.iterations, 0, kMaxCopies, "iterations");
    if (!t.is_node() && !t.is_custom()) {
      error(r.id, "chaining rule " + r.id + " must target a node or group, not " + t.id);
      return;
    }
    for (const auto* ref : {&body.start, &body.end}) {
      const Entity* n = qr_.find_entity(*ref);
      if (!n || !n->is_node()) {
        error(r.id, "chaining rule " + r.id + ": " + *ref + " is not a declared node");
        continue;
      }
      if (t.is_node() && *ref != t.id)
        error(r.id, "chaining rule " + r.id + " on node " + t.id + " must start and end at it");
      if (t.is_custom()) {
        const auto& m = t.custom().members;
        if (std::find(m.begin(), m.end(), *ref) == m.end())
          error(r.id, "chaining rule " + r.id + ": " + *ref + " is not a member of " + t.id);
      }
    }
    if (body.mode == ChainMode::SharedNode && body.start == body.end) {
      if (t.is_node())
        warning(r.id, "shared-node chaining on single node " + t.id + " does not grow the pattern");
      else
        error(r.id, "shared-node chaining " + r.id + " with start = end would merge each copy onto itself");
    }
  }

  void check_motifs_configured() {
    for (const auto& e : qr_.entities)
      if (e.is_motif() && !qr_.motif_config(e.id))
        error(e.id, "motif " + e.id + " has no configuration");
  }

  const QueryRepresentation& qr_;
  std::vector<Diagnostic> diags_;
};

}  // namespace

std::vector<Diagnostic> validate(const QueryRepresentation& qr) { return Validator(qr).run(); }

// ---------------------------------------------------------------------------
// rule parameters

std::vector<Assignment> assignments(const Rule& rule) {
  std::vector<Assignment> out;
  if (const auto* m = rule.as<MotifConfigRule>()) {
    const IntRange one{0, 0};
    const IntRange w = m->width.value_or(one);
    const IntRange d = m->depth.value_or(one);
    for (auto n = m->nodes.lo; n <= m->nodes.hi; ++n)
      for (auto wi = w.lo; wi <= w.hi; ++wi)
        for (auto di = d.lo; di <= d.hi; ++di) {
          Assignment a{{"nodes", n}};
          if (m->width) a["width"] = wi;
          if (m->depth) a["depth"] = di;
          out.push_back(std::move(a));
        }
  } else if (const auto* r = rule.as<RepeatingRule>()) {
    for (auto k = r->count.lo; k <= r->count.hi; ++k) out.push_back({{"count", k}});
  } else if (const auto* c = rule.as<ChainingRule>()) {
    for (auto k = c->iterations.lo; k <= c->iterations.hi; ++k)
      out.push_back({{"iterations", k}});
  }
  return out;
}

std::vector<Assignment> rule_variants(const Rule& rule, const QueryRepresentation& qr) {
  const auto* m = rule.as<MotifConfigRule>();
  const Entity* target = qr.find_entity(rule.target);
  if (!m || !target || !target->is_motif() || target->motif().kind != MotifKind::Tree)
    return assignments(rule);

  std::vector<Assignment> out;
  for (auto n = std::max<std::int64_t>(m->nodes.lo, 1);
       n <= std::min<std::int64_t>(m->nodes.hi, kMaxTreeNodes); ++n) {
    const auto& trees = enumerate_rooted_trees(static_cast<int>(n));
    for (size_t s = 0; s < trees.size(); ++s) {
      if (m->width && !m->width->contains(trees[s].width)) continue;
      if (m->depth && !m->depth->contains(trees[s].depth)) continue;
      out.push_back({{"nodes", n}, {"shape", static_cast<std::int64_t>(s)}});
    }
  }
  return out;
}

RuleClassification classify_rules(const QueryRepresentation& qr) {
  RuleClassification out;
  for (const auto& r : qr.rules) {
    if (!r.is_structural()) continue;
    bool fixed = true;
    if (const auto* m = r.as<MotifConfigRule>()) {
      fixed = m->nodes.fixed() && (!m->width || m->width->fixed()) &&
              (!m->depth || m->depth->fixed());
      const Entity* t = qr.find_entity(r.target);
      if (fixed && t && t->is_motif() && t->motif().kind == MotifKind::Tree)
        fixed = rule_variants(r, qr).size() == 1;
    } else if (const auto* rep = r.as<RepeatingRule>()) {
      fixed = rep->count.fixed();
    } else if (const auto* c = r.as<ChainingRule>()) {
      fixed = c->iterations.fixed();
    }
    (fixed ? out.fully_specified : out.underspecified).push_back(r.id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

using nlohmann::json;

json range_json(const IntRange& r) { return {{"lo", r.lo}, {"hi", r.hi}}; }

json endpoint_json(const EndpointRef& e) {
  json j{{"entity", e.entity}};
  if (e.port == Port::Head) j["port"] = "head";
  if (e.port == Port::Tail) j["port"] = "tail";
  return j;
}

json predicate_json(const Predicate& p) {
  return {{"attr", p.attr}, {"op", op_name(p.op)}, {"literal", attr_to_json(p.literal)}};
}

template <class T>
T get_field(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw QueryError("missing '" + std::string(key) + "' in " + where);
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw QueryError("bad '" + std::string(key) + "' in " + where);
  }
}

IntRange range_from(const json& j, const std::string& where) {
  if (!j.is_object()) throw QueryError("range expected in " + where);
  return {get_field<std::int64_t>(j, "lo", where), get_field<std::int64_t>(j, "hi", where)};
}

EndpointRef endpoint_from(const json& j, const std::string& where) {
  if (!j.is_object()) throw QueryError("endpoint expected in " + where);
  EndpointRef e{get_field<std::string>(j, "entity", where), Port::None};
  if (auto p = j.find("port"); p != j.end() && !p->is_null()) {
    const auto s = p->get<std::string>();
    if (s == "head")
      e.port = Port::Head;
    else if (s == "tail")
      e.port = Port::Tail;
    else
      throw QueryError("unknown port '" + s + "' in " + where);
  }
  return e;
}

Predicate predicate_from(const json& j, const std::string& where) {
  if (!j.is_object()) throw QueryError("predicate expected in " + where);
  Predicate p;
  p.attr = get_field<std::string>(j, "attr", where);
  auto op = op_from_name(get_field<std::string>(j, "op", where));
  if (!op) throw QueryError("unknown operator in " + where);
  p.op = *op;
  auto lit = j.find("literal");
  if (lit == j.end()) throw QueryError("missing literal in " + where);
  try {
    p.literal = attr_from_json(*lit, where);
  } catch (const GraphError& e) {
    throw QueryError(e.what());
  }
  return p;
}

}  // namespace

json to_json(const QueryRepresentation& qr) {
  json j;
  j["name"] = qr.name;
  j["directed"] = qr.directed ? json(*qr.directed) : json(nullptr);
  auto& ents = j["entities"] = json::array();
  for (const auto& e : qr.entities) {
    json je{{"id", e.id}};
    std::visit(
        [&](const auto& k) {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, NodeEntity>) {
            je["kind"] = "node";
          } else if constexpr (std::is_same_v<T, EdgeEntity>) {
            je["kind"] = "edge";
            je["source"] = endpoint_json(k.source);
            je["target"] = endpoint_json(k.target);
            je["directed"] = k.directed;
          } else if constexpr (std::is_same_v<T, MotifEntity>) {
            je["kind"] = "motif";
            je["motif"] = motif_name(k.kind);
          } else {
            je["kind"] = "custom";
            je["members"] = k.members;
          }
        },
        e.kind);
    ents.push_back(std::move(je));
  }
  auto& rules = j["rules"] = json::array();
  for (const auto& r : qr.rules) {
    json jr{{"id", r.id}, {"target", r.target}};
    std::visit(
        [&](const auto& b) {
          using T = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<T, NodeAttrRule>) {
            jr["type"] = "node_attr";
            jr["predicate"] = predicate_json(b.predicate);
          } else if constexpr (std::is_same_v<T, EdgeAttrRule>) {
            jr["type"] = "edge_attr";
            jr["predicate"] = predicate_json(b.predicate);
          } else if constexpr (std::is_same_v<T, MotifConfigRule>) {
            jr["type"] = "motif_config";
            jr["nodes"] = range_json(b.nodes);
            if (b.width) jr["width"] = range_json(*b.width);
            if (b.depth) jr["depth"] = range_json(*b.depth);
          } else if constexpr (std::is_same_v<T, RepeatingRule>) {
            jr["type"] = "repeating";
            jr["count"] = range_json(b.count);
          } else {
            jr["type"] = "chaining";
            jr["start"] = b.start;
            jr["end"] = b.end;
            jr["iterations"] = range_json(b.iterations);
            jr["mode"] = b.mode == ChainMode::LinkedChain ? "linked" : "shared";
          }
        },
        r.body);
    rules.push_back(std::move(jr));
  }
  return j;
}

QueryRepresentation query_from_json(const json& j) {
  if (!j.is_object()) throw QueryError("query representation must be an object");
  QueryRepresentation qr;
  qr.name = j.value("name", std::string("unnamed"));
  if (auto d = j.find("directed"); d != j.end() && !d->is_null()) {
    if (!d->is_boolean()) throw QueryError("'directed' must be boolean or null");
    qr.directed = d->get<bool>();
  }
  for (const auto& je : j.value("entities", json::array())) {
    const std::string where = "entity " + je.value("id", std::string("?"));
    Entity e;
    e.id = get_field<std::string>(je, "id", where);
    const auto kind = get_field<std::string>(je, "kind", where);
    if (kind == "node") {
      e.kind = NodeEntity{};
    } else if (kind == "edge") {
      e.kind = EdgeEntity{endpoint_from(je.value("source", json()), where),
                          endpoint_from(je.value("target", json()), where),
                          je.value("directed", true)};
    } else if (kind == "motif") {
      auto m = motif_from_name(get_field<std::string>(je, "motif", where));
      if (!m) throw QueryError("unknown motif kind in " + where);
      e.kind = MotifEntity{*m};
    } else if (kind == "custom") {
      e.kind = CustomEntity{get_field<std::vector<std::string>>(je, "members", where)};
    } else {
      throw QueryError("unknown entity kind '" + kind + "' in " + where);
    }
    qr.entities.push_back(std::move(e));
  }
  for (const auto& jr : j.value("rules", json::array())) {
    const std::string where = "rule " + jr.value("id", std::string("?"));
    Rule r;
    r.id = get_field<std::string>(jr, "id", where);
    r.target = get_field<std::string>(jr, "target", where);
    const auto type = get_field<std::string>(jr, "type", where);
    if (type == "node_attr") {
      r.body = NodeAttrRule{predicate_from(jr.value("predicate", json()), where)};
    } else if (type == "edge_attr") {
      r.body = EdgeAttrRule{predicate_from(jr.value("predicate", json()), where)};
    } else if (type == "motif_config") {
      MotifConfigRule m;
      m.nodes = range_from(jr.value("nodes", json()), where);
      if (jr.contains("width")) m.width = range_from(jr["width"], where);
      if (jr.contains("depth")) m.depth = range_from(jr["depth"], where);
      r.body = m;
    } else if (type == "repeating") {
      r.body = RepeatingRule{range_from(jr.value("count", json()), where)};
    } else if (type == "chaining") {
      ChainingRule c;
      c.start = get_field<std::string>(jr, "start", where);
      c.end = get_field<std::string>(jr, "end", where);
      c.iterations = range_from(jr.value("iterations", json()), where);
      const auto mode = get_field<std::string>(jr, "mode", where);
      if (mode == "linked")
        c.mode = ChainMode::LinkedChain;
      else if (mode == "shared")
        c.mode = ChainMode::SharedNode;
      else
        throw QueryError("unknown chaining mode '" + mode + "' in " + where);
      r.body = c;
    } else {
      throw QueryError("unknown rule type '" + type + "' in " + where);
    }
    qr.rules.push_back(std::move(r));
  }
  return qr;
}

}  // namespace qlat
