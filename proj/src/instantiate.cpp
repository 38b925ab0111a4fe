#include "qlat/instantiate.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "qlat/error.hpp"
#include "qlat/motif.hpp"

namespace qlat {

using nlohmann::json;

std::string_view stage_name(StageKind k) {
  switch (k) {
    case StageKind::Backbone: return "backbone";
    case StageKind::Preview: return "preview";
    case StageKind::FsFinal: return "fs-final";
    case StageKind::Combo: return "combo";
  }
  return "?";
}

namespace {

/// Members of a custom target, or the target itself.
std::set<std::string> scope_of(const QueryRepresentation& qr, const std::string& target) {
  const Entity* e = qr.find_entity(target);
  if (!e) throw QueryError("rule target " + target + " is not declared");
  if (e->is_custom()) return {e->custom().members.begin(), e->custom().members.end()};
  return {target};
}

/// Hands out fresh copy numbers per entity.
class CopyAllocator {
 public:
  explicit CopyAllocator(const PatternGraph& p) {
    for (const auto& n : p.nodes) bump(n.origin);
    for (const auto& e : p.edges) bump(e.origin);
  }
  int fresh(const std::string& entity) { return ++max_[entity]; }

 private:
  void bump(const Origin& o) {
    auto [it, fresh] = max_.emplace(o.entity, o.copy);
    if (!fresh) it->second = std::max(it->second, o.copy);
  }
  std::unordered_map<std::string, int> max_;
};

/// One duplication: every (entity, old copy) pair gets one new copy number.
class CopyScope {
 public:
  explicit CopyScope(CopyAllocator& alloc) : alloc_(alloc) {}
  Origin rename(const Origin& o) {
    auto key = o.entity + '\x1f' + std::to_string(o.copy);
    auto it = seen_.find(key);
    if (it == seen_.end()) it = seen_.emplace(key, alloc_.fresh(o.entity)).first;
    return {o.entity, it->second, o.local};
  }

 private:
  CopyAllocator& alloc_;
  std::unordered_map<std::string, int> seen_;
};

void check_size(const PatternGraph& p, std::size_t max_nodes, const std::string& where) {
  if (p.nodes.size() > max_nodes)
    throw CapError(where, static_cast<long long>(p.nodes.size()),
                   where + ": pattern has " + std::to_string(p.nodes.size()) +
                       " nodes, limit is " + std::to_string(max_nodes));
}

int min_nodes_of(const QueryRepresentation& qr, const std::string& motif) {
  const Rule* cfg = qr.motif_config(motif);
  const auto kind = qr.find_entity(motif)->motif().kind;
  return cfg ? static_cast<int>(cfg->as<MotifConfigRule>()->nodes.lo) : motif_min_nodes(kind);
}

struct MotifLayout {
  bool abstract = true;
  int nodes = 0;  // expanded size, or the abstract path's minimum
  int shape = 0;
};

MotifLayout layout_of(const QueryRepresentation& qr, const Entity& m, const RuleChoice& choice) {
  MotifLayout l;
  const Rule* cfg = qr.motif_config(m.id);
  if (cfg) {
    if (auto it = choice.find(cfg->id); it != choice.end()) {
      l.abstract = false;
      l.nodes = static_cast<int>(it->second.at("nodes"));
      if (auto s = it->second.find("shape"); s != it->second.end())
        l.shape = static_cast<int>(s->second);
      return l;
    }
  }
  l.nodes = min_nodes_of(qr, m.id);
  return l;
}

std::string local_node(const std::string& entity, int local) {
  return Origin{entity, 0, std::to_string(local)}.id();
}

void attach_node_preds(PatternGraph& p, const std::string& entity, const Predicate& pred) {
  for (auto& n : p.nodes)
    if (n.origin.entity == entity) merge_into(n.predicates, {pred});
  for (auto& e : p.edges)
    if (e.origin.entity == entity && e.abstraction)
      merge_into(e.abstraction->node_predicates, {pred});
}

void attach_edge_preds(PatternGraph& p, const std::string& entity, const Predicate& pred) {
  for (auto& e : p.edges) {
    if (e.origin.entity != entity) continue;
    if (e.abstraction)
      merge_into(e.abstraction->edge_predicates, {pred});
    else
      merge_into(e.predicates, {pred});
  }
}

}  // namespace

PatternGraph materialize(const QueryRepresentation& qr, bool directed, const RuleChoice& choice) {
  PatternGraph p;
  std::map<std::string, MotifLayout> layouts;

  for (const auto& e : qr.entities) {
    if (e.is_node()) {
      Origin o{e.id, 0, "0"};
      p.nodes.push_back({o.id(), {}, o});
    } else if (e.is_motif()) {
      const MotifKind kind = e.motif().kind;
      const MotifLayout l = layout_of(qr, e, choice);
      layouts[e.id] = l;
      if (!l.abstract) {
        const MotifFragment f = kind == MotifKind::Tree
                                    ? tree_fragment(l.nodes, l.shape)
                                    : expand_motif(kind, l.nodes, directed).front();
        for (int i = 0; i < f.node_count; ++i) {
          Origin o{e.id, 0, std::to_string(i)};
          p.nodes.push_back({o.id(), {}, o});
        }
        for (size_t j = 0; j < f.edges.size(); ++j) {
          Origin o{e.id, 0, "e" + std::to_string(j)};
          p.edges.push_back({o.id(), local_node(e.id, f.edges[j].first),
                             local_node(e.id, f.edges[j].second), directed, {}, o, std::nullopt});
        }
      } else if (kind == MotifKind::Path) {
        Origin head{e.id, 0, "0"};
        Origin tail{e.id, 0, std::to_string(l.nodes - 1)};
        p.nodes.push_back({head.id(), {}, head});
        p.nodes.push_back({tail.id(), {}, tail});
        Origin marker{e.id, 0, "abs"};
        p.edges.push_back({marker.id(), head.id(), tail.id(), directed, {}, marker,
                           PathAbstraction{e.id, l.nodes, {}, {}}});
      } else {
        Origin rep{e.id, 0, "0"};
        p.nodes.push_back({rep.id(), {}, rep});
      }
    }
  }

  auto endpoint = [&](const EndpointRef& ref) {
    const Entity* t = qr.find_entity(ref.entity);
    if (!t) throw QueryError("edge endpoint " + ref.entity + " is not declared");
    if (t->is_motif() && ref.port == Port::Tail) return local_node(t->id, layouts[t->id].nodes - 1);
    return local_node(t->id, 0);
  };
  for (const auto& e : qr.entities) {
    if (!e.is_edge()) continue;
    Origin o{e.id, 0, "0"};
    p.edges.push_back({o.id(), endpoint(e.edge().source), endpoint(e.edge().target),
                       e.edge().directed, {}, o, std::nullopt});
  }

  for (const auto& r : qr.rules) {
    const auto* na = r.as<NodeAttrRule>();
    const auto* ea = r.as<EdgeAttrRule>();
    if (!na && !ea) continue;
    for (const auto& ent : scope_of(qr, r.target)) {
      if (na) attach_node_preds(p, ent, na->predicate);
      if (ea) attach_edge_preds(p, ent, ea->predicate);
    }
  }

  for (bool custom_pass : {false, true}) {
    for (const auto& r : qr.rules) {
      auto it = choice.find(r.id);
      if (it == choice.end()) continue;
      if (qr.find_entity(r.target)->is_custom() != custom_pass) continue;
      if (r.as<RepeatingRule>())
        p = apply_repeating(p, qr, r, it->second.at("count"));
      else if (r.as<ChainingRule>())
        p = apply_chaining(p, qr, r, it->second.at("iterations"), directed);
    }
  }
  return p;
}

PatternGraph build_backbone(const QueryRepresentation& qr, bool directed) {
  return materialize(qr, effective_directed(qr, directed), {});
}

PatternGraph apply_repeating(const PatternGraph& p, const QueryRepresentation& qr,
                             const Rule& rule, std::int64_t k) {
  if (!rule.as<RepeatingRule>()) throw QueryError("rule " + rule.id + " is not a repeating rule");
  const Entity* target = qr.find_entity(rule.target);
  if (!target) throw QueryError("rule target " + rule.target + " is not declared");
  const auto scope = scope_of(qr, rule.target);
  PatternGraph out = p;
  CopyAllocator alloc(p);

  if (target->is_edge()) {
    std::vector<PatternEdge> originals;
    for (const auto& e : p.edges)
      if (e.origin.entity == target->id) originals.push_back(e);
    if (originals.empty() && k > 0)
      throw QueryError("repeating rule " + rule.id + ": " + rule.target + " is not in the pattern");
    for (std::int64_t i = 0; i < k; ++i) {
      CopyScope copy(alloc);
      for (auto e : originals) {
        e.origin = copy.rename(e.origin);
        e.id = e.origin.id();
        out.edges.push_back(std::move(e));
      }
    }
    return out;
  }

  std::unordered_set<std::string> group;
  for (const auto& n : p.nodes)
    if (scope.count(n.origin.entity)) group.insert(n.id);
  if (group.empty() && k > 0)
    throw QueryError("repeating rule " + rule.id + ": " + rule.target + " is not in the pattern");
  for (std::int64_t i = 0; i < k; ++i) {
    CopyScope copy(alloc);
    std::unordered_map<std::string, std::string> renamed;
    for (const auto& n : p.nodes) {
      if (!group.count(n.id)) continue;
      PatternNode c = n;
      c.origin = copy.rename(n.origin);
      c.id = c.origin.id();
      renamed[n.id] = c.id;
      out.nodes.push_back(std::move(c));
    }
    auto image = [&](const std::string& id) {
      auto it = renamed.find(id);
      return it == renamed.end() ? id : it->second;
    };
    for (const auto& e : p.edges) {
      if (!scope.count(e.origin.entity) && !group.count(e.source) && !group.count(e.target))
        continue;
      PatternEdge c = e;
      c.origin = copy.rename(e.origin);
      c.id = c.origin.id();
      c.source = image(e.source);
      c.target = image(e.target);
      out.edges.push_back(std::move(c));
    }
  }
  return out;
}

PatternGraph apply_chaining(const PatternGraph& p, const QueryRepresentation& qr,
                            const Rule& rule, std::int64_t k, bool directed) {
  const auto* chain = rule.as<ChainingRule>();
  if (!chain) throw QueryError("rule " + rule.id + " is not a chaining rule");
  const auto scope = scope_of(qr, rule.target);
  if (k == 0) return p;

  std::vector<const PatternNode*> group;
  std::unordered_set<std::string> in_group;
  const PatternNode* start = nullptr;
  const PatternNode* end = nullptr;
  for (const auto& n : p.nodes) {
    if (!scope.count(n.origin.entity)) continue;
    group.push_back(&n);
    in_group.insert(n.id);
    if (!start && n.origin.entity == chain->start) start = &n;
    if (!end && n.origin.entity == chain->end) end = &n;
  }
  if (!start || !end)
    throw QueryError("chaining rule " + rule.id + ": start or end node is not in the pattern");
  const bool shared = chain->mode == ChainMode::SharedNode;
  // Merging a single node onto itself adds nothing.
  if (shared && start == end) return p;

  std::vector<const PatternEdge*> internal;
  for (const auto& e : p.edges)
    if (scope.count(e.origin.entity) && in_group.count(e.source) && in_group.count(e.target))
      internal.push_back(&e);

  PatternGraph out = p;
  CopyAllocator alloc(p);
  std::string prev_end = end->id;
  for (std::int64_t i = 1; i <= k; ++i) {
    CopyScope copy(alloc);
    std::unordered_map<std::string, std::string> renamed;
    for (const PatternNode* n : group) {
      if (shared && n == start) {
        renamed[n->id] = prev_end;
        merge_into(out.find_node(prev_end)->predicates, n->predicates);
        continue;
      }
      PatternNode c = *n;
      c.origin = copy.rename(n->origin);
      c.id = c.origin.id();
      renamed[n->id] = c.id;
      out.nodes.push_back(std::move(c));
    }
    for (const PatternEdge* e : internal) {
      PatternEdge c = *e;
      c.origin = copy.rename(e->origin);
      c.id = c.origin.id();
      c.source = renamed.at(e->source);
      c.target = renamed.at(e->target);
      out.edges.push_back(std::move(c));
    }
    if (!shared) {
      Origin o{rule.target, static_cast<int>(i), "link"};
      out.edges.push_back({o.id(), prev_end, renamed.at(start->id), directed, {}, o, std::nullopt});
    }
    prev_end = renamed.at(end->id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lattice

const QueryInstance* InstantiationLattice::find(std::string_view id) const {
  if (index_.size() != instances.size()) reindex();
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &instances[it->second];
}

const QueryInstance& InstantiationLattice::at(std::string_view id) const {
  const QueryInstance* q = find(id);
  if (!q) throw QueryError("unknown instance " + std::string(id));
  return *q;
}

void InstantiationLattice::reindex() const {
  index_.clear();
  for (size_t i = 0; i < instances.size(); ++i) index_.emplace(instances[i].id, i);
}

const ComboCell* InstantiationLattice::find_cell(std::string_view id) const {
  for (const auto& layer : layers)
    for (const auto& c : layer)
      if (c.id == id) return &c;
  return nullptr;
}

std::size_t InstantiationLattice::combo_instance_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers)
    for (const auto& c : layer) n += c.instances.size();
  return n;
}

std::vector<std::string> InstantiationLattice::resolve_step(std::string_view ref) const {
  if (ref == "backbone") return {backbone};
  if (ref == "fs-final") return {fs_final};
  if (ref == "final") return layers.empty() ? std::vector{fs_final} : layers.back().front().instances;
  if (ref.substr(0, 8) == "preview:") {
    const std::string id(ref);
    if (std::find(previews.begin(), previews.end(), id) != previews.end()) return {id};
    throw QueryError("unknown step " + id);
  }
  if (ref.size() >= 2 && ref[0] == 'L' &&
      ref.find(':') == std::string_view::npos) {
    const std::string digits(ref.substr(1));
    if (!digits.empty() && std::all_of(digits.begin(), digits.end(), ::isdigit)) {
      const auto k = std::stoul(digits);
      if (k >= 1 && k <= layers.size()) {
        std::vector<std::string> ids;
        for (const auto& c : layers[k - 1])
          ids.insert(ids.end(), c.instances.begin(), c.instances.end());
        return ids;
      }
    }
  }
  if (const ComboCell* c = find_cell(ref)) return c->instances;
  if (find(ref)) return {std::string(ref)};
  throw QueryError("unknown step " + std::string(ref));
}

namespace {

std::string join(const std::vector<std::string>& v, char sep) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += v[i];
  }
  return s;
}

/// All k-subsets of 0..n-1 in lexicographic order.
std::vector<std::vector<int>> combinations(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> c(k);
  for (int i = 0; i < k; ++i) c[i] = i;
  while (true) {
    out.push_back(c);
    int i = k - 1;
    while (i >= 0 && c[i] == n - k + i) --i;
    if (i < 0) break;
    ++c[i];
    for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  }
  return out;
}

struct Indexed {
  std::unordered_map<std::string, const PatternNode*> nodes;
  std::unordered_map<std::string, const PatternEdge*> edges;
  explicit Indexed(const PatternGraph& p) {
    for (const auto& n : p.nodes) nodes.emplace(n.id, &n);
    for (const auto& e : p.edges) edges.emplace(e.id, &e);
  }
};

bool edge_fits(const PatternEdge& a, const PatternEdge& b, const std::string& s,
               const std::string& t) {
  if (a.directed != b.directed || a.abstraction || b.abstraction) return false;
  const bool ends = a.directed ? (b.source == s && b.target == t)
                               : ((b.source == s && b.target == t) ||
                                  (b.source == t && b.target == s));
  return ends && is_subset(a.predicates, b.predicates);
}

}  // namespace

bool verify_witness(const PatternGraph& from, const PatternGraph& to, const Witness& w) {
  const Indexed target(to);
  std::unordered_set<std::string> used;
  if (w.nodes.size() != from.nodes.size() || w.edges.size() != from.edges.size()) return false;
  for (const auto& n : from.nodes) {
    auto it = w.nodes.find(n.id);
    if (it == w.nodes.end()) return false;
    auto img = target.nodes.find(it->second);
    if (img == target.nodes.end() || !used.insert(it->second).second) return false;
    if (!is_subset(n.predicates, img->second->predicates)) return false;
  }
  used.clear();
  for (const auto& e : from.edges) {
    auto it = w.edges.find(e.id);
    if (it == w.edges.end()) return false;
    auto img = target.edges.find(it->second);
    if (img == target.edges.end() || !used.insert(it->second).second) return false;
    if (!edge_fits(e, *img->second, w.nodes.at(e.source), w.nodes.at(e.target))) return false;
  }
  return true;
}

namespace {

/// Lookup tables over a target pattern, reused across witness attempts.
struct TargetIndex {
  Indexed idx;
  // Edges between each ordered node pair, for greedy assignment.
  std::map<std::pair<std::string, std::string>, std::vector<const PatternEdge*>> between;
  explicit TargetIndex(const PatternGraph& to) : idx(to) {
    for (const auto& e : to.edges) {
      between[{e.source, e.target}].push_back(&e);
      if (!e.directed && e.source != e.target) between[{e.target, e.source}].push_back(&e);
    }
  }
};

std::optional<Witness> extend_indexed(const PatternGraph& from, const TargetIndex& target,
                                      const std::map<std::string, std::string>& nodes) {
  std::unordered_set<std::string> image;
  for (const auto& n : from.nodes) {
    auto it = nodes.find(n.id);
    if (it == nodes.end() || !image.insert(it->second).second) return std::nullopt;
    auto img = target.idx.nodes.find(it->second);
    if (img == target.idx.nodes.end() || !is_subset(n.predicates, img->second->predicates))
      return std::nullopt;
  }
  Witness w;
  w.nodes = nodes;
  std::unordered_set<std::string> used;
  for (const auto& e : from.edges) {
    const std::string& s = nodes.at(e.source);
    const std::string& t = nodes.at(e.target);
    auto it = target.between.find({s, t});
    if (it == target.between.end()) return std::nullopt;
    const PatternEdge* pick = nullptr;
    for (const PatternEdge* c : it->second) {
      if (used.count(c->id) || !edge_fits(e, *c, s, t)) continue;
      if (c->id == e.id) {
        pick = c;
        break;
      }
      if (!pick) pick = c;
    }
    if (!pick) return std::nullopt;
    used.insert(pick->id);
    w.edges[e.id] = pick->id;
  }
  return w;
}

}  // namespace

std::optional<Witness> extend_witness(const PatternGraph& from, const PatternGraph& to,
                                      const std::map<std::string, std::string>& nodes) {
  return extend_indexed(from, TargetIndex(to), nodes);
}

namespace {

struct Builder {
  const QueryRepresentation& qr;
  const LatticeOptions& opts;
  bool directed;
  InstantiationLattice& out;
  std::deque<PatternGraph> executable;  // concretized patterns, parallel to out.instances
  std::deque<std::optional<TargetIndex>> indexes;
  std::unordered_map<std::string, size_t> position;

  QueryInstance make(std::string id, Stage stage, const RuleChoice& choice) {
    QueryInstance inst;
    inst.id = std::move(id);
    inst.stage = std::move(stage);
    inst.assignment = choice;
    inst.pattern = materialize(qr, directed, choice);
    check_size(inst.pattern, opts.max_pattern_nodes, inst.id);
    return inst;
  }

  void add(QueryInstance inst) {
    executable.push_back(concretize(inst.pattern));
    indexes.emplace_back();
    position.emplace(inst.id, out.instances.size());
    out.instances.push_back(std::move(inst));
  }

  size_t index_of(const std::string& id) const {
    auto it = position.find(id);
    if (it == position.end()) throw QueryError("unknown instance " + id);
    return it->second;
  }

  /// Motif size in an instance, as executed.
  struct Shape {
    bool abstract;
    int nodes;
    int shape;
  };
  Shape shape_of(const QueryInstance& inst, const Entity& m) const {
    const MotifLayout l = layout_of(qr, m, inst.assignment);
    return {l.abstract, l.nodes, l.shape};
  }

  /// Local-index remappings to try for each motif whose size differs.
  std::vector<std::map<std::string, std::string>> candidate_maps(size_t a, size_t b) const {
    const QueryInstance& ia = out.instances[a];
    const QueryInstance& ib = out.instances[b];
    using LocalMap = std::vector<int>;
    std::vector<std::pair<std::string, std::vector<LocalMap>>> options;
    for (const auto& e : qr.entities) {
      if (!e.is_motif()) continue;
      const MotifKind kind = e.motif().kind;
      const Shape sa = shape_of(ia, e);
      const Shape sb = shape_of(ib, e);
      const bool a_rep_only = sa.abstract && kind != MotifKind::Path;
      const bool b_rep_only = sb.abstract && kind != MotifKind::Path;
      if (a_rep_only) continue;  // representative 0 maps to 0
      if (b_rep_only) return {};
      if (sa.nodes == sb.nodes && sa.shape == sb.shape) continue;
      std::vector<LocalMap> opts_for;
      LocalMap identity(static_cast<size_t>(sa.nodes));
      for (int i = 0; i < sa.nodes; ++i) identity[i] = i;
      if (kind == MotifKind::Tree) {
        auto phi = embed_rooted_tree(enumerate_rooted_trees(sa.nodes).at(sa.shape),
                                     enumerate_rooted_trees(sb.nodes).at(sb.shape));
        if (!phi) return {};
        opts_for.push_back(*phi);
      } else {
        opts_for.push_back(identity);
        if (kind == MotifKind::Path && sb.nodes > sa.nodes) {
          LocalMap shifted = identity;
          for (auto& v : shifted) v += sb.nodes - sa.nodes;
          opts_for.push_back(shifted);
        }
      }
      options.emplace_back(e.id, std::move(opts_for));
    }

    std::vector<std::map<std::string, std::string>> maps;
    std::vector<size_t> pick(options.size(), 0);
    while (true) {
      std::map<std::string, std::string> m;
      for (const auto& n : executable[a].nodes) {
        std::string img = n.id;
        for (size_t o = 0; o < options.size(); ++o) {
          if (n.origin.entity != options[o].first) continue;
          const LocalMap& lm = options[o].second[pick[o]];
          const int local = std::stoi(n.origin.local);
          if (local >= 0 && local < static_cast<int>(lm.size()))
            img = Origin{n.origin.entity, n.origin.copy, std::to_string(lm[local])}.id();
        }
        m.emplace(n.id, std::move(img));
      }
      maps.push_back(std::move(m));
      size_t o = 0;
      while (o < options.size() && ++pick[o] == options[o].second.size()) pick[o++] = 0;
      if (o == options.size()) break;
    }
    return maps;
  }

  void try_witness(size_t a, size_t b) {
    if (a == b) return;
    for (const auto& m : candidate_maps(a, b)) {
      if (!indexes[b]) indexes[b].emplace(executable[b]);
      if (auto w = extend_indexed(executable[a], *indexes[b], m)) {
        w->from = out.instances[a].id;
        w->to = out.instances[b].id;
        out.witnesses.push_back(std::move(*w));
        return;
      }
    }
  }
};

}  // namespace

FullySpecified instantiate_fully_specified(const QueryRepresentation& qr,
                                           const LatticeOptions& opts) {
  const auto diags = validate(qr);
  if (has_errors(diags)) throw QueryError("query is invalid: " + diags.front().message);
  const bool directed = effective_directed(qr, opts.default_directed);
  const auto classes = classify_rules(qr);
  FullySpecified fs;
  RuleChoice all;
  for (const auto& rid : classes.fully_specified) {
    const Rule& r = *qr.find_rule(rid);
    const auto variants = rule_variants(r, qr);
    if (variants.empty()) throw QueryError("rule " + rid + " admits no parameter choice");
    RuleChoice one{{rid, variants.front()}};
    all.emplace(rid, variants.front());
    QueryInstance inst;
    inst.id = "preview:" + rid;
    inst.stage = Stage{StageKind::Preview, rid, 0, {}};
    inst.assignment = one;
    inst.pattern = materialize(qr, directed, one);
    check_size(inst.pattern, opts.max_pattern_nodes, inst.id);
    fs.previews.push_back(std::move(inst));
  }
  fs.final.id = "fs-final";
  fs.final.stage = Stage{StageKind::FsFinal, "", 0, {}};
  fs.final.assignment = all;
  fs.final.pattern = materialize(qr, directed, all);
  check_size(fs.final.pattern, opts.max_pattern_nodes, fs.final.id);
  return fs;
}

InstantiationLattice build_lattice(const QueryRepresentation& qr, const LatticeOptions& opts) {
  InstantiationLattice lat;
  lat.query = qr;
  lat.directed = effective_directed(qr, opts.default_directed);
  Builder b{qr, opts, lat.directed, lat, {}, {}, {}};

  auto fs = instantiate_fully_specified(qr, opts);
  const auto classes = classify_rules(qr);
  lat.underspecified = classes.underspecified;

  b.add(b.make("backbone", Stage{StageKind::Backbone, "", 0, {}}, {}));
  lat.backbone = "backbone";
  for (auto& p : fs.previews) {
    lat.previews.push_back(p.id);
    b.add(std::move(p));
  }
  const RuleChoice fs_choice = fs.final.assignment;
  b.add(std::move(fs.final));
  lat.fs_final = "fs-final";

  const int n = static_cast<int>(classes.underspecified.size());
  std::vector<std::vector<Assignment>> variants;
  for (const auto& rid : classes.underspecified) {
    variants.push_back(rule_variants(*qr.find_rule(rid), qr));
    if (variants.back().empty()) throw QueryError("rule " + rid + " admits no parameter choice");
  }

  // Cell lookup by subset mask, for flows and cross-layer witnesses.
  std::map<unsigned, std::pair<int, int>> cell_at;  // mask -> (layer index, cell index)
  std::size_t total = 0;
  for (int k = 1; k <= n; ++k) {
    std::vector<ComboCell> layer;
    for (const auto& combo : combinations(n, k)) {
      ComboCell cell;
      cell.layer = k;
      unsigned mask = 0;
      std::size_t count = 1;
      for (int idx : combo) {
        cell.rules.push_back(classes.underspecified[idx]);
        mask |= 1u << idx;
        count *= variants[idx].size();
      }
      cell.id = "L" + std::to_string(k) + ":" + join(cell.rules, ',');
      total += count;
      if (total > opts.max_instances)
        throw CapError(cell.id, static_cast<long long>(count),
                       "cell " + cell.id + " needs " + std::to_string(count) +
                           " instances, exceeding the limit of " +
                           std::to_string(opts.max_instances) + " in total");
      std::vector<size_t> digit(combo.size(), 0);
      for (std::size_t i = 0; i < count; ++i) {
        RuleChoice choice = fs_choice;
        for (int u = 0; u < n; ++u) choice[classes.underspecified[u]] = variants[u].front();
        for (size_t d = 0; d < combo.size(); ++d)
          choice[classes.underspecified[combo[d]]] = variants[combo[d]][digit[d]];
        std::string id = cell.id + ":" + std::to_string(i);
        b.add(b.make(id, Stage{StageKind::Combo, "", k, cell.rules}, choice));
        cell.instances.push_back(std::move(id));
        for (size_t d = combo.size(); d-- > 0;) {
          if (++digit[d] < variants[combo[d]].size()) break;
          digit[d] = 0;
        }
      }
      cell_at[mask] = {k - 1, static_cast<int>(layer.size())};
      layer.push_back(std::move(cell));
    }
    lat.layers.push_back(std::move(layer));
  }

  for (const auto& [mask, pos] : cell_at) {
    for (int r = 0; r < n; ++r) {
      if (mask & (1u << r)) continue;
      auto up = cell_at.find(mask | (1u << r));
      if (up == cell_at.end()) continue;
      lat.flows.push_back({lat.layers[pos.first][pos.second].id,
                           lat.layers[up->second.first][up->second.second].id});
    }
  }
  std::sort(lat.flows.begin(), lat.flows.end(), [&](const Flow& x, const Flow& y) {
    auto key = [&](const Flow& f) {
      const ComboCell* a = lat.find_cell(f.from);
      const ComboCell* c = lat.find_cell(f.to);
      return std::make_tuple(a->layer, b.index_of(a->instances.front()),
                             b.index_of(c->instances.front()));
    };
    return key(x) < key(y);
  });

  if (!opts.witnesses) return lat;

  const size_t backbone = b.index_of(lat.backbone);
  const size_t final_idx = b.index_of(lat.fs_final);
  for (const auto& p : lat.previews) {
    b.try_witness(backbone, b.index_of(p));
    b.try_witness(b.index_of(p), final_idx);
  }
  b.try_witness(backbone, final_idx);
  if (!lat.layers.empty())
    for (const auto& c : lat.layers.front())
      for (const auto& id : c.instances) b.try_witness(final_idx, b.index_of(id));

  for (const auto& [mask, pos] : cell_at) {
    const ComboCell& cell = lat.layers[pos.first][pos.second];
    std::vector<int> members;
    for (int r = 0; r < n; ++r)
      if (mask & (1u << r)) members.push_back(r);
    // Mixed-radix strides over the cell's rules, first rule most significant.
    std::vector<size_t> stride(members.size(), 1);
    for (size_t d = members.size(); d-- > 1;)
      stride[d - 1] = stride[d] * variants[members[d]].size();
    const size_t first = b.index_of(cell.instances.front());
    for (size_t i = 0; i < cell.instances.size(); ++i) {
      for (size_t d = 0; d < members.size(); ++d) {
        const size_t digit = (i / stride[d]) % variants[members[d]].size();
        if (digit + 1 < variants[members[d]].size()) b.try_witness(first + i, first + i + stride[d]);
      }
      for (int r = 0; r < n; ++r) {
        if (mask & (1u << r)) continue;
        auto up = cell_at.find(mask | (1u << r));
        if (up == cell_at.end()) continue;
        const ComboCell& upper = lat.layers[up->second.first][up->second.second];
        // Index in the superset cell with rule r at its first variant.
        size_t j = 0;
        size_t di = 0;
        for (int u = 0; u < n; ++u) {
          if (!(mask & (1u << u)) && u != r) continue;
          const size_t digit =
              u == r ? 0 : (i / stride[di]) % variants[members[di]].size();
          if (u != r) ++di;
          j = j * variants[u].size() + digit;
        }
        b.try_witness(first + i, b.index_of(upper.instances[j]));
      }
    }
  }
  return lat;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json assignment_json(const RuleChoice& c) {
  json j = json::object();
  for (const auto& [rid, a] : c) {
    json ja = json::object();
    for (const auto& [k, v] : a) ja[k] = v;
    j[rid] = std::move(ja);
  }
  return j;
}

json stage_json(const Stage& s) {
  json j{{"kind", stage_name(s.kind)}};
  if (s.kind == StageKind::Preview) j["rule"] = s.rule;
  if (s.kind == StageKind::Combo) {
    j["layer"] = s.layer;
    j["rules"] = s.rules;
  }
  return j;
}

}  // namespace

json to_json(const QueryInstance& inst) {
  return {{"id", inst.id},
          {"stage", stage_json(inst.stage)},
          {"assignment", assignment_json(inst.assignment)},
          {"pattern", to_json(inst.pattern)}};
}

namespace {

json cells_json(const InstantiationLattice& lat, bool with_instances) {
  json layers = json::array();
  for (const auto& layer : lat.layers) {
    json jl = json::array();
    for (const auto& c : layer) {
      json jc{{"id", c.id}, {"layer", c.layer}, {"rules", c.rules}, {"size", c.instances.size()}};
      if (with_instances) jc["instances"] = c.instances;
      jl.push_back(std::move(jc));
    }
    layers.push_back(std::move(jl));
  }
  return layers;
}

json flows_json(const InstantiationLattice& lat) {
  json flows = json::array();
  for (const auto& f : lat.flows) flows.push_back({{"from", f.from}, {"to", f.to}});
  return flows;
}

}  // namespace

json to_json(const InstantiationLattice& lat) {
  json j;
  j["query"] = to_json(lat.query);
  j["directed"] = lat.directed;
  j["underspecified"] = lat.underspecified;
  j["backbone"] = lat.backbone;
  j["previews"] = lat.previews;
  j["fs_final"] = lat.fs_final;
  j["layers"] = cells_json(lat, true);
  j["flows"] = flows_json(lat);
  json insts = json::array();
  for (const auto& i : lat.instances) insts.push_back(to_json(i));
  j["instances"] = std::move(insts);
  json ws = json::array();
  for (const auto& w : lat.witnesses)
    ws.push_back({{"from", w.from}, {"to", w.to}, {"nodes", w.nodes}, {"edges", w.edges}});
  j["witnesses"] = std::move(ws);
  return j;
}

json lattice_summary(const InstantiationLattice& lat) {
  json j;
  j["directed"] = lat.directed;
  j["underspecified"] = lat.underspecified;
  j["backbone"] = lat.backbone;
  j["previews"] = lat.previews;
  j["fs_final"] = lat.fs_final;
  j["layers"] = cells_json(lat, false);
  json sizes = json::array();
  for (const auto& layer : lat.layers) sizes.push_back(layer.size());
  j["layer_sizes"] = std::move(sizes);
  j["flows"] = flows_json(lat);
  j["instance_count"] = lat.instances.size();
  j["witness_count"] = lat.witnesses.size();
  return j;
}

}  // namespace qlat
