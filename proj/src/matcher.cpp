#include "qlat/matcher.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <tuple>
#include <unordered_map>

#include "qlat/error.hpp"

namespace qlat {

namespace {

using Clock = std::chrono::steady_clock;

struct PatternIndex {
  std::vector<const PatternNode*> nodes;
  std::vector<const PatternEdge*> edges;
  std::vector<std::pair<int, int>> ends;
  std::vector<Degree> degree;
  /// Classes of interchangeable nodes: every transposition inside a class is
  /// a pattern automorphism. Members are listed in index order.
  std::vector<std::vector<int>> twins;
  std::vector<int> twin_class;  // node -> class index, -1 when alone
};

/// Edges from a to b (orientation-aware), ordered by predicates then index.
std::vector<int> edges_from_to(const PatternIndex& ix, int a, int b) {
  std::vector<int> out;
  for (size_t e = 0; e < ix.ends.size(); ++e) {
    const auto [s, t] = ix.ends[e];
    if ((s == a && t == b) || (!ix.edges[e]->directed && s == b && t == a))
      out.push_back(static_cast<int>(e));
  }
  std::sort(out.begin(), out.end(), [&](int x, int y) {
    return std::tie(ix.edges[x]->predicates, x) < std::tie(ix.edges[y]->predicates, y);
  });
  return out;
}

bool same_edge_preds(const PatternIndex& ix, const std::vector<int>& x, const std::vector<int>& y) {
  if (x.size() != y.size()) return false;
  for (size_t i = 0; i < x.size(); ++i)
    if (ix.edges[x[i]]->predicates != ix.edges[y[i]]->predicates) return false;
  return true;
}

/// True when exchanging u and v maps the pattern onto itself.
bool swappable(const PatternIndex& ix, int u, int v) {
  if (ix.nodes[u]->predicates != ix.nodes[v]->predicates) return false;
  auto swap = [&](int x) { return x == u ? v : x == v ? u : x; };
  const int n = static_cast<int>(ix.nodes.size());
  for (int a : {u, v})
    for (int b = 0; b < n; ++b) {
      if (!same_edge_preds(ix, edges_from_to(ix, a, b), edges_from_to(ix, swap(a), swap(b))))
        return false;
      if (!same_edge_preds(ix, edges_from_to(ix, b, a), edges_from_to(ix, swap(b), swap(a))))
        return false;
    }
  return true;
}

constexpr int kMaxTwinScan = 128;

void find_twins(PatternIndex& ix) {
  const int n = static_cast<int>(ix.nodes.size());
  ix.twin_class.assign(n, -1);
  if (n > kMaxTwinScan) return;
  // Cheap signature to avoid quadratic checks between obviously different nodes.
  auto sig = [&](int v) {
    return std::make_tuple(ix.degree[v].in, ix.degree[v].out, ix.degree[v].total);
  };
  for (int u = 0; u < n; ++u) {
    if (ix.twin_class[u] >= 0) continue;
    std::vector<int> cls{u};
    for (int v = u + 1; v < n; ++v) {
      if (ix.twin_class[v] >= 0 || sig(v) != sig(u)) continue;
      bool ok = true;
      for (int w : cls) ok = ok && swappable(ix, w, v);
      if (ok) cls.push_back(v);
    }
    if (cls.size() < 2) continue;
    for (int w : cls) ix.twin_class[w] = static_cast<int>(ix.twins.size());
    ix.twins.push_back(std::move(cls));
  }
}

PatternIndex index_pattern(const PatternGraph& p) {
  PatternIndex ix;
  std::unordered_map<std::string, int> pos;
  for (const auto& n : p.nodes) {
    pos.emplace(n.id, static_cast<int>(ix.nodes.size()));
    ix.nodes.push_back(&n);
  }
  ix.degree.resize(ix.nodes.size());
  for (const auto& e : p.edges) {
    auto s = pos.find(e.source);
    auto t = pos.find(e.target);
    if (s == pos.end() || t == pos.end())
      throw QueryError("pattern edge " + e.id + " has a missing endpoint");
    ix.edges.push_back(&e);
    ix.ends.emplace_back(s->second, t->second);
    if (e.directed) {
      ++ix.degree[s->second].out;
      ++ix.degree[t->second].in;
      ++ix.degree[s->second].total;
      ++ix.degree[t->second].total;
    } else {
      for (int v : {s->second, t->second}) {
        ++ix.degree[v].in;
        ++ix.degree[v].out;
        ++ix.degree[v].total;
      }
    }
  }
  find_twins(ix);
  return ix;
}

bool edge_satisfies(const PredicateSet& preds, const GraphEdge& e) {
  for (const auto& p : preds) {
    if (p.attr == "label" && e.label && !e.attrs.count("label")) {
      if (!satisfies(p, AttrMap{{"label", AttrValue(*e.label)}})) return false;
    } else if (!satisfies(p, e.attrs)) {
      return false;
    }
  }
  return true;
}

class Search {
 public:
  Search(const PatternIndex& p, const PropertyGraph& g, const MatchOptions& opts,
         MatchOutcome& out)
      : p_(p), g_(g), opts_(opts), out_(out) {
    if (opts.time_budget) deadline_ = Clock::now() + *opts.time_budget;
  }

  void run() {
    const size_t np = p_.nodes.size();
    cand_.resize(np);
    for (size_t v = 0; v < np; ++v) {
      const Degree& need = p_.degree[v];
      for (NodeIndex d = 0; d < g_.node_count(); ++d) {
        const Degree& have = g_.degree(d);
        if (have.in < need.in || have.out < need.out || have.total < need.total) continue;
        if (!satisfies_all(p_.nodes[v]->predicates, g_.nodes()[d].attrs)) continue;
        cand_[v].push_back(d);
      }
      if (cand_[v].empty()) return;  // complete with zero results
    }
    edge_ok_.assign(p_.edges.size(), {});
    for (size_t e = 0; e < p_.edges.size(); ++e) {
      edge_ok_[e].resize(g_.edge_count());
      for (EdgeIndex d = 0; d < g_.edge_count(); ++d)
        edge_ok_[e][d] = edge_satisfies(p_.edges[e]->predicates, g_.edges()[d]);
    }
    plan();
    if (!p_.twins.empty()) {
      for (size_t e = 0; e < p_.ends.size(); ++e) {
        const auto key = p_.ends[e];
        if (!pair_edges_.count(key)) pair_edges_[key] = edges_from_to(p_, key.first, key.second);
      }
      // Images under a permutation need the reverse orientation listed too.
      for (int a = 0; a < static_cast<int>(np); ++a)
        for (int b = 0; b < static_cast<int>(np); ++b)
          if ((p_.twin_class[a] >= 0 || p_.twin_class[b] >= 0) && !pair_edges_.count({a, b}))
            if (auto l = edges_from_to(p_, a, b); !l.empty()) pair_edges_[{a, b}] = std::move(l);
    }
    img_.assign(np, -1);
    edge_img_.assign(p_.edges.size(), -1);
    used_node_.assign(g_.node_count(), 0);
    used_edge_.assign(g_.edge_count(), 0);
    extend(0);
  }

 private:
  /// Smallest candidate set first, then neighbours of placed nodes by
  /// candidate count; ties by pattern id.
  void plan() {
    const size_t np = p_.nodes.size();
    std::vector<std::vector<int>> adj(np);
    nbrs_.assign(np, {});
    for (size_t e = 0; e < p_.ends.size(); ++e) {
      const auto [s, t] = p_.ends[e];
      adj[s].push_back(t);
      adj[t].push_back(s);
      if (s == t) continue;
      nbrs_[s].emplace_back(t, true);
      nbrs_[t].emplace_back(s, false);
    }
    std::vector<char> placed(np, 0), touched(np, 0);
    auto better = [&](int a, int b) {
      if (cand_[a].size() != cand_[b].size()) return cand_[a].size() < cand_[b].size();
      return p_.nodes[a]->id < p_.nodes[b]->id;
    };
    for (size_t step = 0; step < np; ++step) {
      int pick = -1;
      for (size_t v = 0; v < np; ++v)
        if (!placed[v] && touched[v] && (pick < 0 || better(static_cast<int>(v), pick)))
          pick = static_cast<int>(v);
      if (pick < 0)
        for (size_t v = 0; v < np; ++v)
          if (!placed[v] && (pick < 0 || better(static_cast<int>(v), pick)))
            pick = static_cast<int>(v);
      placed[pick] = 1;
      for (int w : adj[pick]) touched[w] = 1;
      order_.push_back(pick);
    }
    std::vector<int> depth_of(np);
    for (size_t d = 0; d < np; ++d) depth_of[order_[d]] = static_cast<int>(d);
    closing_.assign(np, {});
    for (size_t e = 0; e < p_.ends.size(); ++e) {
      const auto [s, t] = p_.ends[e];
      closing_[std::max(depth_of[s], depth_of[t])].push_back(static_cast<int>(e));
    }
  }

  bool out_of_time() {
    if (!deadline_ || (++ticks_ & 1023) != 0) return false;
    return Clock::now() > *deadline_;
  }

  void extend(size_t depth) {
    if (stop_) return;
    if (out_of_time()) {
      out_.complete = false;
      stop_ = true;
      return;
    }
    if (depth == order_.size()) {
      emit();
      return;
    }
    const int v = order_[depth];
    for (NodeIndex d : cand_[v]) {
      if (used_node_[d] || !twin_order_ok(v, static_cast<int>(d))) continue;
      used_node_[d] = 1;
      img_[v] = static_cast<int>(d);
      if (neighbours_viable(v)) assign_edges(depth, 0);
      img_[v] = -1;
      used_node_[d] = 0;
      if (stop_) return;
    }
  }

  /// Images within a twin class increase with the member index.
  bool twin_order_ok(int v, int d) const {
    const int c = p_.twin_class[v];
    if (c < 0) return true;
    for (int w : p_.twins[c]) {
      if (img_[w] < 0) continue;
      if ((w < v && img_[w] > d) || (w > v && img_[w] < d)) return false;
    }
    return true;
  }

  /// Every unplaced neighbour of v still has a free candidate adjacent to v's image.
  bool neighbours_viable(int v) const {
    const auto d = static_cast<NodeIndex>(img_[v]);
    for (const auto& [w, out] : nbrs_[v]) {
      if (img_[w] >= 0) continue;
      bool any = false;
      for (NodeIndex c : cand_[w]) {
        if (used_node_[c]) continue;
        if (!(out ? g_.edges_between(d, c) : g_.edges_between(c, d)).empty()) {
          any = true;
          break;
        }
      }
      if (!any) return false;
    }
    return true;
  }

  void assign_edges(size_t depth, size_t i) {
    if (i == closing_[depth].size()) {
      extend(depth + 1);
      return;
    }
    const int e = closing_[depth][i];
    const auto [s, t] = p_.ends[e];
    for (EdgeIndex d : g_.edges_between(static_cast<NodeIndex>(img_[s]),
                                        static_cast<NodeIndex>(img_[t]))) {
      if (used_edge_[d] || !edge_ok_[e][d]) continue;
      used_edge_[d] = 1;
      edge_img_[e] = static_cast<int>(d);
      assign_edges(depth, i + 1);
      edge_img_[e] = -1;
      used_edge_[d] = 0;
      if (stop_) return;
    }
  }

  /// Expands the canonical embedding into one embedding per permutation of
  /// each twin class.
  void emit() {
    if (opts_.count_only) {
      // Every permutation of every twin class is a distinct embedding.
      std::size_t total = 1;
      for (const auto& cls : p_.twins)
        for (std::size_t i = 2; i <= cls.size(); ++i)
          total = total > SIZE_MAX / i ? SIZE_MAX : total * i;
      const std::size_t room = opts_.limit ? *opts_.limit - std::min(*opts_.limit, out_.count) : SIZE_MAX;
      if (total > room) {
        out_.count += room;
        out_.complete = false;
        stop_ = true;
      } else {
        out_.count += total;
      }
      return;
    }
    std::vector<int> node_img = img_;
    std::vector<int> edge_img = edge_img_;
    emit_class(0, node_img, edge_img);
  }

  void emit_class(size_t c, std::vector<int>& node_img, std::vector<int>& edge_img) {
    if (stop_) return;
    if (c == p_.twins.size()) {
      record(node_img, edge_img);
      return;
    }
    const auto& cls = p_.twins[c];
    std::vector<int> perm(cls.size());
    std::iota(perm.begin(), perm.end(), 0);
    do {
      // sigma: cls[i] -> cls[perm[i]]; the new image of cls[i] is the old image of sigma(cls[i]).
      std::vector<int> sigma(p_.nodes.size());
      std::iota(sigma.begin(), sigma.end(), 0);
      for (size_t i = 0; i < cls.size(); ++i) sigma[cls[i]] = cls[perm[i]];
      std::vector<int> ni = node_img;
      for (size_t i = 0; i < cls.size(); ++i) ni[cls[i]] = node_img[sigma[cls[i]]];
      std::vector<int> ei = edge_img;
      for (const auto& [pair, list] : pair_edges_) {
        const auto& image = pair_edges_.at({sigma[pair.first], sigma[pair.second]});
        for (size_t k = 0; k < list.size(); ++k) ei[list[k]] = edge_img[image[k]];
      }
      emit_class(c + 1, ni, ei);
      if (out_of_time()) {
        out_.complete = false;
        stop_ = true;
      }
    } while (!stop_ && std::next_permutation(perm.begin(), perm.end()));
  }

  void record(const std::vector<int>& node_img, const std::vector<int>& edge_img) {
    if (opts_.limit && out_.count >= *opts_.limit) {
      // One embedding beyond the limit proves the search is incomplete.
      out_.complete = false;
      stop_ = true;
      return;
    }
    ++out_.count;
    if (opts_.count_only) return;
    MatchResult r;
    for (size_t v = 0; v < p_.nodes.size(); ++v)
      r.nodes.emplace(p_.nodes[v]->id, g_.nodes()[node_img[v]].id);
    for (size_t e = 0; e < p_.edges.size(); ++e)
      r.edges.emplace(p_.edges[e]->id, g_.edges()[edge_img[e]].id);
    out_.results.push_back(std::move(r));
  }

  const PatternIndex& p_;
  const PropertyGraph& g_;
  const MatchOptions& opts_;
  MatchOutcome& out_;
  std::optional<Clock::time_point> deadline_;
  std::uint64_t ticks_ = 0;
  bool stop_ = false;

  std::vector<std::vector<NodeIndex>> cand_;
  std::vector<std::vector<char>> edge_ok_;
  std::vector<int> order_;
  std::vector<std::vector<int>> closing_;
  std::vector<std::vector<std::pair<int, bool>>> nbrs_;  // (neighbour, v is source)
  std::map<std::pair<int, int>, std::vector<int>> pair_edges_;
  std::vector<int> img_;
  std::vector<int> edge_img_;
  std::vector<char> used_node_;
  std::vector<char> used_edge_;
};

}  // namespace

MatchOutcome match(const PatternGraph& pattern, const PropertyGraph& g, const MatchOptions& opts) {
  if (opts.limit && *opts.limit == 0) throw ExecutionError("match limit must be at least 1");
  for (const auto& e : pattern.edges) {
    if (e.abstraction)
      throw NotConcreteError("pattern edge " + e.id + " is a path abstraction");
    if (e.directed != g.directed())
      throw ExecutionError(std::string("pattern edge ") + e.id + " is " +
                           (e.directed ? "directed" : "undirected") + " but the graph is " +
                           (g.directed() ? "directed" : "undirected"));
  }
  MatchOutcome out;
  if (pattern.empty()) {
    out.degenerate = true;
    out.count = 1;
    if (!opts.count_only) out.results.emplace_back();
    return out;
  }
  const PatternIndex ix = index_pattern(pattern);
  Search(ix, g, opts, out).run();
  return out;
}

MatchOutcome count(const PatternGraph& pattern, const PropertyGraph& g, MatchOptions opts) {
  opts.count_only = true;
  return match(pattern, g, opts);
}

}  // namespace qlat
