#include "qlat/motif.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <mutex>
#include <set>

#include "qlat/error.hpp"

namespace qlat {

namespace {

RootedTree tree_from_code(const std::string& code) {
  RootedTree t;
  t.code = code;
  std::vector<int> stack;
  std::vector<int> level;
  for (char c : code) {
    if (c == '(') {
      const int id = static_cast<int>(t.parent.size());
      t.parent.push_back(stack.empty() ? -1 : stack.back());
      level.push_back(static_cast<int>(stack.size()));
      stack.push_back(id);
    } else {
      stack.pop_back();
    }
  }
  std::map<int, int> per_level;
  for (int l : level) {
    t.depth = std::max(t.depth, l);
    t.width = std::max(t.width, ++per_level[l]);
  }
  return t;
}

std::vector<std::string> build_codes(int n, std::map<int, std::vector<std::string>>& memo) {
  if (auto it = memo.find(n); it != memo.end()) return it->second;
  std::set<std::string> out;
  if (n == 1) {
    out.insert("()");
  } else {
    // Children as a non-increasing sequence of (size, index) keys so each
    // multiset of subtrees is generated exactly once.
    std::vector<std::string> chosen;
    std::function<void(int, int, int)> forest = [&](int remaining, int max_size, int max_idx) {
      if (remaining == 0) {
        std::vector<std::string> kids = chosen;
        std::sort(kids.begin(), kids.end());
        std::string code = "(";
        for (const auto& k : kids) code += k;
        out.insert(code + ")");
        return;
      }
      for (int s = std::min(remaining, max_size); s >= 1; --s) {
        const auto sub = build_codes(s, memo);
        const int top = s == max_size ? max_idx : static_cast<int>(sub.size()) - 1;
        for (int i = top; i >= 0; --i) {
          chosen.push_back(sub[i]);
          forest(remaining - s, s, i);
          chosen.pop_back();
        }
      }
    };
    forest(n - 1, n - 1, static_cast<int>(build_codes(n - 1, memo).size()) - 1);
  }
  std::vector<std::string> codes(out.begin(), out.end());
  memo[n] = codes;
  return codes;
}

}  // namespace

const std::vector<RootedTree>& enumerate_rooted_trees(int n) {
  static std::mutex mu;
  static std::map<int, std::vector<RootedTree>> cache;
  static std::map<int, std::vector<std::string>> memo;
  if (n < 1 || n > kMaxTreeNodes + 4) throw QueryError("tree size out of supported range");
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) {
    std::vector<RootedTree> trees;
    for (const auto& code : build_codes(n, memo)) trees.push_back(tree_from_code(code));
    it = cache.emplace(n, std::move(trees)).first;
  }
  return it->second;
}

std::string canonical_code(const std::vector<int>& parent) {
  const int n = static_cast<int>(parent.size());
  std::vector<std::vector<int>> children(n);
  int root = -1;
  for (int i = 0; i < n; ++i) {
    if (parent[i] < 0)
      root = i;
    else
      children[parent[i]].push_back(i);
  }
  std::function<std::string(int)> enc = [&](int v) {
    std::vector<std::string> kids;
    for (int c : children[v]) kids.push_back(enc(c));
    std::sort(kids.begin(), kids.end());
    std::string s = "(";
    for (const auto& k : kids) s += k;
    return s + ")";
  };
  return root < 0 ? std::string{} : enc(root);
}

std::optional<std::vector<int>> embed_rooted_tree(const RootedTree& small, const RootedTree& big) {
  const int n = small.size();
  const int m = big.size();
  if (n > m) return std::nullopt;
  std::vector<std::vector<int>> big_children(m);
  for (int i = 1; i < m; ++i) big_children[big.parent[i]].push_back(i);

  // Preorder guarantees parents are placed before children.
  std::vector<int> phi(n, -1);
  std::vector<bool> used(m, false);
  std::function<bool(int)> place = [&](int v) {
    if (v == n) return true;
    if (v == 0) {
      phi[0] = 0;
      used[0] = true;
      if (place(1)) return true;
      used[0] = false;
      return false;
    }
    for (int c : big_children[phi[small.parent[v]]]) {
      if (used[c]) continue;
      phi[v] = c;
      used[c] = true;
      if (place(v + 1)) return true;
      used[c] = false;
    }
    return false;
  };
  if (n == 0 || !place(0)) return std::nullopt;
  return phi;
}

MotifFragment tree_fragment(int nodes, int shape_index) {
  const auto& trees = enumerate_rooted_trees(nodes);
  const RootedTree& t = trees.at(static_cast<size_t>(shape_index));
  MotifFragment f;
  f.node_count = nodes;
  f.shape_index = shape_index;
  for (int i = 1; i < nodes; ++i) f.edges.emplace_back(t.parent[i], i);
  f.representative = 0;
  f.head = 0;
  f.tail = 0;
  return f;
}

std::vector<MotifFragment> expand_motif(MotifKind kind, int nodes, bool directed,
                                        std::optional<int> max_width,
                                        std::optional<int> max_depth) {
  if (nodes < motif_min_nodes(kind))
    throw QueryError(std::string(motif_name(kind)) + " needs at least " +
                     std::to_string(motif_min_nodes(kind)) + " nodes, got " +
                     std::to_string(nodes));
  std::vector<MotifFragment> out;
  switch (kind) {
    case MotifKind::Path: {
      MotifFragment f;
      f.node_count = nodes;
      for (int i = 0; i + 1 < nodes; ++i) f.edges.emplace_back(i, i + 1);
      f.tail = nodes - 1;
      out.push_back(std::move(f));
      break;
    }
    case MotifKind::Loop: {
      MotifFragment f;
      f.node_count = nodes;
      for (int i = 0; i < nodes; ++i) f.edges.emplace_back(i, (i + 1) % nodes);
      out.push_back(std::move(f));
      break;
    }
    case MotifKind::Clique: {
      MotifFragment f;
      f.node_count = nodes;
      for (int j = 1; j < nodes; ++j)
        for (int i = 0; i < j; ++i) {
          f.edges.emplace_back(i, j);
          if (directed) f.edges.emplace_back(j, i);
        }
      out.push_back(std::move(f));
      break;
    }
    case MotifKind::Tree: {
      const auto& trees = enumerate_rooted_trees(nodes);
      for (size_t s = 0; s < trees.size(); ++s) {
        if (max_width && trees[s].width > *max_width) continue;
        if (max_depth && trees[s].depth > *max_depth) continue;
        out.push_back(tree_fragment(nodes, static_cast<int>(s)));
      }
      break;
    }
  }
  return out;
}

}  // namespace qlat
