#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qlat/query.hpp"

namespace qlat {

/// Unlabeled rooted tree in preorder; parent[0] == -1.
struct RootedTree {
  std::vector<int> parent;
  std::string code;  // AHU canonical encoding
  int depth = 0;     // longest root-to-leaf distance in edges
  int width = 0;     // most nodes on a single level

  int size() const { return static_cast<int>(parent.size()); }
};

/// All non-isomorphic rooted trees with `n` nodes, ordered by canonical code.
const std::vector<RootedTree>& enumerate_rooted_trees(int n);

/// AHU encoding of a rooted tree given as parent links (root has parent -1).
std::string canonical_code(const std::vector<int>& parent);

/// Injective map from `small` into `big` that sends root to root and every
/// parent/child pair to a parent/child pair.
std::optional<std::vector<int>> embed_rooted_tree(const RootedTree& small, const RootedTree& big);

/// Concrete motif shape over local node indices 0..node_count-1.
struct MotifFragment {
  int node_count = 0;
  std::vector<std::pair<int, int>> edges;  // (from, to); orientation only meaningful when directed
  int representative = 0;
  int head = 0;
  int tail = 0;
  int shape_index = 0;  // position in enumerate_rooted_trees for trees
};

/// Path, loop and clique yield one fragment. Trees yield every shape with
/// width <= max_width and depth <= max_depth. Clique edges are listed so that
/// the first C(k,2) pairs are those among the first k nodes. Throws QueryError
/// below the kind's domain minimum.
std::vector<MotifFragment> expand_motif(MotifKind kind, int nodes, bool directed,
                                        std::optional<int> max_width = std::nullopt,
                                        std::optional<int> max_depth = std::nullopt);

/// Fragment of one specific tree shape.
MotifFragment tree_fragment(int nodes, int shape_index);

}  // namespace qlat
