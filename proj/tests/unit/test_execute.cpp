#include <gtest/gtest.h>

#include "oracle.hpp"
#include "qlat/dsl.hpp"
#include "qlat/error.hpp"
#include "qlat/execute.hpp"

using namespace qlat;

namespace {

InstantiationLattice lattice(std::string_view text) {
  auto r = parse(text);
  if (!r.ok()) {
    ADD_FAILURE() << format_diagnostic(r.diagnostics.at(0));
    return {};
  }
  return build_lattice(*r.query);
}

// Two heist accounts pay into one hub, which forwards to one account.
PropertyGraph money_graph() {
  return load_graph_text(R"({"directed": true,
    "nodes": [{"id": "h0", "attrs": {"label": "heist"}}, {"id": "h1", "attrs": {"label": "heist"}},
              {"id": "hub", "attrs": {"label": "mule"}}, {"id": "out", "attrs": {"label": "mule"}}],
    "edges": [{"id": "t0", "source": "h0", "target": "hub"}, {"id": "t1", "source": "h1", "target": "hub"},
              {"id": "t2", "source": "hub", "target": "out"}]})");
}

constexpr const char* kMoneyQuery = R"(query "m" directed {
  node src; node hop; edge pay = src -> hop;
  rule attr node src : label == "heist";
  rule repeat src : count = 0..3;
  rule chain hop : start = hop, end = hop, iterations = 0..1, mode = linked;
})";

PropertyGraph valjean_star() {
  return load_graph_text(R"({"directed": false,
    "nodes": [{"id": "Valjean", "attrs": {"name": "Valjean"}}, {"id": "a"}, {"id": "b"}],
    "edges": [{"id": "x", "source": "Valjean", "target": "a"}, {"id": "y", "source": "b", "target": "Valjean"}]})");
}

}  // namespace

TEST(Execute, EverythingStartsNotRun) {
  const auto lat = lattice(kMoneyQuery);
  const auto st = initial_state(lat);
  EXPECT_EQ(st.instances.size(), lat.instances.size());
  for (const auto& [id, s] : st.instances) EXPECT_EQ(s.status, Status::NotRun) << id;
}

TEST(Execute, EmptyRepeatPrunesLargerCounts) {
  const auto lat = lattice(kMoneyQuery);
  const auto g = money_graph();
  auto st = initial_state(lat);
  execute_step(lat, st, g, "L1:r1");
  // r1 = count: 0, 1 and 2 extra heist sources.
  EXPECT_EQ(st.at("L1:r1:0").status, Status::Found);
  EXPECT_EQ(st.at("L1:r1:1").status, Status::Found);
  EXPECT_EQ(st.at("L1:r1:2").status, Status::Empty);
  EXPECT_EQ(st.at("L1:r1:3").status, Status::PrunedEmpty);
  EXPECT_EQ(st.at("L1:r1:3").cause, "L1:r1:2");
  for (const auto& id : lat.resolve_step("L2")) {
    const auto& a = lat.at(id).assignment.at("r1").at("count");
    if (a >= 2) {
      EXPECT_EQ(st.at(id).status, Status::PrunedEmpty) << id;
      EXPECT_EQ(oracle::brute_force_matches(concretize(lat.at(id).pattern), g, 1).size(), 0u) << id;
    } else {
      EXPECT_EQ(st.at(id).status, Status::NotRun) << id;
    }
  }
}

TEST(Execute, PrunedInstancesCostNoMatcherCalls) {
  const auto lat = lattice(kMoneyQuery);
  const auto g = money_graph();
  auto st = initial_state(lat);
  execute_step(lat, st, g, "L1:r1:2");
  const auto before = st.instances;
  const auto& rec = execute_step(lat, st, g, "L1:r1:3");
  EXPECT_EQ(rec.matcher_calls, 0u);
  EXPECT_EQ(st.at("L1:r1:3").status, Status::PrunedEmpty);
  const auto& again = execute_step(lat, st, g, "L1:r1:2");
  EXPECT_EQ(again.matcher_calls, 0u);
  EXPECT_EQ(st.instances.size(), before.size());
}

TEST(Execute, NoEmptyInstancesMeansNoPruning) {
  const auto lat = lattice(kMoneyQuery);
  auto st = initial_state(lat);
  execute_step(lat, st, money_graph(), "L1:r1:1");
  const auto snapshot = export_results(lat, st);
  EXPECT_EQ(propagate_pruning(lat, st), 0u);
  EXPECT_EQ(export_results(lat, st), snapshot);
}

TEST(Execute, LoopSizesDoNotPruneEachOther) {
  // A 4-cycle without triangles: the size-3 loop is empty, the size-4 loop is not.
  const auto g = load_graph_text(R"({"directed": false, "nodes": [{"id": "a"}, {"id": "b"}, {"id": "c"}, {"id": "d"}],
    "edges": [{"id": "1", "source": "a", "target": "b"}, {"id": "2", "source": "b", "target": "c"},
              {"id": "3", "source": "c", "target": "d"}, {"id": "4", "source": "d", "target": "a"}]})");
  const auto lat = lattice("motif L = loop(nodes=3..4);");
  auto st = initial_state(lat);
  execute_step(lat, st, g, "L1:r0:0");
  EXPECT_EQ(st.at("L1:r0:0").status, Status::Empty);
  EXPECT_EQ(st.at("L1:r0:1").status, Status::NotRun);
  execute_step(lat, st, g, "L1:r0:1");
  EXPECT_EQ(st.at("L1:r0:1").status, Status::Found);
}

TEST(Execute, LargerLimitExtendsAPrefix) {
  const auto lat = lattice("node a; node b; edge e = a -- b;");
  const auto g = load_graph_text(R"({"directed": false, "nodes": [{"id": "a"}, {"id": "b"}, {"id": "c"}],
    "edges": [{"id": "1", "source": "a", "target": "b"}, {"id": "2", "source": "b", "target": "c"},
              {"id": "3", "source": "c", "target": "a"}]})");
  auto st = initial_state(lat);
  execute_step(lat, st, g, "final", {2, std::nullopt});
  const auto first = st.at("fs-final");
  EXPECT_EQ(first.status, Status::Found);
  EXPECT_EQ(first.results.size(), 2u);
  EXPECT_FALSE(first.complete);

  const auto group = group_results(lat, st, "fs-final");
  EXPECT_EQ(group.embeddings.size(), 2u);
  EXPECT_FALSE(group.complete);

  const auto& rec = execute_step(lat, st, g, "final", {10, std::nullopt});
  EXPECT_EQ(rec.matcher_calls, 1u);
  const auto& full = st.at("fs-final");
  EXPECT_EQ(full.results.size(), 6u);
  EXPECT_TRUE(full.complete);
  EXPECT_TRUE(std::equal(first.results.begin(), first.results.end(), full.results.begin()));
  // Complete results are not recomputed.
  EXPECT_EQ(execute_step(lat, st, g, "final", {50, std::nullopt}).matcher_calls, 0u);
}

TEST(Execute, AggregateCountsDataElements) {
  const auto lat = lattice(R"(node v; node w; edge e = v -- w; rule attr node v : name == "Valjean";)");
  auto st = initial_state(lat);
  execute_step(lat, st, valjean_star(), "final");
  const auto o = aggregate(st, {"fs-final"});
  EXPECT_EQ(o.node_freq.at("Valjean"), 2u);
  EXPECT_EQ(o.node_freq.at("a"), 1u);
  EXPECT_EQ(o.edge_freq.at("x"), 1u);
  const auto none = aggregate(st, {});
  EXPECT_TRUE(none.node_freq.empty());
  EXPECT_TRUE(none.edge_freq.empty());
  EXPECT_THROW(aggregate(st, {"backbone"}), ExecutionError);
}

TEST(Execute, GroupResultsNeedsFound) {
  const auto lat = lattice(R"(node v; rule attr node v : name == "Nobody";)");
  auto st = initial_state(lat);
  EXPECT_THROW(group_results(lat, st, "fs-final"), ExecutionError);
  execute_step(lat, st, valjean_star(), "final");
  EXPECT_EQ(st.at("fs-final").status, Status::Empty);
  EXPECT_THROW(group_results(lat, st, "fs-final"), ExecutionError);
}

TEST(Execute, GroupResultsReturnsStoredEmbeddings) {
  const auto lat = lattice("node a; node b; edge e = a -- b;");
  auto st = initial_state(lat);
  execute_step(lat, st, valjean_star(), "final");
  const auto g = group_results(lat, st, "fs-final");
  EXPECT_EQ(g.embeddings, st.at("fs-final").results);
  EXPECT_EQ(g.structure, lat.at("fs-final").pattern);
  EXPECT_TRUE(g.complete);
}

TEST(Execute, TimeBudgetGivesInconclusive) {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  // Complete 8-partite graph with parts of five: many 8-cliques, no 9-clique.
  for (int i = 0; i < 40; ++i) nodes.push_back({"v" + std::to_string(i), {}});
  for (int a = 0; a < 40; ++a)
    for (int b = a + 1; b < 40; ++b)
      if (a % 8 != b % 8)
        edges.push_back({std::to_string(a) + "-" + std::to_string(b), nodes[a].id, nodes[b].id, {}, {}});
  const PropertyGraph g(false, nodes, edges);
  const auto lat = lattice("motif C = clique(nodes=9);");
  auto st = initial_state(lat);
  execute_step(lat, st, g, "final", {1, std::chrono::milliseconds(0)});
  EXPECT_EQ(st.at("fs-final").status, Status::Inconclusive);
  EXPECT_THROW(group_results(lat, st, "fs-final"), ExecutionError);
}

TEST(Execute, DirectionMismatchIsAnError) {
  const auto lat = lattice(kMoneyQuery);
  auto st = initial_state(lat);
  EXPECT_THROW(execute_step(lat, st, valjean_star(), "final"), ExecutionError);
  EXPECT_THROW(execute_step(lat, st, money_graph(), "L7"), QueryError);
}

TEST(Execute, OpenDirectionFollowsTheGraph) {
  const auto lat = lattice("node a;");
  auto st = initial_state(lat);
  execute_step(lat, st, money_graph(), "final");
  EXPECT_EQ(st.at("fs-final").count, 4u);
}

TEST(Execute, ExportIsDeterministicAndReadsBack) {
  const auto lat = lattice(kMoneyQuery);
  auto run = [&] {
    auto st = initial_state(lat);
    execute_step(lat, st, money_graph(), "L1");
    execute_step(lat, st, money_graph(), "final");
    return st;
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(export_results(lat, a).dump(), export_results(lat, b).dump());
  const auto back = state_from_json(export_results(lat, a));
  for (const auto& [id, s] : a.instances) {
    if (s.status == Status::NotRun) continue;
    EXPECT_EQ(back.at(id).status, s.status) << id;
    EXPECT_EQ(back.at(id).results, s.results) << id;
  }
  EXPECT_EQ(status_from_name("pruned_empty"), Status::PrunedEmpty);
  EXPECT_EQ(status_name(Status::Inconclusive), "inconclusive");
}
