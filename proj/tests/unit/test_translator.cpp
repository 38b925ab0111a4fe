#include <gtest/gtest.h>

#include "qlat/dsl.hpp"
#include "qlat/error.hpp"
#include "qlat/translator.hpp"

using namespace qlat;

namespace {

PatternNode node(const std::string& entity, PredicateSet preds = {}) {
  Origin o{entity, 0, "0"};
  return {o.id(), std::move(preds), o};
}

PatternEdge edge(const std::string& entity, const std::string& s, const std::string& t, bool directed,
                 PredicateSet preds = {}) {
  Origin o{entity, 0, "0"};
  return {o.id(), s, t, directed, std::move(preds), o, std::nullopt};
}

}  // namespace

TEST(Translate, SingleHeistNode) {
  PatternGraph p;
  p.nodes.push_back(node("n", {{"label", CompareOp::EQ, AttrValue("heist")}}));
  EXPECT_EQ(translate(p).text, "MATCH (n0)\nWHERE n0.label = \"heist\"\nRETURN DISTINCT n0");
}

TEST(Translate, TwoNodesAreDistinct) {
  PatternGraph p;
  p.nodes = {node("a"), node("b")};
  p.edges = {edge("e", "a#0#0", "b#0#0", true)};
  const auto t = translate(p);
  EXPECT_EQ(t.text, "MATCH (n0)-[e0]->(n1)\nWHERE n0 <> n1\nRETURN DISTINCT n0, n1");
  EXPECT_EQ(t.var_map.at("a#0#0"), "n0");
  EXPECT_EQ(t.var_map.at("e#0#0"), "e0");
}

TEST(Translate, EdgeValuePredicate) {
  PatternGraph p;
  p.nodes = {node("a"), node("b")};
  p.edges = {edge("e", "a#0#0", "b#0#0", true, {{"value", CompareOp::GT, AttrValue(100)}})};
  EXPECT_NE(translate(p).text.find("e0.value > 100"), std::string::npos);
}

TEST(Translate, LimitAndQuotedNames) {
  PatternGraph p;
  p.nodes = {node("a", {{"first name", CompareOp::NE, AttrValue(true)}})};
  EXPECT_EQ(translate(p, 5).text, "MATCH (n0)\nWHERE n0.`first name` <> true\nRETURN DISTINCT n0\nLIMIT 5");
}

TEST(Translate, UndirectedParallelEdges) {
  PatternGraph p;
  p.nodes = {node("a"), node("b")};
  p.edges = {edge("e", "a#0#0", "b#0#0", false), edge("f", "b#0#0", "a#0#0", false)};
  EXPECT_EQ(translate(p).text,
            "MATCH (n0)-[e0]-(n1), (n1)-[e1]-(n0)\nWHERE n0 <> n1 AND e0 <> e1\nRETURN DISTINCT n0, n1");
}

TEST(Translate, ErrorsForMarkersAndEmptyPatterns) {
  PatternGraph marker;
  marker.nodes = {node("h"), node("t")};
  marker.edges = {edge("m", "h#0#0", "t#0#0", true)};
  marker.edges[0].abstraction = PathAbstraction{"P", 3, {}, {}};
  EXPECT_THROW(translate(marker), NotConcreteError);
  EXPECT_THROW(translate(PatternGraph{}), QueryError);
}

TEST(Translate, DeterministicAcrossCalls) {
  const auto qr = parse("node a; node b; edge e = a -> b; rule attr edge e : value >= 2.5;");
  ASSERT_TRUE(qr.ok());
  const auto lat = build_lattice(*qr.query);
  EXPECT_EQ(translate(lat.at("fs-final")).text, translate(lat.at("fs-final")).text);
}
