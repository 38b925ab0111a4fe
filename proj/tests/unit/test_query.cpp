#include <gtest/gtest.h>

#include <random>

#include "oracle.hpp"
#include "qlat/dsl.hpp"
#include "qlat/error.hpp"
#include "qlat/query.hpp"

using namespace qlat;

namespace {

QueryRepresentation parsed(std::string_view text) {
  auto r = parse(text);
  if (!r.ok()) {
    std::string all;
    for (const auto& d : r.diagnostics) all += format_diagnostic(d) + "\n";
    ADD_FAILURE() << all;
    return {};
  }
  return *r.query;
}

size_t error_count(const std::vector<Diagnostic>& diags) {
  size_t n = 0;
  for (const auto& d : diags) n += d.severity == Severity::Error;
  return n;
}

constexpr const char* kCase1 = R"(query "layering-integration-layering" directed {
  node node0;
  node node1;
  node node2;
  motif P0 = path(nodes=3);
  node node3;
  edge e0 = node0 -> node1;
  edge e1 = node1 -> node2;
  edge e2 = node2 -> P0.head;
  edge e3 = P0.tail -> node3;
  group C0 = { node0, node1, node2, P0, node3, e0, e1, e2, e3 };
  rule attr node node0 : label == "heist";
  rule repeat node1 : count = 1..2;
  rule repeat node3 : count = 1..2;
  rule attr edges in C0 : value > 0;
})";

}  // namespace

TEST(Validate, MotifConfigOnNodeIsOneError) {
  QueryRepresentation qr;
  qr.entities.push_back({"n0", NodeEntity{}});
  qr.rules.push_back({"r0", "n0", MotifConfigRule{{3, 3}, {}, {}}});
  const auto diags = validate(qr);
  EXPECT_EQ(error_count(diags), 1u);
  EXPECT_EQ(diags.at(0).subject, "r0");
}

TEST(Validate, LayeringQueryHasNoDiagnostics) {
  const auto qr = parsed(kCase1);
  EXPECT_TRUE(validate(qr).empty());
}

TEST(Validate, TwoRepeatsOnOneNodeIsOneError) {
  QueryRepresentation qr;
  qr.entities.push_back({"n0", NodeEntity{}});
  qr.rules.push_back({"r0", "n0", RepeatingRule{{0, 2}}});
  qr.rules.push_back({"r1", "n0", RepeatingRule{{1, 1}}});
  EXPECT_EQ(error_count(validate(qr)), 1u);
}

TEST(Validate, RepeatAndChainOnOneTargetConflict) {
  QueryRepresentation qr;
  qr.entities.push_back({"n0", NodeEntity{}});
  qr.rules.push_back({"r0", "n0", RepeatingRule{{0, 2}}});
  qr.rules.push_back({"r1", "n0", ChainingRule{"n0", "n0", {1, 2}, ChainMode::LinkedChain}});
  EXPECT_EQ(error_count(validate(qr)), 1u);
}

TEST(Validate, MotifMayCarryConfigAndRepeat) {
  const auto qr = parsed("motif C0 = clique(nodes=5); rule repeat C0 : count = 0..3;");
  EXPECT_FALSE(has_errors(validate(qr)));
}

TEST(Validate, ReferenceAndDomainErrors) {
  QueryRepresentation qr;
  qr.entities.push_back({"a", NodeEntity{}});
  qr.entities.push_back({"m", MotifEntity{MotifKind::Path}});
  qr.entities.push_back({"e", EdgeEntity{{"a"}, {"m"}, true}});     // path needs a port
  qr.entities.push_back({"f", EdgeEntity{{"a"}, {"zz"}, false}});   // undeclared, mixed direction
  qr.rules.push_back({"r0", "m", MotifConfigRule{{1, 3}, {}, {}}});  // path below 2 nodes
  qr.rules.push_back({"r1", "a", NodeAttrRule{{"v", CompareOp::LT, AttrValue("x")}}});
  const auto diags = validate(qr);
  std::set<std::string> subjects;
  for (const auto& d : diags) subjects.insert(d.subject);
  EXPECT_EQ(subjects, (std::set<std::string>{"e", "f", "r0", "r1"}));
}

TEST(Validate, UnconfiguredMotifIsAnError) {
  QueryRepresentation qr;
  qr.entities.push_back({"m", MotifEntity{MotifKind::Loop}});
  EXPECT_EQ(error_count(validate(qr)), 1u);
}

TEST(Validate, EmptyQueryIsValid) { EXPECT_TRUE(validate(QueryRepresentation{}).empty()); }

TEST(Classify, Examples) {
  const auto fixed = parsed("node n; rule repeat n : count = 2..2;");
  EXPECT_EQ(classify_rules(fixed).fully_specified, std::vector<std::string>{"r0"});
  EXPECT_TRUE(classify_rules(fixed).underspecified.empty());

  const auto range = parsed("motif C = clique(nodes=4..6);");
  EXPECT_EQ(classify_rules(range).underspecified, std::vector<std::string>{"r0"});

  const auto attrs = parsed("node n; rule attr node n : name == \"Valjean\";");
  EXPECT_TRUE(classify_rules(attrs).fully_specified.empty());
  EXPECT_TRUE(classify_rules(attrs).underspecified.empty());
}

TEST(Classify, TreeWithSeveralShapesIsUnderspecified) {
  // Four nodes admit four rooted shapes; a width window of 1 leaves only the chain.
  EXPECT_EQ(classify_rules(parsed("motif T = tree(nodes=4);")).underspecified.size(), 1u);
  EXPECT_EQ(classify_rules(parsed("motif T = tree(nodes=4, width=1);")).fully_specified.size(), 1u);
}

TEST(Assignments, Examples) {
  const Rule repeat{"r0", "n", RepeatingRule{{0, 3}}};
  const auto a = assignments(repeat);
  ASSERT_EQ(a.size(), 4u);
  for (int k = 0; k < 4; ++k) EXPECT_EQ(a[k].at("count"), k);

  const Rule clique{"r1", "C", MotifConfigRule{{4, 6}, {}, {}}};
  const auto c = assignments(clique);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0].at("nodes"), 4);
  EXPECT_EQ(c[2].at("nodes"), 6);

  const Rule tree{"r2", "T", MotifConfigRule{{3, 3}, std::nullopt, IntRange{2, 3}}};
  const auto t = assignments(tree);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0], (Assignment{{"nodes", 3}, {"depth", 2}}));
  EXPECT_EQ(t[1], (Assignment{{"nodes", 3}, {"depth", 3}}));
}

TEST(QueryJson, RoundTripsRandomRepresentations) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto qr = oracle::random_representation(rng);
    EXPECT_EQ(query_from_json(to_json(qr)), qr);
  }
}

TEST(QueryJson, SchemaViolationsThrow) {
  EXPECT_THROW(query_from_json(nlohmann::json::array()), QueryError);
  EXPECT_THROW(query_from_json(nlohmann::json::parse(R"({"entities": [{"id": "a", "type": "blob"}]})")),
               QueryError);
}

TEST(Direction, ExplicitFlagThenEdgesThenFallback) {
  QueryRepresentation qr;
  EXPECT_TRUE(direction_open(qr));
  EXPECT_TRUE(effective_directed(qr, true));
  qr.entities.push_back({"a", NodeEntity{}});
  qr.entities.push_back({"e", EdgeEntity{{"a"}, {"a"}, false}});
  EXPECT_FALSE(direction_open(qr));
  EXPECT_FALSE(effective_directed(qr, true));
}
