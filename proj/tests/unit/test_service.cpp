#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "qlat/service.hpp"

using namespace qlat;
using nlohmann::json;

namespace {

const std::string kLmcn = std::string(QLAT_SOURCE_DIR) + "/fixtures/lmcn-case2-unconstrained/graph.json";

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class ApiTest : public ::testing::Test {
 protected:
  Api api;
  std::string sid;

  void SetUp() override {
    const auto r = api.handle({"POST", "/api/session", {}, ""});
    ASSERT_EQ(r.status, 200);
    sid = r.body.at("session").get<std::string>();
  }
  ApiResponse call(const std::string& method, const std::string& rest, const std::string& body = "",
                   std::map<std::string, std::string> params = {}) {
    return api.handle({method, "/api/session/" + sid + rest, std::move(params), body});
  }
  void load_lmcn() { ASSERT_EQ(call("POST", "/graph", slurp(kLmcn)).status, 200); }
};

constexpr const char* kCase2 = R"(query "valjean-communities" undirected {
  node valjean;
  rule attr node valjean : name == "Valjean";
  motif C0 = clique(nodes=5);
  edge link = valjean -- C0;
  rule repeat C0 : count = 0..3;
})";

}  // namespace

TEST_F(ApiTest, SessionLifecycle) {
  EXPECT_EQ(api.session_count(), 1u);
  EXPECT_EQ(call("GET", "").status, 200);
  EXPECT_EQ(call("DELETE", "").status, 200);
  EXPECT_EQ(call("GET", "").status, 404);
  EXPECT_EQ(api.handle({"GET", "/api/nothing", {}, ""}).status, 404);
}

TEST_F(ApiTest, ThreeUnderspecifiedRulesGiveLayersThreeThreeOne) {
  const auto put = call("PUT", "/query",
                        "node a; node b; node c; rule repeat a : count = 0..1;"
                        "rule repeat b : count = 0..1; rule repeat c : count = 0..2;");
  ASSERT_EQ(put.status, 200) << put.body.dump();
  EXPECT_EQ(put.body.at("lattice").at("layer_sizes"), json::parse("[3, 3, 1]"));
  const auto lat = call("GET", "/lattice");
  ASSERT_EQ(lat.status, 200);
  EXPECT_EQ(lat.body.at("layers").size(), 3u);
}

TEST_F(ApiTest, StructuralConflictIs400WithRuleIds) {
  const auto r = call("PUT", "/query", "node a; rule repeat a : count = 0..1; rule repeat a : count = 2;");
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body.at("subjects"), json::parse(R"(["r1"])"));
  EXPECT_FALSE(r.body.at("diagnostics").empty());
  EXPECT_TRUE(r.body.at("diagnostics")[0].contains("span"));
}

TEST_F(ApiTest, QueryAsJsonRepresentation) {
  const json rep = {{"name", "x"}, {"entities", json::array({{{"id", "a"}, {"kind", "node"}}})}, {"rules", json::array()}};
  const auto r = call("PUT", "/query", json{{"representation", rep}}.dump());
  EXPECT_EQ(r.status, 200) << r.body.dump();
  const auto d = call("PUT", "/query", json{{"dsl", "node a;"}}.dump());
  EXPECT_EQ(d.status, 200) << d.body.dump();
}

TEST_F(ApiTest, VersionMismatchIs409) {
  load_lmcn();
  ASSERT_EQ(call("PUT", "/query", kCase2).status, 200);
  const auto v = call("GET", "").body.at("version").get<std::uint64_t>();
  EXPECT_EQ(call("POST", "/execute", json{{"step", "backbone"}, {"version", v + 1}}.dump()).status, 409);
  EXPECT_EQ(call("POST", "/execute", json{{"step", "backbone"}, {"version", v}}.dump()).status, 200);
}

TEST_F(ApiTest, MissingThingsAre404) {
  EXPECT_EQ(call("GET", "/lattice").status, 404);
  ASSERT_EQ(call("PUT", "/query", "node a;").status, 200);
  EXPECT_EQ(call("POST", "/execute", json{{"step", "L5"}}.dump()).status, 404);
  EXPECT_EQ(call("GET", "/results/none").status, 404);
  EXPECT_EQ(call("GET", "/translate/none").status, 404);
}

TEST_F(ApiTest, CapBreachIs422) {
  Api small([] {
    ServiceConfig c;
    c.lattice.max_instances = 5;
    return c;
  }());
  const auto sid2 = small.handle({"POST", "/api/session", {}, ""}).body.at("session").get<std::string>();
  const auto r = small.handle({"PUT", "/api/session/" + sid2 + "/query", {}, "node a; rule repeat a : count = 0..9;"});
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(r.body.at("cell"), "L1:r0");
  EXPECT_EQ(r.body.at("count"), 10);
}

TEST_F(ApiTest, Case2FinalThenOverview) {
  load_lmcn();
  ASSERT_EQ(call("PUT", "/query", kCase2).status, 200);
  const auto ex = call("POST", "/execute", json{{"step", "final"}, {"limit", 1}}.dump());
  ASSERT_EQ(ex.status, 200) << ex.body.dump();
  for (const auto& id : ex.body.at("instances"))
    EXPECT_EQ(ex.body.at("statuses").at(id.get<std::string>()).at("status"), "found");
  const auto ov = call("GET", "/overview");
  ASSERT_EQ(ov.status, 200);
  EXPECT_EQ(ov.body.at("nodes").at("Valjean"), 4);
  const auto two = call("GET", "/overview", "", {{"instances", "L1:r2:0;L1:r2:1"}});
  ASSERT_EQ(two.status, 200);
  EXPECT_EQ(two.body.at("nodes").at("Valjean"), 2);
  const auto res = call("GET", "/results/L1:r2:3");
  ASSERT_EQ(res.status, 200);
  EXPECT_EQ(res.body.at("embeddings").size(), 1u);
  const auto tr = call("GET", "/translate/L1:r2:0", "", {{"limit", "1"}});
  ASSERT_EQ(tr.status, 200);
  EXPECT_NE(tr.body.at("text").get<std::string>().find("LIMIT 1"), std::string::npos);
  EXPECT_EQ(call("GET", "/results/backbone").status, 400);
}

TEST_F(ApiTest, BadGraphIs400) {
  const auto r = call("POST", "/graph", R"({"directed": true, "nodes": [], "edges": [{"id": "e", "source": "a", "target": "b"}]})");
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body.at("subject"), "a");
  ASSERT_EQ(call("PUT", "/query", "node a;").status, 200);
  EXPECT_EQ(call("POST", "/execute", "{}").status, 400);
}

TEST(Service, IdleSessionsAreEvicted) {
  ServiceConfig c;
  c.idle_timeout = std::chrono::minutes(1);
  Api api(c);
  api.handle({"POST", "/api/session", {}, ""});
  EXPECT_EQ(api.evict_idle(Api::Clock::now()), 0u);
  EXPECT_EQ(api.evict_idle(Api::Clock::now() + std::chrono::minutes(2)), 1u);
  EXPECT_EQ(api.session_count(), 0u);
}

TEST(Service, DefaultPortReadsEnvironment) {
  ::setenv("QLAT_PORT", "9123", 1);
  EXPECT_EQ(default_port(), 9123);
  ::setenv("QLAT_PORT", "junk", 1);
  EXPECT_EQ(default_port(), 8080);
  ::unsetenv("QLAT_PORT");
  EXPECT_EQ(default_port(), 8080);
}

TEST(Service, HttpRoundTrip) {
  ServiceConfig c;
  c.port = -1;
  HttpService svc(c);
  const int port = svc.bind();
  ASSERT_GT(port, 0);
  std::thread t([&] { svc.listen(); });
  httplib::Client cli("127.0.0.1", port);
  cli.set_connection_timeout(5);
  auto created = cli.Post("/api/session", "", "application/json");
  ASSERT_TRUE(created);
  ASSERT_EQ(created->status, 200);
  const auto sid = json::parse(created->body).at("session").get<std::string>();
  auto put = cli.Put("/api/session/" + sid + "/query",
                     "node a; node b; node c; rule repeat a : count = 0..1;"
                     "rule repeat b : count = 0..1; rule repeat c : count = 0..1;",
                     "text/plain");
  ASSERT_TRUE(put);
  EXPECT_EQ(put->status, 200);
  EXPECT_EQ(json::parse(put->body).at("lattice").at("layer_sizes"), json::parse("[3, 3, 1]"));
  auto bad = cli.Put("/api/session/" + sid + "/query", "node a; rule repeat a : count = 1; rule repeat a : count = 2;",
                     "text/plain");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  auto missing = cli.Get("/api/session/nope/lattice");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  svc.stop();
  t.join();
}
