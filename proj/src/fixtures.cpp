#include "qlat/fixtures.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "qlat/dsl.hpp"
#include "qlat/error.hpp"

namespace qlat {

using nlohmann::json;

namespace {

std::string read_text(const std::filesystem::path& p, const std::string& hint) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("missing " + p.string() + (hint.empty() ? "" : "; " + hint));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool contains(const RuleChoice& whole, const RuleChoice& part) {
  for (const auto& [rid, params] : part) {
    auto it = whole.find(rid);
    if (it == whole.end()) return false;
    for (const auto& [k, v] : params) {
      auto p = it->second.find(k);
      if (p == it->second.end() || p->second != v) return false;
    }
  }
  return true;
}

Status direct_status(const PatternGraph& p, const PropertyGraph& g) {
  MatchOptions mo;
  mo.limit = 1;
  mo.count_only = true;
  return count(concretize(p), g, mo).count > 0 ? Status::Found : Status::Empty;
}

}  // namespace

FixtureReport fixture_check(const std::filesystem::path& dir) {
  FixtureReport report;
  report.name = dir.filename().string();
  if (report.name.empty()) report.name = dir.parent_path().filename().string();
  const json expected = json::parse(read_text(dir / "expected.json", ""));
  const std::string hint = expected.value("regenerate", std::string());
  const PropertyGraph g = load_graph_text(read_text(dir / "graph.json", hint));
  const std::string source = read_text(dir / "query.gq", "");

  ParseResult parsed = parse(source);
  if (!parsed.ok()) {
    std::string msg = "query.gq does not parse";
    for (const auto& d : parsed.diagnostics) msg += "\n" + format_diagnostic(d, "query.gq");
    throw QueryError(msg);
  }
  LatticeOptions lo;
  lo.default_directed = g.directed();
  const InstantiationLattice lat = build_lattice(*parsed.query, lo);
  ExecutionState state = initial_state(lat);
  report.step = expected.value("step", std::string("final"));
  report.limit = expected.value("limit", std::size_t{1});
  ExecOptions eo;
  eo.limit = report.limit;
  execute_step(lat, state, g, report.step, eo);
  const auto selected = lat.resolve_step(report.step);

  report.pass = true;
  for (const auto& row : expected.at("expectations")) {
    ExpectationOutcome out;
    for (const auto& [rid, params] : row.at("assignment").items())
      for (const auto& [k, v] : params.items()) out.expected.assignment[rid][k] = v.get<std::int64_t>();
    const auto st = status_from_name(row.at("status").get<std::string>());
    if (!st) throw Error("unknown status in expected.json");
    out.expected.status = *st;
    out.expected.source = row.value("source", std::string("derived"));

    out.pass = true;
    for (const auto& id : selected) {
      const QueryInstance& inst = lat.at(id);
      if (!contains(inst.assignment, out.expected.assignment)) continue;
      out.instances.push_back(id);
      Status actual = state.at(id).status;
      if (actual == Status::PrunedEmpty) actual = Status::Empty;
      out.actual.push_back(actual);
      if (actual != out.expected.status) out.pass = false;
      if (out.expected.source == "derived") {
        const Status again = direct_status(inst.pattern, g);
        out.rederived.push_back(again);
        if (again != out.expected.status) out.pass = false;
      }
    }
    if (out.instances.empty()) out.pass = false;
    report.pass = report.pass && out.pass;
    report.rows.push_back(std::move(out));
  }
  return report;
}

namespace {

std::string assignment_text(const RuleChoice& c) {
  std::string s;
  for (const auto& [rid, params] : c) {
    for (const auto& [k, v] : params) {
      if (!s.empty()) s += ", ";
      s += rid + "." + k + "=" + std::to_string(v);
    }
  }
  return s.empty() ? "(all)" : s;
}

}  // namespace

std::string format_report(const FixtureReport& r) {
  std::string out = r.name + " (step " + r.step + ", limit " + std::to_string(r.limit) + ")\n";
  for (const auto& row : r.rows) {
    out += std::string(row.pass ? "  ok   " : "  FAIL ") + assignment_text(row.expected.assignment) +
           " expected " + std::string(status_name(row.expected.status)) + " [" +
           row.expected.source + "]";
    if (row.instances.empty()) out += " no matching instance";
    for (size_t i = 0; i < row.instances.size(); ++i)
      out += "  " + row.instances[i] + "=" + std::string(status_name(row.actual[i]));
    out += "\n";
  }
  out += r.pass ? "PASS\n" : "FAIL\n";
  return out;
}

json to_json(const FixtureReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json actual = json::object();
    for (size_t i = 0; i < row.instances.size(); ++i)
      actual[row.instances[i]] = status_name(row.actual[i]);
    json a = json::object();
    for (const auto& [rid, params] : row.expected.assignment) a[rid] = params;
    rows.push_back({{"assignment", a},
                    {"expected", status_name(row.expected.status)},
                    {"source", row.expected.source},
                    {"actual", actual},
                    {"pass", row.pass}});
  }
  return {{"fixture", r.name}, {"step", r.step}, {"limit", r.limit}, {"rows", rows},
          {"pass", r.pass}};
}

PropertyGraph synthetic_mln_chain(std::uint64_t seed) {
  // Raw engine output only: distributions are not reproducible across libraries.
  std::mt19937_64 rng(seed);
  auto below = [&](std::uint64_t n) { return rng() % n; };

  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  auto add_node = [&](std::string id, const char* label) {
    nodes.push_back({std::move(id), AttrMap{{"label", AttrValue(label)}}});
  };
  auto add_edge = [&](const std::string& s, const std::string& t, double value) {
    edges.push_back({"t" + std::to_string(edges.size()), s, t, std::nullopt,
                     AttrMap{{"value", AttrValue(value)}}});
  };

  static constexpr const char* kLabels[] = {"mule", "merchant", "exchange", "retail"};
  constexpr int kHeist = 6;
  constexpr int kAccounts = 48;
  for (int i = 0; i < kHeist; ++i) add_node("heist" + std::to_string(i), "heist");
  add_node("hub0", "mule");
  add_node("hub1", "mule");
  for (int i = 1; i <= 3; ++i) add_node("layer" + std::to_string(i), "mule");
  for (int i = 0; i < kAccounts; ++i)
    add_node("acct" + std::to_string(i), kLabels[below(4)]);

  // Two heist sources converge on hub0, which forwards along three hops.
  add_edge("heist0", "hub0", 250);
  add_edge("heist1", "hub0", 480);
  add_edge("hub0", "layer1", 700);
  add_edge("layer1", "layer2", 690);
  add_edge("layer2", "layer3", 655);
  // A single-source decoy.
  add_edge("heist2", "hub1", 300);
  add_edge("hub1", "acct0", 290);

  const auto n = nodes.size();
  for (int i = 0; i < 140; ++i) {
    const auto s = below(n);
    auto t = below(n);
    if (t == s) t = (t + 1) % n;
    const bool from_heist = nodes[s].attrs.at("label").text() == "heist";
    // Heist transfers outside the planted ones stay at or below 100.
    const double value = from_heist ? static_cast<double>(1 + below(100))
                                    : static_cast<double>(1 + below(1000));
    add_edge(nodes[s].id, nodes[t].id, value);
  }
  return PropertyGraph(true, std::move(nodes), std::move(edges));
}

}  // namespace qlat
