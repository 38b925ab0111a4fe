// Acceptance suite: one PASS/FAIL line per criterion.
//
// Set QLAT_UPDATE_GOLDENS=1 to rewrite the translator goldens instead of
// comparing against them.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "oracle.hpp"
#include "qlat/dsl.hpp"
#include "qlat/execute.hpp"
#include "qlat/instantiate.hpp"
#include "qlat/motif.hpp"
#include "qlat/translator.hpp"

using namespace qlat;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = QLAT_SOURCE_DIR;
const fs::path kFixtures = kRoot / "fixtures";
const fs::path kGoldens = kRoot / "tests" / "acceptance" / "goldens";

struct Outcome {
  bool pass = true;
  std::string detail;
};

/// Collects failures; the first few messages are kept for the report line.
struct Check {
  Outcome out;
  int failures = 0;
  void fail(const std::string& msg) {
    out.pass = false;
    if (failures++ < 3) out.detail += (out.detail.empty() ? "" : "; ") + msg;
  }
  void expect(bool cond, const std::string& msg) {
    if (!cond) fail(msg);
  }
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

QueryRepresentation parse_or_die(const std::string& text) {
  auto r = parse(text);
  if (!r.ok()) throw std::runtime_error("query does not parse: " + text);
  return *r.query;
}

std::uint64_t binomial(int n, int k) {
  std::uint64_t c = 1;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

// ---------------------------------------------------------------------------

Outcome lattice_combinatorics() {
  Check c;
  std::mt19937_64 rng(101);
  for (int n = 1; n <= 5; ++n) {
    for (int trial = 0; trial < 4; ++trial) {
      // n underspecified rules: repeats on nodes, and a clique size on the first.
      QueryRepresentation qr;
      std::vector<std::int64_t> sizes;
      for (int i = 0; i < n; ++i) {
        const std::string id = "n" + std::to_string(i);
        const std::int64_t lo = std::uniform_int_distribution<int>(0, 2)(rng);
        const std::int64_t span = std::uniform_int_distribution<int>(1, 3)(rng);
        if (i == 0 && trial % 2 == 1) {
          qr.entities.push_back({id, MotifEntity{MotifKind::Clique}});
          qr.rules.push_back({"r" + std::to_string(i), id, MotifConfigRule{{4, 4 + span}, {}, {}}});
        } else {
          qr.entities.push_back({id, NodeEntity{}});
          qr.rules.push_back({"r" + std::to_string(i), id, RepeatingRule{{lo, lo + span}}});
        }
        sizes.push_back(span + 1);
      }
      const auto lat = build_lattice(qr);
      c.expect(static_cast<int>(lat.layers.size()) == n, "n=" + std::to_string(n) + ": layer count");
      for (int k = 1; k <= n && k <= static_cast<int>(lat.layers.size()); ++k) {
        const auto& layer = lat.layers[k - 1];
        c.expect(layer.size() == binomial(n, k),
                 "n=" + std::to_string(n) + " k=" + std::to_string(k) + ": " +
                     std::to_string(layer.size()) + " cells");
        std::set<std::vector<std::string>> seen;
        for (const auto& cell : layer) {
          std::uint64_t product = 1;
          for (const auto& rid : cell.rules) product *= sizes[std::stoi(rid.substr(1))];
          c.expect(cell.instances.size() == product,
                   cell.id + ": " + std::to_string(cell.instances.size()) + " != " + std::to_string(product));
          c.expect(static_cast<int>(cell.rules.size()) == k, cell.id + ": wrong arity");
          c.expect(seen.insert(cell.rules).second, cell.id + ": duplicate cell");
        }
      }
    }
  }
  // The worked example: repeat 0..3 with clique 4..6.
  const auto lat = build_lattice(parse_or_die(
      "node a; motif C = clique(nodes=4..6); edge e = a -- C; rule repeat a : count = 0..3;"));
  const auto* top = lat.find_cell("L2:r0,r1");
  c.expect(top && top->instances.size() == 12, "repeat 0..3 x clique 4..6 is not 12");
  if (c.out.pass) c.out.detail = "n=1..5, C(n,k) cells, products exact, example 12";
  return c.out;
}

Outcome motif_expansion() {
  Check c;
  for (int k = 2; k <= 6; ++k) {
    const size_t pairs = static_cast<size_t>(k * (k - 1) / 2);
    c.expect(expand_motif(MotifKind::Clique, k, false)[0].edges.size() == pairs, "clique undirected k=" + std::to_string(k));
    c.expect(expand_motif(MotifKind::Clique, k, true)[0].edges.size() == 2 * pairs, "clique directed k=" + std::to_string(k));
    c.expect(expand_motif(MotifKind::Path, k, true)[0].edges.size() == static_cast<size_t>(k - 1), "path k=" + std::to_string(k));
    if (k >= 3)
      c.expect(expand_motif(MotifKind::Loop, k, true)[0].edges.size() == static_cast<size_t>(k), "loop k=" + std::to_string(k));
  }
  std::string counts;
  for (int n = 1; n <= 6; ++n) {
    const auto oracle_codes = oracle::brute_force_tree_codes(n);
    std::set<std::string> ours;
    for (const auto& t : enumerate_rooted_trees(n)) ours.insert(oracle::tree_code(t.parent));
    c.expect(ours.size() == enumerate_rooted_trees(n).size(), "duplicate tree shapes n=" + std::to_string(n));
    c.expect(ours == oracle_codes, "tree shapes differ from brute force at n=" + std::to_string(n));
    counts += (n > 1 ? "," : "") + std::to_string(oracle_codes.size());
  }
  c.expect(counts == "1,1,2,4,9,20", "brute-force tree counts " + counts);
  if (c.out.pass) c.out.detail = "clique/loop/path edge counts; trees " + counts;
  return c.out;
}

Outcome matcher_oracle() {
  Check c;
  std::mt19937_64 rng(2024);
  std::size_t embeddings = 0, nonempty = 0;
  for (int i = 0; i < 500; ++i) {
    const bool directed = i % 2 == 1;
    const auto g = oracle::random_graph(rng, directed, 8, 16);
    const auto p = oracle::random_pattern(rng, directed, 4, 5);
    const auto got = match(p, g);
    const std::set<MatchResult> mine(got.results.begin(), got.results.end());
    const auto expected = oracle::brute_force_matches(p, g);
    c.expect(mine.size() == got.results.size(), "case " + std::to_string(i) + ": duplicate embeddings");
    c.expect(mine == expected, "case " + std::to_string(i) + ": " + std::to_string(mine.size()) +
                                   " vs oracle " + std::to_string(expected.size()));
    embeddings += expected.size();
    nonempty += !expected.empty();
  }
  if (c.out.pass)
    c.out.detail = "500 cases, " + std::to_string(nonempty) + " non-empty, " + std::to_string(embeddings) +
                   " embeddings, sets equal";
  return c.out;
}

Outcome pruning_soundness() {
  Check c;
  std::mt19937_64 rng(77);
  std::size_t pruned = 0, empties = 0;
  for (int i = 0; i < 100; ++i) {
    const bool directed = i % 2 == 0;
    const auto qr = oracle::random_lattice_query(rng, directed);
    const auto g = oracle::random_graph(rng, directed, 8, 14);
    const auto lat = build_lattice(qr);
    auto st = initial_state(lat);
    std::vector<std::string> steps{"backbone"};
    for (const auto& p : lat.previews) steps.push_back(p);
    steps.push_back("fs-final");
    for (size_t k = 1; k <= lat.layers.size(); ++k) steps.push_back("L" + std::to_string(k));
    for (const auto& s : steps) execute_step(lat, st, g, s, {1, std::nullopt});
    for (const auto& [id, s] : st.instances) {
      empties += s.status == Status::Empty;
      if (s.status != Status::PrunedEmpty) continue;
      ++pruned;
      const auto found = oracle::brute_force_matches(concretize(lat.at(id).pattern), g, 1);
      c.expect(found.empty(), "lattice " + std::to_string(i) + ": " + id + " pruned by " + s.cause +
                                  " but has an embedding");
    }
  }
  c.expect(pruned > 0, "no instance was ever pruned");
  if (c.out.pass)
    c.out.detail = "100 lattices, " + std::to_string(empties) + " empty, " + std::to_string(pruned) +
                   " pruned, 0 false prunes";
  return c.out;
}

Outcome case2() {
  Check c;
  const auto g = load_graph_file(kFixtures / "lmcn-case2-unconstrained" / "graph.json");
  c.expect(g.node_count() == 77 && g.edge_count() == 254, "dataset is not 77/254");
  auto statuses = [&](const std::string& fixture) {
    const auto lat = build_lattice(parse_or_die(read_file(kFixtures / fixture / "query.gq")),
                                   LatticeOptions{g.directed()});
    auto st = initial_state(lat);
    execute_step(lat, st, g, "final", {1, std::nullopt});
    std::vector<Status> out;
    for (const auto& id : lat.resolve_step("final")) out.push_back(st.at(id).status);
    return out;
  };
  auto show = [](const std::vector<Status>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i)
      s += (i ? "," : "") + std::to_string(i + 1) + ":" + std::string(status_name(v[i]));
    return s;
  };
  const auto plain = statuses("lmcn-case2-unconstrained");
  const std::vector<Status> all_found(4, Status::Found);
  c.expect(plain == all_found, "unconstrained " + show(plain));
  const auto strong = statuses("lmcn-case2-value-gt-1");
  const std::vector<Status> expected{Status::Found, Status::Found, Status::Found, Status::Empty};
  c.expect(strong == expected, "value>1 communities " + show(strong) + " (expected 4:empty)");
  if (c.out.pass) c.out.detail = "unconstrained " + show(plain) + "; value>1 " + show(strong);
  return c.out;
}

// ---------------------------------------------------------------------------
// Translator goldens

PatternNode pn(const std::string& entity, PredicateSet preds = {}) {
  Origin o{entity, 0, "0"};
  normalize(preds);
  return {o.id(), std::move(preds), o};
}

PatternEdge pe(const std::string& entity, int copy, const std::string& s, const std::string& t, bool directed,
               PredicateSet preds = {}) {
  Origin o{entity, copy, "0"};
  normalize(preds);
  return {o.id(), s + "#0#0", t + "#0#0", directed, std::move(preds), o, std::nullopt};
}

struct GoldenCase {
  std::string name;
  std::function<TranslatedQuery()> make;
};

std::vector<GoldenCase> golden_cases() {
  using P = Predicate;
  std::vector<GoldenCase> cases;
  cases.push_back({"01-single-node-eq", [] {
                     PatternGraph p;
                     p.nodes = {pn("n", {P{"label", CompareOp::EQ, AttrValue("heist")}})};
                     return translate(p);
                   }});
  cases.push_back({"02-directed-edge", [] {
                     PatternGraph p;
                     p.nodes = {pn("a"), pn("b")};
                     p.edges = {pe("e", 0, "a", "b", true)};
                     return translate(p);
                   }});
  cases.push_back({"03-edge-gt", [] {
                     PatternGraph p;
                     p.nodes = {pn("src", {P{"label", CompareOp::EQ, AttrValue("heist")}}), pn("dst")};
                     p.edges = {pe("pay", 0, "src", "dst", true, {P{"value", CompareOp::GT, AttrValue(100)}})};
                     return translate(p);
                   }});
  cases.push_back({"04-undirected-triangle-lt-le", [] {
                     PatternGraph p;
                     p.nodes = {pn("x", {P{"age", CompareOp::LT, AttrValue(30)}}),
                                pn("y", {P{"age", CompareOp::LE, AttrValue(40.5)}}), pn("z")};
                     p.edges = {pe("xy", 0, "x", "y", false), pe("yz", 0, "y", "z", false),
                                pe("zx", 0, "z", "x", false)};
                     return translate(p);
                   }});
  cases.push_back({"05-directed-parallel-ne", [] {
                     PatternGraph p;
                     p.nodes = {pn("a"), pn("b")};
                     p.edges = {pe("t", 0, "a", "b", true, {P{"label", CompareOp::EQ, AttrValue("x")}}),
                                pe("t", 1, "a", "b", true, {P{"label", CompareOp::NE, AttrValue("y")}}),
                                pe("back", 0, "b", "a", true)};
                     return translate(p);
                   }});
  cases.push_back({"06-isolated-nodes-ge", [] {
                     PatternGraph p;
                     p.nodes = {pn("hub", {P{"degree", CompareOp::GE, AttrValue(3)}}), pn("leaf"),
                                pn("lone", {P{"score", CompareOp::NE, AttrValue(0)}}), pn("other")};
                     p.edges = {pe("e", 0, "hub", "leaf", false)};
                     return translate(p);
                   }});
  cases.push_back({"07-undirected-parallel", [] {
                     PatternGraph p;
                     p.nodes = {pn("a"), pn("b")};
                     p.edges = {pe("e", 0, "a", "b", false, {P{"value", CompareOp::GT, AttrValue(1)}}),
                                pe("e", 1, "b", "a", false, {P{"value", CompareOp::GT, AttrValue(1)}})};
                     return translate(p);
                   }});
  cases.push_back({"08-self-loop-quoting-limit", [] {
                     PatternGraph p;
                     p.nodes = {pn("a", {P{"first name", CompareOp::EQ, AttrValue("Ma \"Th\" \\ier")},
                                         P{"active", CompareOp::EQ, AttrValue(true)}}),
                                pn("b", {P{"x`y", CompareOp::LT, AttrValue(-0.25)}})};
                     p.edges = {pe("self", 0, "a", "a", true)};
                     return translate(p, 10);
                   }});
  cases.push_back({"09-layering-final", [] {
                     const auto qr = parse_or_die(R"(query "layering" directed {
  node node0; node node1; node node2; motif P0 = path(nodes=3); node node3;
  edge e0 = node0 -> node1; edge e1 = node1 -> node2;
  edge e2 = node2 -> P0.head; edge e3 = P0.tail -> node3;
  group C0 = { node0, node1, node2, P0, node3, e0, e1, e2, e3 };
  rule attr node node0 : label == "heist";
  rule repeat node1 : count = 2;
  rule attr edges in C0 : value > 0;
})");
                     return translate(instantiate_fully_specified(qr).final, 25);
                   }});
  cases.push_back({"10-valjean-two-communities", [] {
                     const auto lat = build_lattice(parse_or_die(read_file(kFixtures / "lmcn-case2-value-gt-1" / "query.gq")));
                     return translate(lat.at("L1:r2:1"), 1);
                   }});
  return cases;
}

Outcome translator_goldens() {
  Check c;
  const bool update = std::getenv("QLAT_UPDATE_GOLDENS") != nullptr;
  const auto dir = kGoldens / "translator";
  if (update) fs::create_directories(dir);
  const auto cases = golden_cases();
  for (const auto& gc : cases) {
    const std::string text = gc.make().text + "\n";
    c.expect(text == gc.make().text + "\n", gc.name + ": differs between runs");
    const auto path = dir / (gc.name + ".cypher");
    if (update) {
      std::ofstream(path, std::ios::binary) << text;
      continue;
    }
    if (!fs::exists(path)) {
      c.fail(gc.name + ": golden missing");
      continue;
    }
    c.expect(read_file(path) == text, gc.name + ": differs from golden");
  }
  if (c.out.pass)
    c.out.detail = std::to_string(cases.size()) + (update ? " goldens written" : " goldens byte-identical");
  return c.out;
}

Outcome dsl_round_trip() {
  Check c;
  std::mt19937_64 rng(31337);
  for (int i = 0; i < 1000; ++i) {
    const auto qr = oracle::random_representation(rng);
    const auto text = serialize(qr);
    const auto r = parse(text);
    if (!r.ok()) {
      c.fail("case " + std::to_string(i) + " does not parse back");
      continue;
    }
    c.expect(*r.query == qr, "case " + std::to_string(i) + " differs after round trip");
  }
  if (c.out.pass) c.out.detail = "1000 random representations, parse(serialize(x)) == x";
  return c.out;
}

Outcome end_to_end_determinism() {
  Check c;
  const auto tmp = fs::temp_directory_path() / "qlat-acceptance-e2e";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(kFixtures))
    if (fs::exists(entry.path() / "expected.json")) names.push_back(entry.path().filename().string());
  std::sort(names.begin(), names.end());
  for (const auto& name : names) {
    const auto dir = kFixtures / name;
    std::string previous_lattice, previous_results, previous_stdout;
    for (int run = 0; run < 2; ++run) {
      const auto lattice = tmp / (name + "-lattice-" + std::to_string(run) + ".json");
      const auto results = tmp / (name + "-results-" + std::to_string(run) + ".json");
      std::ostringstream out, err;
      int code = cli_run({"instantiate", (dir / "query.gq").string(), "--out", lattice.string()}, out, err);
      c.expect(code == kExitOk, name + ": instantiate exit " + std::to_string(code) + " " + err.str());
      std::ostringstream exec_out;
      code = cli_run({"exec", (dir / "query.gq").string(), "--graph", (dir / "graph.json").string(), "--step",
                      "final", "--out", results.string()},
                     exec_out, err);
      c.expect(code == kExitOk, name + ": exec exit " + std::to_string(code) + " " + err.str());
      const auto lat_bytes = read_file(lattice);
      const auto res_bytes = read_file(results);
      c.expect(!lat_bytes.empty() && !res_bytes.empty(), name + ": empty artifact");
      if (run == 1) {
        c.expect(lat_bytes == previous_lattice, name + ": lattice differs between runs");
        c.expect(res_bytes == previous_results, name + ": results differ between runs");
        c.expect(exec_out.str() == previous_stdout, name + ": status listing differs between runs");
      }
      previous_lattice = lat_bytes;
      previous_results = res_bytes;
      previous_stdout = exec_out.str();
    }
  }
  fs::remove_all(tmp);
  if (c.out.pass) c.out.detail = std::to_string(names.size()) + " fixtures, lattice and results identical over 2 runs";
  return c.out;
}

}  // namespace

int main() {
  struct Criterion {
    std::string name;
    double limit_s;  // 0: no time limit
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"lattice-combinatorics", 1, lattice_combinatorics},
      {"motif-expansion", 5, motif_expansion},
      {"matcher-oracle-equivalence", 60, matcher_oracle},
      {"pruning-soundness", 60, pruning_soundness},
      {"case2-lmcn-reproduction", 30, case2},
      {"translator-goldens", 0, translator_goldens},
      {"dsl-round-trip", 30, dsl_round_trip},
      {"end-to-end-determinism", 0, end_to_end_determinism},
  };
  int failed = 0;
  int index = 0;
  for (const auto& cr : criteria) {
    ++index;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = cr.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (cr.limit_s > 0 && secs >= cr.limit_s) {
      o.pass = false;
      o.detail += (o.detail.empty() ? "" : "; ") + std::string("over the time limit");
    }
    std::ostringstream line;
    line.setf(std::ios::fixed);
    line.precision(2);
    line << (o.pass ? "PASS" : "FAIL") << " [" << index << "] " << cr.name << ": " << o.detail << " (" << secs
         << " s";
    if (cr.limit_s > 0) line << ", limit " << cr.limit_s << " s";
    line << ")";
    std::cout << line.str() << std::endl;
    failed += !o.pass;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " passed";
  if (failed) std::cout << ", " << failed << " failed";
  std::cout << std::endl;
  return failed ? 1 : 0;
}
