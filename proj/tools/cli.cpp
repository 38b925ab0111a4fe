#include "cli.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "qlat/dsl.hpp"
#include "qlat/error.hpp"
#include "qlat/execute.hpp"
#include "qlat/fixtures.hpp"
#include "qlat/graph.hpp"
#include "qlat/service.hpp"
#include "qlat/translator.hpp"

namespace qlat {

using nlohmann::json;

namespace {

struct IoError : Error {
  using Error::Error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("cannot write " + path);
}

/// Parses a query file, printing diagnostics. Throws on failure.
QueryRepresentation load_query(const std::string& path, std::ostream& err) {
  ParseResult pr = parse(read_file(path));
  for (const auto& d : pr.diagnostics) err << format_diagnostic(d, path) << "\n";
  if (!pr.ok()) throw QueryError(path + ": query rejected");
  return std::move(*pr.query);
}

PropertyGraph load_graph_path(const std::string& path) {
  return load_graph_text(read_file(path));
}

std::vector<std::string> split_ids(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& r : raw) {
    std::string cur;
    std::istringstream in(r);
    while (std::getline(in, cur, ';'))
      if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

HttpService* g_running = nullptr;
extern "C" void on_signal(int) {
  if (g_running) g_running->stop();
}

}  // namespace

int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Underspecified graph queries: instantiate, translate, execute."};
  app.name("qlat");
  app.require_subcommand(1);

  std::string query_path, graph_path, out_path, instance, results_path, fixtures_dir;
  std::vector<std::string> steps, select, fixture_names;
  std::size_t limit = kDefaultStepLimit;
  std::optional<std::size_t> translate_limit;
  std::size_t max_instances = LatticeOptions{}.max_instances;
  std::int64_t budget_ms = 0;
  bool directed_default = false;
  bool json_out = false;

  auto* validate = app.add_subcommand("validate", "Check a query file");
  validate->add_option("query", query_path, "Query file (.gq)")->required();

  auto* fmt = app.add_subcommand("fmt", "Print a query file in canonical form");
  fmt->add_option("query", query_path, "Query file (.gq)")->required();

  auto* inst = app.add_subcommand("instantiate", "Build the instantiation lattice");
  inst->add_option("query", query_path, "Query file (.gq)")->required();
  inst->add_option("--out", out_path, "Write the lattice JSON here instead of stdout");
  inst->add_flag("--directed", directed_default, "Direction for queries that leave it open");
  inst->add_option("--max-instances", max_instances, "Instance cap");

  auto* trans = app.add_subcommand("translate", "Print the Cypher text of one instance");
  trans->add_option("query", query_path, "Query file (.gq)")->required();
  trans->add_option("--instance", instance, "Instance id")->required();
  trans->add_option("--limit", translate_limit, "Append LIMIT n");
  trans->add_flag("--directed", directed_default, "Direction for queries that leave it open");

  auto* exec = app.add_subcommand("exec", "Execute lattice steps against a graph");
  exec->add_option("query", query_path, "Query file (.gq)")->required();
  exec->add_option("--graph", graph_path, "Graph document (.json)")->required();
  exec->add_option("--step", steps, "Step reference; repeatable")->required();
  exec->add_option("--limit", limit, "Results kept per instance")->check(CLI::PositiveNumber);
  exec->add_option("--time-budget-ms", budget_ms, "Per-instance search budget");
  exec->add_option("--out", out_path, "Write the results JSON here");
  exec->add_option("--max-instances", max_instances, "Instance cap");

  auto* overview = app.add_subcommand("overview", "Node/edge frequencies over stored results");
  overview->add_option("--results", results_path, "Results JSON from exec --out")->required();
  overview->add_option("--select", select, "Instance ids (repeatable or ';'-separated)");

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  ServiceConfig cfg;
  std::string ui_dir, preload;
  int idle_minutes = 30;
  serve->add_option("--port", cfg.port, "Port (default: QLAT_PORT or 8080)");
  serve->add_option("--host", cfg.host, "Bind address");
  serve->add_option("--graph", preload, "Graph preloaded into new sessions");
  serve->add_option("--ui", ui_dir, "Static UI bundle directory");
  serve->add_option("--idle-minutes", idle_minutes, "Session idle timeout");

  auto* fixture = app.add_subcommand("fixture-check", "Run bundled case fixtures");
  fixture->add_option("names", fixture_names, "Fixture names (default: all)");
  fixture->add_option("--dir", fixtures_dir, "Fixture root")->default_val("fixtures");
  fixture->add_flag("--json", json_out, "Print reports as JSON");

  auto* synth = app.add_subcommand("synth", "Write a synthetic graph");
  std::string synth_kind = "mln-chain";
  std::uint64_t seed = kMlnChainSeed;
  synth->add_option("kind", synth_kind, "Generator")->check(CLI::IsMember({"mln-chain"}));
  synth->add_option("--seed", seed, "Generator seed");
  synth->add_option("--out", out_path, "Output file (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "qlat: " << e.what() << "\n";
    if (e.get_exit_code() == 0) return kExitOk;
    err << "run 'qlat --help' for usage\n";
    return kExitDiagnostics;
  }

  try {
    LatticeOptions lo;
    lo.max_instances = max_instances;
    lo.default_directed = directed_default;

    if (*validate) {
      const auto qr = load_query(query_path, err);
      const auto cls = classify_rules(qr);
      out << query_path << ": ok, " << qr.entities.size() << " entities, " << qr.rules.size()
          << " rules (" << cls.fully_specified.size() << " fully specified, "
          << cls.underspecified.size() << " underspecified)\n";
      return kExitOk;
    }
    if (*fmt) {
      out << serialize(load_query(query_path, err)) << "\n";
      return kExitOk;
    }
    if (*inst) {
      const auto lat = build_lattice(load_query(query_path, err), lo);
      const std::string text = to_json(lat).dump(1) + "\n";
      if (out_path.empty()) {
        out << text;
      } else {
        write_file(out_path, text);
        out << out_path << ": " << lat.instances.size() << " instances, " << lat.layers.size()
            << " layers, " << lat.witnesses.size() << " witnesses\n";
      }
      return kExitOk;
    }
    if (*trans) {
      const auto lat = build_lattice(load_query(query_path, err), lo);
      out << translate(lat.at(instance), translate_limit).text << "\n";
      return kExitOk;
    }
    if (*exec) {
      const auto qr = load_query(query_path, err);
      const PropertyGraph g = load_graph_path(graph_path);
      lo.default_directed = g.directed();
      const auto lat = build_lattice(qr, lo);
      ExecutionState state = initial_state(lat);
      ExecOptions eo;
      eo.limit = limit;
      if (budget_ms > 0) eo.time_budget = std::chrono::milliseconds(budget_ms);
      for (const auto& step : steps) {
        execute_step(lat, state, g, step, eo);
        for (const auto& id : lat.resolve_step(step)) {
          const InstanceState& st = state.at(id);
          out << step << "\t" << id << "\t" << status_name(st.status);
          if (st.status == Status::Found)
            out << "\t" << st.count << (st.complete ? "" : "+");
          if (st.status == Status::PrunedEmpty) out << "\t" << st.cause;
          out << "\n";
        }
      }
      if (!out_path.empty()) write_file(out_path, export_results(lat, state).dump(1) + "\n");
      return kExitOk;
    }
    if (*overview) {
      json doc;
      try {
        doc = json::parse(read_file(results_path));
      } catch (const json::exception& e) {
        throw QueryError(results_path + ": " + e.what());
      }
      const ExecutionState state = state_from_json(doc);
      std::vector<std::string> ids = split_ids(select);
      if (ids.empty())
        for (const auto& [id, st] : state.instances)
          if (st.status != Status::NotRun) ids.push_back(id);
      out << to_json(aggregate(state, ids)).dump(1) << "\n";
      return kExitOk;
    }
    if (*serve) {
      cfg.idle_timeout = std::chrono::minutes(idle_minutes);
      if (!ui_dir.empty()) cfg.ui_dir = ui_dir;
      if (!preload.empty()) cfg.graph = preload;
      HttpService svc(cfg);
      const int port = svc.bind();
      err << "qlat: serving on http://" << cfg.host << ":" << port << "\n";
      g_running = &svc;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      svc.listen();
      g_running = nullptr;
      return kExitOk;
    }
    if (*fixture) {
      namespace fs = std::filesystem;
      if (fixture_names.empty()) {
        if (!fs::is_directory(fixtures_dir)) throw IoError("no fixture directory " + fixtures_dir);
        for (const auto& entry : fs::directory_iterator(fixtures_dir))
          if (entry.is_directory() && fs::exists(entry.path() / "expected.json"))
            fixture_names.push_back(entry.path().filename().string());
        std::sort(fixture_names.begin(), fixture_names.end());
      }
      bool all = true;
      json reports = json::array();
      for (const auto& name : fixture_names) {
        if (!fs::is_directory(fs::path(fixtures_dir) / name))
          throw IoError("no fixture " + name + " under " + fixtures_dir);
        const FixtureReport r = fixture_check(fs::path(fixtures_dir) / name);
        all = all && r.pass;
        if (json_out)
          reports.push_back(to_json(r));
        else
          out << format_report(r);
      }
      if (json_out) out << reports.dump(1) << "\n";
      return all ? kExitOk : kExitDiagnostics;
    }
    if (*synth) {
      const std::string text = to_json(synthetic_mln_chain(seed)).dump(1) + "\n";
      if (out_path.empty())
        out << text;
      else
        write_file(out_path, text);
      return kExitOk;
    }
  } catch (const IoError& e) {
    err << "qlat: " << e.what() << "\n";
    return kExitIo;
  } catch (const GraphError& e) {
    err << "qlat: graph: " << e.what() << "\n";
    return kExitDiagnostics;
  } catch (const Error& e) {
    err << "qlat: " << e.what() << "\n";
    return kExitDiagnostics;
  }
  return kExitOk;
}

}  // namespace qlat
