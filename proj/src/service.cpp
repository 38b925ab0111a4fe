#include "qlat/service.hpp"

#include <cstdlib>
#include <random>
#include <sstream>

#include "httplib.h"
#include "qlat/dsl.hpp"
#include "qlat/error.hpp"
#include "qlat/execute.hpp"
#include "qlat/graph.hpp"
#include "qlat/translator.hpp"

namespace qlat {

using nlohmann::json;

int default_port() {
  if (const char* env = std::getenv("QLAT_PORT")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v > 0 && v < 65536) return static_cast<int>(v);
  }
  return 8080;
}

struct Api::Session {
  std::string id;
  std::mutex mu;
  Clock::time_point last_used;
  std::optional<PropertyGraph> graph;
  std::optional<QueryRepresentation> query;
  std::optional<InstantiationLattice> lattice;
  ExecutionState state;
  std::uint64_t version = 0;
};

namespace {

ApiResponse error(int status, const std::string& message, json extra = json::object()) {
  extra["error"] = message;
  return {status, std::move(extra)};
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

json statuses(const InstantiationLattice& lat, const ExecutionState& st) {
  json j = json::object();
  for (const auto& inst : lat.instances) j[inst.id] = to_json(st.at(inst.id), false);
  return j;
}

}  // namespace

Api::Api(ServiceConfig config) : config_(std::move(config)) {}
Api::~Api() = default;

std::size_t Api::session_count() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

std::size_t Api::evict_idle(Clock::time_point now) {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    if (now - it->second->last_used > config_.idle_timeout) {
      it = sessions_.erase(it);
      ++n;
    } else {
      ++it;
    }
  }
  return n;
}

std::shared_ptr<Api::Session> Api::find(const std::string& id, Clock::time_point now) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return nullptr;
  it->second->last_used = now;
  return it->second;
}

ApiResponse Api::handle(const ApiRequest& req) {
  const auto now = Clock::now();
  evict_idle(now);
  try {
    if (req.path == "/api/session" || req.path == "/api/session/") {
      if (req.method != "POST") return error(405, "use POST to create a session");
      return create_session(req, now);
    }
    const std::string prefix = "/api/session/";
    if (req.path.rfind(prefix, 0) != 0) return error(404, "unknown endpoint " + req.path);
    const std::string tail = req.path.substr(prefix.size());
    const auto slash = tail.find('/');
    const std::string id = tail.substr(0, slash);
    const std::string rest = slash == std::string::npos ? "" : tail.substr(slash + 1);
    auto session = find(id, now);
    if (!session) return error(404, "unknown session " + id);
    if (rest.empty() && req.method == "DELETE") {
      std::lock_guard lock(mu_);
      sessions_.erase(id);
      return {200, {{"deleted", id}}};
    }
    // Requests on one session are serialized.
    std::lock_guard lock(session->mu);
    return route_session(*session, rest, req);
  } catch (const json::exception& e) {
    return error(400, std::string("malformed JSON: ") + e.what());
  }
}

ApiResponse Api::create_session(const ApiRequest&, Clock::time_point now) {
  auto s = std::make_shared<Session>();
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  std::ostringstream id;
  {
    std::lock_guard lock(mu_);
    id << "s" << next_id_++ << "-" << std::hex << (rng() & 0xffffffffu);
  }
  s->id = id.str();
  s->last_used = now;
  if (config_.graph) {
    try {
      s->graph = load_graph_file(*config_.graph);
    } catch (const Error& e) {
      return error(500, std::string("preloaded graph failed: ") + e.what());
    }
  }
  std::lock_guard lock(mu_);
  sessions_[s->id] = s;
  return {200, {{"session", s->id}, {"graph_loaded", s->graph.has_value()}}};
}

ApiResponse Api::route_session(Session& s, const std::string& rest, const ApiRequest& req) {
  auto rebuild = [&]() -> std::optional<ApiResponse> {
    s.lattice.reset();
    s.state = {};
    ++s.version;
    if (!s.query) return std::nullopt;
    LatticeOptions lo = config_.lattice;
    if (s.graph) lo.default_directed = s.graph->directed();
    try {
      s.lattice = build_lattice(*s.query, lo);
    } catch (const CapError& e) {
      return error(422, e.what(), {{"cell", e.cell()}, {"count", e.count()}});
    }
    s.state = initial_state(*s.lattice);
    return std::nullopt;
  };
  auto summary = [&]() {
    json j{{"session", s.id}, {"version", s.version}, {"graph_loaded", s.graph.has_value()}};
    if (s.lattice) j["lattice"] = lattice_summary(*s.lattice);
    return j;
  };

  if (rest.empty() && req.method == "GET") return {200, summary()};

  if (rest == "graph" && req.method == "POST") {
    try {
      s.graph = load_graph_text(req.body);
    } catch (const GraphError& e) {
      return error(400, e.what(), {{"subject", e.subject()}});
    }
    if (auto err = rebuild()) return *err;
    json j = summary();
    j["nodes"] = s.graph->node_count();
    j["edges"] = s.graph->edge_count();
    j["directed"] = s.graph->directed();
    return {200, j};
  }

  if (rest == "query" && req.method == "PUT") {
    std::vector<Diagnostic> diags;
    std::optional<QueryRepresentation> qr;
    json body = json::parse(req.body, nullptr, false);
    if (body.is_object() && !body.contains("dsl")) {
      try {
        qr = query_from_json(body.contains("representation") ? body["representation"] : body);
      } catch (const QueryError& e) {
        return error(400, e.what());
      }
      diags = validate(*qr);
      if (has_errors(diags)) qr.reset();
    } else {
      const std::string text = body.is_object() ? body["dsl"].get<std::string>() : req.body;
      ParseResult pr = parse(text);
      diags = pr.diagnostics;
      qr = std::move(pr.query);
    }
    json jd = json::array();
    for (const auto& d : diags) jd.push_back(to_json(d));
    if (!qr) {
      std::vector<std::string> subjects;
      for (const auto& d : diags)
        if (d.severity == Severity::Error && !d.subject.empty()) subjects.push_back(d.subject);
      return error(400, "query is invalid", {{"diagnostics", jd}, {"subjects", subjects}});
    }
    s.query = std::move(qr);
    if (auto err = rebuild()) {
      s.query.reset();
      return *err;
    }
    json j = summary();
    j["diagnostics"] = jd;
    return {200, j};
  }

  if (!s.lattice) return error(404, "no query has been set for session " + s.id);
  const InstantiationLattice& lat = *s.lattice;

  if (rest == "lattice" && req.method == "GET") {
    json j = to_json(lat);
    j["version"] = s.version;
    return {200, j};
  }

  if (rest == "execute" && req.method == "POST") {
    const json body = req.body.empty() ? json::object() : json::parse(req.body);
    if (body.contains("version") && body["version"].get<std::uint64_t>() != s.version)
      return error(409, "lattice changed; reload it", {{"version", s.version}});
    const std::string step = body.value("step", std::string("final"));
    ExecOptions eo;
    eo.limit = body.value("limit", kDefaultStepLimit);
    if (body.contains("time_budget_ms"))
      eo.time_budget = std::chrono::milliseconds(body["time_budget_ms"].get<std::int64_t>());
    try {
      lat.resolve_step(step);
    } catch (const QueryError& e) {
      return error(404, e.what());
    }
    if (!s.graph) return error(400, "no graph loaded");
    try {
      const StepRecord& rec = execute_step(lat, s.state, *s.graph, step, eo);
      return {200,
              {{"version", s.version},
               {"step", rec.step},
               {"limit", rec.limit},
               {"instances", rec.instances},
               {"matcher_calls", rec.matcher_calls},
               {"elapsed_ms", rec.finished_ms - rec.started_ms},
               {"statuses", statuses(lat, s.state)}}};
    } catch (const ExecutionError& e) {
      return error(400, e.what());
    }
  }

  if (rest == "statuses" && req.method == "GET")
    return {200, {{"version", s.version}, {"statuses", statuses(lat, s.state)}}};

  auto instance_from = [&](const std::string& prefix) -> std::optional<std::string> {
    if (rest.rfind(prefix, 0) != 0) return std::nullopt;
    return rest.substr(prefix.size());
  };

  if (auto id = instance_from("results/"); id && req.method == "GET") {
    if (!lat.find(*id)) return error(404, "unknown instance " + *id);
    try {
      return {200, to_json(group_results(lat, s.state, *id))};
    } catch (const ExecutionError& e) {
      return error(400, e.what(), {{"status", status_name(s.state.at(*id).status)}});
    }
  }

  if (rest == "overview" && req.method == "GET") {
    std::vector<std::string> ids;
    if (auto it = req.params.find("instances"); it != req.params.end()) {
      ids = split(it->second, ';');
    } else {
      for (const auto& inst : lat.instances)
        if (s.state.at(inst.id).status != Status::NotRun) ids.push_back(inst.id);
    }
    for (const auto& id : ids)
      if (!lat.find(id)) return error(404, "unknown instance " + id);
    try {
      return {200, to_json(aggregate(s.state, ids))};
    } catch (const ExecutionError& e) {
      return error(400, e.what());
    }
  }

  if (auto id = instance_from("translate/"); id && req.method == "GET") {
    const QueryInstance* inst = lat.find(*id);
    if (!inst) return error(404, "unknown instance " + *id);
    std::optional<std::size_t> limit;
    if (auto it = req.params.find("limit"); it != req.params.end())
      limit = static_cast<std::size_t>(std::stoull(it->second));
    try {
      const TranslatedQuery q = translate(*inst, limit);
      return {200, {{"instance", *id}, {"text", q.text}, {"variables", q.var_map}}};
    } catch (const Error& e) {
      return error(400, e.what());
    }
  }

  return error(404, "unknown endpoint " + req.path);
}

struct HttpService::Impl {
  explicit Impl(ServiceConfig c) : api(std::move(c)) {}
  Api api;
  httplib::Server server;
};

HttpService::HttpService(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {
  auto& srv = impl_->server;
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest r{req.method, req.path, {}, req.body};
    for (const auto& [k, v] : req.params) r.params[k] = v;
    ApiResponse out = impl_->api.handle(r);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  const std::string pattern = R"(/api/.*)";
  srv.Get(pattern, handler);
  srv.Post(pattern, handler);
  srv.Put(pattern, handler);
  srv.Delete(pattern, handler);
  if (const auto& ui = impl_->api.config().ui_dir; ui && std::filesystem::is_directory(*ui))
    srv.set_mount_point("/", ui->string());
}

HttpService::~HttpService() { stop(); }

Api& HttpService::api() { return impl_->api; }

int HttpService::bind() {
  const auto& cfg = impl_->api.config();
  if (cfg.port < 0) return impl_->server.bind_to_any_port(cfg.host);
  const int port = cfg.port == 0 ? default_port() : cfg.port;
  if (!impl_->server.bind_to_port(cfg.host, port))
    throw Error("cannot bind " + cfg.host + ":" + std::to_string(port));
  return port;
}

void HttpService::listen() { impl_->server.listen_after_bind(); }

void HttpService::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace qlat
