#include "qlat/execute.hpp"

#include <deque>
#include <unordered_map>

#include "qlat/error.hpp"

namespace qlat {

using nlohmann::json;

std::string_view status_name(Status s) {
  switch (s) {
    case Status::NotRun: return "not_run";
    case Status::Empty: return "empty";
    case Status::Found: return "found";
    case Status::PrunedEmpty: return "pruned_empty";
    case Status::Inconclusive: return "inconclusive";
  }
  return "?";
}

std::optional<Status> status_from_name(std::string_view s) {
  for (Status st : {Status::NotRun, Status::Empty, Status::Found, Status::PrunedEmpty,
                    Status::Inconclusive})
    if (status_name(st) == s) return st;
  return std::nullopt;
}

const InstanceState& ExecutionState::at(std::string_view id) const {
  auto it = instances.find(std::string(id));
  if (it == instances.end()) throw QueryError("unknown instance " + std::string(id));
  return it->second;
}

ExecutionState initial_state(const InstantiationLattice& lattice) {
  ExecutionState s;
  for (const auto& i : lattice.instances) s.instances.emplace(i.id, InstanceState{});
  return s;
}

namespace {

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

const StepRecord& execute_step(const InstantiationLattice& lattice, ExecutionState& state,
                               const PropertyGraph& g, std::string_view step,
                               const ExecOptions& opts) {
  if (opts.limit == 0) throw ExecutionError("step limit must be at least 1");
  const auto ids = lattice.resolve_step(step);
  if (!direction_open(lattice.query) && lattice.directed != g.directed())
    throw ExecutionError(std::string("query is ") + (lattice.directed ? "directed" : "undirected") +
                         " but the graph is " + (g.directed() ? "directed" : "undirected"));

  StepRecord rec;
  rec.step = std::string(step);
  rec.limit = opts.limit;
  rec.instances = ids;
  rec.started_ms = now_ms();
  for (const auto& id : ids) {
    InstanceState& st = state.instances[id];
    switch (st.status) {
      case Status::PrunedEmpty:
      case Status::Empty:
        continue;
      case Status::Found:
        if (st.complete || st.results.size() >= opts.limit) continue;
        break;
      default:
        break;
    }
    MatchOptions mo;
    mo.limit = opts.limit;
    mo.time_budget = opts.time_budget;
    MatchOutcome out = match(concretize(lattice.at(id).pattern), g, mo);
    ++rec.matcher_calls;
    st.limit = opts.limit;
    st.count = out.count;
    st.complete = out.complete;
    st.results = std::move(out.results);
    if (out.count > 0) {
      st.status = Status::Found;
    } else if (out.complete) {
      st.status = Status::Empty;
      propagate_pruning(lattice, state);
    } else {
      st.status = Status::Inconclusive;
    }
  }
  rec.finished_ms = now_ms();
  state.steps.push_back(std::move(rec));
  return state.steps.back();
}

std::size_t propagate_pruning(const InstantiationLattice& lattice, ExecutionState& state) {
  std::unordered_map<std::string, std::vector<const std::string*>> next;
  for (const auto& w : lattice.witnesses) next[w.from].push_back(&w.to);
  std::size_t pruned = 0;
  for (const auto& inst : lattice.instances) {
    auto it = state.instances.find(inst.id);
    if (it == state.instances.end() || it->second.status != Status::Empty) continue;
    std::deque<const std::string*> queue{&inst.id};
    std::unordered_map<std::string, bool> seen{{inst.id, true}};
    while (!queue.empty()) {
      const std::string* cur = queue.front();
      queue.pop_front();
      auto n = next.find(*cur);
      if (n == next.end()) continue;
      for (const std::string* to : n->second) {
        if (!seen.emplace(*to, true).second) continue;
        InstanceState& st = state.instances[*to];
        if (st.status == Status::NotRun) {
          st.status = Status::PrunedEmpty;
          st.cause = inst.id;
          ++pruned;
        }
        queue.push_back(to);
      }
    }
  }
  return pruned;
}

FrequencyOverview aggregate(const ExecutionState& state, const std::vector<std::string>& ids) {
  FrequencyOverview o;
  for (const auto& id : ids) {
    const InstanceState& st = state.at(id);
    if (st.status == Status::NotRun) throw ExecutionError("instance " + id + " has not been executed");
    o.over.push_back(id);
    for (const auto& r : st.results) {
      for (const auto& [p, d] : r.nodes) ++o.node_freq[d];
      for (const auto& [p, d] : r.edges) ++o.edge_freq[d];
    }
  }
  return o;
}

ResultGroup group_results(const InstantiationLattice& lattice, const ExecutionState& state,
                          std::string_view id) {
  const InstanceState& st = state.at(id);
  if (st.status == Status::NotRun) throw ExecutionError("instance " + std::string(id) + " has not been executed");
  if (st.status != Status::Found)
    throw ExecutionError("instance " + std::string(id) + " has no results (" +
                         std::string(status_name(st.status)) + ")");
  return {std::string(id), lattice.at(id).pattern, st.results, st.complete};
}

json to_json(const MatchResult& r) { return {{"nodes", r.nodes}, {"edges", r.edges}}; }

json to_json(const InstanceState& s, bool with_results) {
  json j{{"status", status_name(s.status)}};
  if (s.status == Status::Found || s.status == Status::Empty || s.status == Status::Inconclusive) {
    j["count"] = s.count;
    j["complete"] = s.complete;
    j["limit"] = s.limit;
  }
  if (s.status == Status::PrunedEmpty) j["cause"] = s.cause;
  if (with_results) {
    json rs = json::array();
    for (const auto& r : s.results) rs.push_back(to_json(r));
    j["embeddings"] = std::move(rs);
  }
  return j;
}

json to_json(const FrequencyOverview& o) {
  return {{"nodes", o.node_freq}, {"edges", o.edge_freq}, {"over", o.over}};
}

json to_json(const ResultGroup& g) {
  json emb = json::array();
  for (const auto& r : g.embeddings) emb.push_back(to_json(r));
  return {{"instance", g.instance},
          {"structure", to_json(g.structure)},
          {"embeddings", std::move(emb)},
          {"complete", g.complete}};
}

json export_results(const InstantiationLattice& lattice, const ExecutionState& state) {
  json insts = json::array();
  std::vector<std::string> executed;
  for (const auto& inst : lattice.instances) {
    const InstanceState& st = state.at(inst.id);
    json j = to_json(st);
    j["id"] = inst.id;
    json a = json::object();
    for (const auto& [rid, asg] : inst.assignment) a[rid] = asg;
    j["assignment"] = std::move(a);
    insts.push_back(std::move(j));
    if (st.status != Status::NotRun) executed.push_back(inst.id);
  }
  json steps = json::array();
  for (const auto& s : state.steps)
    steps.push_back({{"step", s.step}, {"limit", s.limit}, {"instances", s.instances}});
  return {{"query", lattice.query.name},
          {"steps", std::move(steps)},
          {"instances", std::move(insts)},
          {"overview", to_json(aggregate(state, executed))}};
}

ExecutionState state_from_json(const json& j) {
  ExecutionState s;
  try {
    for (const auto& ji : j.at("instances")) {
      InstanceState st;
      const auto name = ji.at("status").get<std::string>();
      auto status = status_from_name(name);
      if (!status) throw ExecutionError("unknown status '" + name + "'");
      st.status = *status;
      st.count = ji.value("count", std::size_t{0});
      st.complete = ji.value("complete", false);
      st.limit = ji.value("limit", std::size_t{0});
      st.cause = ji.value("cause", std::string());
      for (const auto& r : ji.value("embeddings", json::array()))
        st.results.push_back({r.at("nodes").get<std::map<std::string, std::string>>(),
                              r.at("edges").get<std::map<std::string, std::string>>()});
      s.instances.emplace(ji.at("id").get<std::string>(), std::move(st));
    }
  } catch (const json::exception& e) {
    throw ExecutionError(std::string("malformed results document: ") + e.what());
  }
  return s;
}

}  // namespace qlat
