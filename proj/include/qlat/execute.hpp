#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qlat/graph.hpp"
#include "qlat/instantiate.hpp"
#include "qlat/matcher.hpp"

namespace qlat {

/// Inconclusive: the search stopped on its time budget before finding anything.
enum class Status { NotRun, Empty, Found, PrunedEmpty, Inconclusive };
std::string_view status_name(Status s);
std::optional<Status> status_from_name(std::string_view s);

struct InstanceState {
  Status status = Status::NotRun;
  std::size_t count = 0;
  bool complete = false;
  std::string cause;  // PrunedEmpty: the Empty instance that implied it
  std::size_t limit = 0;
  std::vector<MatchResult> results;
};

struct StepRecord {
  std::string step;
  std::size_t limit = 0;
  std::vector<std::string> instances;
  std::int64_t started_ms = 0;
  std::int64_t finished_ms = 0;
  std::size_t matcher_calls = 0;
};

class ExecutionState {
 public:
  std::map<std::string, InstanceState> instances;
  std::vector<StepRecord> steps;

  const InstanceState& at(std::string_view id) const;
};

inline constexpr std::size_t kDefaultStepLimit = 100;

struct ExecOptions {
  std::size_t limit = kDefaultStepLimit;
  std::optional<std::chrono::milliseconds> time_budget;
};

/// Every instance starts NotRun.
ExecutionState initial_state(const InstantiationLattice& lattice);

/// Runs every instance the step selects, pruning as Empty results appear.
/// Found instances are re-run only to extend an incomplete result list.
const StepRecord& execute_step(const InstantiationLattice& lattice, ExecutionState& state,
                               const PropertyGraph& g, std::string_view step,
                               const ExecOptions& opts = {});

/// Marks NotRun instances reachable from an Empty one along witnesses.
/// Returns the number of instances newly pruned.
std::size_t propagate_pruning(const InstantiationLattice& lattice, ExecutionState& state);

struct FrequencyOverview {
  std::map<std::string, std::size_t> node_freq;
  std::map<std::string, std::size_t> edge_freq;
  std::vector<std::string> over;
};

/// Throws ExecutionError if a selected instance has not been executed.
FrequencyOverview aggregate(const ExecutionState& state, const std::vector<std::string>& ids);

struct ResultGroup {
  std::string instance;
  PatternGraph structure;
  std::vector<MatchResult> embeddings;
  bool complete = false;
};

/// Throws ExecutionError unless the instance is Found.
ResultGroup group_results(const InstantiationLattice& lattice, const ExecutionState& state,
                          std::string_view id);

nlohmann::json to_json(const MatchResult& r);
nlohmann::json to_json(const InstanceState& s, bool with_results = true);
nlohmann::json to_json(const FrequencyOverview& o);
nlohmann::json to_json(const ResultGroup& g);
/// Deterministic export: statuses, assignments, embeddings and the overview
/// of all executed instances. Timestamps are left out.
nlohmann::json export_results(const InstantiationLattice& lattice, const ExecutionState& state);
/// Reads the instance part of an export back (assignments are ignored).
ExecutionState state_from_json(const nlohmann::json& j);

}  // namespace qlat
