#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "qlat/execute.hpp"
#include "qlat/graph.hpp"

namespace qlat {

/// One row of a fixture's expectation table. `source` is "reference" for
/// statuses taken from the published case narrative (asserted verbatim) and
/// "derived" for statuses re-derived by direct matching during the check.
struct Expectation {
  RuleChoice assignment;  // partial; selects every instance that contains it
  Status status = Status::Found;
  std::string source;
};

struct ExpectationOutcome {
  Expectation expected;
  std::vector<std::string> instances;
  std::vector<Status> actual;
  /// Status of each instance by direct matching without pruning ("derived" rows).
  std::vector<Status> rederived;
  bool pass = false;
};

struct FixtureReport {
  std::string name;
  std::string step;
  std::size_t limit = 1;
  std::vector<ExpectationOutcome> rows;
  bool pass = false;
};

/// Runs `fixtures/<name>/` (graph.json, query.gq, expected.json) through the
/// pipeline and compares statuses. Throws Error with a regeneration hint when
/// a file is missing.
FixtureReport fixture_check(const std::filesystem::path& dir);

std::string format_report(const FixtureReport& r);
nlohmann::json to_json(const FixtureReport& r);

inline constexpr std::uint64_t kMlnChainSeed = 20240917;

/// Synthetic transaction network: accounts labelled heist/mule/merchant/
/// exchange/retail, transfers carrying `value`. Exactly two heist accounts
/// send more than 100 into one shared hub, which forwards along a three-hop
/// chain; every other heist transfer is at most 100.
PropertyGraph synthetic_mln_chain(std::uint64_t seed = kMlnChainSeed);

}  // namespace qlat
