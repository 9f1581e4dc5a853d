#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "toposforge/io.hpp"

namespace tf {

enum class ExitStatus : int { Ok = 0, Failed = 1, Inconclusive = 2, BadInput = 3 };

struct RunConfig {
  std::string command;
  std::string cat, site, presheaf, family, problem;
  std::vector<int> bounds;           // N, or N,M
  int stages = 2;
  int samples = 100;
  int size = 2;                      // carrier bound for generated inputs
  std::optional<std::size_t> cap;    // global size cap
  std::uint64_t seed = 0x5eed;
  bool exhaustive = false;
  std::string out;
};

struct RunResult {
  Json report;          // stable key order, no timings
  std::string summary;  // one line per instance group
  ExitStatus status = ExitStatus::Ok;
};

const std::vector<std::string>& commands();

// Never throws: input errors become BadInput with the message in the report.
RunResult run(const RunConfig& cfg);

}  // namespace tf
